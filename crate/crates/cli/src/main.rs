use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use leanarch::diag::has_errors;
use leanarch::dsl::{parse_fha, serialize_fpm, serialize_model, serialize_requirements, RequirementFile};
use leanarch::model::{build_view, ModelKind, ViewKind};
use leanarch::project::MANIFEST_NAME;
use leanarch::report::{
    breakdown_report, compliance_report, export_fpm_dot, export_model_dot, trace_matrix, Format, Ledger,
};
use leanarch::requirements::{coverage_report, trace_chain, ArtifactRef, Direction, RawLink};
use leanarch::safety::{
    build_fpm, check_against_safety_requirements, compute_minimal_cut_sets, export_function_list,
    import_fha_results, render_function_list, sync_fpm,
};
use leanarch::validation::{run_rules, RuleRegistry, Selection};
use leanarch::{discover_manifest, load_project_excluding, Diagnostic, Execution, Project, Severity};

const OK: u8 = 0;
const FINDINGS: u8 = 1;
const LOAD_FAILURE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "leanarch", version, about = "Architecture models, traceability and safety analysis from plain text")]
struct Cli {
    /// Manifest file or project directory. Defaults to the nearest
    /// project.manifest at or above the working directory.
    #[arg(long, global = true)]
    project: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    /// Print artifacts instead of writing them under out/.
    #[arg(long, global = true)]
    stdout: bool,

    /// Run every analysis on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Create a new project with the default profiles.
    New {
        dir: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Run validation rules.
    Check {
        /// `all`, `process`, `model`, or comma-separated rule codes.
        #[arg(long, default_value = "all")]
        rules: String,
    },
    /// Print the trace chains through an artifact.
    Trace {
        /// Requirement id, top event, or Model.Element path.
        artifact: String,
        /// Follow links downstream instead of upstream.
        #[arg(long)]
        forward: bool,
    },
    /// Requirement coverage of functions and items.
    Coverage,
    /// Exchange with the functional hazard assessment.
    Fha {
        #[command(subcommand)]
        action: FhaAction,
    },
    /// Fault propagation models.
    Fpm {
        #[command(subcommand)]
        action: FpmAction,
    },
    /// Generate reports.
    Report {
        #[command(subcommand)]
        kind: ReportKind,
    },
}

#[derive(Subcommand)]
enum FhaAction {
    /// Export the atomic function list.
    Export,
    /// Import classifications and FDALs.
    Import { file: PathBuf },
}

#[derive(Subcommand)]
enum FpmAction {
    /// Skeleton FPM generated from a physical model.
    Build {
        #[arg(long)]
        model: Option<String>,
    },
    /// Update existing FPMs to the current physical models.
    Sync {
        #[arg(long)]
        model: Option<String>,
    },
    /// Minimal cut sets of a top event.
    Cutsets {
        top: String,
        #[arg(long)]
        max_order: Option<usize>,
    },
}

#[derive(Subcommand)]
enum ReportKind {
    /// Objective compliance against the ledger.
    Compliance {
        /// Ledger JSON replacing the shipped one.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Function or physical actors breakdown.
    Breakdown {
        #[arg(long)]
        model: Option<String>,
    },
    /// Trace matrix as CSV.
    Matrix,
    /// Graphviz export of models, or of the FPMs with --fpm.
    Dot {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        fpm: bool,
    },
}

/// Exit with a status, after whatever was already printed.
struct Exit(u8);

struct Ctx {
    format: Format,
    stdout: bool,
    exec: Execution,
    color: bool,
}

impl Ctx {
    fn diag(&self, d: &Diagnostic) {
        let line = d.to_string();
        let line = if self.color {
            let (code, word) = match d.severity {
                Severity::Error => ("31", "error"),
                Severity::Warning => ("33", "warning"),
                Severity::Info => ("36", "info"),
            };
            line.replacen(word, &format!("\x1b[{code}m{word}\x1b[0m"), 1)
        } else {
            line
        };
        eprintln!("{line}");
    }

    fn diags(&self, ds: &[Diagnostic]) {
        ds.iter().for_each(|d| self.diag(d));
    }

    fn json(&self, v: &serde_json::Value) {
        println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
    }

    /// Write an artifact under `<root>/out`, or print it with --stdout.
    fn emit(&self, root: &Path, name: &str, content: &str) -> Result<(), Exit> {
        if self.stdout {
            print!("{content}");
            return Ok(());
        }
        let path = root.join("out").join(name);
        let written = path
            .parent()
            .map_or(Ok(()), fs::create_dir_all)
            .and_then(|_| fs::write(&path, content));
        match written {
            Ok(()) => {
                eprintln!("wrote out/{name}");
                Ok(())
            }
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                Err(Exit(LOAD_FAILURE))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let ctx = Ctx {
        format: match cli.format {
            OutputFormat::Text => Format::Text,
            OutputFormat::Json => Format::Json,
        },
        stdout: cli.stdout,
        exec: if cli.sequential { Execution::Sequential } else { Execution::default() },
        color: std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal(),
    };
    let status = match run(&cli, &ctx) {
        Ok(s) | Err(Exit(s)) => s,
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(status)
}

fn run(cli: &Cli, ctx: &Ctx) -> Result<u8, Exit> {
    if let Command::New { dir, name } = &cli.command {
        return new_project(dir, name.as_deref());
    }
    let manifest = locate(cli.project.as_deref())?;
    let exclude = match &cli.command {
        Command::Fha { action: FhaAction::Import { file } } => listed_as(&manifest, file).into_iter().collect(),
        _ => Vec::new(),
    };
    let load = load_project_excluding(&manifest, ctx.exec, &exclude);
    ctx.diags(&load.diagnostics);
    if load.has_errors() {
        return Err(Exit(LOAD_FAILURE));
    }
    let p = &load.project;
    match &cli.command {
        Command::New { .. } => unreachable!(),
        Command::Check { rules } => check(ctx, p, rules),
        Command::Trace { artifact, forward } => trace(ctx, p, artifact, *forward),
        Command::Coverage => coverage(ctx, p),
        Command::Fha { action: FhaAction::Export } => fha_export(ctx, p),
        Command::Fha { action: FhaAction::Import { file } } => fha_import(ctx, p, file),
        Command::Fpm { action: FpmAction::Build { model } } => fpm_build(ctx, p, model.as_deref()),
        Command::Fpm { action: FpmAction::Sync { model } } => fpm_sync(ctx, p, model.as_deref()),
        Command::Fpm { action: FpmAction::Cutsets { top, max_order } } => cutsets(ctx, p, top, *max_order),
        Command::Report { kind } => report(ctx, p, kind),
    }
}

fn usage(msg: impl std::fmt::Display) -> Exit {
    eprintln!("error: {msg}");
    Exit(USAGE)
}

fn locate(arg: Option<&Path>) -> Result<PathBuf, Exit> {
    let found = match arg {
        Some(p) if p.is_dir() => Some(p.join(MANIFEST_NAME)).filter(|m| m.is_file()),
        Some(p) => Some(p.to_path_buf()).filter(|m| m.is_file()),
        None => std::env::current_dir().ok().and_then(|d| discover_manifest(&d)),
    };
    found.ok_or_else(|| {
        match arg {
            Some(p) => eprintln!("error: no project manifest at {}", p.display()),
            None => eprintln!("error: no {MANIFEST_NAME} found in this directory or above"),
        }
        Exit(LOAD_FAILURE)
    })
}

/// The manifest entry naming `file`, if the manifest lists it as FHA results.
fn listed_as(manifest: &Path, file: &Path) -> Option<String> {
    let root = manifest.parent()?.canonicalize().ok()?;
    let file = file.canonicalize().ok()?;
    let rel = file.strip_prefix(&root).ok()?;
    Some(rel.to_string_lossy().replace('\\', "/"))
}

fn new_project(dir: &Path, name: Option<&str>) -> Result<u8, Exit> {
    let name = name.map(str::to_string).unwrap_or_else(|| {
        dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "project".into())
    });
    match leanarch::scaffold::write_scaffold(dir, &name) {
        Ok(files) => {
            for f in files {
                println!("created {}", f.strip_prefix(dir).unwrap_or(&f).display());
            }
            Ok(OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(Exit(LOAD_FAILURE))
        }
    }
}

fn check(ctx: &Ctx, p: &Project, rules: &str) -> Result<u8, Exit> {
    let (registry, reg_diags) = RuleRegistry::for_project(p);
    ctx.diags(&reg_diags);
    if has_errors(&reg_diags) {
        return Err(Exit(LOAD_FAILURE));
    }
    let result = run_rules(p, &registry, &Selection::parse(rules), ctx.exec).map_err(usage)?;
    match ctx.format {
        Format::Text => {
            ctx.diags(&result.diagnostics);
            println!("{}", result.summary());
        }
        Format::Json => ctx.json(&json!({
            "summary": result.summary(),
            "errors": result.count(Severity::Error),
            "warnings": result.count(Severity::Warning),
            "notes": result.count(Severity::Info),
            "rules": result.counts,
            "diagnostics": result.diagnostics,
        })),
    }
    Ok(if result.has_errors() { FINDINGS } else { OK })
}

/// `SYS-REQ-001`, `Phys.FCC_01` or `"Func"."Some Function"`.
fn parse_artifact(p: &Project, text: &str) -> Option<ArtifactRef> {
    let segs: Vec<String> = text.split('.').map(|s| s.trim().trim_matches('"').to_string()).collect();
    p.resolve_ref(&segs)
}

fn trace(ctx: &Ctx, p: &Project, artifact: &str, forward: bool) -> Result<u8, Exit> {
    let a = parse_artifact(p, artifact).ok_or_else(|| usage(format!("`{artifact}` is not a requirement, top event or element")))?;
    let dir = if forward { Direction::Downstream } else { Direction::Upstream };
    let chains = match trace_chain(p, &a, dir) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(FINDINGS);
        }
    };
    match ctx.format {
        Format::Text => {
            for c in &chains {
                println!("{}", c.iter().map(ToString::to_string).collect::<Vec<_>>().join(" -> "));
            }
        }
        Format::Json => ctx.json(&json!({ "artifact": a, "direction": if forward { "downstream" } else { "upstream" }, "chains": chains })),
    }
    Ok(OK)
}

fn coverage(ctx: &Ctx, p: &Project) -> Result<u8, Exit> {
    let report = coverage_report(p);
    match ctx.format {
        Format::Text => print!("{}", report.render()),
        Format::Json => ctx.json(&serde_json::to_value(&report).expect("serializable")),
    }
    Ok(if report.uncovered.is_empty() { OK } else { FINDINGS })
}

fn fha_export(ctx: &Ctx, p: &Project) -> Result<u8, Exit> {
    let entries = export_function_list(p);
    match ctx.format {
        Format::Text => ctx.emit(&p.root, "function_list.tsv", &render_function_list(&entries))?,
        Format::Json => {
            let text = serde_json::to_string_pretty(&entries).expect("serializable") + "\n";
            ctx.emit(&p.root, "function_list.json", &text)?
        }
    }
    Ok(OK)
}

fn fha_import(ctx: &Ctx, p: &Project, file: &Path) -> Result<u8, Exit> {
    let text = fs::read_to_string(file).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", file.display());
        Exit(LOAD_FAILURE)
    })?;
    let parsed = parse_fha(&text, &file.to_string_lossy());
    ctx.diags(&parsed.diagnostics);
    let Some(fha) = parsed.value.filter(|_| !has_errors(&parsed.diagnostics)) else {
        return Err(Exit(LOAD_FAILURE));
    };
    let import = import_fha_results(p, &fha);
    ctx.diags(&import.diagnostics);
    match ctx.format {
        Format::Text => {
            for r in &import.results {
                println!(
                    "{} {}: {} -> FDAL {} ({})",
                    r.id,
                    r.function,
                    r.classification,
                    r.fdal,
                    r.requirements.join(", ")
                );
            }
            for s in &import.stubs {
                println!("new requirement {}", s.id);
            }
        }
        Format::Json => ctx.json(&json!({
            "results": import.results,
            "stubs": import.stubs.iter().map(|s| &s.id).collect::<Vec<_>>(),
            "diagnostics": import.diagnostics,
        })),
    }
    if has_errors(&import.diagnostics) {
        return Ok(FINDINGS);
    }
    // Stub requirements and their links, then the functional models with
    // the FDALs filled in.
    let stub_ids: Vec<&str> = import.stubs.iter().map(|s| s.id.as_str()).collect();
    let links = import
        .project
        .links
        .iter()
        .filter(|l| l.source.as_req().is_some_and(|id| stub_ids.contains(&id)))
        .map(|l| RawLink::new(artifact_segments(&l.source), l.link_type, artifact_segments(&l.target)))
        .collect();
    let req_file = RequirementFile {
        requirements: import.stubs.clone(),
        links,
    };
    if !import.stubs.is_empty() {
        ctx.emit(&p.root, "fha/safety_requirements.req", &serialize_requirements(&req_file))?;
    }
    for m in import.project.models_of(ModelKind::Functional) {
        ctx.emit(&p.root, &format!("fha/{}.arch", m.name), &serialize_model(m))?;
    }
    Ok(OK)
}

fn artifact_segments(a: &ArtifactRef) -> Vec<String> {
    match a {
        ArtifactRef::Requirement { id } => vec![id.clone()],
        ArtifactRef::TopEvent { name } => vec![name.clone()],
        ArtifactRef::Element { path } => std::iter::once(path.model.clone()).chain(path.segments.iter().cloned()).collect(),
    }
}

fn physical_models<'p>(p: &'p Project, only: Option<&str>) -> Result<Vec<&'p leanarch::model::ArchModel>, Exit> {
    let models: Vec<_> = p.models_of(ModelKind::Physical).filter(|m| only.is_none_or(|n| m.name == n)).collect();
    match only {
        Some(n) if models.is_empty() => Err(usage(format!("no physical model named `{n}`"))),
        _ => Ok(models),
    }
}

fn fpm_build(ctx: &Ctx, p: &Project, model: Option<&str>) -> Result<u8, Exit> {
    for m in physical_models(p, model)? {
        ctx.emit(&p.root, &format!("{}.fpm", m.name), &serialize_fpm(&build_fpm(m)))?;
    }
    Ok(OK)
}

fn fpm_sync(ctx: &Ctx, p: &Project, model: Option<&str>) -> Result<u8, Exit> {
    let mut reports = Vec::new();
    for m in physical_models(p, model)? {
        let Some(existing) = p.fpm_for(&m.name) else { continue };
        let (synced, report) = sync_fpm(existing, m).map_err(usage)?;
        ctx.emit(&p.root, &format!("{}.fpm", m.name), &serialize_fpm(&synced))?;
        reports.push((m.name.clone(), report));
    }
    // The synced file may be on stdout, so the change list goes to stderr.
    match ctx.format {
        Format::Text => {
            for (name, r) in &reports {
                eprint!("{}", r.render().lines().map(|l| format!("{name}: {l}\n")).collect::<String>());
            }
        }
        Format::Json => {
            let v: Vec<_> = reports.iter().map(|(n, r)| json!({ "model": n, "changes": r })).collect();
            eprintln!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
        }
    }
    Ok(OK)
}

fn cutsets(ctx: &Ctx, p: &Project, top: &str, max_order: Option<usize>) -> Result<u8, Exit> {
    let fpm = p
        .fpms
        .iter()
        .find(|f| f.top_event(top).is_some())
        .ok_or_else(|| usage(format!("no top event named `{top}`")))?;
    let result = compute_minimal_cut_sets(fpm, top, max_order).map_err(|e| {
        eprintln!("error: {e}");
        Exit(LOAD_FAILURE)
    })?;
    let findings = check_against_safety_requirements(std::slice::from_ref(&result), p);
    ctx.diags(&findings);
    match ctx.format {
        Format::Text => print!("{}", result.render()),
        Format::Json => ctx.json(&json!({
            "model": result.model,
            "top_event": result.top_event,
            "max_order": result.max_order,
            "truncated": result.truncated,
            "min_order": result.min_order(),
            "cut_sets": result.cut_sets.iter().map(|c| &c.events).collect::<Vec<_>>(),
            "diagnostics": findings,
        })),
    }
    Ok(if has_errors(&findings) { FINDINGS } else { OK })
}

fn ext(f: Format) -> &'static str {
    match f {
        Format::Text => "txt",
        Format::Json => "json",
    }
}

fn report(ctx: &Ctx, p: &Project, kind: &ReportKind) -> Result<u8, Exit> {
    match kind {
        ReportKind::Compliance { ledger } => {
            let ledger = match ledger {
                None => Ledger::default(),
                Some(path) => fs::read_to_string(path)
                    .map_err(|e| e.to_string())
                    .and_then(|t| Ledger::from_json(&t).map_err(|e| e.to_string()))
                    .map_err(|e| {
                        eprintln!("error: cannot load ledger {}: {e}", path.display());
                        Exit(LOAD_FAILURE)
                    })?,
            };
            let r = compliance_report(p, &ledger);
            ctx.emit(&p.root, &format!("compliance.{}", ext(ctx.format)), &r.render(ctx.format))?;
        }
        ReportKind::Breakdown { model } => {
            let models: Vec<_> = p.models.iter().filter(|m| model.as_deref().is_none_or(|n| m.name == n)).collect();
            if let (Some(n), true) = (model, models.is_empty()) {
                return Err(usage(format!("no model named `{n}`")));
            }
            for m in models {
                let tree = build_view(m, ViewKind::for_model(m.kind)).expect("view kind follows the model kind");
                ctx.emit(&p.root, &format!("breakdown_{}.{}", m.name, ext(ctx.format)), &breakdown_report(&tree, ctx.format))?;
            }
        }
        ReportKind::Matrix => {
            let m = trace_matrix(p);
            let name = match ctx.format {
                Format::Text => "trace_matrix.csv",
                Format::Json => "trace_matrix.json",
            };
            ctx.emit(&p.root, name, &m.render(ctx.format))?;
        }
        ReportKind::Dot { model, fpm } => {
            if *fpm {
                let fpms: Vec<_> = p.fpms.iter().filter(|f| model.as_deref().is_none_or(|n| f.model == n)).collect();
                if let (Some(n), true) = (model, fpms.is_empty()) {
                    return Err(usage(format!("no fpm for model `{n}`")));
                }
                for f in fpms {
                    ctx.emit(&p.root, &format!("{}_fpm.dot", f.model), &export_fpm_dot(f))?;
                }
            } else {
                let models: Vec<_> = p.models.iter().filter(|m| model.as_deref().is_none_or(|n| m.name == n)).collect();
                if let (Some(n), true) = (model, models.is_empty()) {
                    return Err(usage(format!("no model named `{n}`")));
                }
                for m in models {
                    ctx.emit(&p.root, &format!("{}.dot", m.name), &export_model_dot(m))?;
                }
            }
        }
    }
    Ok(OK)
}
