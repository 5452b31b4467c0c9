//! Loading a project from its manifest and resolving cross-file references.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diag::{codes, has_errors, Diagnostic, Origin, SourceSpan};
use crate::dsl::{
    parse_fha, parse_fpm, parse_manifest, parse_model, parse_profile, parse_requirements, FhaFile, Parsed,
    ProfileFile, ProjectManifest, RequirementFile,
};
use crate::exec::Execution;
use crate::model::{Allocation, ArchElement, ArchModel, ElementPath, ModelKind, ProfileSet};
use crate::requirements::{ArtifactRef, LinkType, RawLink, Requirement, TraceLink};
use crate::safety::{apply_fha, check_fpm, FhaResult, Fpm};
use crate::validation::CustomRuleSpec;

/// A fully loaded project. Immutable once built; operations that change it
/// return a new value.
#[derive(Debug, Clone)]
pub struct Project {
    pub manifest: ProjectManifest,
    pub root: PathBuf,
    pub profiles: ProfileSet,
    pub custom_rules: Vec<CustomRuleSpec>,
    pub models: Vec<ArchModel>,
    pub requirements: Vec<Requirement>,
    pub links: Vec<TraceLink>,
    pub fpms: Vec<Fpm>,
    pub fha: Vec<FhaResult>,
}

#[derive(Debug, Clone)]
pub struct ProjectLoad {
    pub project: Project,
    pub diagnostics: Vec<Diagnostic>,
}

impl ProjectLoad {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationError {
    #[error("`{0}` does not resolve to an element")]
    Unresolved(ElementPath),
    #[error("allocations go from a functional to a physical element; `{from}` is {from_kind} and `{to}` is {to_kind}")]
    Direction {
        from: ElementPath,
        to: ElementPath,
        from_kind: ModelKind,
        to_kind: ModelKind,
    },
}

impl Project {
    pub fn empty(manifest: ProjectManifest) -> Self {
        Self {
            manifest,
            root: PathBuf::new(),
            profiles: ProfileSet::default(),
            custom_rules: Vec::new(),
            models: Vec::new(),
            requirements: Vec::new(),
            links: Vec::new(),
            fpms: Vec::new(),
            fha: Vec::new(),
        }
    }

    pub fn model(&self, name: &str) -> Option<&ArchModel> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn models_of(&self, kind: ModelKind) -> impl Iterator<Item = &ArchModel> {
        self.models.iter().filter(move |m| m.kind == kind)
    }

    pub fn requirement(&self, id: &str) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    pub fn element(&self, path: &ElementPath) -> Option<(&ArchModel, &ArchElement)> {
        let m = self.model(&path.model)?;
        m.element(&path.segments).map(|e| (m, e))
    }

    pub fn fpm_for(&self, model: &str) -> Option<&Fpm> {
        self.fpms.iter().find(|f| f.model == model)
    }

    pub fn top_event_names(&self) -> Vec<&str> {
        self.fpms
            .iter()
            .flat_map(|f| f.top_events.iter().map(|t| t.name.as_str()))
            .collect()
    }

    pub fn allocations(&self) -> Vec<Allocation> {
        self.links
            .iter()
            .filter(|l| l.link_type == LinkType::AllocatedTo)
            .filter_map(|l| match (&l.source, &l.target) {
                (ArtifactRef::Element { path: f }, ArtifactRef::Element { path: p }) => Some(Allocation {
                    functional: f.clone(),
                    physical: p.clone(),
                }),
                _ => None,
            })
            .collect()
    }

    /// Physical elements a function is allocated to.
    pub fn allocated_to(&self, function: &ElementPath) -> Vec<ElementPath> {
        self.allocations()
            .into_iter()
            .filter(|a| &a.functional == function)
            .map(|a| a.physical)
            .collect()
    }

    /// Functions allocated to a physical element.
    pub fn allocated_from(&self, physical: &ElementPath) -> Vec<ElementPath> {
        self.allocations()
            .into_iter()
            .filter(|a| &a.physical == physical)
            .map(|a| a.functional)
            .collect()
    }

    /// Check that an allocation is valid in this project.
    pub fn allocate(&self, functional: &ElementPath, physical: &ElementPath) -> Result<Allocation, AllocationError> {
        let (fm, _) = self
            .element(functional)
            .ok_or_else(|| AllocationError::Unresolved(functional.clone()))?;
        let (pm, _) = self
            .element(physical)
            .ok_or_else(|| AllocationError::Unresolved(physical.clone()))?;
        if fm.kind != ModelKind::Functional || pm.kind != ModelKind::Physical {
            return Err(AllocationError::Direction {
                from: functional.clone(),
                to: physical.clone(),
                from_kind: fm.kind,
                to_kind: pm.kind,
            });
        }
        Ok(Allocation {
            functional: functional.clone(),
            physical: physical.clone(),
        })
    }

    /// A copy of the project with the allocation recorded.
    pub fn with_allocation(&self, a: &Allocation) -> Result<Project, AllocationError> {
        let a = self.allocate(&a.functional, &a.physical)?;
        let mut p = self.clone();
        let link = TraceLink {
            source: ArtifactRef::element(a.functional),
            link_type: LinkType::AllocatedTo,
            target: ArtifactRef::element(a.physical),
            origin: Origin::none(),
        };
        if !p.links.contains(&link) {
            p.links.push(link);
        }
        Ok(p)
    }

    /// Resolve one end of a link. One segment is a requirement id or a top
    /// event; more segments are a model element path.
    pub fn resolve_ref(&self, segs: &[String]) -> Option<ArtifactRef> {
        match segs {
            [] => None,
            [one] => {
                if self.requirement(one).is_some() {
                    Some(ArtifactRef::req(one.clone()))
                } else if self.top_event_names().contains(&one.as_str()) {
                    Some(ArtifactRef::TopEvent { name: one.clone() })
                } else {
                    None
                }
            }
            [model, rest @ ..] => {
                let path = ElementPath::new(model.clone(), rest.to_vec());
                self.element(&path).map(|_| ArtifactRef::element(path))
            }
        }
    }

    fn model_kind(&self, r: &ArtifactRef) -> Option<ModelKind> {
        r.as_element().and_then(|p| self.model(&p.model)).map(|m| m.kind)
    }

    pub fn resolve_link(&self, raw: &RawLink) -> Result<TraceLink, Diagnostic> {
        let resolve = |segs: &[String], text: String| {
            self.resolve_ref(segs).ok_or_else(|| {
                Diagnostic::error(codes::UNRESOLVED_LINK, format!("link end `{text}` does not resolve")).at(&raw.origin)
            })
        };
        let source = resolve(&raw.source, raw.source_text())?;
        let target = resolve(&raw.target, raw.target_text())?;
        let is_req = |r: &ArtifactRef| matches!(r, ArtifactRef::Requirement { .. });
        let is_el = |r: &ArtifactRef| matches!(r, ArtifactRef::Element { .. });
        let (ok, expect) = match raw.link_type {
            LinkType::SatisfiedBy => (is_req(&source) && is_el(&target), "requirement -> model element"),
            LinkType::Refines => (is_req(&source) && is_req(&target), "requirement -> requirement"),
            LinkType::DerivesFrom => (is_req(&source) && !matches!(target, ArtifactRef::TopEvent { .. }), "requirement -> requirement or model element"),
            LinkType::AllocatedTo => (
                self.model_kind(&source) == Some(ModelKind::Functional)
                    && self.model_kind(&target) == Some(ModelKind::Physical),
                "functional element -> physical element",
            ),
            LinkType::ValidatedBy => (is_req(&source) && !is_el(&target), "requirement -> test requirement or top event"),
            LinkType::JustifiedBy => (is_req(&source), "requirement -> any artifact"),
        };
        if !ok {
            return Err(Diagnostic::error(
                codes::LINK_DOMAIN,
                format!("`{} {} {}` violates the link domain ({expect})", source, raw.link_type, target),
            )
            .at(&raw.origin));
        }
        Ok(TraceLink {
            source,
            link_type: raw.link_type,
            target,
            origin: raw.origin.clone(),
        })
    }
}

/// Reads a project file given its manifest-relative path.
pub trait FileSource: Sync {
    fn read(&self, rel: &str) -> std::io::Result<String>;
}

struct DiskSource(PathBuf);

impl FileSource for DiskSource {
    fn read(&self, rel: &str) -> std::io::Result<String> {
        std::fs::read_to_string(self.0.join(rel))
    }
}

impl FileSource for HashMap<String, String> {
    fn read(&self, rel: &str) -> std::io::Result<String> {
        self.get(rel)
            .cloned()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"))
    }
}

pub const MANIFEST_NAME: &str = "project.manifest";

/// Nearest `project.manifest` at or above `start`.
pub fn discover_manifest(start: &Path) -> Option<PathBuf> {
    start
        .ancestors()
        .map(|d| d.join(MANIFEST_NAME))
        .find(|p| p.is_file())
}

pub fn load_project(manifest_path: &Path, exec: Execution) -> ProjectLoad {
    load_project_excluding(manifest_path, exec, &[])
}

/// Load as if the listed files (manifest-relative) were absent from the
/// manifest.
pub fn load_project_excluding(manifest_path: &Path, exec: Execution, exclude: &[String]) -> ProjectLoad {
    let root = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let display = manifest_path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| MANIFEST_NAME.into());
    let text = match std::fs::read_to_string(manifest_path) {
        Ok(t) => t,
        Err(e) => {
            return ProjectLoad {
                project: Project::empty(ProjectManifest::new("")),
                diagnostics: vec![Diagnostic::error(
                    codes::MISSING_FILE,
                    format!("cannot read manifest {}: {e}", manifest_path.display()),
                )],
            }
        }
    };
    let mut load = load_inner(&text, &display, &DiskSource(root.clone()), exec, exclude);
    load.project.root = root;
    load
}

enum FileKind {
    Profile(Parsed<ProfileFile>),
    Model(String),
    Requirements(Parsed<RequirementFile>),
    Fpm(Parsed<Fpm>),
    Fha(Parsed<FhaFile>),
}

/// Load from any file source. Files are read and parsed concurrently;
/// assembly is sequential and in manifest order.
pub fn load_from_source(manifest_text: &str, manifest_name: &str, files: &dyn FileSource, exec: Execution) -> ProjectLoad {
    load_inner(manifest_text, manifest_name, files, exec, &[])
}

fn load_inner(
    manifest_text: &str,
    manifest_name: &str,
    files: &dyn FileSource,
    exec: Execution,
    exclude: &[String],
) -> ProjectLoad {
    let parsed = parse_manifest(manifest_text, manifest_name);
    let mut diags = parsed.diagnostics;
    let Some(mut manifest) = parsed.value else {
        return ProjectLoad {
            project: Project::empty(ProjectManifest::new("")),
            diagnostics: diags,
        };
    };
    for list in [
        &mut manifest.profiles,
        &mut manifest.models,
        &mut manifest.requirements,
        &mut manifest.links,
        &mut manifest.fpm,
        &mut manifest.fha_results,
    ] {
        list.retain(|f| !exclude.contains(f));
    }
    let manifest_span = manifest.origin.span().cloned().or(Some(SourceSpan::new(manifest_name, 1, 1, 1)));
    let mut project = Project::empty(manifest.clone());

    // Read and parse everything that does not depend on profiles.
    let listed = manifest.files();
    let mut seen = HashSet::new();
    for (_, f) in &listed {
        if !seen.insert(*f) {
            diags.push(
                Diagnostic::error(codes::DUPLICATE_GLOBAL, format!("file `{f}` is listed more than once"))
                    .with_span(manifest_span.clone()),
            );
        }
    }
    let results = exec.map(&listed, |&(kind, f)| {
        let text = files.read(f).map_err(|e| {
            Diagnostic::error(codes::MISSING_FILE, format!("cannot read `{f}`: {e}")).with_span(manifest_span.clone())
        })?;
        Ok::<_, Diagnostic>(match kind {
            "profiles" => FileKind::Profile(parse_profile(&text, f)),
            "models" => FileKind::Model(text),
            "requirements" | "links" => FileKind::Requirements(parse_requirements(&text, f)),
            "fpm" => FileKind::Fpm(parse_fpm(&text, f)),
            _ => FileKind::Fha(parse_fha(&text, f)),
        })
    });

    let mut profiles = Vec::new();
    let mut model_texts = Vec::new();
    let mut req_files = Vec::new();
    let mut fpm_files = Vec::new();
    let mut fha_files = Vec::new();
    for ((_, f), r) in listed.iter().zip(results) {
        match r {
            Err(d) => diags.push(d),
            Ok(FileKind::Profile(p)) => {
                diags.extend(p.diagnostics);
                profiles.extend(p.value);
            }
            Ok(FileKind::Model(t)) => model_texts.push((*f, t)),
            Ok(FileKind::Requirements(p)) => {
                diags.extend(p.diagnostics);
                req_files.extend(p.value);
            }
            Ok(FileKind::Fpm(p)) => {
                diags.extend(p.diagnostics);
                fpm_files.extend(p.value);
            }
            Ok(FileKind::Fha(p)) => {
                diags.extend(p.diagnostics);
                fha_files.extend(p.value);
            }
        }
    }

    let (set, pd) = ProfileSet::build(profiles.iter().map(|p| p.profile.clone()).collect());
    diags.extend(pd);
    project.profiles = set;
    let mut rule_codes = HashSet::new();
    for spec in profiles.into_iter().flat_map(|p| p.rules) {
        if rule_codes.insert(spec.code.clone()) {
            project.custom_rules.push(spec);
        } else {
            diags.push(
                Diagnostic::error(codes::DUPLICATE_GLOBAL, format!("rule `{}` is declared in more than one profile", spec.code))
                    .at(&spec.origin),
            );
        }
    }

    let profile_set = &project.profiles;
    let models = exec.map(&model_texts, |(f, t)| parse_model(t, f, profile_set));
    for m in models {
        diags.extend(m.diagnostics);
        let Some(m) = m.value else { continue };
        if project.model(&m.name).is_some() {
            diags.push(
                Diagnostic::error(codes::DUPLICATE_GLOBAL, format!("model `{}` is declared more than once", m.name))
                    .at(&m.origin),
            );
            continue;
        }
        if !manifest.is_known_level(&m.level) {
            diags.push(unknown_level(&manifest, &m.level, &m.origin));
        }
        project.models.push(m);
    }

    let mut raw_links = Vec::new();
    for f in req_files {
        for r in f.requirements {
            if let Some(prev) = project.requirement(&r.id) {
                diags.push(
                    Diagnostic::error(codes::DUPLICATE_GLOBAL, format!("requirement `{}` is declared more than once", r.id))
                        .at(&r.origin)
                        .with_related(prev.origin.0.clone()),
                );
                continue;
            }
            if !manifest.is_known_level(&r.level) {
                diags.push(unknown_level(&manifest, &r.level, &r.origin));
            }
            project.requirements.push(r);
        }
        raw_links.extend(f.links);
    }

    for f in fpm_files {
        let problems = match project.model(&f.model) {
            None => vec![Diagnostic::error(codes::FPM_ANNOTATION, format!("fpm refers to unknown model `{}`", f.model)).at(&f.origin)],
            Some(m) if m.kind != ModelKind::Physical => vec![Diagnostic::error(
                codes::FPM_ANNOTATION,
                format!("fpm must be derived from a physical model, `{}` is {}", f.model, m.kind),
            )
            .at(&f.origin)],
            Some(_) if project.fpm_for(&f.model).is_some() => vec![Diagnostic::error(
                codes::DUPLICATE_GLOBAL,
                format!("model `{}` has more than one fpm", f.model),
            )
            .at(&f.origin)],
            Some(_) => check_fpm(&f),
        };
        let failed = has_errors(&problems);
        diags.extend(problems);
        if !failed {
            project.fpms.push(f);
        }
    }
    let mut top_names = HashSet::new();
    for t in project.fpms.iter().flat_map(|f| &f.top_events) {
        if !top_names.insert(t.name.as_str()) {
            diags.push(
                Diagnostic::error(codes::DUPLICATE_GLOBAL, format!("top event `{}` is declared more than once", t.name))
                    .at(&t.origin),
            );
        } else if project.requirement(&t.name).is_some() {
            diags.push(
                Diagnostic::error(codes::DUPLICATE_GLOBAL, format!("top event `{}` has the same name as a requirement", t.name))
                    .at(&t.origin),
            );
        }
    }

    for f in &fha_files {
        diags.extend(apply_fha(&mut project, f));
        raw_links.extend(f.links.iter().cloned());
    }

    // FHA stub links are already in place.
    let mut seen_links: HashSet<_> = project
        .links
        .iter()
        .map(|l| (l.source.clone(), l.link_type, l.target.clone()))
        .collect();
    for raw in &raw_links {
        match project.resolve_link(raw) {
            Ok(l) => {
                if seen_links.insert((l.source.clone(), l.link_type, l.target.clone())) {
                    project.links.push(l);
                } else {
                    diags.push(
                        Diagnostic::warning(codes::DUPLICATE_GLOBAL, format!("link `{} {} {}` is given more than once", l.source, l.link_type, l.target))
                            .at(&raw.origin),
                    );
                }
            }
            Err(d) => diags.push(d),
        }
    }
    diags.sort();
    diags.dedup();
    ProjectLoad {
        project,
        diagnostics: diags,
    }
}

fn unknown_level(manifest: &ProjectManifest, level: &str, origin: &Origin) -> Diagnostic {
    Diagnostic::error(
        codes::UNKNOWN_LEVEL,
        format!(
            "unknown level `{level}` (declared: {}, plus test and L<n>)",
            manifest.levels.join(", ")
        ),
    )
    .at(origin)
}
