use std::collections::HashSet;

use super::lexer::Tok;
use super::syntax::{parse_statements, unexpected_statement, Cursor, PResult, Stmt, Value};
use super::Parsed;
use crate::diag::{codes, Diagnostic, Origin, Severity};
use crate::model::Dal;
use crate::requirements::Classification;

pub const DEFAULT_LEVELS: [&str; 3] = ["aircraft", "system", "item"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectManifest {
    pub name: String,
    /// Entry level of the workflow.
    pub l0: String,
    /// Hierarchy labels, top first. The last one is the item level.
    pub levels: Vec<String>,
    pub profiles: Vec<String>,
    pub models: Vec<String>,
    pub requirements: Vec<String>,
    pub links: Vec<String>,
    pub fpm: Vec<String>,
    pub fha_results: Vec<String>,
    /// Stereotype name -> element name pattern.
    pub naming: Vec<(String, String)>,
    pub severity: Vec<(String, Severity)>,
    pub fdal_mapping: Vec<(Classification, Dal)>,
    pub origin: Origin,
}

impl ProjectManifest {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            l0: DEFAULT_LEVELS[0].into(),
            levels: DEFAULT_LEVELS.iter().map(|s| s.to_string()).collect(),
            profiles: Vec::new(),
            models: Vec::new(),
            requirements: Vec::new(),
            links: Vec::new(),
            fpm: Vec::new(),
            fha_results: Vec::new(),
            naming: Vec::new(),
            severity: Vec::new(),
            fdal_mapping: Vec::new(),
            origin: Origin::none(),
        }
    }

    pub fn item_level(&self) -> &str {
        self.levels.last().map(String::as_str).unwrap_or("item")
    }

    /// Declared labels, `test`, and any `L<n>` label.
    pub fn is_known_level(&self, level: &str) -> bool {
        level == "test"
            || self.levels.iter().any(|l| l == level)
            || level.strip_prefix('L').is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()))
    }

    /// Every file in load order, with its kind.
    pub fn files(&self) -> Vec<(&'static str, &str)> {
        let mut out = Vec::new();
        for (kind, list) in [
            ("profiles", &self.profiles),
            ("models", &self.models),
            ("requirements", &self.requirements),
            ("links", &self.links),
            ("fpm", &self.fpm),
            ("fha_results", &self.fha_results),
        ] {
            out.extend(list.iter().map(|f| (kind, f.as_str())));
        }
        out
    }
}

pub fn parse_manifest(text: &str, path: &str) -> Parsed<ProjectManifest> {
    let tree = parse_statements(text, path);
    let mut diags = tree.diagnostics;
    let mut out: Option<ProjectManifest> = None;
    for stmt in &tree.stmts {
        if stmt.head() != Some("project") || out.is_some() {
            diags.push(unexpected_statement(stmt, path, "a manifest"));
            continue;
        }
        let mut c = Cursor::new(stmt, path);
        let name = (|| {
            c.expect_keyword("project")?;
            let n = c.string().or_else(|_| c.name())?;
            c.done()?;
            Ok(n)
        })();
        match name {
            Ok(n) => {
                let mut m = ProjectManifest::new(n);
                m.origin = stmt.origin(path);
                body(&mut m, stmt.block.as_deref().unwrap_or_default(), path, &mut diags);
                out = Some(m);
            }
            Err(d) => diags.push(d),
        }
    }
    let Some(m) = out else {
        if !crate::diag::has_errors(&diags) {
            diags.push(Diagnostic::error(codes::SYNTAX, "manifest declares no project"));
        }
        return Parsed {
            value: None,
            diagnostics: diags,
        };
    };
    Parsed::new(m, diags)
}

/// `key value` or `key = value`.
fn entry(s: &Stmt, path: &str) -> PResult<(String, Option<Value>)> {
    let mut c = Cursor::new(s, path);
    let key = c.ident()?;
    if s.block.is_some() {
        c.done()?;
        return Ok((key, None));
    }
    c.eat(&Tok::Eq);
    let v = c.value()?;
    c.done()?;
    Ok((key, Some(v)))
}

fn body(m: &mut ProjectManifest, stmts: &[Stmt], path: &str, diags: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    let mut l0_span = None;
    for s in stmts {
        let r: PResult<()> = (|| {
            let (key, value) = entry(s, path)?;
            let bad = |what: &str| {
                Diagnostic::error(codes::INVALID_VALUE, format!("`{key}` expects {what}")).with_span(Some(s.span(path)))
            };
            if !seen.insert(key.clone()) {
                return Err(Diagnostic::error(codes::DUPLICATE, format!("`{key}` is given twice")).with_span(Some(s.span(path))));
            }
            let files = |v: &Option<Value>| -> PResult<Vec<String>> {
                match v {
                    Some(Value::List(items)) => items
                        .iter()
                        .map(|i| i.as_str().map(str::to_string).ok_or_else(|| bad("a list of quoted file paths")))
                        .collect(),
                    _ => Err(bad("a list of quoted file paths")),
                }
            };
            match key.as_str() {
                "profiles" => m.profiles = files(&value)?,
                "models" => m.models = files(&value)?,
                "requirements" => m.requirements = files(&value)?,
                "links" => m.links = files(&value)?,
                "fpm" => m.fpm = files(&value)?,
                "fha_results" => m.fha_results = files(&value)?,
                "l0" => {
                    m.l0 = value
                        .as_ref()
                        .and_then(|v| v.as_ident().or(v.as_str()))
                        .ok_or_else(|| bad("a level label"))?
                        .to_string();
                    l0_span = Some(s.span(path));
                }
                "levels" => match &value {
                    Some(Value::List(items)) if !items.is_empty() => {
                        m.levels = items
                            .iter()
                            .map(|i| i.as_ident().or(i.as_str()).map(str::to_string).ok_or_else(|| bad("a list of labels")))
                            .collect::<PResult<_>>()?;
                    }
                    _ => return Err(bad("a non-empty list of labels")),
                },
                "naming" | "severity" | "fdal_mapping" => {
                    let Some(block) = &s.block else { return Err(bad("a block")) };
                    for inner in block {
                        let mut c = Cursor::new(inner, path);
                        let k = c.ident()?;
                        c.expect(Tok::Eq)?;
                        let v = c.value()?;
                        c.done()?;
                        let bad_inner = |what: &str| {
                            Diagnostic::error(codes::INVALID_VALUE, format!("`{k}` expects {what}"))
                                .with_span(Some(inner.span(path)))
                        };
                        match key.as_str() {
                            "naming" => {
                                let pat = v.as_str().ok_or_else(|| bad_inner("a quoted pattern"))?;
                                if let Err(e) = regex::Regex::new(pat) {
                                    return Err(bad_inner(&format!("a valid pattern ({e})")));
                                }
                                m.naming.push((k, pat.to_string()));
                            }
                            "severity" => {
                                let sev = v.as_ident().and_then(Severity::parse).ok_or_else(|| bad_inner("error, warning or info"))?;
                                m.severity.push((k, sev));
                            }
                            _ => {
                                let cls = Classification::parse(&k)
                                    .ok_or_else(|| bad_inner("to be a classification"))?;
                                let dal = v.as_ident().and_then(Dal::parse).ok_or_else(|| bad_inner("a DAL (A to E)"))?;
                                m.fdal_mapping.push((cls, dal));
                            }
                        }
                    }
                }
                _ => {
                    return Err(Diagnostic::error(codes::SYNTAX, format!("unknown manifest entry `{key}`"))
                        .with_span(Some(s.span(path))))
                }
            }
            Ok(())
        })();
        if let Err(d) = r {
            diags.push(d);
        }
    }
    if l0_span.is_none() {
        m.l0 = m.levels[0].clone();
    }
    if !m.levels.contains(&m.l0) {
        diags.push(
            Diagnostic::error(codes::UNKNOWN_LEVEL, format!("l0 `{}` is not one of the declared levels", m.l0))
                .with_span(l0_span),
        );
    }
}
