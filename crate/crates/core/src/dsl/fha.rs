use serde::{Deserialize, Serialize};

use super::requirements::link;
use super::syntax::{key_value, parse_statements, unexpected_statement, Cursor, PResult, Stmt};
use super::Parsed;
use crate::diag::{codes, Diagnostic, Origin};
use crate::model::Dal;
use crate::requirements::{Classification, RawLink};

/// One failure condition from a functional hazard assessment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FhaEntry {
    pub id: String,
    /// Model name followed by the element path.
    pub function: Vec<String>,
    pub condition: String,
    pub effect: String,
    pub classification: Classification,
    pub fdal: Option<Dal>,
    /// Id of the safety requirement stub to create.
    pub requirement: Option<String>,
    #[serde(skip)]
    pub origin: Origin,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FhaFile {
    pub entries: Vec<FhaEntry>,
    pub links: Vec<RawLink>,
}

pub fn parse_fha(text: &str, path: &str) -> Parsed<FhaFile> {
    let tree = parse_statements(text, path);
    let mut diags = tree.diagnostics;
    let mut out = FhaFile::default();
    for stmt in &tree.stmts {
        match stmt.head() {
            Some("failure_condition") => match entry(stmt, path) {
                Ok(e) => {
                    if out.entries.iter().any(|x| x.id == e.id) {
                        diags.push(
                            Diagnostic::error(codes::DUPLICATE, format!("failure condition `{}` is declared twice", e.id))
                                .at(&e.origin),
                        );
                    } else {
                        out.entries.push(e);
                    }
                }
                Err(d) => diags.extend(d),
            },
            Some("link") => match link(stmt, path) {
                Ok(l) => out.links.push(l),
                Err(d) => diags.push(d),
            },
            _ => diags.push(unexpected_statement(stmt, path, "an FHA results file")),
        }
    }
    Parsed::new(out, diags)
}

fn entry(stmt: &Stmt, path: &str) -> Result<FhaEntry, Vec<Diagnostic>> {
    let mut c = Cursor::new(stmt, path);
    let id = (|| -> PResult<String> {
        c.expect_keyword("failure_condition")?;
        let id = c.name()?;
        c.done()?;
        Ok(id)
    })()
    .map_err(|d| vec![d])?;
    let mut errs = Vec::new();
    let mut function = None;
    let mut condition = String::new();
    let mut effect = String::new();
    let mut classification = None;
    let mut fdal = None;
    let mut requirement = None;
    for s in stmt.block.as_deref().unwrap_or_default() {
        let r = key_value(s, path).and_then(|(k, v)| {
            let bad = |what: &str| {
                Diagnostic::error(codes::INVALID_VALUE, format!("`{k}` expects {what}, found {}", v.describe()))
                    .with_span(Some(s.span(path)))
            };
            match k.as_str() {
                "function" => function = Some(v.as_path().filter(|p| p.len() >= 2).ok_or_else(|| bad("a Model.Function path"))?),
                "condition" => condition = v.as_str().ok_or_else(|| bad("a string"))?.to_string(),
                "effect" => effect = v.as_str().ok_or_else(|| bad("a string"))?.to_string(),
                "classification" => {
                    classification = Some(v.as_ident().and_then(Classification::parse).ok_or_else(|| bad("a classification"))?)
                }
                "fdal" => fdal = Some(v.as_ident().and_then(Dal::parse).ok_or_else(|| bad("a DAL (A to E)"))?),
                "requirement" => {
                    requirement = Some(v.as_ident().or(v.as_str()).ok_or_else(|| bad("a requirement id"))?.to_string())
                }
                _ => {
                    return Err(Diagnostic::error(codes::SYNTAX, format!("unknown failure condition field `{k}`"))
                        .with_span(Some(s.span(path))))
                }
            }
            Ok(())
        });
        if let Err(d) = r {
            errs.push(d);
        }
    }
    let missing = |f: &str| {
        Diagnostic::error(codes::SYNTAX, format!("failure condition `{id}` has no `{f}`")).with_span(Some(stmt.span(path)))
    };
    if function.is_none() {
        errs.push(missing("function"));
    }
    if classification.is_none() {
        errs.push(missing("classification"));
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(FhaEntry {
        id,
        function: function.unwrap(),
        condition,
        effect,
        classification: classification.unwrap(),
        fdal,
        requirement,
        origin: stmt.origin(path),
    })
}
