use std::collections::HashMap;
use std::fmt::Write;

use super::syntax::{key_value, parse_statements, unexpected_statement, Cursor, PResult, Stmt};
use super::Parsed;
use crate::diag::{codes, Diagnostic};
use crate::model::{join_names, quote_name, quote_string};
use crate::requirements::{Classification, LinkType, RawLink, ReqType, Requirement};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RequirementFile {
    pub requirements: Vec<Requirement>,
    pub links: Vec<RawLink>,
}

pub fn parse_requirements(text: &str, path: &str) -> Parsed<RequirementFile> {
    let tree = parse_statements(text, path);
    let mut diags = tree.diagnostics;
    let mut out = RequirementFile::default();
    let mut ids: HashMap<String, usize> = HashMap::new();
    for stmt in &tree.stmts {
        match stmt.head() {
            Some("requirement" | "assumption") => match requirement(stmt, path) {
                Ok(r) => {
                    if ids.contains_key(&r.id) {
                        diags.push(
                            Diagnostic::error(codes::DUPLICATE, format!("requirement `{}` is declared twice", r.id))
                                .at(&r.origin)
                                .with_related(out.requirements[ids[&r.id]].origin.0.clone()),
                        );
                    } else {
                        ids.insert(r.id.clone(), out.requirements.len());
                        out.requirements.push(r);
                    }
                }
                Err(d) => diags.extend(d),
            },
            Some("link") => match link(stmt, path) {
                Ok(l) => out.links.push(l),
                Err(d) => diags.push(d),
            },
            _ => diags.push(unexpected_statement(stmt, path, "a requirements file")),
        }
    }
    Parsed::new(out, diags)
}

pub(super) fn link(stmt: &Stmt, path: &str) -> PResult<RawLink> {
    let mut c = Cursor::new(stmt, path);
    c.expect_keyword("link")?;
    let source = c.path()?;
    let t = c.ident()?;
    let link_type = LinkType::parse(&t).ok_or_else(|| {
        let known: Vec<&str> = LinkType::ALL.iter().map(|l| l.as_str()).collect();
        c.error(format!("unknown link type `{t}` (expected one of {})", known.join(", ")))
    })?;
    let target = c.path()?;
    c.done()?;
    if stmt.block.is_some() {
        return Err(c.error("`link` does not take a block"));
    }
    let mut l = RawLink::new(source, link_type, target);
    l.origin = stmt.origin(path);
    Ok(l)
}

fn requirement(stmt: &Stmt, path: &str) -> Result<Requirement, Vec<Diagnostic>> {
    let mut c = Cursor::new(stmt, path);
    let mut r = (|| -> PResult<Requirement> {
        let assumption = c.eat_keyword("assumption");
        if !assumption {
            c.expect_keyword("requirement")?;
        }
        let id = c.name()?;
        c.expect_keyword("level")?;
        let level = c.name()?;
        let mut req_type = if assumption { ReqType::Assumption } else { ReqType::Functional };
        if !assumption && c.eat_keyword("type") {
            let t = c.ident()?;
            req_type = ReqType::parse(&t).ok_or_else(|| c.error(format!("unknown requirement type `{t}`")))?;
        }
        c.done()?;
        let mut r = Requirement::new(id, level, req_type);
        r.origin = stmt.origin(path);
        Ok(r)
    })()
    .map_err(|d| vec![d])?;
    let mut errs = Vec::new();
    for s in stmt.block.as_deref().unwrap_or_default() {
        let res = key_value(s, path).and_then(|(k, v)| {
            let bad = |what: &str| {
                Diagnostic::error(codes::INVALID_VALUE, format!("`{k}` expects {what}, found {}", v.describe()))
                    .with_span(Some(s.span(path)))
            };
            match k.as_str() {
                "text" => r.text = v.as_str().ok_or_else(|| bad("a string"))?.to_string(),
                "rationale" => r.rationale = Some(v.as_str().ok_or_else(|| bad("a string"))?.to_string()),
                "justification" => r.justification = Some(v.as_str().ok_or_else(|| bad("a string"))?.to_string()),
                "min_cut_order" => match v {
                    super::syntax::Value::Int(i) if i >= 1 && i <= u32::MAX as i64 => r.min_cut_order = Some(i as u32),
                    _ => return Err(bad("a positive integer")),
                },
                "classification" => {
                    r.classification = Some(
                        v.as_ident()
                            .and_then(Classification::parse)
                            .ok_or_else(|| bad("a classification"))?,
                    )
                }
                _ => {
                    return Err(Diagnostic::error(codes::SYNTAX, format!("unknown requirement field `{k}`"))
                        .with_span(Some(s.span(path))))
                }
            }
            Ok(())
        });
        if let Err(d) = res {
            errs.push(d);
        }
    }
    if errs.is_empty() {
        Ok(r)
    } else {
        Err(errs)
    }
}

pub fn write_requirement(out: &mut String, r: &Requirement) {
    if r.req_type == ReqType::Assumption {
        write!(out, "assumption {} level {}", quote_name(&r.id), quote_name(&r.level)).unwrap();
    } else {
        write!(
            out,
            "requirement {} level {} type {}",
            quote_name(&r.id),
            quote_name(&r.level),
            r.req_type
        )
        .unwrap();
    }
    let mut fields = Vec::new();
    if !r.text.is_empty() {
        fields.push(format!("text = {}", quote_string(&r.text)));
    }
    if let Some(v) = &r.rationale {
        fields.push(format!("rationale = {}", quote_string(v)));
    }
    if let Some(v) = &r.justification {
        fields.push(format!("justification = {}", quote_string(v)));
    }
    if let Some(v) = r.min_cut_order {
        fields.push(format!("min_cut_order = {v}"));
    }
    if let Some(v) = r.classification {
        fields.push(format!("classification = {v}"));
    }
    if fields.is_empty() {
        out.push('\n');
        return;
    }
    out.push_str(" {\n");
    for f in fields {
        writeln!(out, "  {f}").unwrap();
    }
    out.push_str("}\n");
}

pub fn write_link(out: &mut String, l: &RawLink) {
    writeln!(out, "link {} {} {}", join_names(&l.source), l.link_type, join_names(&l.target)).unwrap();
}

/// Requirements first (one blank line apart), then links.
pub fn serialize_requirements(f: &RequirementFile) -> String {
    let mut out = String::new();
    for (i, r) in f.requirements.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_requirement(&mut out, r);
    }
    if !f.requirements.is_empty() && !f.links.is_empty() {
        out.push('\n');
    }
    for l in &f.links {
        write_link(&mut out, l);
    }
    out
}
