use std::collections::HashSet;
use std::fmt::Write;

use super::lexer::Tok;
use super::syntax::{parse_statements, unexpected_statement, Cursor, PResult, Stmt, Value};
use super::{attr_value, attr_value_text, file_stem, Parsed};
use crate::diag::{codes, Diagnostic, Origin, Severity};
use crate::model::{
    check_hierarchy, quote_name, quote_string, AttributeDef, BaseKind, ModelKind, Profile, Stereotype, ValueKind,
};
use crate::requirements::LinkType;
use crate::validation::{Category, Constraint, CustomRuleSpec};

/// A profile file: stereotypes plus any custom rules declared with them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFile {
    pub profile: Profile,
    pub rules: Vec<CustomRuleSpec>,
}

pub fn parse_profile(text: &str, path: &str) -> Parsed<ProfileFile> {
    let tree = parse_statements(text, path);
    let mut diags = tree.diagnostics;
    let mut out: Option<ProfileFile> = None;
    for stmt in &tree.stmts {
        if stmt.head() != Some("profile") {
            diags.push(unexpected_statement(stmt, path, "a profile file"));
            continue;
        }
        if out.is_some() {
            diags.push(
                Diagnostic::error(codes::DUPLICATE, "only one profile may be declared per file")
                    .with_span(Some(stmt.span(path))),
            );
            continue;
        }
        match profile_header(stmt, path) {
            Ok((name, kind)) => {
                let mut pf = ProfileFile {
                    profile: Profile {
                        name,
                        kind,
                        stereotypes: Vec::new(),
                        origin: stmt.origin(path),
                    },
                    rules: Vec::new(),
                };
                for s in stmt.block.as_deref().unwrap_or_default() {
                    match s.head() {
                        Some("stereotype" | "abstract") => match stereotype(s, path) {
                            Ok(st) => {
                                if pf.profile.stereotype(&st.name).is_some() {
                                    diags.push(
                                        Diagnostic::error(
                                            codes::DUPLICATE,
                                            format!("stereotype `{}` is declared twice", st.name),
                                        )
                                        .at(&st.origin),
                                    );
                                } else {
                                    pf.profile.stereotypes.push(st);
                                }
                            }
                            Err(d) => diags.extend(d),
                        },
                        Some("rules") => {
                            for r in s.block.as_deref().unwrap_or_default() {
                                match rule(r, path) {
                                    Ok(spec) => {
                                        if pf.rules.iter().any(|x| x.code == spec.code) {
                                            diags.push(
                                                Diagnostic::error(
                                                    codes::DUPLICATE,
                                                    format!("rule `{}` is declared twice", spec.code),
                                                )
                                                .at(&spec.origin),
                                            );
                                        } else {
                                            pf.rules.push(spec);
                                        }
                                    }
                                    Err(d) => diags.push(d),
                                }
                            }
                        }
                        _ => diags.push(unexpected_statement(s, path, "a profile")),
                    }
                }
                out = Some(pf);
            }
            Err(d) => diags.push(d),
        }
    }
    let pf = out.unwrap_or_else(|| ProfileFile {
        profile: Profile {
            name: file_stem(path),
            kind: None,
            stereotypes: Vec::new(),
            origin: Origin::none(),
        },
        rules: Vec::new(),
    });
    let refs: Vec<&Stereotype> = pf.profile.stereotypes.iter().collect();
    diags.extend(check_hierarchy(&refs, true));
    Parsed::new(pf, diags)
}

fn profile_header(stmt: &Stmt, path: &str) -> PResult<(String, Option<ModelKind>)> {
    let mut c = Cursor::new(stmt, path);
    c.expect_keyword("profile")?;
    let name = c.name()?;
    let mut kind = None;
    if c.eat_keyword("kind") {
        let k = c.ident()?;
        kind = Some(ModelKind::parse(&k).ok_or_else(|| c.error(format!("unknown model kind `{k}`")))?);
    }
    c.done()?;
    Ok((name, kind))
}

fn stereotype(stmt: &Stmt, path: &str) -> Result<Stereotype, Vec<Diagnostic>> {
    let mut c = Cursor::new(stmt, path);
    let header = (|| -> PResult<Stereotype> {
        let is_abstract = c.eat_keyword("abstract");
        c.expect_keyword("stereotype")?;
        let name = c.name()?;
        let mut declared_kind = None;
        let mut extends = None;
        let mut endpoints = None;
        if c.eat(&Tok::Colon) {
            let k = c.ident()?;
            declared_kind =
                Some(BaseKind::parse(&k).ok_or_else(|| c.error(format!("unknown base kind `{k}`")))?);
        }
        if c.eat_keyword("extends") {
            extends = Some(c.name()?);
        }
        if c.eat_keyword("endpoints") {
            endpoints = Some(c.name()?);
        }
        c.done()?;
        Ok(Stereotype {
            name,
            declared_kind,
            extends,
            is_abstract,
            attributes: Vec::new(),
            endpoints,
            origin: stmt.origin(path),
        })
    })();
    let mut st = header.map_err(|d| vec![d])?;
    let mut errs = Vec::new();
    let mut seen = HashSet::new();
    for s in stmt.block.as_deref().unwrap_or_default() {
        if s.head() != Some("attr") {
            errs.push(unexpected_statement(s, path, "a stereotype"));
            continue;
        }
        match attribute(s, path) {
            Ok(a) => {
                if !seen.insert(a.name.clone()) {
                    errs.push(
                        Diagnostic::error(
                            codes::DUPLICATE,
                            format!("attribute `{}` is declared twice in `{}`", a.name, st.name),
                        )
                        .at(&a.origin),
                    );
                } else {
                    st.attributes.push(a);
                }
            }
            Err(d) => errs.push(d),
        }
    }
    if errs.is_empty() {
        Ok(st)
    } else {
        Err(errs)
    }
}

fn attribute(stmt: &Stmt, path: &str) -> PResult<AttributeDef> {
    let mut c = Cursor::new(stmt, path);
    c.expect_keyword("attr")?;
    let name = c.name()?;
    c.expect(Tok::Colon)?;
    let k = c.ident()?;
    let kind = match k.as_str() {
        "string" => ValueKind::String,
        "integer" => ValueKind::Integer,
        "real" => ValueKind::Real,
        "boolean" => ValueKind::Boolean,
        "dal" => ValueKind::Dal,
        "enum" => {
            c.expect(Tok::LParen)?;
            let mut lits = vec![c.name()?];
            while c.eat(&Tok::Comma) {
                lits.push(c.name()?);
            }
            c.expect(Tok::RParen)?;
            ValueKind::Enumeration(lits)
        }
        other => return Err(c.error(format!("unknown value kind `{other}`"))),
    };
    let mut required = true;
    if c.eat_keyword("optional") {
        required = false;
    } else {
        c.eat_keyword("required");
    }
    let mut default = None;
    if c.eat(&Tok::Eq) {
        let span = c.here();
        let v = c.value()?;
        default = Some(attr_value(&v, &kind).map_err(|m| {
            Diagnostic::error(codes::INVALID_VALUE, format!("default of `{name}`: {m}")).with_span(Some(span))
        })?);
    }
    c.done()?;
    Ok(AttributeDef {
        name,
        kind,
        required,
        default,
        origin: stmt.origin(path),
    })
}

fn rule(stmt: &Stmt, path: &str) -> PResult<CustomRuleSpec> {
    let mut c = Cursor::new(stmt, path);
    c.expect_keyword("rule")?;
    let code = c.ident()?;
    c.expect_keyword("on")?;
    let stereotype = c.name()?;
    c.expect_keyword("check")?;
    let kind = c.ident()?;
    let mut args: Vec<Value> = Vec::new();
    if c.eat(&Tok::LParen) {
        if !c.eat(&Tok::RParen) {
            loop {
                args.push(c.value()?);
                if c.eat(&Tok::RParen) {
                    break;
                }
                c.expect(Tok::Comma)?;
            }
        }
    }
    let name_arg = |i: usize| -> PResult<String> {
        args.get(i)
            .and_then(|v| v.as_ident().or(v.as_str()))
            .map(str::to_string)
            .ok_or_else(|| c.error(format!("`{kind}` expects a name as argument {}", i + 1)))
    };
    let arity = |n: usize| -> PResult<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(c.error(format!("`{kind}` takes {n} argument(s), got {}", args.len())))
        }
    };
    let constraint = match kind.as_str() {
        "endpoint_must_be" => {
            arity(1)?;
            Constraint::EndpointMustBe { stereotype: name_arg(0)? }
        }
        "attribute_required" => {
            arity(1)?;
            Constraint::AttributeRequired { attribute: name_arg(0)? }
        }
        "attribute_matches" => {
            arity(2)?;
            let pattern = args[1]
                .as_str()
                .ok_or_else(|| c.error("`attribute_matches` expects a quoted pattern"))?
                .to_string();
            Constraint::AttributeMatches {
                attribute: name_arg(0)?,
                pattern,
            }
        }
        "must_have_inbound_link" => {
            arity(1)?;
            let t = name_arg(0)?;
            Constraint::MustHaveInboundLink {
                link_type: LinkType::parse(&t).ok_or_else(|| c.error(format!("unknown link type `{t}`")))?,
            }
        }
        "must_be_connected_or_justified" => {
            arity(0)?;
            Constraint::MustBeConnectedOrJustified
        }
        other => return Err(c.error(format!("unknown constraint kind `{other}`"))),
    };
    let mut spec = CustomRuleSpec {
        code,
        stereotype,
        constraint,
        category: Category::Model,
        severity: Severity::Error,
        message: None,
        origin: stmt.origin(path),
    };
    loop {
        if c.eat_keyword("category") {
            let v = c.ident()?;
            spec.category = Category::parse(&v).ok_or_else(|| c.error(format!("unknown category `{v}`")))?;
        } else if c.eat_keyword("severity") {
            let v = c.ident()?;
            spec.severity = Severity::parse(&v).ok_or_else(|| c.error(format!("unknown severity `{v}`")))?;
        } else if c.eat_keyword("message") {
            spec.message = Some(c.string()?);
        } else {
            break;
        }
    }
    c.done()?;
    Ok(spec)
}

pub fn serialize_profile(pf: &ProfileFile) -> String {
    let p = &pf.profile;
    let mut out = format!("profile {}", quote_name(&p.name));
    if let Some(k) = p.kind {
        write!(out, " kind {k}").unwrap();
    }
    if p.stereotypes.is_empty() && pf.rules.is_empty() {
        out.push_str(" {}\n");
        return out;
    }
    out.push_str(" {\n");
    for s in &p.stereotypes {
        out.push_str("  ");
        if s.is_abstract {
            out.push_str("abstract ");
        }
        write!(out, "stereotype {}", quote_name(&s.name)).unwrap();
        if let Some(k) = s.declared_kind {
            write!(out, " : {k}").unwrap();
        }
        if let Some(e) = &s.extends {
            write!(out, " extends {}", quote_name(e)).unwrap();
        }
        if let Some(e) = &s.endpoints {
            write!(out, " endpoints {}", quote_name(e)).unwrap();
        }
        if s.attributes.is_empty() {
            out.push('\n');
            continue;
        }
        out.push_str(" {\n");
        for a in &s.attributes {
            write!(out, "    attr {}: ", quote_name(&a.name)).unwrap();
            match &a.kind {
                ValueKind::Enumeration(lits) => {
                    let l: Vec<String> = lits.iter().map(|l| quote_name(l).into_owned()).collect();
                    write!(out, "enum({})", l.join(", ")).unwrap();
                }
                k => out.push_str(k.name()),
            }
            if !a.required {
                out.push_str(" optional");
            }
            if let Some(d) = &a.default {
                write!(out, " = {}", attr_value_text(d)).unwrap();
            }
            out.push('\n');
        }
        out.push_str("  }\n");
    }
    if !pf.rules.is_empty() {
        out.push_str("  rules {\n");
        for r in &pf.rules {
            write!(
                out,
                "    rule {} on {} check {} category {} severity {}",
                r.code,
                quote_name(&r.stereotype),
                r.constraint,
                r.category,
                r.severity
            )
            .unwrap();
            if let Some(m) = &r.message {
                write!(out, " message {}", quote_string(m)).unwrap();
            }
            out.push('\n');
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
