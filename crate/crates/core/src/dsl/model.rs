use std::collections::HashSet;
use std::fmt::Write;

use super::lexer::Tok;
use super::syntax::{parse_statements, unexpected_statement, Cursor, PResult, Stmt, Value};
use super::{attr_value, attr_value_text, Parsed};
use crate::diag::{codes, Diagnostic, Origin, SourceSpan};
use crate::model::{
    apply_stereotype, quote_name, quote_string, AppliedStereotype, ApplyError, ArchConnector, ArchElement,
    ArchModel, ArchPort, AttrValue, Direction, ModelKind, PortRef, ProfileSet, Stereotyped,
};

struct Ctx<'a> {
    file: &'a str,
    profiles: &'a ProfileSet,
    uses: Vec<String>,
    model: String,
    diags: Vec<Diagnostic>,
}

pub fn parse_model(text: &str, path: &str, profiles: &ProfileSet) -> Parsed<ArchModel> {
    let tree = parse_statements(text, path);
    let mut diags = tree.diagnostics;
    let mut model: Option<ArchModel> = None;
    for stmt in &tree.stmts {
        if stmt.head() != Some("model") {
            diags.push(unexpected_statement(stmt, path, "a model file"));
            continue;
        }
        if model.is_some() {
            diags.push(
                Diagnostic::error(codes::DUPLICATE, "only one model may be declared per file")
                    .with_span(Some(stmt.span(path))),
            );
            continue;
        }
        match header(stmt, path) {
            Ok(mut m) => {
                let mut ctx = Ctx {
                    file: path,
                    profiles,
                    uses: m.uses.clone(),
                    model: m.name.clone(),
                    diags: Vec::new(),
                };
                ctx.check_uses(m.kind, stmt);
                ctx.body(&mut m, stmt.block.as_deref().unwrap_or_default());
                diags.append(&mut ctx.diags);
                model = Some(m);
            }
            Err(d) => diags.push(d),
        }
    }
    match model {
        Some(m) => Parsed::new(m, diags),
        None => {
            if !crate::diag::has_errors(&diags) {
                diags.push(
                    Diagnostic::error(codes::SYNTAX, "file declares no model")
                        .with_span(Some(SourceSpan::new(path, 1, 1, 1))),
                );
            }
            Parsed {
                value: None,
                diagnostics: diags,
            }
        }
    }
}

fn header(stmt: &Stmt, path: &str) -> PResult<ArchModel> {
    let mut c = Cursor::new(stmt, path);
    c.expect_keyword("model")?;
    let name = c.name()?;
    c.expect_keyword("kind")?;
    let k = c.ident()?;
    let kind = ModelKind::parse(&k).ok_or_else(|| c.error(format!("unknown model kind `{k}`")))?;
    c.expect_keyword("level")?;
    let level = c.name()?;
    let mut uses = Vec::new();
    if c.eat_keyword("uses") {
        uses.push(c.name()?);
        while c.eat(&Tok::Comma) {
            uses.push(c.name()?);
        }
    }
    c.done()?;
    let mut m = ArchModel::new(name, kind, level);
    m.uses = uses;
    m.origin = stmt.origin(path);
    Ok(m)
}

impl Ctx<'_> {
    fn check_uses(&mut self, kind: ModelKind, stmt: &Stmt) {
        for u in &self.uses {
            match self.profiles.profile(u) {
                None => self.diags.push(
                    Diagnostic::error(codes::UNRESOLVED, format!("model uses unknown profile `{u}`"))
                        .with_span(Some(stmt.span(self.file))),
                ),
                Some(p) if p.kind.is_some_and(|k| k != kind) => self.diags.push(
                    Diagnostic::error(
                        codes::KIND_MISMATCH,
                        format!("{kind} model cannot use {} profile `{u}`", p.kind.unwrap()),
                    )
                    .with_span(Some(stmt.span(self.file))),
                ),
                Some(_) => {}
            }
        }
    }

    fn body(&mut self, m: &mut ArchModel, stmts: &[Stmt]) {
        let mut names = HashSet::new();
        let mut pending: Vec<(&Stmt, ArchConnector)> = Vec::new();
        for s in stmts {
            match s.head() {
                Some("component") => {
                    if let Some(e) = self.component(s) {
                        if names.insert(e.name.clone()) {
                            m.elements.push(e);
                        } else {
                            self.duplicate(&e.name, &e.origin);
                        }
                    }
                }
                Some("connect") => {
                    if let Some(c) = self.connector(s) {
                        pending.push((s, c));
                    }
                }
                _ => self.diags.push(unexpected_statement(s, self.file, "a model")),
            }
        }
        for (s, c) in pending {
            let mut ok = true;
            for end in [&c.source, &c.target] {
                if m.port(end).is_none() {
                    ok = false;
                    let what = if m.element(&end.element).is_some() { "port" } else { "element" };
                    self.diags.push(
                        Diagnostic::error(
                            codes::UNRESOLVED,
                            format!("connector end `{}.{end}` does not resolve ({what} not found)", quote_name(&m.name)),
                        )
                        .with_span(Some(s.span(self.file))),
                    );
                }
            }
            if ok {
                m.connectors.push(c);
            }
        }
    }

    fn duplicate(&mut self, name: &str, origin: &Origin) {
        self.diags.push(
            Diagnostic::error(codes::DUPLICATE, format!("`{name}` is already declared in this scope")).at(origin),
        );
    }

    fn stereotype_list(&self, c: &mut Cursor) -> PResult<Vec<(String, SourceSpan)>> {
        let mut out = Vec::new();
        if c.eat(&Tok::Colon) {
            loop {
                let span = c.here();
                out.push((c.name()?, span));
                if !c.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Apply the listed stereotypes, routing each binding to the first
    /// stereotype that declares the attribute.
    fn apply<T: Stereotyped>(
        &mut self,
        target: &mut T,
        stereos: &[(String, SourceSpan)],
        bindings: Vec<(String, Value, SourceSpan)>,
    ) {
        let mut resolved = Vec::new();
        for (name, span) in stereos {
            let known = self
                .profiles
                .profile_of(name)
                .is_some_and(|p| self.uses.iter().any(|u| u == p));
            match self.profiles.effective(name).filter(|_| known) {
                Some(e) => resolved.push(e),
                None => self.diags.push(
                    Diagnostic::error(
                        codes::UNKNOWN_STEREOTYPE,
                        format!("unknown stereotype `{name}` (not declared in the profiles used by `{}`)", self.model),
                    )
                    .with_span(Some(span.clone())),
                ),
            }
        }
        let mut per: Vec<Vec<(String, AttrValue)>> = vec![Vec::new(); resolved.len()];
        let mut seen = HashSet::new();
        for (name, value, span) in bindings {
            if !seen.insert(name.clone()) {
                self.diags.push(
                    Diagnostic::error(codes::DUPLICATE, format!("attribute `{name}` is bound twice"))
                        .with_span(Some(span)),
                );
                continue;
            }
            let Some(i) = resolved.iter().position(|e| e.attribute(&name).is_some()) else {
                if resolved.len() == stereos.len() {
                    self.diags.push(
                        Diagnostic::error(
                            codes::INVALID_VALUE,
                            format!("no applied stereotype declares attribute `{name}`"),
                        )
                        .with_span(Some(span)),
                    );
                }
                continue;
            };
            let kind = &resolved[i].attribute(&name).unwrap().kind;
            match attr_value(&value, kind) {
                Ok(v) => per[i].push((name, v)),
                Err(msg) => self.diags.push(
                    Diagnostic::error(codes::INVALID_VALUE, format!("attribute `{name}`: {msg}"))
                        .with_span(Some(span)),
                ),
            }
        }
        for ((e, b), (_, span)) in resolved.into_iter().zip(per).zip(stereos) {
            if let Err(err) = apply_stereotype(target, e, b) {
                let code = match err {
                    ApplyError::BaseKindMismatch { .. } => codes::KIND_MISMATCH,
                    ApplyError::Abstract(_) => codes::ABSTRACT,
                    ApplyError::BindingKind { .. } | ApplyError::UnknownAttribute { .. } => codes::INVALID_VALUE,
                };
                self.diags
                    .push(Diagnostic::error(code, err.to_string()).with_span(Some(span.clone())));
            }
        }
    }

    fn binding(&mut self, s: &Stmt) -> Option<(String, Value, SourceSpan)> {
        match super::syntax::key_value(s, self.file) {
            Ok((k, v)) => Some((k, v, s.span(self.file))),
            Err(d) => {
                self.diags.push(d);
                None
            }
        }
    }

    fn component(&mut self, s: &Stmt) -> Option<ArchElement> {
        let mut c = Cursor::new(s, self.file);
        let head = (|| {
            c.expect_keyword("component")?;
            let name = c.name()?;
            let st = self.stereotype_list(&mut c)?;
            c.done()?;
            Ok((name, st))
        })();
        let (name, stereos) = match head {
            Ok(h) => h,
            Err(d) => {
                self.diags.push(d);
                return None;
            }
        };
        let mut e = ArchElement::new(name);
        e.origin = s.origin(self.file);
        let mut bindings = Vec::new();
        let mut names = HashSet::new();
        for inner in s.block.as_deref().unwrap_or_default() {
            match inner.head() {
                Some("component") => {
                    if let Some(child) = self.component(inner) {
                        if names.insert(child.name.clone()) {
                            e.children.push(child);
                        } else {
                            self.duplicate(&child.name, &child.origin);
                        }
                    }
                }
                Some("port") => {
                    if let Some(p) = self.port(inner) {
                        if names.insert(p.name.clone()) {
                            e.ports.push(p);
                        } else {
                            self.duplicate(&p.name, &p.origin);
                        }
                    }
                }
                Some(_) if inner.tokens.get(1).map(|t| &t.tok) == Some(&Tok::Eq) => {
                    bindings.extend(self.binding(inner));
                }
                _ => self.diags.push(unexpected_statement(inner, self.file, "a component")),
            }
        }
        self.apply(&mut e, &stereos, bindings);
        Some(e)
    }

    fn port(&mut self, s: &Stmt) -> Option<ArchPort> {
        let mut c = Cursor::new(s, self.file);
        let head = (|| {
            c.expect_keyword("port")?;
            let name = c.name()?;
            let d = c.ident()?;
            let dir = Direction::parse(&d)
                .ok_or_else(|| c.error(format!("expected a direction (in, out, inout), found `{d}`")))?;
            let st = self.stereotype_list(&mut c)?;
            c.done()?;
            Ok((name, dir, st))
        })();
        let (name, dir, stereos) = match head {
            Ok(h) => h,
            Err(d) => {
                self.diags.push(d);
                return None;
            }
        };
        let mut p = ArchPort::new(name, dir);
        p.origin = s.origin(self.file);
        let bindings = self.bindings_block(s, "a port");
        self.apply(&mut p, &stereos, bindings);
        Some(p)
    }

    fn bindings_block(&mut self, s: &Stmt, what: &str) -> Vec<(String, Value, SourceSpan)> {
        let mut out = Vec::new();
        for inner in s.block.as_deref().unwrap_or_default() {
            if inner.tokens.get(1).map(|t| &t.tok) == Some(&Tok::Eq) {
                out.extend(self.binding(inner));
            } else {
                self.diags.push(unexpected_statement(inner, self.file, what));
            }
        }
        out
    }

    fn connector(&mut self, s: &Stmt) -> Option<ArchConnector> {
        let mut c = Cursor::new(s, self.file);
        let head = (|| {
            c.expect_keyword("connect")?;
            let mut label = None;
            let mut src = c.path()?;
            if c.eat(&Tok::Eq) {
                if src.len() != 1 {
                    return Err(c.error("a connector label must be a single name"));
                }
                label = src.pop();
                src = c.path()?;
            }
            let src_span = c.here();
            c.expect(Tok::Arrow)?;
            let dst = c.path()?;
            let st = self.stereotype_list(&mut c)?;
            c.done()?;
            let source = PortRef::from_segments(&src)
                .ok_or_else(|| Diagnostic::error(codes::SYNTAX, "connector source must be Element.Port").with_span(Some(src_span.clone())))?;
            let target = PortRef::from_segments(&dst)
                .ok_or_else(|| c.error("connector target must be Element.Port"))?;
            Ok((label, source, target, st))
        })();
        let (label, source, target, stereos) = match head {
            Ok(h) => h,
            Err(d) => {
                self.diags.push(d);
                return None;
            }
        };
        let mut conn = ArchConnector::new(source, target);
        conn.name = label;
        conn.origin = s.origin(self.file);
        let bindings = self.bindings_block(s, "a connector");
        self.apply(&mut conn, &stereos, bindings);
        Some(conn)
    }
}

fn write_stereotypes(out: &mut String, applied: &[AppliedStereotype]) {
    if !applied.is_empty() {
        let names: Vec<String> = applied.iter().map(|a| quote_name(&a.stereotype).into_owned()).collect();
        write!(out, " : {}", names.join(", ")).unwrap();
    }
}

fn authored(applied: &[AppliedStereotype]) -> Vec<(&str, &AttrValue)> {
    applied
        .iter()
        .flat_map(|a| a.bindings.iter())
        .filter(|b| !b.defaulted)
        .map(|b| (b.name.as_str(), &b.value))
        .collect()
}

fn write_bindings(out: &mut String, indent: usize, bindings: &[(&str, &AttrValue)]) {
    for (name, value) in bindings {
        writeln!(out, "{:indent$}{} = {}", "", quote_name(name), attr_value_text(value)).unwrap();
    }
}

fn write_element(out: &mut String, e: &ArchElement, indent: usize) {
    write!(out, "{:indent$}component {}", "", quote_name(&e.name)).unwrap();
    write_stereotypes(out, &e.stereotypes);
    let bindings = authored(&e.stereotypes);
    if bindings.is_empty() && e.ports.is_empty() && e.children.is_empty() {
        out.push('\n');
        return;
    }
    out.push_str(" {\n");
    write_bindings(out, indent + 2, &bindings);
    for p in &e.ports {
        write!(out, "{:w$}port {} {}", "", quote_name(&p.name), p.direction, w = indent + 2).unwrap();
        write_stereotypes(out, &p.stereotypes);
        let pb = authored(&p.stereotypes);
        if pb.is_empty() {
            out.push('\n');
        } else {
            out.push_str(" {\n");
            write_bindings(out, indent + 4, &pb);
            writeln!(out, "{:w$}}}", "", w = indent + 2).unwrap();
        }
    }
    for c in &e.children {
        write_element(out, c, indent + 2);
    }
    writeln!(out, "{:indent$}}}", "").unwrap();
}

/// Canonical text: bindings, ports, then children inside each component;
/// connectors after all components. Defaulted attribute values are omitted.
pub fn serialize_model(m: &ArchModel) -> String {
    let mut out = format!("model {} kind {} level {}", quote_name(&m.name), m.kind, quote_name(&m.level));
    if !m.uses.is_empty() {
        let u: Vec<String> = m.uses.iter().map(|u| quote_name(u).into_owned()).collect();
        write!(out, " uses {}", u.join(", ")).unwrap();
    }
    if m.elements.is_empty() && m.connectors.is_empty() {
        out.push_str(" {}\n");
        return out;
    }
    out.push_str(" {\n");
    for e in &m.elements {
        write_element(&mut out, e, 2);
    }
    if !m.elements.is_empty() && !m.connectors.is_empty() {
        out.push('\n');
    }
    for c in &m.connectors {
        out.push_str("  connect ");
        if let Some(n) = &c.name {
            write!(out, "{} = ", quote_string(n)).unwrap();
        }
        write!(out, "{} -> {}", c.source, c.target).unwrap();
        write_stereotypes(&mut out, &c.stereotypes);
        let b = authored(&c.stereotypes);
        if b.is_empty() {
            out.push('\n');
        } else {
            out.push_str(" {\n");
            write_bindings(&mut out, 4, &b);
            out.push_str("  }\n");
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_profile;

    fn profiles() -> ProfileSet {
        let p = parse_profile(
            r#"profile Phys kind physical {
  abstract stereotype PhysicalComponent : component {
    attr description: string
  }
  stereotype LRU extends PhysicalComponent {
    attr fdal: dal optional
    attr weight: real optional = 1.5
  }
  stereotype DiscretePort : port
  stereotype A825Port : port
  stereotype DiscreteLink : connector endpoints DiscretePort
}
"#,
            "p.prof",
        );
        let other = parse_profile("profile Other {\n stereotype Widget : component\n}\n", "o.prof");
        ProfileSet::build(vec![p.value.unwrap().profile, other.value.unwrap().profile]).0
    }

    const FRAGMENT: &str = r#"model Phys kind physical level system uses Phys {
  component FCC_01 : LRU {
    description = "flight control computer"
    port DIS_Out_01 out : DiscretePort
  }
  component AP_Disconnect : LRU {
    description = "disconnect unit"
    fdal = A
    port DIS_In_04 in : DiscretePort
  }
  connect FCC_01.DIS_Out_01 -> AP_Disconnect.DIS_In_04 : DiscreteLink
}
"#;

    #[test]
    fn fragment_has_one_connector() {
        let p = parse_model(FRAGMENT, "m.arch", &profiles());
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        let m = p.value.unwrap();
        assert_eq!(m.connectors.len(), 1);
        assert_eq!(m.elements[0].stereotypes[0].bindings.len(), 2);
        assert!(m.elements[0].stereotypes[0].bindings[1].defaulted);
    }

    #[test]
    fn missing_port_names_the_path() {
        let text = FRAGMENT.replace("AP_Disconnect.DIS_In_04", "AP_Disconnect.DIS_In_09");
        let p = parse_model(&text, "m.arch", &profiles());
        assert!(p.value.is_none());
        assert!(p.diagnostics[0].message.contains("Phys.AP_Disconnect.DIS_In_09"));
        assert_eq!(p.diagnostics[0].code, codes::UNRESOLVED);
    }

    #[test]
    fn stereotype_from_unlisted_profile() {
        let text = "model M kind physical level system uses Phys {\n  component W : Widget\n}\n";
        let p = parse_model(text, "m.arch", &profiles());
        assert_eq!(p.diagnostics.len(), 1);
        assert_eq!(p.diagnostics[0].code, codes::UNKNOWN_STEREOTYPE);
    }

    #[test]
    fn duplicate_siblings_and_abstract() {
        let text = "model M kind physical level system uses Phys {\n  component A : PhysicalComponent\n  component A : LRU\n}\n";
        let p = parse_model(text, "m.arch", &profiles());
        let c: Vec<_> = p.diagnostics.iter().map(|d| d.code.as_str()).collect();
        assert!(c.contains(&codes::ABSTRACT));
        assert!(c.contains(&codes::DUPLICATE));
    }

    #[test]
    fn independent_errors_are_all_reported() {
        let text = "model M kind physical level system uses Phys {\n  component A : LRU {\n    port p sideways\n  }\n  component B : Nope\n  bogus x\n  connect A.q -> B.r\n}\n";
        let p = parse_model(text, "m.arch", &profiles());
        assert!(p.diagnostics.len() >= 4, "{:?}", p.diagnostics);
    }

    #[test]
    fn empty_model_is_header_only() {
        let m = ArchModel::new("Empty", ModelKind::Functional, "system");
        assert_eq!(serialize_model(&m), "model Empty kind functional level system {}\n");
    }

    #[test]
    fn round_trip_preserves_quotes() {
        let p = profiles();
        let m = parse_model(FRAGMENT, "m.arch", &p).value.unwrap();
        let text = serialize_model(&m);
        assert_eq!(text, FRAGMENT.replace("  connect", "\n  connect"));
        assert_eq!(parse_model(&text, "m.arch", &p).value.unwrap(), m);

        let mut q = ArchModel::new("F", ModelKind::Physical, "system");
        q.uses.push("Phys".into());
        q.elements.push(ArchElement::new("Engage/Disengage Autopilot Surface Control"));
        let t = serialize_model(&q);
        assert!(t.contains("\"Engage/Disengage Autopilot Surface Control\""));
        assert_eq!(parse_model(&t, "f.arch", &p).value.unwrap(), q);
    }
}
