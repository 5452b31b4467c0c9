use std::collections::HashSet;
use std::fmt::Write;

use super::lexer::Tok;
use super::syntax::{parse_statements, unexpected_statement, Cursor, PResult, Stmt, Value};
use super::Parsed;
use crate::diag::{codes, Diagnostic, SourceSpan};
use crate::model::{format_real, join_names, quote_name, Direction, PortRef};
use crate::safety::{BasicEvent, Expr, Fpm, FpmComponent, FpmPort, OutFailure, PropagationEdge, TopEvent};

pub fn parse_fpm(text: &str, path: &str) -> Parsed<Fpm> {
    let tree = parse_statements(text, path);
    let mut diags = tree.diagnostics;
    let mut fpm: Option<Fpm> = None;
    for stmt in &tree.stmts {
        if stmt.head() != Some("fpm") {
            diags.push(unexpected_statement(stmt, path, "an FPM file"));
            continue;
        }
        if fpm.is_some() {
            diags.push(
                Diagnostic::error(codes::DUPLICATE, "only one fpm may be declared per file")
                    .with_span(Some(stmt.span(path))),
            );
            continue;
        }
        let mut c = Cursor::new(stmt, path);
        let head = (|| {
            c.expect_keyword("fpm")?;
            let n = c.name()?;
            c.done()?;
            Ok(n)
        })();
        match head {
            Ok(name) => {
                let mut f = Fpm::new(name);
                f.origin = stmt.origin(path);
                body(&mut f, stmt.block.as_deref().unwrap_or_default(), path, &mut diags);
                fpm = Some(f);
            }
            Err(d) => diags.push(d),
        }
    }
    match fpm {
        Some(f) => Parsed::new(f, diags),
        None => {
            if !crate::diag::has_errors(&diags) {
                diags.push(
                    Diagnostic::error(codes::SYNTAX, "file declares no fpm")
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

fn dup(diags: &mut Vec<Diagnostic>, stmt: &Stmt, path: &str, what: String) {
    diags.push(
        Diagnostic::error(codes::DUPLICATE, format!("{what} is declared twice")).with_span(Some(stmt.span(path))),
    );
}

fn body(f: &mut Fpm, stmts: &[Stmt], path: &str, diags: &mut Vec<Diagnostic>) {
    for s in stmts {
        match s.head() {
            Some("component") => match component(s, path, diags) {
                Ok(c) => {
                    if f.component(&c.path).is_some() {
                        dup(diags, s, path, format!("component `{}`", join_names(&c.path)));
                    } else {
                        f.components.push(c);
                    }
                }
                Err(d) => diags.push(d),
            },
            Some("edge") => match edge(s, path) {
                Ok(e) => f.edges.push(e),
                Err(d) => diags.push(d),
            },
            Some("top_event") => {
                let mut c = Cursor::new(s, path);
                let r = (|| {
                    c.expect_keyword("top_event")?;
                    let name = c.name()?;
                    c.expect(Tok::Eq)?;
                    let expr = expr(&mut c)?;
                    c.done()?;
                    Ok(TopEvent {
                        name,
                        expr,
                        origin: s.origin(path),
                    })
                })();
                match r {
                    Ok(t) if f.top_event(&t.name).is_some() => dup(diags, s, path, format!("top event `{}`", t.name)),
                    Ok(t) => f.top_events.push(t),
                    Err(d) => diags.push(d),
                }
            }
            _ => diags.push(unexpected_statement(s, path, "an fpm")),
        }
    }
}

fn component(stmt: &Stmt, path: &str, diags: &mut Vec<Diagnostic>) -> PResult<FpmComponent> {
    let mut c = Cursor::new(stmt, path);
    c.expect_keyword("component")?;
    let p = c.path()?;
    c.done()?;
    let mut comp = FpmComponent::new(p);
    comp.origin = stmt.origin(path);
    let mut names = HashSet::new();
    for s in stmt.block.as_deref().unwrap_or_default() {
        let mut c = Cursor::new(s, path);
        let r: PResult<()> = (|| {
            match s.head() {
                Some("port") => {
                    c.expect_keyword("port")?;
                    let name = c.name()?;
                    let d = c.ident()?;
                    let direction = Direction::parse(&d).ok_or_else(|| c.error(format!("unknown direction `{d}`")))?;
                    c.done()?;
                    if comp.port(&name).is_some() {
                        dup(diags, s, path, format!("port `{name}`"));
                    } else {
                        comp.ports.push(FpmPort {
                            name,
                            direction,
                            origin: s.origin(path),
                        });
                    }
                }
                Some("basic_event") => {
                    c.expect_keyword("basic_event")?;
                    let name = c.name()?;
                    let mut rate = None;
                    if c.eat_keyword("rate") {
                        rate = Some(match c.value()? {
                            Value::Real(r) if r >= 0.0 => r,
                            Value::Int(i) if i >= 0 => i as f64,
                            _ => return Err(c.error("rate must be a non-negative number")),
                        });
                    }
                    c.done()?;
                    if !names.insert(name.clone()) {
                        dup(diags, s, path, format!("`{name}`"));
                    } else {
                        comp.basic_events.push(BasicEvent {
                            name,
                            rate,
                            origin: s.origin(path),
                        });
                    }
                }
                Some("out_failure") => {
                    c.expect_keyword("out_failure")?;
                    let mut target = c.path()?;
                    if target.len() > 2 {
                        return Err(c.error("out_failure names `Mode` or `Port.Mode`"));
                    }
                    c.expect(Tok::Eq)?;
                    let e = expr(&mut c)?;
                    c.done()?;
                    let mode = target.pop().unwrap();
                    let port = target.pop();
                    let key = format!("{port:?}/{mode}");
                    if port.is_none() && !names.insert(mode.clone()) || port.is_some() && !names.insert(key) {
                        dup(diags, s, path, format!("out_failure `{mode}`"));
                    } else {
                        comp.out_failures.push(OutFailure {
                            port,
                            mode,
                            expr: e,
                            origin: s.origin(path),
                        });
                    }
                }
                _ => return Err(unexpected_statement(s, path, "an fpm component")),
            }
            Ok(())
        })();
        if let Err(d) = r {
            diags.push(d);
        }
    }
    Ok(comp)
}

fn edge(stmt: &Stmt, path: &str) -> PResult<PropagationEdge> {
    let mut c = Cursor::new(stmt, path);
    c.expect_keyword("edge")?;
    let src = c.path()?;
    let bidirectional = if c.eat(&Tok::BiArrow) {
        true
    } else {
        c.expect(Tok::Arrow)?;
        false
    };
    let dst = c.path()?;
    c.done()?;
    let end = |segs: &[String]| PortRef::from_segments(segs).ok_or_else(|| c.error("edge ends must be Component.Port"));
    Ok(PropagationEdge {
        source: end(&src)?,
        target: end(&dst)?,
        bidirectional,
        origin: stmt.origin(path),
    })
}

fn expr(c: &mut Cursor) -> PResult<Expr> {
    if let Some(Tok::Ident(k)) = c.peek() {
        if (k == "AND" || k == "OR") && c.peek_at(1) == Some(&Tok::LParen) {
            let and = k == "AND";
            c.ident()?;
            c.expect(Tok::LParen)?;
            let mut children = vec![expr(c)?];
            while c.eat(&Tok::Comma) {
                children.push(expr(c)?);
            }
            c.expect(Tok::RParen)?;
            return Ok(if and { Expr::And(children) } else { Expr::Or(children) });
        }
        if k == "in_failure" {
            c.ident()?;
            let mut p = c.path()?;
            if p.len() != 2 {
                return Err(c.error("in_failure names `Port.Mode`"));
            }
            let mode = p.pop().unwrap();
            return Ok(Expr::In {
                port: p.pop().unwrap(),
                mode,
            });
        }
    }
    Ok(Expr::Ref(c.path()?))
}

pub fn serialize_fpm(f: &Fpm) -> String {
    let mut out = format!("fpm {}", quote_name(&f.model));
    if f.components.is_empty() && f.edges.is_empty() && f.top_events.is_empty() {
        out.push_str(" {}\n");
        return out;
    }
    out.push_str(" {\n");
    for c in &f.components {
        write!(out, "  component {}", join_names(&c.path)).unwrap();
        if c.ports.is_empty() && c.basic_events.is_empty() && c.out_failures.is_empty() {
            out.push('\n');
            continue;
        }
        out.push_str(" {\n");
        for p in &c.ports {
            writeln!(out, "    port {} {}", quote_name(&p.name), p.direction).unwrap();
        }
        for b in &c.basic_events {
            write!(out, "    basic_event {}", quote_name(&b.name)).unwrap();
            if let Some(r) = b.rate {
                write!(out, " rate {}", format_real(r)).unwrap();
            }
            out.push('\n');
        }
        for o in &c.out_failures {
            writeln!(out, "    out_failure {} = {}", o.label(), o.expr).unwrap();
        }
        out.push_str("  }\n");
    }
    for e in &f.edges {
        let arrow = if e.bidirectional { "<->" } else { "->" };
        writeln!(out, "  edge {} {arrow} {}", e.source, e.target).unwrap();
    }
    for t in &f.top_events {
        writeln!(out, "  top_event {} = {}", quote_name(&t.name), t.expr).unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"fpm Phys {
  component FCC_01 {
    port DIS_Out_01 out
    basic_event CPU_Fail rate 1e-5
    out_failure DIS_Out_01.omission = OR(CPU_Fail, AND(a, "AND"))
  }
  component Autopilot.AP_Disconnect {
    port DIS_In_04 in
    port A825_02 inout
    out_failure stuck = in_failure DIS_In_04.omission
  }
  edge FCC_01.DIS_Out_01 -> Autopilot.AP_Disconnect.DIS_In_04
  edge FCC_01.A825_01 <-> Autopilot.AP_Disconnect.A825_02
  top_event InabilityToDisengage = Autopilot.AP_Disconnect.stuck
}
"#;

    #[test]
    fn parses_and_round_trips() {
        let p = parse_fpm(TEXT, "f.fpm");
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        let f = p.value.unwrap();
        assert_eq!(f.components.len(), 2);
        assert!(f.edges[1].bidirectional);
        assert_eq!(f.components[0].basic_events[0].rate, Some(1e-5));
        assert_eq!(serialize_fpm(&f), TEXT);
    }

    #[test]
    fn errors_do_not_stop_parsing() {
        let text = "fpm P {\n component A {\n  out_failure x = AND()\n  port p up\n }\n edge A -> B\n top_event T = \n}\n";
        let p = parse_fpm(text, "f.fpm");
        assert!(p.diagnostics.len() >= 4, "{:?}", p.diagnostics);
    }
}
