use std::collections::{HashMap, HashSet, VecDeque};

use regex::Regex;

use super::{Category, Finding, Rule};
use crate::diag::{Origin, Severity};
use crate::model::{AppliedStereotype, ArchModel, BaseKind, ElementPath, ModelKind, PortRef, Stereotyped};
use crate::project::Project;
use crate::requirements::{audit_derived_and_assumptions, coverage_report, link_cycle_diagnostics};
use crate::safety::{sync_fpm, ATOMIC_FUNCTION};

pub const FUNCTIONAL_EXCHANGE: &str = "FunctionalExchange";
/// Port stereotypes allowed to be `inout`.
pub const BUS_PORT: &str = "BusPort";

struct Builtin {
    code: &'static str,
    category: Category,
    severity: Severity,
    description: &'static str,
    check: fn(&Project, &mut Vec<Finding>),
}

impl Rule for Builtin {
    fn code(&self) -> &str {
        self.code
    }
    fn category(&self) -> Category {
        self.category
    }
    fn default_severity(&self) -> Severity {
        self.severity
    }
    fn description(&self) -> &str {
        self.description
    }
    fn check(&self, project: &Project, out: &mut Vec<Finding>) {
        (self.check)(project, out)
    }
}

pub fn builtin_rules() -> Vec<Box<dyn Rule>> {
    use Category::{Model, Process};
    use Severity::{Error, Warning};
    let b = |code, category, severity, description, check| -> Box<dyn Rule> {
        Box::new(Builtin {
            code,
            category,
            severity,
            description,
            check,
        })
    };
    vec![
        b("P-TRACE-001", Process, Error, "functions and items need an inbound satisfied_by link", trace_break),
        b("P-NAME-001", Process, Warning, "element and port names follow the configured nomenclature", naming),
        b("P-ATTR-001", Process, Error, "required stereotype attributes are set", missing_attributes),
        b("P-CONN-001", Process, Warning, "unconnected ports carry a justification", unconnected_ports),
        b("P-ALLOC-001", Process, Error, "atomic functions are allocated to the physical architecture", unallocated),
        b("P-FPM-001", Process, Warning, "fault propagation models match their physical model", fpm_out_of_sync),
        b("R-DRV-001", Process, Error, "derived requirements link to the physical architecture", |p, o| audit(p, o, "R-DRV-001")),
        b("R-DRV-002", Process, Error, "derived requirements are justified", |p, o| audit(p, o, "R-DRV-002")),
        b("R-VAL-001", Process, Error, "derived requirements and assumptions are validated", |p, o| audit(p, o, "R-VAL-001")),
        b("R-ASM-001", Process, Error, "assumptions are justified", |p, o| audit(p, o, "R-ASM-001")),
        b("R-LINK-001", Process, Error, "trace links are acyclic", |p, o| o.extend(link_cycle_diagnostics(p).into_iter().map(Finding::from))),
        b("M-PORT-001", Model, Error, "connector ends carry the port stereotype the connector requires", port_kinds),
        b("M-DIR-001", Model, Error, "connectors run from a sending to a receiving port; inout only on bus ports", directions),
        b("M-STEREO-001", Model, Error, "every object carries exactly one stereotype of its kind", stereotype_use),
        b("M-EXCH-001", Model, Error, "functional exchanges are realized by a physical connector path", exchanges),
    ]
}

fn audit(p: &Project, out: &mut Vec<Finding>, code: &str) {
    out.extend(audit_derived_and_assumptions(p).into_iter().filter(|d| d.code == code).map(Finding::from));
}

fn is_a(p: &Project, applied: &[AppliedStereotype], ancestor: &str) -> bool {
    applied.iter().any(|a| p.profiles.is_a(&a.stereotype, ancestor))
}

fn trace_break(p: &Project, out: &mut Vec<Finding>) {
    for path in coverage_report(p).uncovered {
        let origin = p.element(&path).map(|(_, e)| e.origin.clone()).unwrap_or_default();
        out.push(Finding::new(format!("{path} is not satisfied by any requirement")).at(&origin));
    }
}

fn naming(p: &Project, out: &mut Vec<Finding>) {
    let rules: Vec<(&str, Regex)> = p
        .manifest
        .naming
        .iter()
        .filter_map(|(s, re)| Regex::new(re).ok().map(|r| (s.as_str(), r)))
        .collect();
    if rules.is_empty() {
        return;
    }
    let mut check = |what: String, name: &str, applied: &[AppliedStereotype], origin: &Origin| {
        for (s, re) in &rules {
            if is_a(p, applied, s) && !re.is_match(name) {
                out.push(Finding::new(format!("{what} does not match the {s} naming pattern `{}`", re.as_str())).at(origin));
            }
        }
    };
    for m in &p.models {
        for (segs, e) in m.walk() {
            let path = m.path_of(&segs);
            check(format!("element {path}"), &e.name, &e.stereotypes, &e.origin);
            for port in &e.ports {
                check(format!("port {}", path.child(&port.name)), &port.name, &port.stereotypes, &port.origin);
            }
        }
    }
}

fn missing_attributes(p: &Project, out: &mut Vec<Finding>) {
    let mut check = |what: String, applied: &[AppliedStereotype], origin: &Origin| {
        for a in applied {
            let Some(eff) = p.profiles.effective(&a.stereotype) else { continue };
            for attr in eff.attributes.iter().filter(|x| x.def.required) {
                if a.value(&attr.def.name).is_none() {
                    out.push(
                        Finding::new(format!("{what}: required attribute `{}` of {} is not set", attr.def.name, a.stereotype))
                            .at(origin),
                    );
                }
            }
        }
    };
    for m in &p.models {
        for (segs, e) in m.walk() {
            let path = m.path_of(&segs);
            check(format!("element {path}"), &e.stereotypes, &e.origin);
            for port in &e.ports {
                check(format!("port {}", path.child(&port.name)), &port.stereotypes, &port.origin);
            }
        }
        for c in &m.connectors {
            check(format!("connector {}", c.label()), &c.stereotypes, &c.origin);
        }
    }
}

fn unconnected_ports(p: &Project, out: &mut Vec<Finding>) {
    for m in &p.models {
        for (segs, e) in m.walk() {
            for port in &e.ports {
                let r = PortRef::new(segs.clone(), port.name.clone());
                if m.connectors_at(&r).next().is_none() && port.value("justification").is_none() {
                    out.push(
                        Finding::new(format!("port {} is unconnected and not justified", m.path_of(&segs).child(&port.name)))
                            .at(&port.origin),
                    );
                }
            }
        }
    }
}

fn unallocated(p: &Project, out: &mut Vec<Finding>) {
    if p.models_of(ModelKind::Physical).next().is_none() {
        return;
    }
    for m in p.models_of(ModelKind::Functional) {
        for (segs, e) in m.walk() {
            if !is_a(p, &e.stereotypes, ATOMIC_FUNCTION) {
                continue;
            }
            let path = m.path_of(&segs);
            if p.allocated_to(&path).is_empty() {
                out.push(Finding::new(format!("function {path} is not allocated to a physical element")).at(&e.origin));
            }
        }
    }
}

fn fpm_out_of_sync(p: &Project, out: &mut Vec<Finding>) {
    for f in &p.fpms {
        let Some(m) = p.model(&f.model) else { continue };
        if let Ok((_, report)) = sync_fpm(f, m) {
            if !report.is_empty() {
                out.push(
                    Finding::new(format!(
                        "fpm for {} is out of date with the model ({} changes); run `fpm sync`",
                        f.model,
                        report.change_count()
                    ))
                    .at(&f.origin),
                );
            }
        }
    }
}

fn port_kinds(p: &Project, out: &mut Vec<Finding>) {
    for m in &p.models {
        for c in &m.connectors {
            for a in &c.stereotypes {
                let Some(required) = p.profiles.effective(&a.stereotype).and_then(|e| e.endpoint_constraint.as_deref()) else {
                    continue;
                };
                let ends: Vec<_> = [&c.source, &c.target].into_iter().filter_map(|r| m.port(r).map(|(_, port)| (r, port))).collect();
                let bad: Vec<String> = ends
                    .iter()
                    .filter(|(_, port)| !is_a(p, &port.stereotypes, required))
                    .map(|(r, port)| {
                        let has = port.stereotype_names().join(", ");
                        format!("{r} is {}", if has.is_empty() { "unstereotyped".to_string() } else { has })
                    })
                    .collect();
                if bad.is_empty() {
                    continue;
                }
                let mut f = Finding::new(format!(
                    "{} connector {} -> {} requires {required} ends: {}",
                    a.stereotype,
                    c.source,
                    c.target,
                    bad.join("; ")
                ))
                .at(&c.origin);
                for (_, port) in &ends {
                    f = f.related(&port.origin);
                }
                out.push(f);
            }
        }
    }
}

fn directions(p: &Project, out: &mut Vec<Finding>) {
    for m in &p.models {
        for (segs, e) in m.walk() {
            for port in &e.ports {
                if port.direction == crate::model::Direction::InOut && !is_a(p, &port.stereotypes, BUS_PORT) {
                    out.push(
                        Finding::new(format!("port {} is inout but is not a bus port", m.path_of(&segs).child(&port.name)))
                            .at(&port.origin),
                    );
                }
            }
        }
        for c in &m.connectors {
            let (Some((_, s)), Some((_, t))) = (m.port(&c.source), m.port(&c.target)) else { continue };
            let mut problems = Vec::new();
            if !s.direction.can_send() {
                problems.push(format!("source {} is an {} port", c.source, s.direction));
            }
            if !t.direction.can_receive() {
                problems.push(format!("target {} is an {} port", c.target, t.direction));
            }
            if !problems.is_empty() {
                out.push(
                    Finding::new(format!("connector {} -> {}: {}", c.source, c.target, problems.join(", ")))
                        .at(&c.origin)
                        .related(&s.origin)
                        .related(&t.origin),
                );
            }
        }
    }
}

fn stereotype_use(p: &Project, out: &mut Vec<Finding>) {
    let mut check = |what: String, kind: BaseKind, applied: &[AppliedStereotype], origin: &Origin| {
        let n = applied
            .iter()
            .filter(|a| p.profiles.effective(&a.stereotype).is_some_and(|e| e.base_kind == kind && !e.is_abstract))
            .count();
        if n != 1 {
            let names: Vec<&str> = applied.iter().map(|a| a.stereotype.as_str()).collect();
            let detail = if n == 0 { "none".to_string() } else { names.join(", ") };
            out.push(Finding::new(format!("{what} must carry exactly one {kind} stereotype, has {detail}")).at(origin));
        }
    };
    for m in &p.models {
        for (segs, e) in m.walk() {
            let path = m.path_of(&segs);
            check(format!("element {path}"), BaseKind::Component, &e.stereotypes, &e.origin);
            for port in &e.ports {
                check(format!("port {}", path.child(&port.name)), BaseKind::Port, &port.stereotypes, &port.origin);
            }
        }
        for c in &m.connectors {
            check(format!("connector {} -> {}", c.source, c.target), BaseKind::Connector, &c.stereotypes, &c.origin);
        }
    }
}

/// Undirected connector graph over port-owning elements of one model.
struct ConnectorGraph<'m> {
    adjacent: HashMap<&'m [String], Vec<&'m [String]>>,
}

impl<'m> ConnectorGraph<'m> {
    fn new(model: &'m ArchModel) -> Self {
        let mut adjacent: HashMap<&[String], Vec<&[String]>> = HashMap::new();
        for c in &model.connectors {
            let (a, b) = (c.source.element.as_slice(), c.target.element.as_slice());
            adjacent.entry(a).or_default().push(b);
            adjacent.entry(b).or_default().push(a);
        }
        Self { adjacent }
    }

    /// Nearest ancestor-or-self that is an end of some connector.
    fn representative<'a>(&self, segs: &'a [String]) -> &'a [String] {
        (1..=segs.len()).rev().map(|n| &segs[..n]).find(|s| self.adjacent.contains_key(s)).unwrap_or(segs)
    }

    fn reachable(&self, a: &[String], b: &[String]) -> bool {
        let (a, b) = (self.representative(a), self.representative(b));
        if a == b {
            return true;
        }
        let mut seen: HashSet<&[String]> = HashSet::from([a]);
        let mut queue = VecDeque::from([a]);
        while let Some(n) = queue.pop_front() {
            for &next in self.adjacent.get(n).into_iter().flatten() {
                if next == b {
                    return true;
                }
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        false
    }
}

/// Whether two physical elements are joined by a connector path. Elements
/// without connected ports are represented by their nearest ancestor that has
/// one.
pub fn exchange_realized(project: &Project, a: &ElementPath, b: &ElementPath) -> bool {
    if a.model != b.model {
        return false;
    }
    let Some(m) = project.model(&a.model) else { return false };
    ConnectorGraph::new(m).reachable(&a.segments, &b.segments)
}

fn exchanges(p: &Project, out: &mut Vec<Finding>) {
    for m in p.models_of(ModelKind::Functional) {
        for c in &m.connectors {
            if !is_a(p, &c.stereotypes, FUNCTIONAL_EXCHANGE) {
                continue;
            }
            let from = m.path_of(&c.source.element);
            let to = m.path_of(&c.target.element);
            for pa in p.allocated_to(&from) {
                for pb in p.allocated_to(&to) {
                    if pa == pb || exchange_realized(p, &pa, &pb) {
                        continue;
                    }
                    out.push(
                        Finding::new(format!(
                            "exchange {} from {from} to {to} is not realized: no physical connector path between {pa} and {pb}",
                            c.label()
                        ))
                        .at(&c.origin),
                    );
                }
            }
        }
    }
}
