//! Fault propagation models shaped like a physical architecture.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Origin;
use crate::model::{join_names, ArchElement, ArchModel, Direction, PortRef};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpmPort {
    pub name: String,
    pub direction: Direction,
    #[serde(skip)]
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicEvent {
    pub name: String,
    /// Per flight hour. Carried, not used by the structural analysis.
    pub rate: Option<f64>,
    #[serde(skip)]
    pub origin: Origin,
}

/// Monotone failure logic. Inside a component, a one-segment reference
/// names a basic event or a component-level failure and a two-segment
/// reference names `Port.Mode`. In top events references are qualified
/// with the component path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Ref(Vec<String>),
    In { port: String, mode: String },
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn name(s: &str) -> Self {
        Expr::Ref(vec![s.to_string()])
    }

    /// Visit every leaf.
    pub fn leaves(&self) -> Vec<&Expr> {
        match self {
            Expr::And(c) | Expr::Or(c) => c.iter().flat_map(Expr::leaves).collect(),
            leaf => vec![leaf],
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Ref(p) => f.write_str(&join_names(p)),
            Expr::In { port, mode } => write!(f, "in_failure {}", join_names(&[port, mode])),
            Expr::And(c) | Expr::Or(c) => {
                f.write_str(if matches!(self, Expr::And(_)) { "AND(" } else { "OR(" })?;
                for (i, e) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutFailure {
    /// None for a component-level failure.
    pub port: Option<String>,
    pub mode: String,
    pub expr: Expr,
    #[serde(skip)]
    pub origin: Origin,
}

impl OutFailure {
    pub fn label(&self) -> String {
        match &self.port {
            Some(p) => join_names(&[p, &self.mode]),
            None => join_names(&[&self.mode]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpmComponent {
    pub path: Vec<String>,
    pub ports: Vec<FpmPort>,
    pub basic_events: Vec<BasicEvent>,
    pub out_failures: Vec<OutFailure>,
    #[serde(skip)]
    pub origin: Origin,
}

impl FpmComponent {
    pub fn new(path: Vec<String>) -> Self {
        Self {
            path,
            ports: Vec::new(),
            basic_events: Vec::new(),
            out_failures: Vec::new(),
            origin: Origin::none(),
        }
    }

    pub fn port(&self, name: &str) -> Option<&FpmPort> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn basic_event(&self, name: &str) -> Option<&BasicEvent> {
        self.basic_events.iter().find(|b| b.name == name)
    }

    pub fn out_failure(&self, port: Option<&str>, mode: &str) -> Option<&OutFailure> {
        self.out_failures
            .iter()
            .find(|o| o.port.as_deref() == port && o.mode == mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationEdge {
    pub source: PortRef,
    pub target: PortRef,
    /// Both ends are `inout`; failures travel both ways.
    pub bidirectional: bool,
    #[serde(skip)]
    pub origin: Origin,
}

impl PropagationEdge {
    fn key(&self) -> (PortRef, PortRef, bool) {
        (self.source.clone(), self.target.clone(), self.bidirectional)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopEvent {
    pub name: String,
    pub expr: Expr,
    #[serde(skip)]
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fpm {
    pub model: String,
    pub components: Vec<FpmComponent>,
    pub edges: Vec<PropagationEdge>,
    pub top_events: Vec<TopEvent>,
    #[serde(skip)]
    pub origin: Origin,
}

impl Fpm {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            components: Vec::new(),
            edges: Vec::new(),
            top_events: Vec::new(),
            origin: Origin::none(),
        }
    }

    pub fn component(&self, path: &[String]) -> Option<&FpmComponent> {
        self.components.iter().find(|c| c.path == path)
    }

    pub fn top_event(&self, name: &str) -> Option<&TopEvent> {
        self.top_events.iter().find(|t| t.name == name)
    }

    /// Split a qualified reference into (component, rest) using the longest
    /// component path that prefixes it.
    pub fn split_ref<'a>(&self, segs: &'a [String]) -> Option<(&FpmComponent, &'a [String])> {
        (1..segs.len())
            .rev()
            .find_map(|n| self.component(&segs[..n]).map(|c| (c, &segs[n..])))
    }
}

/// Components that get an FPM counterpart: leaves and any element that owns
/// ports, since connectors may end on a container's ports.
fn fpm_elements(model: &ArchModel) -> Vec<(Vec<String>, &ArchElement)> {
    model
        .walk()
        .into_iter()
        .filter(|(_, e)| e.is_leaf() || !e.ports.is_empty())
        .collect()
}

fn edge_for(model: &ArchModel, c: &crate::model::ArchConnector) -> PropagationEdge {
    let dir = |r: &PortRef| model.port(r).map(|(_, p)| p.direction);
    let bidirectional = dir(&c.source) == Some(Direction::InOut) && dir(&c.target) == Some(Direction::InOut);
    PropagationEdge {
        source: c.source.clone(),
        target: c.target.clone(),
        bidirectional,
        origin: Origin::none(),
    }
}

/// Structure only: components, ports and edges, no failure logic.
pub fn build_fpm(model: &ArchModel) -> Fpm {
    let mut fpm = Fpm::new(model.name.clone());
    for (path, e) in fpm_elements(model) {
        let mut c = FpmComponent::new(path);
        c.ports = e
            .ports
            .iter()
            .map(|p| FpmPort {
                name: p.name.clone(),
                direction: p.direction,
                origin: Origin::none(),
            })
            .collect();
        fpm.components.push(c);
    }
    fpm.edges = model.connectors.iter().map(|c| edge_for(model, c)).collect();
    fpm
}

/// An annotation whose anchor no longer exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orphan {
    /// Component path, or empty for a top event.
    pub component: Vec<String>,
    /// `out_failure Port.Mode` or `top_event Name`.
    pub annotation: String,
    pub reason: String,
    #[serde(skip)]
    pub origin: Origin,
}

impl fmt::Display for Orphan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.component.is_empty() {
            write!(f, "{}: {}", self.annotation, self.reason)
        } else {
            write!(f, "{} in {}: {}", self.annotation, join_names(&self.component), self.reason)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncReport {
    pub added_components: Vec<String>,
    pub removed_components: Vec<String>,
    pub added_ports: Vec<String>,
    pub removed_ports: Vec<String>,
    pub changed_ports: Vec<String>,
    pub added_edges: Vec<String>,
    pub removed_edges: Vec<String>,
    pub orphans: Vec<Orphan>,
}

impl SyncReport {
    pub fn is_empty(&self) -> bool {
        self.added_components.is_empty()
            && self.removed_components.is_empty()
            && self.added_ports.is_empty()
            && self.removed_ports.is_empty()
            && self.changed_ports.is_empty()
            && self.added_edges.is_empty()
            && self.removed_edges.is_empty()
            && self.orphans.is_empty()
    }

    pub fn change_count(&self) -> usize {
        self.added_components.len()
            + self.removed_components.len()
            + self.added_ports.len()
            + self.removed_ports.len()
            + self.changed_ports.len()
            + self.added_edges.len()
            + self.removed_edges.len()
            + self.orphans.len()
    }

    /// One change per line, grouped by kind.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let groups: [(&str, &Vec<String>); 7] = [
            ("added component", &self.added_components),
            ("removed component", &self.removed_components),
            ("added port", &self.added_ports),
            ("removed port", &self.removed_ports),
            ("changed port", &self.changed_ports),
            ("added edge", &self.added_edges),
            ("removed edge", &self.removed_edges),
        ];
        for (label, items) in groups {
            for i in items {
                out.push_str(&format!("{label} {i}\n"));
            }
        }
        for o in &self.orphans {
            out.push_str(&format!("orphan {o}\n"));
        }
        if out.is_empty() {
            out.push_str("in sync\n");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("FPM belongs to model `{fpm}`, not `{model}`")]
pub struct SyncError {
    pub fpm: String,
    pub model: String,
}

fn edge_text(e: &PropagationEdge) -> String {
    format!("{} {} {}", e.source, if e.bidirectional { "<->" } else { "->" }, e.target)
}

/// Bring the FPM structure in line with the model. Failure logic whose
/// anchors survive is kept; the rest is reported as orphaned and removed.
pub fn sync_fpm(fpm: &Fpm, model: &ArchModel) -> Result<(Fpm, SyncReport), SyncError> {
    if fpm.model != model.name {
        return Err(SyncError {
            fpm: fpm.model.clone(),
            model: model.name.clone(),
        });
    }
    let skeleton = build_fpm(model);
    let mut report = SyncReport::default();
    let mut out = Fpm::new(fpm.model.clone());
    out.origin = fpm.origin.clone();

    for c in &fpm.components {
        if skeleton.component(&c.path).is_none() {
            report.removed_components.push(join_names(&c.path));
        }
    }
    for sk in &skeleton.components {
        let name = join_names(&sk.path);
        let Some(old) = fpm.component(&sk.path) else {
            report.added_components.push(name);
            out.components.push(sk.clone());
            continue;
        };
        let mut c = old.clone();
        c.ports.clear();
        for p in &sk.ports {
            match old.port(&p.name) {
                Some(op) => {
                    if op.direction != p.direction {
                        report
                            .changed_ports
                            .push(format!("{name}.{} {} -> {}", p.name, op.direction, p.direction));
                    }
                    c.ports.push(FpmPort {
                        direction: p.direction,
                        ..op.clone()
                    });
                }
                None => {
                    report.added_ports.push(join_names(&[&name, &p.name]));
                    c.ports.push(p.clone());
                }
            }
        }
        for op in &old.ports {
            if sk.port(&op.name).is_none() {
                report.removed_ports.push(format!("{name}.{}", crate::model::quote_name(&op.name)));
            }
        }
        out.components.push(c);
    }

    let new_keys: HashSet<_> = skeleton.edges.iter().map(PropagationEdge::key).collect();
    for e in &fpm.edges {
        if !new_keys.contains(&e.key()) {
            report.removed_edges.push(edge_text(e));
        }
    }
    for e in &skeleton.edges {
        match fpm.edges.iter().find(|o| o.key() == e.key()) {
            Some(o) => out.edges.push(o.clone()),
            None => {
                report.added_edges.push(edge_text(e));
                out.edges.push(e.clone());
            }
        }
    }

    out.top_events = fpm.top_events.clone();
    report.orphans = prune_orphans(&mut out);
    Ok((out, report))
}

/// Remove failure logic referring to ports or failures that no longer exist,
/// repeating until nothing changes (removal can orphan dependants).
fn prune_orphans(fpm: &mut Fpm) -> Vec<Orphan> {
    let mut orphans = Vec::new();
    loop {
        let mut removed = false;
        let snapshot = fpm.clone();
        for c in &mut fpm.components {
            let comp = snapshot.component(&c.path).expect("same components");
            let mut kept = Vec::new();
            for of in std::mem::take(&mut c.out_failures) {
                let reason = if let Some(p) = of.port.as_deref().filter(|p| comp.port(p).is_none()) {
                    Some(format!("port `{p}` no longer exists"))
                } else {
                    local_dangling(comp, &of.expr)
                };
                match reason {
                    Some(reason) => {
                        removed = true;
                        orphans.push(Orphan {
                            component: c.path.clone(),
                            annotation: format!("out_failure {}", of.label()),
                            reason,
                            origin: of.origin.clone(),
                        });
                    }
                    None => kept.push(of),
                }
            }
            c.out_failures = kept;
        }
        let mut kept = Vec::new();
        for t in std::mem::take(&mut fpm.top_events) {
            match top_dangling(&snapshot, &t.expr) {
                Some(reason) => {
                    removed = true;
                    orphans.push(Orphan {
                        component: Vec::new(),
                        annotation: format!("top_event {}", crate::model::quote_name(&t.name)),
                        reason,
                        origin: t.origin.clone(),
                    });
                }
                None => kept.push(t),
            }
        }
        fpm.top_events = kept;
        if !removed {
            return orphans;
        }
    }
}

fn local_dangling(c: &FpmComponent, e: &Expr) -> Option<String> {
    e.leaves().into_iter().find_map(|leaf| match leaf {
        Expr::Ref(segs) if segs.len() == 1 => {
            let n = &segs[0];
            (c.basic_event(n).is_none() && c.out_failure(None, n).is_none())
                .then(|| format!("`{n}` is no longer defined"))
        }
        Expr::Ref(segs) if segs.len() == 2 => (c.out_failure(Some(&segs[0]), &segs[1]).is_none())
            .then(|| format!("`{}` is no longer defined", join_names(segs))),
        Expr::Ref(segs) => Some(format!("`{}` is not a local reference", join_names(segs))),
        Expr::In { port, .. } => match c.port(port) {
            None => Some(format!("in_failure port `{port}` no longer exists")),
            Some(p) if !p.direction.can_receive() => Some(format!("in_failure port `{port}` is no longer an input")),
            Some(_) => None,
        },
        Expr::And(_) | Expr::Or(_) => None,
    })
}

fn top_dangling(fpm: &Fpm, e: &Expr) -> Option<String> {
    e.leaves().into_iter().find_map(|leaf| match leaf {
        Expr::Ref(segs) => {
            let missing = || Some(format!("`{}` no longer resolves", join_names(segs)));
            let Some((c, rest)) = fpm.split_ref(segs) else { return missing() };
            let ok = match rest {
                [n] => c.basic_event(n).is_some() || c.out_failure(None, n).is_some(),
                [p, m] => c.out_failure(Some(p), m).is_some(),
                _ => false,
            };
            if ok {
                None
            } else {
                missing()
            }
        }
        _ => Some("top events may only reference qualified failures".into()),
    })
}

/// Names of every basic event, qualified with the component path.
pub fn basic_event_names(fpm: &Fpm) -> BTreeSet<String> {
    fpm.components
        .iter()
        .flat_map(|c| {
            c.basic_events.iter().map(move |b| {
                let mut segs = c.path.clone();
                segs.push(b.name.clone());
                join_names(&segs)
            })
        })
        .collect()
}
