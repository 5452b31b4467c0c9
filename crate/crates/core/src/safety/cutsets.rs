//! Fault tree compilation and minimal cut sets.
//!
//! An FPM is compiled into a DAG of AND/OR gates over basic events, with
//! in-failures expanded along propagation edges. Cut sets come from
//! top-down gate substitution (MOCUS): each row is a conjunction, gates are
//! replaced in topological order, and rows are reduced by idempotence and
//! absorption after every substitution.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fpm::{Expr, Fpm, FpmComponent};
use crate::diag::{codes, Diagnostic, Origin};
use crate::model::{join_names, PortRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutSetError {
    #[error("unknown top event `{0}`")]
    UnknownTop(String),
    #[error("failure logic is cyclic: {0}")]
    Cycle(String),
    #[error("`{reference}` in {context} does not resolve")]
    Unresolved { reference: String, context: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Event(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    False,
}

/// A compiled top event.
#[derive(Debug, Clone)]
pub struct FaultTree {
    /// Qualified basic event names, indexed by event id.
    pub events: Vec<String>,
    nodes: Vec<Node>,
    top: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Out(usize, Option<String>, String),
    In(usize, String, String),
}

struct Compiler<'a> {
    fpm: &'a Fpm,
    nodes: Vec<Node>,
    events: Vec<String>,
    event_ids: HashMap<(usize, String), usize>,
    memo: HashMap<Key, usize>,
    visiting: Vec<Key>,
    false_node: usize,
}

impl<'a> Compiler<'a> {
    fn new(fpm: &'a Fpm) -> Self {
        Self {
            fpm,
            nodes: vec![Node::False],
            events: Vec::new(),
            event_ids: HashMap::new(),
            memo: HashMap::new(),
            visiting: Vec::new(),
            false_node: 0,
        }
    }

    fn push(&mut self, n: Node) -> usize {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn gate(&mut self, and: bool, children: Vec<usize>) -> usize {
        let mut kept = Vec::new();
        for c in children {
            if self.nodes[c] == Node::False {
                if and {
                    return self.false_node;
                }
                continue;
            }
            if !kept.contains(&c) {
                kept.push(c);
            }
        }
        match kept.len() {
            0 => self.false_node,
            1 => kept[0],
            _ => self.push(if and { Node::And(kept) } else { Node::Or(kept) }),
        }
    }

    fn comp(&self, i: usize) -> &'a FpmComponent {
        &self.fpm.components[i]
    }

    fn comp_index(&self, path: &[String]) -> Option<usize> {
        self.fpm.components.iter().position(|c| c.path == path)
    }

    fn event(&mut self, c: usize, name: &str) -> usize {
        if let Some(&id) = self.event_ids.get(&(c, name.to_string())) {
            return id;
        }
        let mut segs = self.comp(c).path.clone();
        segs.push(name.to_string());
        self.events.push(join_names(&segs));
        let ev = self.events.len() - 1;
        let node = self.push(Node::Event(ev));
        self.event_ids.insert((c, name.to_string()), node);
        node
    }

    fn describe(&self, k: &Key) -> String {
        match k {
            Key::Out(c, p, m) => {
                let mut segs = self.comp(*c).path.clone();
                segs.extend(p.iter().cloned());
                segs.push(m.clone());
                join_names(&segs)
            }
            Key::In(c, p, m) => format!("in_failure {}", join_names(&[join_names(&self.comp(*c).path), join_names(&[p, m])])),
        }
    }

    fn key(&mut self, k: Key) -> Result<usize, CutSetError> {
        if let Some(&n) = self.memo.get(&k) {
            return Ok(n);
        }
        if let Some(i) = self.visiting.iter().position(|v| *v == k) {
            let mut names: Vec<String> = self.visiting[i..].iter().map(|v| self.describe(v)).collect();
            names.push(self.describe(&k));
            return Err(CutSetError::Cycle(names.join(" -> ")));
        }
        self.visiting.push(k.clone());
        let node = match &k {
            Key::Out(c, port, mode) => {
                let comp = self.comp(*c);
                match comp.out_failure(port.as_deref(), mode) {
                    Some(of) => self.expr(*c, &of.expr)?,
                    None => self.false_node,
                }
            }
            Key::In(c, port, mode) => {
                let here = PortRef::new(self.comp(*c).path.clone(), port.clone());
                let mut sources = Vec::new();
                for e in &self.fpm.edges {
                    if e.target == here {
                        sources.push(e.source.clone());
                    } else if e.bidirectional && e.source == here {
                        sources.push(e.target.clone());
                    }
                }
                let mut children = Vec::new();
                for s in sources {
                    if let Some(ci) = self.comp_index(&s.element) {
                        children.push(self.key(Key::Out(ci, Some(s.port), mode.clone()))?);
                    }
                }
                self.gate(false, children)
            }
        };
        self.visiting.pop();
        self.memo.insert(k, node);
        Ok(node)
    }

    /// Compile an expression local to component `c`.
    fn expr(&mut self, c: usize, e: &Expr) -> Result<usize, CutSetError> {
        match e {
            Expr::And(ch) | Expr::Or(ch) => {
                let kids = ch.iter().map(|x| self.expr(c, x)).collect::<Result<Vec<_>, _>>()?;
                Ok(self.gate(matches!(e, Expr::And(_)), kids))
            }
            Expr::In { port, mode } => self.key(Key::In(c, port.clone(), mode.clone())),
            Expr::Ref(segs) => {
                let comp = self.comp(c);
                match segs.as_slice() {
                    [n] if comp.basic_event(n).is_some() => Ok(self.event(c, n)),
                    [n] if comp.out_failure(None, n).is_some() => self.key(Key::Out(c, None, n.clone())),
                    [p, m] if comp.out_failure(Some(p), m).is_some() => self.key(Key::Out(c, Some(p.clone()), m.clone())),
                    _ => Err(CutSetError::Unresolved {
                        reference: join_names(segs),
                        context: format!("component {}", join_names(&comp.path)),
                    }),
                }
            }
        }
    }

    /// Compile a top-level expression with component-qualified references.
    fn top(&mut self, e: &Expr, context: &str) -> Result<usize, CutSetError> {
        match e {
            Expr::And(ch) | Expr::Or(ch) => {
                let kids = ch.iter().map(|x| self.top(x, context)).collect::<Result<Vec<_>, _>>()?;
                Ok(self.gate(matches!(e, Expr::And(_)), kids))
            }
            Expr::Ref(segs) => {
                let unresolved = || CutSetError::Unresolved {
                    reference: join_names(segs),
                    context: context.to_string(),
                };
                let (comp, rest) = self.fpm.split_ref(segs).ok_or_else(unresolved)?;
                if !resolves_in(comp, rest) {
                    return Err(unresolved());
                }
                let ci = self.comp_index(&comp.path).unwrap();
                self.expr(ci, &Expr::Ref(rest.to_vec()))
            }
            Expr::In { .. } => Err(CutSetError::Unresolved {
                reference: e.to_string(),
                context: context.to_string(),
            }),
        }
    }
}

/// A reference local to a component: a basic event, a component-level
/// failure, or `Port.Mode`.
fn resolves_in(c: &FpmComponent, segs: &[String]) -> bool {
    match segs {
        [n] => c.basic_event(n).is_some() || c.out_failure(None, n).is_some(),
        [p, m] => c.out_failure(Some(p), m).is_some(),
        _ => false,
    }
}

impl FaultTree {
    pub fn compile(fpm: &Fpm, top_event: &str) -> Result<Self, CutSetError> {
        let t = fpm
            .top_event(top_event)
            .ok_or_else(|| CutSetError::UnknownTop(top_event.to_string()))?;
        let mut c = Compiler::new(fpm);
        let top = c.top(&t.expr, &format!("top event {}", t.name))?;
        Ok(Self {
            events: c.events,
            nodes: c.nodes,
            top,
        })
    }

    /// Evaluate the structure function for a set of failed events.
    pub fn evaluate(&self, failed: &HashSet<&str>) -> bool {
        fn go(t: &FaultTree, n: usize, failed: &HashSet<&str>, memo: &mut HashMap<usize, bool>) -> bool {
            if let Some(&v) = memo.get(&n) {
                return v;
            }
            let v = match &t.nodes[n] {
                Node::False => false,
                Node::Event(e) => failed.contains(t.events[*e].as_str()),
                Node::And(c) => c.iter().all(|&x| go(t, x, failed, memo)),
                Node::Or(c) => c.iter().any(|&x| go(t, x, failed, memo)),
            };
            memo.insert(n, v);
            v
        }
        go(self, self.top, failed, &mut HashMap::new())
    }

    pub fn gate_count(&self) -> usize {
        self.reachable().iter().filter(|&&n| matches!(self.nodes[n], Node::And(_) | Node::Or(_))).count()
    }

    /// Reachable nodes, parents before children.
    fn reachable(&self) -> Vec<usize> {
        let mut post = Vec::new();
        let mut seen = HashSet::new();
        let mut stack = vec![(self.top, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                post.push(n);
                continue;
            }
            if !seen.insert(n) {
                continue;
            }
            stack.push((n, true));
            if let Node::And(c) | Node::Or(c) = &self.nodes[n] {
                for &x in c.iter().rev() {
                    if !seen.contains(&x) {
                        stack.push((x, false));
                    }
                }
            }
        }
        post.reverse();
        post
    }

    pub fn minimal_cut_sets(&self, max_order: Option<usize>) -> (Vec<CutSet>, bool) {
        if self.nodes[self.top] == Node::False {
            return (Vec::new(), false);
        }
        let order = self.reachable();
        let is_gate = |n: usize| matches!(self.nodes[n], Node::And(_) | Node::Or(_));
        let events_in = |row: &BTreeSet<usize>| row.iter().filter(|&&n| !is_gate(n)).count();
        let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::from([self.top])];
        let mut truncated = false;
        for g in order.into_iter().filter(|&n| is_gate(n)) {
            let mut next = Vec::with_capacity(rows.len());
            for row in rows {
                if !row.contains(&g) {
                    next.push(row);
                    continue;
                }
                let mut base = row;
                base.remove(&g);
                match &self.nodes[g] {
                    Node::And(c) => {
                        base.extend(c.iter().copied());
                        next.push(base);
                    }
                    Node::Or(c) => {
                        for &x in c {
                            let mut r = base.clone();
                            r.insert(x);
                            next.push(r);
                        }
                    }
                    _ => unreachable!(),
                }
            }
            if let Some(k) = max_order {
                let before = next.len();
                next.retain(|r| events_in(r) <= k);
                truncated |= next.len() != before;
            }
            rows = minimize(next);
        }
        let mut sets: Vec<CutSet> = rows
            .into_iter()
            .map(|r| {
                let mut events: Vec<String> = r
                    .into_iter()
                    .map(|n| match self.nodes[n] {
                        Node::Event(e) => self.events[e].clone(),
                        _ => unreachable!("all gates expanded"),
                    })
                    .collect();
                events.sort();
                CutSet { events }
            })
            .collect();
        sets.sort();
        (sets, truncated)
    }
}

/// Idempotence is given by the set representation; absorption drops every
/// row that contains another row.
fn minimize(mut rows: Vec<BTreeSet<usize>>) -> Vec<BTreeSet<usize>> {
    rows.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    rows.dedup();
    let mut kept: Vec<BTreeSet<usize>> = Vec::with_capacity(rows.len());
    for r in rows {
        if !kept.iter().any(|k| k.is_subset(&r)) {
            kept.push(r);
        }
    }
    kept
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutSet {
    /// Component-qualified basic event names, sorted.
    pub events: Vec<String>,
}

impl CutSet {
    pub fn order(&self) -> usize {
        self.events.len()
    }
}

impl Ord for CutSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order().cmp(&other.order()).then_with(|| self.events.cmp(&other.events))
    }
}

impl PartialOrd for CutSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CutSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.events.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSetResult {
    pub model: String,
    pub top_event: String,
    pub max_order: Option<usize>,
    pub truncated: bool,
    pub cut_sets: Vec<CutSet>,
    #[serde(skip)]
    pub origin: Origin,
}

impl CutSetResult {
    pub fn min_order(&self) -> Option<usize> {
        self.cut_sets.iter().map(CutSet::order).min()
    }

    /// One line per cut set, ordered by order then name.
    pub fn render(&self) -> String {
        let mut out = format!("top event {} ({} minimal cut sets", self.top_event, self.cut_sets.len());
        if self.truncated {
            out.push_str(&format!(", truncated at order {}", self.max_order.unwrap_or(0)));
        }
        out.push_str(")\n");
        for c in &self.cut_sets {
            out.push_str(&format!("  order {}: {c}\n", c.order()));
        }
        out
    }
}

pub fn compute_minimal_cut_sets(fpm: &Fpm, top_event: &str, max_order: Option<usize>) -> Result<CutSetResult, CutSetError> {
    let tree = FaultTree::compile(fpm, top_event)?;
    let (cut_sets, truncated) = tree.minimal_cut_sets(max_order);
    Ok(CutSetResult {
        model: fpm.model.clone(),
        top_event: top_event.to_string(),
        max_order,
        truncated,
        cut_sets,
        origin: fpm.top_event(top_event).map(|t| t.origin.clone()).unwrap_or_default(),
    })
}

/// Static checks of FPM annotations: anchors exist, directions fit, and the
/// failure logic is acyclic.
pub fn check_fpm(fpm: &Fpm) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let err = |msg: String, origin: &Origin| Diagnostic::error(codes::FPM_ANNOTATION, msg).at(origin);
    for c in &fpm.components {
        let cname = join_names(&c.path);
        for of in &c.out_failures {
            if let Some(p) = &of.port {
                match c.port(p) {
                    None => diags.push(err(format!("out_failure {} in {cname}: no port `{p}`", of.label()), &of.origin)),
                    Some(port) if !port.direction.can_send() => diags.push(err(
                        format!("out_failure {} in {cname}: port `{p}` is an input", of.label()),
                        &of.origin,
                    )),
                    Some(_) => {}
                }
            }
            for leaf in of.expr.leaves() {
                match leaf {
                    Expr::In { port, .. } => match c.port(port) {
                        None => diags.push(err(format!("in_failure in {cname} names unknown port `{port}`"), &of.origin)),
                        Some(p) if !p.direction.can_receive() => {
                            diags.push(err(format!("in_failure in {cname} names output port `{port}`"), &of.origin))
                        }
                        Some(_) => {}
                    },
                    Expr::Ref(segs) => {
                        if !resolves_in(c, segs) {
                            diags.push(err(
                                format!("`{}` in {cname} is not a basic event or failure of this component", join_names(segs)),
                                &of.origin,
                            ));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    for e in &fpm.edges {
        for end in [&e.source, &e.target] {
            if fpm.component(&end.element).and_then(|c| c.port(&end.port)).is_none() {
                diags.push(err(format!("edge end `{end}` is not a port of an fpm component"), &e.origin));
            }
        }
    }
    if !diags.is_empty() {
        return diags;
    }
    // Compile everything once to catch cycles and bad top references.
    let mut comp = Compiler::new(fpm);
    for (ci, c) in fpm.components.iter().enumerate() {
        for of in &c.out_failures {
            if let Err(e) = comp.key(Key::Out(ci, of.port.clone(), of.mode.clone())) {
                diags.push(err(e.to_string(), &of.origin));
                return diags;
            }
        }
    }
    for t in &fpm.top_events {
        if let Err(e) = comp.top(&t.expr, &format!("top event {}", t.name)) {
            diags.push(err(e.to_string(), &t.origin));
        }
    }
    diags
}
