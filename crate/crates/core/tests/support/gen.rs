//! Seeded generators for DSL round trips and random fault propagation
//! models, plus a brute-force cut-set oracle. Shared by the core
//! integration tests and the CLI acceptance target.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use leanarch::dsl::{ProfileFile, RequirementFile};
use leanarch::model::{join_names, quote_name, quote_string, AttrValue, AttributeDef, BaseKind, Dal, Profile, Stereotype, ValueKind};
use leanarch::requirements::{Classification, LinkType, RawLink, ReqType, Requirement};
use leanarch::validation::{Category, Constraint, CustomRuleSpec};
use leanarch::{diag::Origin, Severity};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Free text with characters that need escaping.
pub fn text(r: &mut impl Rng) -> String {
    const PIECES: &[&str] = &["shall", "the", "autopilot", "\"quoted\"", "back\\slash", "tab\there", "line\nbreak", "é", "50%", "A/B", "{x}", "//"];
    let n = r.gen_range(0..6);
    (0..n).map(|_| *PIECES.choose(r).unwrap()).collect::<Vec<_>>().join(" ")
}

/// A name unique by `i`: either a bare identifier or one needing quotes.
pub fn name(r: &mut impl Rng, prefix: &str, i: usize) -> String {
    match r.gen_range(0..3) {
        0 => format!("{prefix}{i}"),
        1 => format!("{prefix}_{i}-x"),
        _ => format!("{prefix} {i}/b-{}", r.gen_range(0..9)),
    }
}

fn level(r: &mut impl Rng) -> String {
    ["system", "item", "aircraft", "L2", "test"].choose(r).unwrap().to_string()
}

pub fn requirement_file(r: &mut impl Rng) -> RequirementFile {
    let n = r.gen_range(0..8);
    let requirements: Vec<Requirement> = (0..n)
        .map(|i| {
            let t = *ReqType::ALL.choose(r).unwrap();
            let id = if r.gen_bool(0.8) { format!("REQ-{i:03}") } else { format!("Req {i}") };
            let mut q = Requirement::new(id, level(r), t);
            q.text = text(r);
            q.rationale = r.gen_bool(0.4).then(|| text(r));
            q.justification = r.gen_bool(0.4).then(|| text(r));
            q.min_cut_order = r.gen_bool(0.2).then(|| r.gen_range(1..5));
            q.classification = r.gen_bool(0.2).then(|| *Classification::ALL.choose(r).unwrap());
            q
        })
        .collect();
    let links = (0..r.gen_range(0..6))
        .map(|i| {
            let seg = |r: &mut ChaCha8Rng, j: usize| -> Vec<String> {
                if r.gen_bool(0.5) {
                    vec![format!("REQ-{j:03}")]
                } else {
                    vec!["Func".into(), format!("Group {j}"), format!("F/{j}")]
                }
            };
            let mut cr = ChaCha8Rng::seed_from_u64(r.gen());
            RawLink::new(seg(&mut cr, i), *LinkType::ALL.choose(r).unwrap(), seg(&mut cr, i + 1))
        })
        .collect();
    RequirementFile { requirements, links }
}

fn value_kind(r: &mut impl Rng) -> ValueKind {
    match r.gen_range(0..6) {
        0 => ValueKind::String,
        1 => ValueKind::Integer,
        2 => ValueKind::Real,
        3 => ValueKind::Boolean,
        4 => ValueKind::Dal,
        _ => ValueKind::Enumeration((0..r.gen_range(1..4)).map(|i| format!("lit{i}")).collect()),
    }
}

fn value_of(r: &mut impl Rng, k: &ValueKind) -> AttrValue {
    match k {
        ValueKind::String => AttrValue::String(text(r)),
        ValueKind::Integer => AttrValue::Integer(r.gen_range(-1000..1000)),
        ValueKind::Real => AttrValue::Real(r.gen_range(-4000..4000) as f64 / 8.0),
        ValueKind::Boolean => AttrValue::Boolean(r.gen()),
        ValueKind::Dal => AttrValue::Dal(*[Dal::A, Dal::B, Dal::C, Dal::D, Dal::E].choose(r).unwrap()),
        ValueKind::Enumeration(l) => AttrValue::Enum(l.choose(r).unwrap().clone()),
    }
}

/// Roots declare a base kind; subtypes extend an earlier stereotype.
pub fn profile_file(r: &mut impl Rng) -> ProfileFile {
    let mut stereotypes: Vec<Stereotype> = Vec::new();
    let mut kinds = Vec::new();
    let mut attr_no = 0;
    for i in 0..r.gen_range(0..7) {
        let parent = (!stereotypes.is_empty() && r.gen_bool(0.5)).then(|| r.gen_range(0..stereotypes.len()));
        let kind = match parent {
            Some(p) => kinds[p],
            None => *[BaseKind::Component, BaseKind::Port, BaseKind::Connector].choose(r).unwrap(),
        };
        let endpoints = (kind == BaseKind::Connector && r.gen_bool(0.5)).then(|| "SomePort".to_string());
        let attributes = (0..r.gen_range(0..3))
            .map(|_| {
                attr_no += 1;
                let kind = value_kind(r);
                let default = r.gen_bool(0.3).then(|| value_of(r, &kind));
                AttributeDef {
                    name: format!("attr{attr_no}"),
                    required: r.gen(),
                    default,
                    kind,
                    origin: Origin::none(),
                }
            })
            .collect();
        stereotypes.push(Stereotype {
            name: name(r, "St", i),
            declared_kind: if parent.is_none() { Some(kind) } else { None },
            extends: parent.map(|p| stereotypes[p].name.clone()),
            is_abstract: r.gen_bool(0.2),
            attributes,
            endpoints,
            origin: Origin::none(),
        });
        kinds.push(kind);
    }
    let rules = (0..r.gen_range(0..3))
        .map(|i| {
            let constraint = match r.gen_range(0..5) {
                0 => Constraint::EndpointMustBe { stereotype: "SomePort".into() },
                1 => Constraint::AttributeRequired { attribute: "part_number".into() },
                2 => Constraint::AttributeMatches {
                    attribute: "part_number".into(),
                    pattern: r"^PN-\d{5}$".into(),
                },
                3 => Constraint::MustHaveInboundLink {
                    link_type: *LinkType::ALL.choose(r).unwrap(),
                },
                _ => Constraint::MustBeConnectedOrJustified,
            };
            CustomRuleSpec {
                code: format!("X-GEN-{i:03}"),
                stereotype: format!("Target {i}"),
                constraint,
                category: *[Category::Model, Category::Process].choose(r).unwrap(),
                severity: *[Severity::Error, Severity::Warning, Severity::Info].choose(r).unwrap(),
                message: r.gen_bool(0.5).then(|| text(r)),
                origin: Origin::none(),
            }
        })
        .collect();
    ProfileFile {
        profile: Profile {
            name: name(r, "Prof", 0),
            kind: None,
            stereotypes,
            origin: Origin::none(),
        },
        rules,
    }
}

/// Model text over the shipped profiles, well formed for the parser.
pub fn model_text(r: &mut impl Rng) -> String {
    let physical = r.gen_bool(0.5);
    let mut out = format!(
        "model {} kind {} level {} uses {} {{\n",
        quote_name(&name(r, "M", 0)),
        if physical { "physical" } else { "functional" },
        level(r),
        if physical { "Physical" } else { "Functional" }
    );
    // (element path, port name, port stereotype, direction)
    let mut ports: Vec<(Vec<String>, String, &str, &str)> = Vec::new();
    let mut counter = 0;
    for i in 0..r.gen_range(0..5) {
        element(r, physical, &[], i, 1, &mut out, &mut ports, &mut counter);
    }
    for i in 0..r.gen_range(0..4) {
        let senders: Vec<_> = ports.iter().filter(|p| p.3 != "in").collect();
        let Some(s) = senders.choose(r) else { break };
        let partners: Vec<_> = ports.iter().filter(|p| p.2 == s.2 && p.3 != "out" && p.0 != s.0).collect();
        let Some(t) = partners.choose(r) else { continue };
        let stereo = match s.2 {
            "DiscretePort" => "DiscreteLink",
            "A825Port" => "A825Bus",
            "PowerPort" => "PowerLine",
            _ => "FunctionalExchange",
        };
        let mut sp = s.0.clone();
        sp.push(s.1.clone());
        let mut tp = t.0.clone();
        tp.push(t.1.clone());
        let label = if r.gen_bool(0.5) { format!("{} = ", quote_string(&format!("exchange {i}"))) } else { String::new() };
        writeln!(out, "  connect {label}{} -> {} : {stereo}", join_names(&sp), join_names(&tp)).unwrap();
    }
    out.push_str("}\n");
    out
}

#[allow(clippy::too_many_arguments)]
fn element<'a>(
    r: &mut impl Rng,
    physical: bool,
    parent: &[String],
    i: usize,
    depth: usize,
    out: &mut String,
    ports: &mut Vec<(Vec<String>, String, &'a str, &'a str)>,
    counter: &mut usize,
) {
    *counter += 1;
    let n = name(r, "E", i);
    let pad = "  ".repeat(depth);
    let stereo = if physical {
        *["LRU", "Sensor", "Actuator", "Subsystem", "Software_Item", "Hardware_Item"].choose(r).unwrap()
    } else if depth < 3 && r.gen_bool(0.4) {
        "FunctionGroup"
    } else {
        "AtomicFunction"
    };
    writeln!(out, "{pad}component {} : {stereo} {{", quote_name(&n)).unwrap();
    writeln!(out, "{pad}  description = {}", quote_string(&text(r))).unwrap();
    match stereo {
        "AtomicFunction" => {
            writeln!(out, "{pad}  rationale = {}", quote_string(&text(r))).unwrap();
            if r.gen_bool(0.3) {
                writeln!(out, "{pad}  fdal = {}", ["A", "B", "C"].choose(r).unwrap()).unwrap();
            }
        }
        "LRU" if r.gen_bool(0.5) => writeln!(out, "{pad}  part_number = \"PN-{:05}\"", r.gen_range(0..99999)).unwrap(),
        "Software_Item" | "Hardware_Item" if r.gen_bool(0.5) => writeln!(out, "{pad}  idal = D").unwrap(),
        _ => {}
    }
    let mut path = parent.to_vec();
    path.push(n);
    for p in 0..r.gen_range(0..3) {
        let pname = name(r, "p", p);
        let (ps, dir) = if physical {
            match r.gen_range(0..3) {
                0 => ("A825Port", "inout"),
                1 => ("PowerPort", *["in", "out"].choose(r).unwrap()),
                _ => ("DiscretePort", *["in", "out"].choose(r).unwrap()),
            }
        } else {
            ("FunctionPort", *["in", "out"].choose(r).unwrap())
        };
        if ps == "A825Port" && r.gen_bool(0.5) {
            writeln!(out, "{pad}  port {} {dir} : {ps} {{\n{pad}    node_id = {}\n{pad}  }}", quote_name(&pname), r.gen_range(0..64)).unwrap();
        } else {
            writeln!(out, "{pad}  port {} {dir} : {ps}", quote_name(&pname)).unwrap();
        }
        ports.push((path.clone(), pname, ps, dir));
    }
    if depth < 3 && *counter < 12 && (stereo == "FunctionGroup" || (physical && r.gen_bool(0.3))) {
        for c in 0..r.gen_range(1..3) {
            element(r, physical, &path, c, depth + 1, out, ports, counter);
        }
    }
    writeln!(out, "{pad}}}").unwrap();
}

/// Oracle side of a random FPM: failure logic kept as a plain tree.
#[derive(Debug, Clone)]
pub enum OExpr {
    Event(String),
    /// In-port index of the owning component.
    In(usize),
    And(Vec<OExpr>),
    Or(Vec<OExpr>),
}

#[derive(Debug, Clone)]
pub struct OComp {
    pub name: String,
    pub events: Vec<String>,
    /// Source components feeding each in-port.
    pub inputs: Vec<Vec<usize>>,
    pub out: Option<OExpr>,
}

#[derive(Debug, Clone)]
pub struct FpmCase {
    pub comps: Vec<OComp>,
    pub gates: usize,
    pub text: String,
}

impl FpmCase {
    /// Qualified names of all basic events.
    pub fn events(&self) -> Vec<String> {
        self.comps.iter().flat_map(|c| c.events.iter().map(move |e| format!("{}.{e}", c.name))).collect()
    }

    fn value(&self, c: usize, failed: &BTreeSet<String>, memo: &mut HashMap<usize, bool>) -> bool {
        if let Some(v) = memo.get(&c) {
            return *v;
        }
        let v = match &self.comps[c].out {
            None => false,
            Some(e) => self.eval(c, e, failed, memo),
        };
        memo.insert(c, v);
        v
    }

    fn eval(&self, c: usize, e: &OExpr, failed: &BTreeSet<String>, memo: &mut HashMap<usize, bool>) -> bool {
        match e {
            OExpr::Event(n) => failed.contains(&format!("{}.{n}", self.comps[c].name)),
            OExpr::In(p) => self.comps[c].inputs[*p].iter().any(|s| self.value(*s, failed, memo)),
            OExpr::And(xs) => xs.iter().all(|x| self.eval(c, x, failed, memo)),
            OExpr::Or(xs) => xs.iter().any(|x| self.eval(c, x, failed, memo)),
        }
    }

    /// Does failing exactly `failed` trigger the top event?
    pub fn top(&self, failed: &BTreeSet<String>) -> bool {
        self.value(self.comps.len() - 1, failed, &mut HashMap::new())
    }

    /// Minimal failing sets by exhaustive enumeration, smallest first.
    pub fn brute_force_cut_sets(&self) -> BTreeSet<BTreeSet<String>> {
        let events = self.events();
        let n = events.len();
        let mut masks: Vec<u32> = (0..1u32 << n).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        let mut minimal: Vec<u32> = Vec::new();
        for m in masks {
            if minimal.iter().any(|k| m & k == *k) {
                continue;
            }
            let set: BTreeSet<String> = (0..n).filter(|i| m >> i & 1 == 1).map(|i| events[i].clone()).collect();
            if self.top(&set) {
                minimal.push(m);
            }
        }
        minimal
            .into_iter()
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| events[i].clone()).collect())
            .collect()
    }
}

fn oexpr(r: &mut impl Rng, events: &[String], ins: usize, gates: &mut usize, depth: usize) -> OExpr {
    let leaves = events.len() + ins;
    if *gates > 0 && depth < 4 && r.gen_bool(0.75 - 0.15 * depth as f64) {
        *gates -= 1;
        let kids = (0..r.gen_range(2..4)).map(|_| oexpr(r, events, ins, gates, depth + 1)).collect();
        return if r.gen() { OExpr::And(kids) } else { OExpr::Or(kids) };
    }
    let k = r.gen_range(0..leaves);
    if k < events.len() {
        OExpr::Event(events[k].clone())
    } else {
        OExpr::In(k - events.len())
    }
}

fn render_expr(e: &OExpr) -> String {
    match e {
        OExpr::Event(n) => n.clone(),
        OExpr::In(p) => format!("in_failure i{p}.f"),
        OExpr::And(xs) | OExpr::Or(xs) => format!(
            "{}({})",
            if matches!(e, OExpr::And(_)) { "AND" } else { "OR" },
            xs.iter().map(render_expr).collect::<Vec<_>>().join(", ")
        ),
    }
}

/// A random monotone FPM with at most `max_events` basic events and
/// `max_gates` gates, laid out as a DAG of components feeding the last one.
pub fn fpm_case(r: &mut impl Rng, max_events: usize, max_gates: usize) -> FpmCase {
    let k = r.gen_range(1..5);
    let n_events = r.gen_range(1..=max_events);
    let mut comps: Vec<OComp> = (0..k)
        .map(|c| OComp {
            name: format!("K{c}"),
            events: Vec::new(),
            inputs: Vec::new(),
            out: None,
        })
        .collect();
    for e in 0..n_events {
        // The top component needs failure logic of its own.
        let c = if e == 0 { k - 1 } else { r.gen_range(0..k) };
        comps[c].events.push(format!("e{e}"));
    }
    for c in 1..k {
        for _ in 0..r.gen_range(0..3) {
            let mut srcs: Vec<usize> = (0..r.gen_range(1..3)).map(|_| r.gen_range(0..c)).collect();
            srcs.sort_unstable();
            srcs.dedup();
            comps[c].inputs.push(srcs);
        }
    }
    let mut budget = r.gen_range(max_gates / 2..=max_gates);
    let total = budget;
    // The last component always drives the top event.
    for c in (0..k).rev() {
        if c != k - 1 && r.gen_bool(0.1) {
            continue;
        }
        let ins = comps[c].inputs.len();
        let events = comps[c].events.clone();
        if events.is_empty() && ins == 0 {
            continue;
        }
        comps[c].out = Some(oexpr(r, &events, ins, &mut budget, 0));
    }
    let gates = total - budget;

    let mut text = String::from("fpm Rand {\n");
    for c in &comps {
        writeln!(text, "  component {} {{\n    port o out", c.name).unwrap();
        for i in 0..c.inputs.len() {
            writeln!(text, "    port i{i} in").unwrap();
        }
        for e in &c.events {
            writeln!(text, "    basic_event {e}").unwrap();
        }
        if let Some(e) = &c.out {
            writeln!(text, "    out_failure o.f = {}", render_expr(e)).unwrap();
        }
        text.push_str("  }\n");
    }
    for (c, comp) in comps.iter().enumerate() {
        for (i, srcs) in comp.inputs.iter().enumerate() {
            for s in srcs {
                writeln!(text, "  edge K{s}.o -> K{c}.i{i}").unwrap();
            }
        }
    }
    writeln!(text, "  top_event T = K{}.o.f\n}}", k - 1).unwrap();
    FpmCase { comps, gates, text }
}
