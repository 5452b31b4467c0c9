use std::fmt::Write;

use crate::model::{join_names, ArchElement, ArchModel, Direction, Stereotyped};
use crate::safety::Fpm;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n"))
}

/// Names cannot contain dots, so the plain dotted path is a unique id.
fn node_id(segs: &[String]) -> String {
    quote(&segs.join("."))
}

fn element(m: &ArchModel, e: &ArchElement, segs: &mut Vec<String>, depth: usize, out: &mut String) {
    segs.push(e.name.clone());
    let pad = "  ".repeat(depth);
    let label = match e.stereotype_names().as_slice() {
        [] => e.name.clone(),
        s => format!("{}\n<<{}>>", e.name, s.join(", ")),
    };
    if e.children.is_empty() {
        writeln!(out, "{pad}{} [label={}];", node_id(segs), quote(&label)).unwrap();
    } else {
        writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{}", segs.join(".")))).unwrap();
        writeln!(out, "{pad}  label={};", quote(&e.name)).unwrap();
        writeln!(out, "{pad}  {} [label={}, shape=box];", node_id(segs), quote(&label)).unwrap();
        for c in &e.children {
            element(m, c, segs, depth + 1, out);
        }
        writeln!(out, "{pad}}}").unwrap();
    }
    segs.pop();
}

/// Components as nodes, nested components as clusters, connectors as edges
/// labelled with the exchange name or connector stereotype.
pub fn export_model_dot(m: &ArchModel) -> String {
    let mut out = format!("digraph {} {{\n", quote(&m.name));
    if m.elements.is_empty() && m.connectors.is_empty() {
        out.push_str("}\n");
        return out;
    }
    out.push_str("  rankdir=LR;\n  node [shape=box];\n");
    let mut segs = Vec::new();
    for e in &m.elements {
        element(m, e, &mut segs, 1, &mut out);
    }
    for c in &m.connectors {
        let both = [&c.source, &c.target]
            .iter()
            .all(|r| m.port(r).is_some_and(|(_, p)| p.direction == Direction::InOut));
        write!(
            out,
            "  {} -> {} [label={}, taillabel={}, headlabel={}",
            node_id(&c.source.element),
            node_id(&c.target.element),
            quote(&c.label()),
            quote(&c.source.port),
            quote(&c.target.port)
        )
        .unwrap();
        if both {
            out.push_str(", dir=both");
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}

/// FPM components with their basic events, propagation edges, and top
/// events pointing at the components they reference.
pub fn export_fpm_dot(f: &Fpm) -> String {
    let mut out = format!("digraph {} {{\n", quote(&format!("fpm {}", f.model)));
    if f.components.is_empty() && f.top_events.is_empty() {
        out.push_str("}\n");
        return out;
    }
    out.push_str("  rankdir=LR;\n  node [shape=box];\n");
    for c in &f.components {
        let mut label = join_names(&c.path);
        for b in &c.basic_events {
            label.push_str(&format!("\n({})", b.name));
        }
        writeln!(out, "  {} [label={}];", node_id(&c.path), quote(&label)).unwrap();
    }
    for e in &f.edges {
        write!(
            out,
            "  {} -> {} [taillabel={}, headlabel={}",
            node_id(&e.source.element),
            node_id(&e.target.element),
            quote(&e.source.port),
            quote(&e.target.port)
        )
        .unwrap();
        if e.bidirectional {
            out.push_str(", dir=both");
        }
        out.push_str("];\n");
    }
    for t in &f.top_events {
        let id = quote(&format!("top:{}", t.name));
        writeln!(out, "  {id} [label={}, shape=doubleoctagon];", quote(&t.name)).unwrap();
        let mut seen = Vec::new();
        for leaf in t.expr.leaves() {
            if let crate::safety::Expr::Ref(segs) = leaf {
                if let Some((c, _)) = f.split_ref(segs) {
                    if !seen.contains(&c.path) {
                        seen.push(c.path.clone());
                        writeln!(out, "  {} -> {id} [style=dashed];", node_id(&c.path)).unwrap();
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
