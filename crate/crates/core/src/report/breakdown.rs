use super::{to_json, Format};
use crate::model::{ViewEntry, ViewTree};

/// Render a view. Text is an indented tree, one attribute per line under
/// its element; an empty view renders as nothing.
pub fn breakdown_report(tree: &ViewTree, format: Format) -> String {
    match format {
        Format::Json => to_json(tree),
        Format::Text => {
            if tree.is_empty() {
                return String::new();
            }
            let mut out = format!("{}: {}\n", tree.kind.title(), tree.model);
            for e in &tree.entries {
                entry(e, 1, &mut out);
            }
            out
        }
    }
}

fn entry(e: &ViewEntry, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    out.push_str(&format!("{pad}{} <<{}>>\n", e.name, e.stereotypes.join(", ")));
    for (k, v) in &e.attributes {
        out.push_str(&format!("{pad}    {k}: {v}\n"));
    }
    for c in &e.children {
        entry(c, depth + 1, out);
    }
}

pub fn parse_breakdown_json(text: &str) -> Result<ViewTree, serde_json::Error> {
    serde_json::from_str(text)
}
