//! Exchange with the functional hazard assessment: function lists out,
//! classifications and FDALs back in.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::diag::{codes, Diagnostic};
use crate::dsl::{FhaEntry, FhaFile};
use crate::model::{AttrBinding, AttrValue, Dal, ElementPath, ModelKind, Stereotyped};
use crate::project::Project;
use crate::requirements::{ArtifactRef, Classification, LinkType, ReqType, Requirement, TraceLink};

pub const ATOMIC_FUNCTION: &str = "AtomicFunction";

/// Stable schema of the function list handed to safety assessment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionListEntry {
    pub path: ElementPath,
    pub name: String,
    /// Enclosing groups, outermost first.
    pub group: Vec<String>,
    pub description: Option<String>,
    pub fdal: Option<Dal>,
    /// Remaining attribute values in declaration order.
    pub attributes: Vec<(String, String)>,
}

/// One entry per AtomicFunction (or subtype), in declaration order.
pub fn export_function_list(project: &Project) -> Vec<FunctionListEntry> {
    let mut out = Vec::new();
    for m in project.models_of(ModelKind::Functional) {
        for (segs, e) in m.walk() {
            if !e.stereotype_names().iter().any(|s| project.profiles.is_a(s, ATOMIC_FUNCTION)) {
                continue;
            }
            let description = e.value("description").and_then(|v| v.as_str()).map(str::to_string);
            let fdal = match e.value("fdal") {
                Some(AttrValue::Dal(d)) => Some(*d),
                _ => None,
            };
            let attributes = e
                .stereotypes
                .iter()
                .flat_map(|s| &s.bindings)
                .filter(|b| b.name != "description" && b.name != "fdal")
                .map(|b| (b.name.clone(), b.value.display_text()))
                .collect();
            out.push(FunctionListEntry {
                path: m.path_of(&segs),
                name: e.name.clone(),
                group: segs[..segs.len() - 1].to_vec(),
                description,
                fdal,
                attributes,
            });
        }
    }
    out
}

/// Tab-separated text: header line, then one line per function.
pub fn render_function_list(entries: &[FunctionListEntry]) -> String {
    let mut out = String::from("path\tgroup\tfdal\tdescription\n");
    for e in entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            e.path,
            e.group.join(" / "),
            e.fdal.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
            e.description.as_deref().unwrap_or("").replace(['\t', '\n'], " ")
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FhaResult {
    pub id: String,
    pub function: ElementPath,
    pub condition: String,
    pub effect: String,
    pub classification: Classification,
    pub fdal: Dal,
    pub requirements: Vec<String>,
}

/// Default classification to FDAL table; manifest entries override it.
pub fn fdal_for(project: &Project, c: Classification) -> Dal {
    if let Some((_, d)) = project.manifest.fdal_mapping.iter().find(|(k, _)| *k == c) {
        return *d;
    }
    match c {
        Classification::Catastrophic => Dal::A,
        Classification::Hazardous => Dal::B,
        Classification::Major => Dal::C,
        Classification::Minor => Dal::D,
        Classification::NoSafetyEffect => Dal::E,
    }
}

fn set_fdal(project: &mut Project, path: &ElementPath, dal: Dal) -> Result<Option<AttrValue>, ()> {
    let m = project.models.iter_mut().find(|m| m.name == path.model).ok_or(())?;
    let (first, rest) = path.segments.split_first().ok_or(())?;
    let mut e = m.elements.iter_mut().find(|e| &e.name == first).ok_or(())?;
    for s in rest {
        e = e.children.iter_mut().find(|c| &c.name == s).ok_or(())?;
    }
    let profiles = &project.profiles;
    for applied in &mut e.stereotypes {
        let Some(eff) = profiles.effective(&applied.stereotype) else { continue };
        if eff.attribute("fdal").is_none() {
            continue;
        }
        let previous = applied.bindings.iter().find(|b| b.name == "fdal" && !b.defaulted).map(|b| b.value.clone());
        applied.bindings.retain(|b| b.name != "fdal");
        let binding = AttrBinding {
            name: "fdal".into(),
            value: AttrValue::Dal(dal),
            defaulted: false,
        };
        // Keep effective attribute order.
        let names = eff.attribute_names();
        let pos = names.iter().position(|n| *n == "fdal").unwrap();
        let at = applied
            .bindings
            .iter()
            .position(|b| names.iter().position(|n| *n == b.name).unwrap_or(usize::MAX) > pos)
            .unwrap_or(applied.bindings.len());
        applied.bindings.insert(at, binding);
        return Ok(previous);
    }
    Err(())
}

fn import_entry(project: &mut Project, e: &FhaEntry, diags: &mut Vec<Diagnostic>) {
    let (model, segs) = e.function.split_first().expect("parser guarantees two segments");
    let path = ElementPath::new(model.clone(), segs.to_vec());
    let resolved = project.element(&path).map(|(m, el)| (m.kind, el.stereotype_names().iter().map(|s| s.to_string()).collect::<Vec<_>>()));
    let Some((kind, stereos)) = resolved else {
        diags.push(Diagnostic::error(codes::FHA_UNRESOLVED, format!("failure condition `{}` references unknown function `{path}`", e.id)).at(&e.origin));
        return;
    };
    if kind != ModelKind::Functional || !stereos.iter().any(|s| project.profiles.is_a(s, ATOMIC_FUNCTION)) {
        diags.push(
            Diagnostic::error(codes::FHA_UNRESOLVED, format!("failure condition `{}`: `{path}` is not an atomic function", e.id))
                .at(&e.origin),
        );
        return;
    }
    let expected = fdal_for(project, e.classification);
    if let Some(given) = e.fdal {
        if given != expected {
            diags.push(
                Diagnostic::error(
                    codes::FHA_MISMATCH,
                    format!(
                        "failure condition `{}` is {} which maps to FDAL {expected}, but the file assigns FDAL {given}",
                        e.id, e.classification
                    ),
                )
                .at(&e.origin),
            );
            return;
        }
    }
    // The most severe classification wins when several conditions hit one function.
    let existing = project.fha.iter().filter(|r| r.function == path).map(|r| r.fdal).min();
    let dal = existing.map_or(expected, |d| d.min(expected));
    match set_fdal(project, &path, dal) {
        Err(()) => {
            diags.push(
                Diagnostic::error(codes::FHA_UNRESOLVED, format!("function `{path}` has no fdal attribute to receive the result"))
                    .at(&e.origin),
            );
            return;
        }
        Ok(Some(AttrValue::Dal(prev))) if prev != dal && existing.is_none() => diags.push(
            Diagnostic::warning(
                codes::FHA_OVERRIDE,
                format!("FHA result sets FDAL {dal} on `{path}`, replacing the authored FDAL {prev}"),
            )
            .at(&e.origin),
        ),
        Ok(_) => {}
    }
    let id = e.requirement.clone().unwrap_or_else(|| format!("SAF-{}", e.id));
    if project.requirement(&id).is_none() {
        let mut r = Requirement::new(id.clone(), project.manifest.l0.clone(), ReqType::Safety);
        r.text = format!("{} shall not occur ({}): {}", e.condition, e.classification, e.effect);
        r.classification = Some(e.classification);
        r.origin = e.origin.clone();
        project.requirements.push(r);
    }
    let link = TraceLink {
        source: ArtifactRef::req(id.clone()),
        link_type: LinkType::SatisfiedBy,
        target: ArtifactRef::element(path.clone()),
        origin: e.origin.clone(),
    };
    if !project.links.contains(&link) {
        project.links.push(link);
    }
    project.fha.push(FhaResult {
        id: e.id.clone(),
        function: path,
        condition: e.condition.clone(),
        effect: e.effect.clone(),
        classification: e.classification,
        fdal: expected,
        requirements: vec![id],
    });
}

/// Apply FHA results in place. Used while loading; entries that fail are
/// skipped with a diagnostic.
pub(crate) fn apply_fha(project: &mut Project, file: &FhaFile) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for e in &file.entries {
        if project.fha.iter().any(|r| r.id == e.id) {
            diags.push(Diagnostic::error(codes::DUPLICATE_GLOBAL, format!("failure condition `{}` was already imported", e.id)).at(&e.origin));
            continue;
        }
        import_entry(project, e, &mut diags);
    }
    diags
}

#[derive(Debug, Clone)]
pub struct FhaImport {
    pub project: Project,
    pub results: Vec<FhaResult>,
    /// Safety requirements created by this import.
    pub stubs: Vec<Requirement>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Import an FHA results file into a copy of the project.
pub fn import_fha_results(project: &Project, file: &FhaFile) -> FhaImport {
    let mut p = project.clone();
    let before_reqs = p.requirements.len();
    let before_fha = p.fha.len();
    let mut diagnostics = apply_fha(&mut p, file);
    for raw in &file.links {
        match p.resolve_link(raw) {
            Ok(l) if !p.links.iter().any(|x| x.source == l.source && x.link_type == l.link_type && x.target == l.target) => {
                p.links.push(l)
            }
            Ok(_) => {}
            Err(d) => diagnostics.push(d),
        }
    }
    diagnostics.sort();
    FhaImport {
        stubs: p.requirements[before_reqs..].to_vec(),
        results: p.fha[before_fha..].to_vec(),
        project: p,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_mapping_table() {
        let p = Project::empty(crate::dsl::ProjectManifest::new("x"));
        let got: Vec<Dal> = Classification::ALL.iter().map(|c| fdal_for(&p, *c)).collect();
        assert_eq!(got, vec![Dal::A, Dal::B, Dal::C, Dal::D, Dal::E]);
    }
}
