use super::cutsets::CutSetResult;
use crate::diag::{codes, Diagnostic};
use crate::project::Project;
use crate::requirements::{ArtifactRef, Classification, Requirement};

/// Requirements linked to a top event, in either direction.
pub fn requirements_for_top<'p>(project: &'p Project, top: &str) -> Vec<&'p Requirement> {
    let mut ids: Vec<&str> = Vec::new();
    for l in &project.links {
        let (a, b) = (&l.source, &l.target);
        for (this, other) in [(a, b), (b, a)] {
            if matches!(this, ArtifactRef::TopEvent { name } if name == top) {
                if let Some(id) = other.as_req() {
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                }
            }
        }
    }
    ids.into_iter().filter_map(|id| project.requirement(id)).collect()
}

/// Minimum cut set order a requirement demands, if any.
pub fn required_min_order(r: &Requirement) -> Option<usize> {
    match (r.min_cut_order, r.classification) {
        (Some(n), _) => Some(n as usize),
        (None, Some(Classification::Catastrophic)) => Some(2),
        _ => None,
    }
}

/// Compare cut sets with the safety requirements linked to each top event.
pub fn check_against_safety_requirements(results: &[CutSetResult], project: &Project) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for r in results {
        let reqs = requirements_for_top(project, &r.top_event);
        if reqs.is_empty() {
            out.push(
                Diagnostic::info(codes::UNLINKED_TOP, format!("top event `{}` has no linked safety requirement", r.top_event))
                    .at(&r.origin),
            );
            continue;
        }
        for req in reqs {
            let Some(need) = required_min_order(req) else { continue };
            if r.truncated && r.max_order.is_some_and(|k| k + 1 < need) {
                out.push(
                    Diagnostic::warning(
                        codes::CUT_TRUNCATED,
                        format!(
                            "cut sets of `{}` were truncated at order {}, too low to check {} (minimum order {need})",
                            r.top_event,
                            r.max_order.unwrap_or(0),
                            req.id
                        ),
                    )
                    .at(&r.origin),
                );
            }
            let low: Vec<String> = r.cut_sets.iter().filter(|c| c.order() < need).map(|c| c.to_string()).collect();
            if low.is_empty() {
                continue;
            }
            let what = if r.min_order() == Some(1) {
                "single-point failure"
            } else {
                "cut set below the required order"
            };
            out.push(
                Diagnostic::error(
                    codes::SINGLE_POINT,
                    format!(
                        "{what} in `{}`: {} requires minimum cut set order {need}, found {}",
                        r.top_event,
                        req.id,
                        low.join(" ")
                    ),
                )
                .at(&r.origin)
                .with_related(req.origin.0.clone()),
            );
        }
    }
    out.sort();
    out
}
