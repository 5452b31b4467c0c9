use super::trace::TraceGraph;
use super::types::{ArtifactRef, LinkType, ReqType, Requirement};
use crate::diag::Diagnostic;
use crate::model::ModelKind;
use crate::project::Project;

pub const DRV_NO_PHYSICAL: &str = "R-DRV-001";
pub const DRV_NO_JUSTIFICATION: &str = "R-DRV-002";
pub const NOT_VALIDATED: &str = "R-VAL-001";
pub const ASM_NO_JUSTIFICATION: &str = "R-ASM-001";
pub const LINK_CYCLE: &str = "R-LINK-001";

pub const AUDIT_CODES: [&str; 4] = [DRV_NO_PHYSICAL, DRV_NO_JUSTIFICATION, NOT_VALIDATED, ASM_NO_JUSTIFICATION];

fn has_text(s: &Option<String>) -> bool {
    s.as_deref().is_some_and(|t| !t.trim().is_empty())
}

fn outgoing(project: &Project, r: &Requirement, t: LinkType) -> bool {
    project.links.iter().any(|l| l.link_type == t && l.source.as_req() == Some(&r.id))
}

fn touches_physical(project: &Project, r: &Requirement) -> bool {
    let me = ArtifactRef::req(r.id.clone());
    project.links.iter().any(|l| {
        let other = if l.source == me {
            &l.target
        } else if l.target == me {
            &l.source
        } else {
            return false;
        };
        other
            .as_element()
            .and_then(|p| project.model(&p.model))
            .is_some_and(|m| m.kind == ModelKind::Physical)
    })
}

/// An audit finding tied to the requirement it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditFinding {
    pub requirement: String,
    pub req_type: ReqType,
    pub diagnostic: Diagnostic,
}

pub fn audit_findings(project: &Project) -> Vec<AuditFinding> {
    let mut out = Vec::new();
    for r in &project.requirements {
        let mut push = |code: &str, msg: String| {
            out.push(AuditFinding {
                requirement: r.id.clone(),
                req_type: r.req_type,
                diagnostic: Diagnostic::error(code, msg).at(&r.origin),
            })
        };
        let justified = has_text(&r.justification) || outgoing(project, r, LinkType::JustifiedBy);
        match r.req_type {
            ReqType::Derived => {
                if !touches_physical(project, r) {
                    push(DRV_NO_PHYSICAL, format!("derived requirement {} is not linked to the physical architecture", r.id));
                }
                if !justified {
                    push(DRV_NO_JUSTIFICATION, format!("derived requirement {} has no justification", r.id));
                }
            }
            ReqType::Assumption if !justified => push(ASM_NO_JUSTIFICATION, format!("assumption {} has no justification", r.id)),
            _ => {}
        }
        if matches!(r.req_type, ReqType::Derived | ReqType::Assumption) && !outgoing(project, r, LinkType::ValidatedBy) {
            push(NOT_VALIDATED, format!("{} {} has no validated_by link", r.req_type, r.id));
        }
    }
    out
}

/// Findings for derived requirements and assumptions, ordered by location.
pub fn audit_derived_and_assumptions(project: &Project) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = audit_findings(project).into_iter().map(|f| f.diagnostic).collect();
    out.sort();
    out
}

/// One error per cycle among chain-carrying links.
pub fn link_cycle_diagnostics(project: &Project) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for cycle in TraceGraph::build(project).cycles() {
        let names: Vec<String> = cycle.iter().map(|a| a.to_string()).collect();
        // Anchor at the first link inside the cycle.
        let origin = project
            .links
            .iter()
            .find(|l| cycle.contains(&l.source) && cycle.contains(&l.target))
            .map(|l| l.origin.clone())
            .unwrap_or_default();
        out.push(Diagnostic::error(LINK_CYCLE, format!("trace links form a cycle through {}", names.join(", "))).at(&origin));
    }
    out.sort();
    out
}
