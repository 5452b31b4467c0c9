use std::fmt;

use serde::{Deserialize, Serialize};

use super::{to_json, Format};
use crate::model::ModelKind;
use crate::project::Project;
use crate::requirements::{audit_findings, coverage_report, link_cycle_diagnostics, LinkType, ReqType};
use crate::safety::{
    check_against_safety_requirements, compute_minimal_cut_sets, export_function_list, requirements_for_top,
};

const DEFAULT_LEDGER: &str = include_str!("../../data/compliance_ledger.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimedLevel {
    Full,
    Partial,
    Omitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComputedStatus {
    Substantiated,
    GapsFound,
    NotAssessed,
}

impl fmt::Display for ClaimedLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClaimedLevel::Full => "full",
            ClaimedLevel::Partial => "partial",
            ClaimedLevel::Omitted => "omitted",
        })
    }
}

impl fmt::Display for ComputedStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComputedStatus::Substantiated => "substantiated",
            ComputedStatus::GapsFound => "gaps found",
            ComputedStatus::NotAssessed => "not assessed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceQuery {
    FunctionsWithRequirements,
    Allocations,
    SystemRequirements,
    PhysicalArchitecture,
    ItemRequirements,
    RequirementsConsistent,
    AssumptionAudit,
    DerivedAudit,
    Coverage,
    FhaResults,
    Pssa,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub id: String,
    pub title: String,
    pub claimed: ClaimedLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<EvidenceQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

/// The claimed compliance level per objective. Data, not code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    pub objectives: Vec<ObjectiveSpec>,
}

impl Default for Ledger {
    fn default() -> Self {
        Self::from_json(DEFAULT_LEDGER).expect("shipped ledger parses")
    }
}

impl Ledger {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveResult {
    pub id: String,
    pub title: String,
    pub claimed: ClaimedLevel,
    pub status: ComputedStatus,
    pub evidence: Vec<String>,
    pub gaps: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub project: String,
    pub objectives: Vec<ObjectiveResult>,
}

impl ComplianceReport {
    pub fn objective(&self, id: &str) -> Option<&ObjectiveResult> {
        self.objectives.iter().find(|o| o.id == id)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(self),
            Format::Text => {
                let mut out = format!("Compliance summary: {}\n", self.project);
                for o in &self.objectives {
                    out.push_str(&format!("{:<6} {:<8} {:<14} {}\n", o.id, o.claimed, o.status, o.title));
                    if let Some(r) = &o.rationale {
                        out.push_str(&format!("         rationale: {r}\n"));
                    }
                    for e in &o.evidence {
                        out.push_str(&format!("         evidence: {e}\n"));
                    }
                    for g in &o.gaps {
                        out.push_str(&format!("         gap: {g}\n"));
                    }
                }
                out
            }
        }
    }
}

struct Outcome {
    evidence: Vec<String>,
    gaps: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            evidence: Vec::new(),
            gaps: Vec::new(),
        }
    }

    /// Record `what` as evidence when `ok`, as a gap otherwise.
    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.evidence.push(what);
        } else {
            self.gaps.push(what);
        }
    }
}

fn audit_count(p: &Project, t: ReqType) -> usize {
    audit_findings(p).iter().filter(|f| f.req_type == t).count()
}

fn evaluate(p: &Project, q: EvidenceQuery) -> Outcome {
    let mut o = Outcome::new();
    let n_reqs = p.requirements.iter().filter(|r| r.level != "test").count();
    match q {
        EvidenceQuery::FunctionsWithRequirements => {
            let functions = export_function_list(p);
            let linked = functions
                .iter()
                .filter(|f| p.links.iter().any(|l| l.link_type == LinkType::SatisfiedBy && l.target.as_element() == Some(&f.path)))
                .count();
            o.check(linked > 0, format!("{linked} of {} atomic functions satisfied by requirements", functions.len()));
        }
        EvidenceQuery::Allocations => {
            let n = p.allocations().len();
            o.check(n > 0, format!("{n} allocations from functions to physical elements"));
        }
        EvidenceQuery::SystemRequirements => {
            let level = &p.manifest.l0;
            let sys = p.requirements.iter().filter(|r| &r.level == level && r.req_type != ReqType::Assumption).count();
            let asm = p.requirements.iter().filter(|r| r.req_type == ReqType::Assumption).count();
            o.check(sys > 0, format!("{sys} requirements at level {level}"));
            o.check(asm > 0, format!("{asm} assumptions"));
        }
        EvidenceQuery::PhysicalArchitecture => {
            let models: Vec<_> = p.models_of(ModelKind::Physical).collect();
            let connectors: usize = models.iter().map(|m| m.connectors.len()).sum();
            o.check(!models.is_empty(), format!("{} physical models", models.len()));
            o.check(connectors > 0, format!("{connectors} physical connectors"));
        }
        EvidenceQuery::ItemRequirements => {
            let item = p.manifest.item_level();
            let items: Vec<_> = p.requirements.iter().filter(|r| r.level == item).collect();
            let linked = items
                .iter()
                .filter(|r| {
                    p.links.iter().any(|l| {
                        l.source.as_req() == Some(r.id.as_str())
                            && matches!(l.link_type, LinkType::Refines | LinkType::SatisfiedBy | LinkType::DerivesFrom)
                    })
                })
                .count();
            o.check(!items.is_empty() && linked == items.len(), format!("{linked} of {} item-level requirements linked", items.len()));
        }
        EvidenceQuery::RequirementsConsistent => {
            let cycles = link_cycle_diagnostics(p).len();
            o.check(n_reqs > 0, format!("{n_reqs} requirements with unique identifiers"));
            o.check(cycles == 0, format!("{cycles} trace link cycles"));
        }
        EvidenceQuery::AssumptionAudit => {
            let n = p.requirements.iter().filter(|r| r.req_type == ReqType::Assumption).count();
            let findings = audit_count(p, ReqType::Assumption);
            o.check(n > 0, format!("{n} assumptions"));
            o.check(findings == 0, format!("{findings} assumption audit findings"));
        }
        EvidenceQuery::DerivedAudit => {
            let n = p.requirements.iter().filter(|r| r.req_type == ReqType::Derived).count();
            let findings = audit_count(p, ReqType::Derived);
            o.check(n_reqs > 0, format!("{n} derived requirements among {n_reqs}"));
            o.check(findings == 0, format!("{findings} derived requirement audit findings"));
        }
        EvidenceQuery::Coverage => {
            let c = coverage_report(p);
            o.check(n_reqs > 0, format!("{n_reqs} requirements"));
            o.check(c.uncovered.is_empty(), format!("{} uncovered elements", c.uncovered.len()));
            o.check(c.dangling.is_empty(), format!("{} dangling requirements", c.dangling.len()));
        }
        EvidenceQuery::FhaResults => {
            let with_fdal = export_function_list(p).iter().filter(|f| f.fdal.is_some()).count();
            o.check(!p.fha.is_empty(), format!("{} imported failure conditions", p.fha.len()));
            o.check(with_fdal > 0, format!("{with_fdal} functions with an FDAL"));
        }
        EvidenceQuery::Pssa => {
            let mut linked = 0;
            let mut results = Vec::new();
            for f in &p.fpms {
                for t in &f.top_events {
                    let safety = requirements_for_top(p, &t.name).iter().any(|r| r.req_type == ReqType::Safety);
                    if safety {
                        linked += 1;
                        results.extend(compute_minimal_cut_sets(f, &t.name, None).ok());
                    }
                }
            }
            let violations = check_against_safety_requirements(&results, p).iter().filter(|d| d.is_error()).count();
            o.check(linked > 0, format!("{linked} top events linked to safety requirements"));
            o.check(linked > 0 && violations == 0, format!("{violations} cut set violations of safety requirements"));
        }
    }
    o
}

pub fn compliance_report(project: &Project, ledger: &Ledger) -> ComplianceReport {
    let objectives = ledger
        .objectives
        .iter()
        .map(|spec| {
            let (status, evidence, gaps) = match (spec.claimed, spec.query) {
                (ClaimedLevel::Omitted, _) | (_, None) => (ComputedStatus::NotAssessed, Vec::new(), Vec::new()),
                (_, Some(q)) => {
                    let o = evaluate(project, q);
                    let status = if o.gaps.is_empty() {
                        ComputedStatus::Substantiated
                    } else {
                        ComputedStatus::GapsFound
                    };
                    (status, o.evidence, o.gaps)
                }
            };
            ObjectiveResult {
                id: spec.id.clone(),
                title: spec.title.clone(),
                claimed: spec.claimed,
                status,
                evidence,
                gaps,
                rationale: spec.rationale.clone(),
            }
        })
        .collect();
    ComplianceReport {
        project: project.manifest.name.clone(),
        objectives,
    }
}
