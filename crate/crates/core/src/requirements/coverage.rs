use serde::{Deserialize, Serialize};

use super::types::{LinkType, ReqType};
use crate::model::{ElementPath, ModelKind, Stereotyped};
use crate::project::Project;
use crate::safety::ATOMIC_FUNCTION;

const ITEM_STEREOTYPES: [&str; 2] = ["Software_Item", "Hardware_Item"];
const LRU: &str = "LRU";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTally {
    pub level: String,
    pub requirements: usize,
    pub dangling: usize,
    /// Elements in scope in models at this level.
    pub elements: usize,
    pub uncovered: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub uncovered: Vec<ElementPath>,
    pub dangling: Vec<String>,
    pub levels: Vec<LevelTally>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.uncovered.is_empty() && self.dangling.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("level\trequirements\tdangling\telements\tuncovered\n");
        for t in &self.levels {
            out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", t.level, t.requirements, t.dangling, t.elements, t.uncovered));
        }
        out.push_str(&format!("uncovered elements: {}\n", self.uncovered.len()));
        for e in &self.uncovered {
            out.push_str(&format!("  {e}\n"));
        }
        out.push_str(&format!("dangling requirements: {}\n", self.dangling.len()));
        for r in &self.dangling {
            out.push_str(&format!("  {r}\n"));
        }
        out
    }
}

/// Elements that need a satisfying requirement: atomic functions, software
/// and hardware items, and leaf LRUs.
pub fn coverage_scope(project: &Project) -> Vec<ElementPath> {
    let is_a = |e: &crate::model::ArchElement, s: &str| e.stereotype_names().iter().any(|n| project.profiles.is_a(n, s));
    let mut out = Vec::new();
    for m in &project.models {
        for (segs, e) in m.walk() {
            let hit = match m.kind {
                ModelKind::Functional => is_a(e, ATOMIC_FUNCTION),
                ModelKind::Physical => ITEM_STEREOTYPES.iter().any(|s| is_a(e, s)) || (e.is_leaf() && is_a(e, LRU)),
            };
            if hit {
                out.push(m.path_of(&segs));
            }
        }
    }
    out
}

fn is_dangling(project: &Project, r: &super::Requirement) -> bool {
    if r.level == project.manifest.item_level() || r.level == "test" || r.req_type == ReqType::Assumption {
        return false;
    }
    !project.links.iter().any(|l| match l.link_type {
        LinkType::Refines => l.target.as_req() == Some(&r.id),
        LinkType::SatisfiedBy => l.source.as_req() == Some(&r.id),
        _ => false,
    })
}

fn tally<'a>(levels: &'a mut Vec<LevelTally>, level: &str) -> &'a mut LevelTally {
    let i = match levels.iter().position(|t| t.level == level) {
        Some(i) => i,
        None => {
            levels.push(LevelTally {
                level: level.to_string(),
                ..Default::default()
            });
            levels.len() - 1
        }
    };
    &mut levels[i]
}

pub fn coverage_report(project: &Project) -> CoverageReport {
    let mut report = CoverageReport::default();
    let mut uncovered = Vec::new();
    for path in coverage_scope(project) {
        let level = project.model(&path.model).map(|m| m.level.clone()).unwrap_or_default();
        let t = tally(&mut report.levels, &level);
        t.elements += 1;
        let covered = project
            .links
            .iter()
            .any(|l| l.link_type == LinkType::SatisfiedBy && l.target.as_element() == Some(&path));
        if !covered {
            t.uncovered += 1;
            uncovered.push(path);
        }
    }
    let mut dangling = Vec::new();
    for r in &project.requirements {
        let t = tally(&mut report.levels, &r.level);
        t.requirements += 1;
        if is_dangling(project, r) {
            t.dangling += 1;
            dangling.push(r.id.clone());
        }
    }
    report.uncovered = uncovered;
    report.dangling = dangling;
    // Declared levels first, then others by name.
    let declared = &project.manifest.levels;
    report.levels.sort_by_key(|t| {
        (
            declared.iter().position(|l| *l == t.level).unwrap_or(usize::MAX),
            t.level.clone(),
        )
    });
    report
}
