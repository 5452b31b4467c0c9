use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::arch::{ArchElement, ArchModel};
use super::path::ElementPath;
use super::profile::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    FunctionBreakdown,
    PhysicalActorsBreakdown,
}

impl ViewKind {
    pub fn for_model(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Functional => ViewKind::FunctionBreakdown,
            ModelKind::Physical => ViewKind::PhysicalActorsBreakdown,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ViewKind::FunctionBreakdown => "Function Breakdown",
            ViewKind::PhysicalActorsBreakdown => "Physical Actors Breakdown",
        }
    }

    fn model_kind(self) -> ModelKind {
        match self {
            ViewKind::FunctionBreakdown => ModelKind::Functional,
            ViewKind::PhysicalActorsBreakdown => ModelKind::Physical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub name: String,
    pub path: String,
    pub stereotypes: Vec<String>,
    pub attributes: Vec<(String, String)>,
    pub children: Vec<ViewEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewTree {
    pub model: String,
    pub kind: ViewKind,
    pub entries: Vec<ViewEntry>,
}

impl ViewTree {
    pub fn len(&self) -> usize {
        fn count(e: &ViewEntry) -> usize {
            1 + e.children.iter().map(count).sum::<usize>()
        }
        self.entries.iter().map(count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pre-order list of entry paths.
    pub fn paths(&self) -> Vec<String> {
        fn go(e: &ViewEntry, out: &mut Vec<String>) {
            out.push(e.path.clone());
            e.children.iter().for_each(|c| go(c, out));
        }
        let mut out = Vec::new();
        self.entries.iter().for_each(|e| go(e, &mut out));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{view} cannot be built from {model_kind} model `{model}`")]
pub struct ViewError {
    pub view: &'static str,
    pub model: String,
    pub model_kind: ModelKind,
}

pub fn build_view(model: &ArchModel, kind: ViewKind) -> Result<ViewTree, ViewError> {
    if kind.model_kind() != model.kind {
        return Err(ViewError {
            view: kind.title(),
            model: model.name.clone(),
            model_kind: model.kind,
        });
    }
    fn entry(model: &ArchModel, prefix: &[String], e: &ArchElement) -> ViewEntry {
        let mut segs = prefix.to_vec();
        segs.push(e.name.clone());
        ViewEntry {
            name: e.name.clone(),
            path: ElementPath::new(model.name.clone(), segs.clone()).to_string(),
            stereotypes: e.stereotypes.iter().map(|s| s.stereotype.clone()).collect(),
            attributes: e
                .stereotypes
                .iter()
                .flat_map(|s| s.bindings.iter())
                .map(|b| (b.name.clone(), b.value.display_text()))
                .collect(),
            children: e.children.iter().map(|c| entry(model, &segs, c)).collect(),
        }
    }
    Ok(ViewTree {
        model: model.name.clone(),
        kind,
        entries: model.elements.iter().map(|e| entry(model, &[], e)).collect(),
    })
}
