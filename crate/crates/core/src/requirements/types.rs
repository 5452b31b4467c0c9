use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::Origin;
use crate::model::{join_names, quote_name, ElementPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReqType {
    Functional,
    Safety,
    Derived,
    Assumption,
    Interface,
    Performance,
}

impl ReqType {
    pub const ALL: [ReqType; 6] = [
        ReqType::Functional,
        ReqType::Safety,
        ReqType::Derived,
        ReqType::Assumption,
        ReqType::Interface,
        ReqType::Performance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReqType::Functional => "functional",
            ReqType::Safety => "safety",
            ReqType::Derived => "derived",
            ReqType::Assumption => "assumption",
            ReqType::Interface => "interface",
            ReqType::Performance => "performance",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for ReqType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Failure condition severity classes, most severe first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Catastrophic,
    Hazardous,
    Major,
    Minor,
    NoSafetyEffect,
}

impl Classification {
    pub const ALL: [Classification; 5] = [
        Classification::Catastrophic,
        Classification::Hazardous,
        Classification::Major,
        Classification::Minor,
        Classification::NoSafetyEffect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Catastrophic => "catastrophic",
            Classification::Hazardous => "hazardous",
            Classification::Major => "major",
            Classification::Minor => "minor",
            Classification::NoSafetyEffect => "no_safety_effect",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    pub level: String,
    pub req_type: ReqType,
    pub text: String,
    pub rationale: Option<String>,
    pub justification: Option<String>,
    /// Smallest acceptable minimal cut set order for linked top events.
    pub min_cut_order: Option<u32>,
    pub classification: Option<Classification>,
    #[serde(skip)]
    pub origin: Origin,
}

impl Requirement {
    pub fn new(id: impl Into<String>, level: impl Into<String>, req_type: ReqType) -> Self {
        Self {
            id: id.into(),
            level: level.into(),
            req_type,
            text: String::new(),
            rationale: None,
            justification: None,
            min_cut_order: None,
            classification: None,
            origin: Origin::none(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkType {
    SatisfiedBy,
    Refines,
    DerivesFrom,
    AllocatedTo,
    ValidatedBy,
    JustifiedBy,
}

impl LinkType {
    pub const ALL: [LinkType; 6] = [
        LinkType::SatisfiedBy,
        LinkType::Refines,
        LinkType::DerivesFrom,
        LinkType::AllocatedTo,
        LinkType::ValidatedBy,
        LinkType::JustifiedBy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkType::SatisfiedBy => "satisfied_by",
            LinkType::Refines => "refines",
            LinkType::DerivesFrom => "derives_from",
            LinkType::AllocatedTo => "allocated_to",
            LinkType::ValidatedBy => "validated_by",
            LinkType::JustifiedBy => "justified_by",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for LinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Anything a trace link can point at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArtifactRef {
    Requirement { id: String },
    Element { path: ElementPath },
    TopEvent { name: String },
}

impl ArtifactRef {
    pub fn req(id: impl Into<String>) -> Self {
        ArtifactRef::Requirement { id: id.into() }
    }

    pub fn element(path: ElementPath) -> Self {
        ArtifactRef::Element { path }
    }

    pub fn as_req(&self) -> Option<&str> {
        match self {
            ArtifactRef::Requirement { id } => Some(id),
            _ => None,
        }
    }

    pub fn as_element(&self) -> Option<&ElementPath> {
        match self {
            ArtifactRef::Element { path } => Some(path),
            _ => None,
        }
    }
}

impl fmt::Display for ArtifactRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArtifactRef::Requirement { id } => f.write_str(&quote_name(id)),
            ArtifactRef::Element { path } => write!(f, "{path}"),
            ArtifactRef::TopEvent { name } => f.write_str(&quote_name(name)),
        }
    }
}

/// A link as written in a file, before its ends are resolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLink {
    pub source: Vec<String>,
    pub link_type: LinkType,
    pub target: Vec<String>,
    #[serde(skip)]
    pub origin: Origin,
}

impl RawLink {
    pub fn new(source: Vec<String>, link_type: LinkType, target: Vec<String>) -> Self {
        Self {
            source,
            link_type,
            target,
            origin: Origin::none(),
        }
    }

    pub fn source_text(&self) -> String {
        join_names(&self.source)
    }

    pub fn target_text(&self) -> String {
        join_names(&self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLink {
    pub source: ArtifactRef,
    pub link_type: LinkType,
    pub target: ArtifactRef,
    #[serde(skip)]
    pub origin: Origin,
}
