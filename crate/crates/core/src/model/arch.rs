//! Architecture graphs: elements, ports and connectors.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::path::{join_names, ElementPath};
use super::profile::{AttrValue, BaseKind, EffectiveStereotype, ModelKind};
use crate::diag::Origin;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
    InOut,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
            Direction::InOut => "inout",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "in" => Some(Direction::In),
            "out" => Some(Direction::Out),
            "inout" => Some(Direction::InOut),
            _ => None,
        }
    }

    pub fn can_send(self) -> bool {
        matches!(self, Direction::Out | Direction::InOut)
    }

    pub fn can_receive(self) -> bool {
        matches!(self, Direction::In | Direction::InOut)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttrBinding {
    pub name: String,
    pub value: AttrValue,
    /// Filled in from the attribute default rather than written by the author.
    pub defaulted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedStereotype {
    pub stereotype: String,
    /// In effective attribute order.
    pub bindings: Vec<AttrBinding>,
}

impl AppliedStereotype {
    pub fn value(&self, attr: &str) -> Option<&AttrValue> {
        self.bindings.iter().find(|b| b.name == attr).map(|b| &b.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("stereotype `{stereotype}` applies to {expected}s, not {found}s")]
    BaseKindMismatch {
        stereotype: String,
        expected: BaseKind,
        found: BaseKind,
    },
    #[error("stereotype `{0}` is abstract and cannot be applied")]
    Abstract(String),
    #[error("attribute `{attribute}` of `{stereotype}` expects {expected}, got {found}")]
    BindingKind {
        stereotype: String,
        attribute: String,
        expected: String,
        found: &'static str,
    },
    #[error("stereotype `{stereotype}` has no attribute `{attribute}`")]
    UnknownAttribute { stereotype: String, attribute: String },
}

/// Objects that can carry stereotypes.
pub trait Stereotyped {
    const BASE_KIND: BaseKind;
    fn applied(&self) -> &[AppliedStereotype];
    fn applied_mut(&mut self) -> &mut Vec<AppliedStereotype>;

    fn value(&self, attr: &str) -> Option<&AttrValue> {
        self.applied().iter().find_map(|a| a.value(attr))
    }

    fn stereotype_names(&self) -> Vec<&str> {
        self.applied().iter().map(|a| a.stereotype.as_str()).collect()
    }
}

/// Apply a stereotype with attribute bindings. Optional attributes that are
/// not bound take their defaults; required attributes without a value are
/// left unset for the rule engine to report.
pub fn apply_stereotype<T: Stereotyped>(
    target: &mut T,
    stereotype: &EffectiveStereotype,
    bindings: Vec<(String, AttrValue)>,
) -> Result<(), ApplyError> {
    if stereotype.base_kind != T::BASE_KIND {
        return Err(ApplyError::BaseKindMismatch {
            stereotype: stereotype.name.clone(),
            expected: stereotype.base_kind,
            found: T::BASE_KIND,
        });
    }
    if stereotype.is_abstract {
        return Err(ApplyError::Abstract(stereotype.name.clone()));
    }
    let mut bound: Vec<(String, AttrValue)> = Vec::with_capacity(bindings.len());
    for (name, value) in bindings {
        let def = stereotype
            .attribute(&name)
            .ok_or_else(|| ApplyError::UnknownAttribute {
                stereotype: stereotype.name.clone(),
                attribute: name.clone(),
            })?;
        let value = def.kind.coerce(value).map_err(|v| ApplyError::BindingKind {
            stereotype: stereotype.name.clone(),
            attribute: name.clone(),
            expected: def.kind.to_string(),
            found: v.kind_name(),
        })?;
        bound.retain(|(n, _)| *n != name);
        bound.push((name, value));
    }
    let mut out = Vec::new();
    for attr in &stereotype.attributes {
        if let Some((_, v)) = bound.iter().find(|(n, _)| *n == attr.def.name) {
            out.push(AttrBinding {
                name: attr.def.name.clone(),
                value: v.clone(),
                defaulted: false,
            });
        } else if let Some(default) = &attr.def.default {
            out.push(AttrBinding {
                name: attr.def.name.clone(),
                value: default.clone(),
                defaulted: true,
            });
        }
    }
    target.applied_mut().push(AppliedStereotype {
        stereotype: stereotype.name.clone(),
        bindings: out,
    });
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchPort {
    pub name: String,
    pub direction: Direction,
    pub stereotypes: Vec<AppliedStereotype>,
    #[serde(skip)]
    pub origin: Origin,
}

impl ArchPort {
    pub fn new(name: impl Into<String>, direction: Direction) -> Self {
        Self {
            name: name.into(),
            direction,
            stereotypes: Vec::new(),
            origin: Origin::none(),
        }
    }
}

impl Stereotyped for ArchPort {
    const BASE_KIND: BaseKind = BaseKind::Port;
    fn applied(&self) -> &[AppliedStereotype] {
        &self.stereotypes
    }
    fn applied_mut(&mut self) -> &mut Vec<AppliedStereotype> {
        &mut self.stereotypes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchElement {
    pub name: String,
    pub stereotypes: Vec<AppliedStereotype>,
    pub ports: Vec<ArchPort>,
    pub children: Vec<ArchElement>,
    #[serde(skip)]
    pub origin: Origin,
}

impl ArchElement {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            stereotypes: Vec::new(),
            ports: Vec::new(),
            children: Vec::new(),
            origin: Origin::none(),
        }
    }

    pub fn port(&self, name: &str) -> Option<&ArchPort> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn child(&self, name: &str) -> Option<&ArchElement> {
        self.children.iter().find(|c| c.name == name)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

impl Stereotyped for ArchElement {
    const BASE_KIND: BaseKind = BaseKind::Component;
    fn applied(&self) -> &[AppliedStereotype] {
        &self.stereotypes
    }
    fn applied_mut(&mut self) -> &mut Vec<AppliedStereotype> {
        &mut self.stereotypes
    }
}

/// A port addressed relative to its model: element path then port name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub element: Vec<String>,
    pub port: String,
}

impl PortRef {
    pub fn new(element: Vec<String>, port: impl Into<String>) -> Self {
        Self {
            element,
            port: port.into(),
        }
    }

    /// Split a relative path whose last segment names the port.
    pub fn from_segments(segments: &[String]) -> Option<Self> {
        let (port, element) = segments.split_last()?;
        if element.is_empty() {
            return None;
        }
        Some(Self::new(element.to_vec(), port.clone()))
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut segs = self.element.clone();
        segs.push(self.port.clone());
        f.write_str(&join_names(&segs))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchConnector {
    /// Optional label, e.g. a functional exchange name.
    pub name: Option<String>,
    pub source: PortRef,
    pub target: PortRef,
    pub stereotypes: Vec<AppliedStereotype>,
    #[serde(skip)]
    pub origin: Origin,
}

impl ArchConnector {
    pub fn new(source: PortRef, target: PortRef) -> Self {
        Self {
            name: None,
            source,
            target,
            stereotypes: Vec::new(),
            origin: Origin::none(),
        }
    }

    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => self.stereotype_names().join(", "),
        }
    }
}

impl Stereotyped for ArchConnector {
    const BASE_KIND: BaseKind = BaseKind::Connector;
    fn applied(&self) -> &[AppliedStereotype] {
        &self.stereotypes
    }
    fn applied_mut(&mut self) -> &mut Vec<AppliedStereotype> {
        &mut self.stereotypes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchModel {
    pub name: String,
    pub kind: ModelKind,
    /// Hierarchy label, e.g. `system` or `L1`.
    pub level: String,
    pub uses: Vec<String>,
    pub elements: Vec<ArchElement>,
    pub connectors: Vec<ArchConnector>,
    #[serde(skip)]
    pub origin: Origin,
}

impl ArchModel {
    pub fn new(name: impl Into<String>, kind: ModelKind, level: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind,
            level: level.into(),
            uses: Vec::new(),
            elements: Vec::new(),
            connectors: Vec::new(),
            origin: Origin::none(),
        }
    }

    pub fn element(&self, segments: &[String]) -> Option<&ArchElement> {
        let (first, rest) = segments.split_first()?;
        let mut cur = self.elements.iter().find(|e| &e.name == first)?;
        for s in rest {
            cur = cur.child(s)?;
        }
        Some(cur)
    }

    pub fn port(&self, r: &PortRef) -> Option<(&ArchElement, &ArchPort)> {
        let e = self.element(&r.element)?;
        e.port(&r.port).map(|p| (e, p))
    }

    pub fn path_of(&self, segments: &[String]) -> ElementPath {
        ElementPath::new(self.name.clone(), segments.to_vec())
    }

    /// Pre-order walk in declaration order: (relative path, element).
    pub fn walk(&self) -> Vec<(Vec<String>, &ArchElement)> {
        fn go<'a>(prefix: &[String], e: &'a ArchElement, out: &mut Vec<(Vec<String>, &'a ArchElement)>) {
            let mut path = prefix.to_vec();
            path.push(e.name.clone());
            out.push((path.clone(), e));
            for c in &e.children {
                go(&path, c, out);
            }
        }
        let mut out = Vec::new();
        for e in &self.elements {
            go(&[], e, &mut out);
        }
        out
    }

    pub fn element_count(&self) -> usize {
        self.walk().len()
    }

    pub fn connectors_at<'a>(&'a self, r: &'a PortRef) -> impl Iterator<Item = &'a ArchConnector> + 'a {
        self.connectors
            .iter()
            .filter(move |c| &c.source == r || &c.target == r)
    }
}
