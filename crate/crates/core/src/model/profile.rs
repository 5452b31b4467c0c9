//! Stereotype profiles: the type system of architecture models.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::{codes, Diagnostic, Origin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Functional,
    Physical,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Functional => "functional",
            ModelKind::Physical => "physical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "functional" => Some(ModelKind::Functional),
            "physical" => Some(ModelKind::Physical),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The kind of model object a stereotype can be applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Component,
    Port,
    Connector,
}

impl BaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaseKind::Component => "component",
            BaseKind::Port => "port",
            BaseKind::Connector => "connector",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "component" => Some(BaseKind::Component),
            "port" => Some(BaseKind::Port),
            "connector" => Some(BaseKind::Connector),
            _ => None,
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Development assurance level, A (most stringent) to E.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dal {
    A,
    B,
    C,
    D,
    E,
}

impl Dal {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "A" => Some(Dal::A),
            "B" => Some(Dal::B),
            "C" => Some(Dal::C),
            "D" => Some(Dal::D),
            "E" => Some(Dal::E),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dal::A => "A",
            Dal::B => "B",
            Dal::C => "C",
            Dal::D => "D",
            Dal::E => "E",
        }
    }
}

impl fmt::Display for Dal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "literals")]
pub enum ValueKind {
    String,
    Integer,
    Real,
    Boolean,
    Dal,
    Enumeration(Vec<String>),
}

impl ValueKind {
    pub fn name(&self) -> &'static str {
        match self {
            ValueKind::String => "string",
            ValueKind::Integer => "integer",
            ValueKind::Real => "real",
            ValueKind::Boolean => "boolean",
            ValueKind::Dal => "dal",
            ValueKind::Enumeration(_) => "enum",
        }
    }

    /// Check a value against this kind. Integers widen to reals; strings are
    /// accepted for enumerations when they name a literal.
    pub fn coerce(&self, value: AttrValue) -> Result<AttrValue, AttrValue> {
        match (self, value) {
            (ValueKind::String, v @ AttrValue::String(_)) => Ok(v),
            (ValueKind::Integer, v @ AttrValue::Integer(_)) => Ok(v),
            (ValueKind::Real, v @ AttrValue::Real(_)) => Ok(v),
            (ValueKind::Real, AttrValue::Integer(i)) => Ok(AttrValue::Real(i as f64)),
            (ValueKind::Boolean, v @ AttrValue::Boolean(_)) => Ok(v),
            (ValueKind::Dal, v @ AttrValue::Dal(_)) => Ok(v),
            (ValueKind::Enumeration(lits), AttrValue::Enum(s) | AttrValue::String(s))
                if lits.contains(&s) =>
            {
                Ok(AttrValue::Enum(s))
            }
            (_, v) => Err(v),
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Enumeration(lits) => write!(f, "enum({})", lits.join(", ")),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Boolean(bool),
    Integer(i64),
    Real(f64),
    Dal(Dal),
    Enum(String),
    String(String),
}

impl AttrValue {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AttrValue::String(_) => "string",
            AttrValue::Integer(_) => "integer",
            AttrValue::Real(_) => "real",
            AttrValue::Boolean(_) => "boolean",
            AttrValue::Dal(_) => "dal",
            AttrValue::Enum(_) => "enum literal",
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttrValue::String(s) | AttrValue::Enum(s) => Some(s),
            _ => None,
        }
    }

    /// Text used in reports and regex checks (no quoting).
    pub fn display_text(&self) -> String {
        match self {
            AttrValue::String(s) | AttrValue::Enum(s) => s.clone(),
            AttrValue::Integer(i) => i.to_string(),
            AttrValue::Real(r) => format_real(*r),
            AttrValue::Boolean(b) => b.to_string(),
            AttrValue::Dal(d) => d.to_string(),
        }
    }
}

/// Shortest representation that reads back as the same real (always
/// contains a `.` or an exponent).
pub fn format_real(r: f64) -> String {
    format!("{r:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub kind: ValueKind,
    pub required: bool,
    pub default: Option<AttrValue>,
    #[serde(skip)]
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stereotype {
    pub name: String,
    /// Declared base kind. May be omitted when `extends` is present.
    pub declared_kind: Option<BaseKind>,
    pub extends: Option<String>,
    pub is_abstract: bool,
    pub attributes: Vec<AttributeDef>,
    /// Connectors only: the port stereotype both ends must carry.
    pub endpoints: Option<String>,
    #[serde(skip)]
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    /// Restricts the profile to one kind of model when set.
    pub kind: Option<ModelKind>,
    pub stereotypes: Vec<Stereotype>,
    #[serde(skip)]
    pub origin: Origin,
}

impl Profile {
    pub fn stereotype(&self, name: &str) -> Option<&Stereotype> {
        self.stereotypes.iter().find(|s| s.name == name)
    }

    /// Flatten a stereotype using only this profile's declarations.
    pub fn resolve(&self, name: &str) -> Result<EffectiveStereotype, ProfileError> {
        resolve_effective(|n| self.stereotype(n), name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveAttr {
    pub def: AttributeDef,
    pub declared_in: String,
}

/// A stereotype with its inheritance chain flattened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveStereotype {
    pub name: String,
    pub base_kind: BaseKind,
    pub is_abstract: bool,
    /// Root first, ending with `name`.
    pub chain: Vec<String>,
    /// Own and inherited attributes, root first.
    pub attributes: Vec<EffectiveAttr>,
    /// Nearest endpoint constraint along the chain.
    pub endpoint_constraint: Option<String>,
}

impl EffectiveStereotype {
    pub fn is_a(&self, ancestor: &str) -> bool {
        self.chain.iter().any(|c| c == ancestor)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes
            .iter()
            .map(|a| &a.def)
            .find(|d| d.name == name)
    }

    pub fn attribute_names(&self) -> Vec<&str> {
        self.attributes.iter().map(|a| a.def.name.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("unknown stereotype `{0}`")]
    Unknown(String),
    #[error("stereotype `{stereotype}` extends unknown stereotype `{parent}`")]
    UnresolvedParent { stereotype: String, parent: String },
    #[error("inheritance cycle through `{0}`")]
    Cycle(String),
    #[error("stereotype `{stereotype}` redefines attribute `{attribute}` inherited from `{parent}`")]
    Redefinition {
        stereotype: String,
        attribute: String,
        parent: String,
    },
    #[error("stereotype `{stereotype}` is a {declared} but extends `{parent}`, a {inherited}")]
    KindMismatch {
        stereotype: String,
        parent: String,
        declared: BaseKind,
        inherited: BaseKind,
    },
    #[error("stereotype `{0}` declares no base kind")]
    NoKind(String),
}

/// Walk the `extends` chain of `name` and flatten it.
pub fn resolve_effective<'a, F>(lookup: F, name: &str) -> Result<EffectiveStereotype, ProfileError>
where
    F: Fn(&str) -> Option<&'a Stereotype>,
{
    let mut chain: Vec<&Stereotype> = Vec::new();
    let mut seen = HashSet::new();
    let mut current = lookup(name).ok_or_else(|| ProfileError::Unknown(name.to_string()))?;
    loop {
        if !seen.insert(current.name.as_str()) {
            return Err(ProfileError::Cycle(current.name.clone()));
        }
        chain.push(current);
        match &current.extends {
            None => break,
            Some(parent) => {
                current = lookup(parent).ok_or_else(|| ProfileError::UnresolvedParent {
                    stereotype: current.name.clone(),
                    parent: parent.clone(),
                })?;
            }
        }
    }
    chain.reverse();

    let mut base_kind: Option<BaseKind> = None;
    let mut attributes: Vec<EffectiveAttr> = Vec::new();
    let mut endpoint_constraint = None;
    for (i, s) in chain.iter().enumerate() {
        match (base_kind, s.declared_kind) {
            (Some(inherited), Some(declared)) if inherited != declared => {
                return Err(ProfileError::KindMismatch {
                    stereotype: s.name.clone(),
                    parent: chain[i - 1].name.clone(),
                    declared,
                    inherited,
                });
            }
            (None, Some(declared)) => base_kind = Some(declared),
            _ => {}
        }
        for attr in &s.attributes {
            if let Some(prev) = attributes.iter().find(|a| a.def.name == attr.name) {
                return Err(ProfileError::Redefinition {
                    stereotype: s.name.clone(),
                    attribute: attr.name.clone(),
                    parent: prev.declared_in.clone(),
                });
            }
            attributes.push(EffectiveAttr {
                def: attr.clone(),
                declared_in: s.name.clone(),
            });
        }
        if s.endpoints.is_some() {
            endpoint_constraint = s.endpoints.clone();
        }
    }
    let leaf = chain.last().expect("chain is never empty");
    Ok(EffectiveStereotype {
        name: leaf.name.clone(),
        base_kind: base_kind.ok_or_else(|| ProfileError::NoKind(leaf.name.clone()))?,
        is_abstract: leaf.is_abstract,
        chain: chain.iter().map(|s| s.name.clone()).collect(),
        attributes,
        endpoint_constraint,
    })
}

/// Check a group of stereotypes for inheritance problems. With
/// `allow_missing_parent`, parents that are not in the group are assumed
/// to be declared elsewhere and their part of the chain is not checked.
pub fn check_hierarchy(stereotypes: &[&Stereotype], allow_missing_parent: bool) -> Vec<Diagnostic> {
    let by_name: HashMap<&str, &Stereotype> =
        stereotypes.iter().map(|s| (s.name.as_str(), *s)).collect();
    let position: HashMap<&str, usize> = stereotypes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    let mut diags = Vec::new();
    let mut reported_cycles: HashSet<Vec<usize>> = HashSet::new();

    for s in stereotypes {
        // Cycle detection: follow parents until we leave the group, reach a
        // root, or revisit a node.
        let mut path: Vec<&str> = vec![s.name.as_str()];
        let mut cur = *s;
        let mut cyclic = false;
        while let Some(parent) = cur.extends.as_deref() {
            if let Some(i) = path.iter().position(|p| *p == parent) {
                let mut members: Vec<usize> = path[i..].iter().map(|n| position[n]).collect();
                members.sort_unstable();
                if reported_cycles.insert(members.clone()) {
                    let last = stereotypes[*members.last().unwrap()];
                    let names: Vec<&str> = members.iter().map(|m| stereotypes[*m].name.as_str()).collect();
                    diags.push(
                        Diagnostic::error(
                            codes::CYCLE,
                            format!(
                                "inheritance cycle: stereotype `{}` closes the cycle {}",
                                last.name,
                                names.join(" -> ")
                            ),
                        )
                        .at(&last.origin),
                    );
                }
                cyclic = true;
                break;
            }
            match by_name.get(parent) {
                Some(p) => {
                    path.push(parent);
                    cur = p;
                }
                None => {
                    if !allow_missing_parent {
                        diags.push(
                            Diagnostic::error(
                                codes::UNRESOLVED,
                                format!("stereotype `{}` extends unknown stereotype `{}`", cur.name, parent),
                            )
                            .at(&cur.origin),
                        );
                    }
                    break;
                }
            }
        }
        if cyclic {
            continue;
        }
        // Kind and attribute checks only against the direct parent; the
        // parent reports its own chain.
        if let Some(parent) = s.extends.as_deref().and_then(|p| by_name.get(p)) {
            if let Ok(pe) = resolve_effective(|n| by_name.get(n).copied(), &parent.name) {
                if let Some(declared) = s.declared_kind {
                    if declared != pe.base_kind {
                        diags.push(
                            Diagnostic::error(
                                codes::KIND_MISMATCH,
                                format!(
                                    "stereotype `{}` is declared {} but extends `{}`, a {}",
                                    s.name, declared, parent.name, pe.base_kind
                                ),
                            )
                            .at(&s.origin),
                        );
                    }
                }
                for attr in &s.attributes {
                    if let Some(prev) = pe.attributes.iter().find(|a| a.def.name == attr.name) {
                        diags.push(
                            Diagnostic::error(
                                codes::REDEFINITION,
                                format!(
                                    "attribute `{}` of `{}` is already defined by `{}`",
                                    attr.name, s.name, prev.declared_in
                                ),
                            )
                            .at(&attr.origin),
                        );
                    }
                }
            }
        }
        if s.extends.is_none() && s.declared_kind.is_none() {
            diags.push(
                Diagnostic::error(
                    codes::SYNTAX,
                    format!("stereotype `{}` needs a base kind or a parent", s.name),
                )
                .at(&s.origin),
            );
        }
        if let Some(ep) = &s.endpoints {
            let kind = resolve_effective(|n| by_name.get(n).copied(), &s.name)
                .ok()
                .map(|e| e.base_kind)
                .or(s.declared_kind);
            if matches!(kind, Some(k) if k != BaseKind::Connector) {
                diags.push(
                    Diagnostic::error(
                        codes::KIND_MISMATCH,
                        format!("only connector stereotypes may constrain endpoints (`{}`)", s.name),
                    )
                    .at(&s.origin),
                );
            }
            match by_name.get(ep.as_str()) {
                Some(_) => {
                    if let Ok(e) = resolve_effective(|n| by_name.get(n).copied(), ep) {
                        if e.base_kind != BaseKind::Port {
                            diags.push(
                                Diagnostic::error(
                                    codes::KIND_MISMATCH,
                                    format!("endpoint constraint `{ep}` of `{}` is not a port stereotype", s.name),
                                )
                                .at(&s.origin),
                            );
                        }
                    }
                }
                None if !allow_missing_parent => diags.push(
                    Diagnostic::error(
                        codes::UNRESOLVED,
                        format!("endpoint constraint `{ep}` of `{}` is not a known stereotype", s.name),
                    )
                    .at(&s.origin),
                ),
                None => {}
            }
        }
    }
    diags
}

/// All loaded profiles with stereotype names resolved project-wide.
#[derive(Debug, Clone, Default)]
pub struct ProfileSet {
    profiles: Vec<Profile>,
    /// stereotype name -> (profile index, stereotype index)
    index: HashMap<String, (usize, usize)>,
    effective: BTreeMap<String, EffectiveStereotype>,
}

impl ProfileSet {
    /// Combine profiles, reporting duplicates and inheritance problems.
    /// Stereotypes that cannot be resolved are left out of the effective
    /// table, so models using them fail with "unknown stereotype".
    pub fn build(profiles: Vec<Profile>) -> (Self, Vec<Diagnostic>) {
        let mut diags = Vec::new();
        let mut index = HashMap::new();
        let mut profile_names = HashSet::new();
        for (pi, p) in profiles.iter().enumerate() {
            if !profile_names.insert(p.name.clone()) {
                diags.push(
                    Diagnostic::error(codes::DUPLICATE_GLOBAL, format!("profile `{}` is declared twice", p.name))
                        .at(&p.origin),
                );
            }
            for (si, s) in p.stereotypes.iter().enumerate() {
                if index.contains_key(&s.name) {
                    diags.push(
                        Diagnostic::error(
                            codes::DUPLICATE_GLOBAL,
                            format!("stereotype `{}` is declared in more than one profile", s.name),
                        )
                        .at(&s.origin),
                    );
                } else {
                    index.insert(s.name.clone(), (pi, si));
                }
            }
        }
        let all: Vec<&Stereotype> = index
            .values()
            .map(|&(pi, si)| &profiles[pi].stereotypes[si])
            .collect::<Vec<_>>();
        // Deterministic order: declaration order across profiles.
        let mut all = all;
        all.sort_by_key(|s| index[&s.name]);
        diags.extend(check_hierarchy(&all, false));

        let mut effective = BTreeMap::new();
        for s in &all {
            if let Ok(e) = resolve_effective(
                |n| index.get(n).map(|&(pi, si)| &profiles[pi].stereotypes[si]),
                &s.name,
            ) {
                effective.insert(s.name.clone(), e);
            }
        }
        diags.sort();
        diags.dedup();
        (
            Self {
                profiles,
                index,
                effective,
            },
            diags,
        )
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn profile(&self, name: &str) -> Option<&Profile> {
        self.profiles.iter().find(|p| p.name == name)
    }

    pub fn effective(&self, stereotype: &str) -> Option<&EffectiveStereotype> {
        self.effective.get(stereotype)
    }

    /// Name of the profile declaring `stereotype`.
    pub fn profile_of(&self, stereotype: &str) -> Option<&str> {
        self.index
            .get(stereotype)
            .map(|&(pi, _)| self.profiles[pi].name.as_str())
    }

    pub fn stereotype(&self, name: &str) -> Option<&Stereotype> {
        self.index
            .get(name)
            .map(|&(pi, si)| &self.profiles[pi].stereotypes[si])
    }

    /// True if `stereotype` is `ancestor` or inherits from it.
    pub fn is_a(&self, stereotype: &str, ancestor: &str) -> bool {
        self.effective(stereotype).is_some_and(|e| e.is_a(ancestor))
    }
}
