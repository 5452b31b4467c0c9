//! Declarative rules authored in profile files.

use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Category, Finding, Rule};
use crate::diag::{Origin, Severity};
use crate::model::{quote_name, quote_string, BaseKind, Direction, Stereotyped};
use crate::project::Project;
use crate::requirements::{ArtifactRef, LinkType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    EndpointMustBe { stereotype: String },
    AttributeRequired { attribute: String },
    AttributeMatches { attribute: String, pattern: String },
    MustHaveInboundLink { link_type: LinkType },
    MustBeConnectedOrJustified,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::EndpointMustBe { stereotype } => write!(f, "endpoint_must_be({})", quote_name(stereotype)),
            Constraint::AttributeRequired { attribute } => write!(f, "attribute_required({})", quote_name(attribute)),
            Constraint::AttributeMatches { attribute, pattern } => {
                write!(f, "attribute_matches({}, {})", quote_name(attribute), quote_string(pattern))
            }
            Constraint::MustHaveInboundLink { link_type } => write!(f, "must_have_inbound_link({link_type})"),
            Constraint::MustBeConnectedOrJustified => f.write_str("must_be_connected_or_justified"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomRuleSpec {
    pub code: String,
    /// Objects carrying this stereotype (or a subtype) are checked.
    pub stereotype: String,
    pub constraint: Constraint,
    pub category: Category,
    pub severity: Severity,
    pub message: Option<String>,
    #[serde(skip)]
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule `{code}` selects unknown stereotype `{stereotype}`")]
    UnknownStereotype { code: String, stereotype: String },
    #[error("rule `{code}`: stereotype `{stereotype}` has no attribute `{attribute}`")]
    UnknownAttribute {
        code: String,
        stereotype: String,
        attribute: String,
    },
    #[error("rule `{code}`: {reason}")]
    Invalid { code: String, reason: String },
    #[error("rule code `{0}` is already registered")]
    DuplicateCode(String),
}

pub(crate) struct CustomRule {
    spec: CustomRuleSpec,
    regex: Option<Regex>,
    description: String,
}

impl CustomRule {
    /// Check a spec against the loaded profiles and compile it.
    pub(crate) fn compile(spec: CustomRuleSpec, project: &Project) -> Result<Self, RuleError> {
        let code = spec.code.clone();
        let invalid = |reason: String| RuleError::Invalid {
            code: code.clone(),
            reason,
        };
        let Some(sel) = project.profiles.effective(&spec.stereotype) else {
            return Err(RuleError::UnknownStereotype {
                code,
                stereotype: spec.stereotype.clone(),
            });
        };
        let mut regex = None;
        match &spec.constraint {
            Constraint::EndpointMustBe { stereotype } => {
                if sel.base_kind != BaseKind::Connector {
                    return Err(invalid(format!("endpoint_must_be needs a connector stereotype, `{}` is a {}", sel.name, sel.base_kind)));
                }
                match project.profiles.effective(stereotype) {
                    None => {
                        return Err(RuleError::UnknownStereotype {
                            code,
                            stereotype: stereotype.clone(),
                        })
                    }
                    Some(e) if e.base_kind != BaseKind::Port => {
                        return Err(invalid(format!("`{stereotype}` is not a port stereotype")))
                    }
                    Some(_) => {}
                }
            }
            Constraint::AttributeRequired { attribute } | Constraint::AttributeMatches { attribute, .. } => {
                if sel.attribute(attribute).is_none() {
                    return Err(RuleError::UnknownAttribute {
                        code,
                        stereotype: spec.stereotype.clone(),
                        attribute: attribute.clone(),
                    });
                }
                if let Constraint::AttributeMatches { pattern, .. } = &spec.constraint {
                    regex = Some(Regex::new(pattern).map_err(|e| invalid(format!("bad pattern: {e}")))?);
                }
            }
            Constraint::MustHaveInboundLink { .. } => {
                if sel.base_kind != BaseKind::Component {
                    return Err(invalid("must_have_inbound_link needs a component stereotype".into()));
                }
            }
            Constraint::MustBeConnectedOrJustified => {
                if sel.base_kind != BaseKind::Port {
                    return Err(invalid("must_be_connected_or_justified needs a port stereotype".into()));
                }
            }
        }
        let description = format!("{} on {}", spec.constraint, spec.stereotype);
        Ok(Self {
            spec,
            regex,
            description,
        })
    }

    fn message(&self, default: String) -> String {
        match &self.spec.message {
            Some(m) => format!("{m} ({default})"),
            None => default,
        }
    }
}

impl Rule for CustomRule {
    fn code(&self) -> &str {
        &self.spec.code
    }

    fn category(&self) -> Category {
        self.spec.category
    }

    fn default_severity(&self) -> Severity {
        self.spec.severity
    }

    fn description(&self) -> &str {
        &self.description
    }

    fn check(&self, project: &Project, out: &mut Vec<Finding>) {
        let sel = self.spec.stereotype.as_str();
        let profiles = &project.profiles;
        let carries = |applied: Vec<&str>| applied.iter().any(|s| profiles.is_a(s, sel));
        for model in &project.models {
            match &self.spec.constraint {
                Constraint::EndpointMustBe { stereotype } => {
                    for c in &model.connectors {
                        if !carries(c.stereotype_names()) {
                            continue;
                        }
                        for end in [&c.source, &c.target] {
                            let Some((_, port)) = model.port(end) else { continue };
                            if !port.stereotype_names().iter().any(|s| profiles.is_a(s, stereotype)) {
                                out.push(
                                    Finding::new(self.message(format!(
                                        "connector {} -> {} ({}) ends at port {} which is not a {}",
                                        c.source, c.target, c.label(), end, stereotype
                                    )))
                                    .at(&c.origin)
                                    .related(&port.origin),
                                );
                            }
                        }
                    }
                }
                Constraint::AttributeRequired { attribute } | Constraint::AttributeMatches { attribute, .. } => {
                    let mut visit = |what: String, applied: &[crate::model::AppliedStereotype], origin: &Origin| {
                        for a in applied.iter().filter(|a| profiles.is_a(&a.stereotype, sel)) {
                            let value = a.value(attribute);
                            let bad = match (&self.regex, value) {
                                (_, None) => Some(format!("{what} has no value for `{attribute}`")),
                                (Some(re), Some(v)) if !re.is_match(&v.display_text()) => Some(format!(
                                    "{what}: `{attribute}` = {:?} does not match `{}`",
                                    v.display_text(),
                                    re.as_str()
                                )),
                                _ => None,
                            };
                            if let Some(msg) = bad {
                                out.push(Finding::new(self.message(msg)).at(origin));
                            }
                        }
                    };
                    for (path, e) in model.walk() {
                        let p = model.path_of(&path);
                        visit(format!("element {p}"), &e.stereotypes, &e.origin);
                        for port in &e.ports {
                            visit(format!("port {}", p.child(&port.name)), &port.stereotypes, &port.origin);
                        }
                    }
                    for c in &model.connectors {
                        visit(format!("connector {} -> {}", c.source, c.target), &c.stereotypes, &c.origin);
                    }
                }
                Constraint::MustHaveInboundLink { link_type } => {
                    for (path, e) in model.walk() {
                        if !carries(e.stereotype_names()) {
                            continue;
                        }
                        let target = ArtifactRef::element(model.path_of(&path));
                        if !project.links.iter().any(|l| l.link_type == *link_type && l.target == target) {
                            out.push(
                                Finding::new(self.message(format!("{target} has no inbound {link_type} link")))
                                    .at(&e.origin),
                            );
                        }
                    }
                }
                Constraint::MustBeConnectedOrJustified => {
                    for (path, e) in model.walk() {
                        for port in &e.ports {
                            if !carries(port.stereotype_names()) {
                                continue;
                            }
                            let r = crate::model::PortRef::new(path.clone(), port.name.clone());
                            let connected = model.connectors_at(&r).next().is_some();
                            let justified = port.value("justification").is_some();
                            if !connected && !justified {
                                let dir = match port.direction {
                                    Direction::In => "input",
                                    Direction::Out => "output",
                                    Direction::InOut => "bidirectional",
                                };
                                out.push(
                                    Finding::new(self.message(format!(
                                        "{dir} port {} is unconnected and has no justification",
                                        model.path_of(&path).child(&port.name)
                                    )))
                                    .at(&port.origin),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
}
