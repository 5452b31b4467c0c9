//! Rule engine: built-in process and model rules plus rules declared in
//! profiles, run over a loaded project.

mod builtins;
mod custom;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builtins::{builtin_rules, exchange_realized, BUS_PORT, FUNCTIONAL_EXCHANGE};
pub use custom::{Constraint, CustomRuleSpec, RuleError};

use crate::diag::{codes, Diagnostic, Origin, Severity, SourceSpan};
use crate::exec::Execution;
use crate::project::Project;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Process,
    Model,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Process => "process",
            Category::Model => "model",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "process" => Some(Category::Process),
            "model" => Some(Category::Model),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a rule reports; the engine adds code and severity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub message: String,
    pub span: Option<SourceSpan>,
    pub related: Vec<SourceSpan>,
}

impl Finding {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            span: None,
            related: Vec::new(),
        }
    }

    pub fn at(mut self, origin: &Origin) -> Self {
        self.span = origin.span().cloned();
        self
    }

    pub fn related(mut self, origin: &Origin) -> Self {
        self.related.extend(origin.span().cloned());
        self
    }
}

impl From<Diagnostic> for Finding {
    fn from(d: Diagnostic) -> Self {
        Self {
            message: d.message,
            span: d.span,
            related: d.related,
        }
    }
}

pub trait Rule: Send + Sync {
    fn code(&self) -> &str;
    fn category(&self) -> Category;
    fn default_severity(&self) -> Severity;
    fn description(&self) -> &str;
    /// Must not depend on any other rule having run.
    fn check(&self, project: &Project, out: &mut Vec<Finding>);
}

#[derive(Default)]
pub struct RuleRegistry {
    rules: Vec<Box<dyn Rule>>,
}

impl RuleRegistry {
    pub fn builtin() -> Self {
        Self { rules: builtin_rules() }
    }

    /// Built-ins plus every rule declared in the project's profiles. Rules
    /// that fail to register are reported as LOAD-007 errors.
    pub fn for_project(project: &Project) -> (Self, Vec<Diagnostic>) {
        let mut reg = Self::builtin();
        let mut diags = Vec::new();
        for spec in &project.custom_rules {
            let origin = spec.origin.clone();
            if let Err(e) = reg.register_custom_rule(project, spec.clone()) {
                diags.push(Diagnostic::error(codes::CUSTOM_RULE, e.to_string()).at(&origin));
            }
        }
        (reg, diags)
    }

    pub fn register(&mut self, rule: Box<dyn Rule>) -> Result<(), RuleError> {
        if self.get(rule.code()).is_some() {
            return Err(RuleError::DuplicateCode(rule.code().to_string()));
        }
        self.rules.push(rule);
        Ok(())
    }

    pub fn register_custom_rule(&mut self, project: &Project, spec: CustomRuleSpec) -> Result<String, RuleError> {
        if self.get(&spec.code).is_some() {
            return Err(RuleError::DuplicateCode(spec.code));
        }
        let code = spec.code.clone();
        self.register(Box::new(custom::CustomRule::compile(spec, project)?))?;
        Ok(code)
    }

    pub fn get(&self, code: &str) -> Option<&dyn Rule> {
        self.rules.iter().find(|r| r.code() == code).map(|r| r.as_ref())
    }

    pub fn rules(&self) -> impl Iterator<Item = &dyn Rule> {
        self.rules.iter().map(|r| r.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    All,
    Category(Category),
    Codes(Vec<String>),
}

impl Selection {
    /// `all`, `process`, `model`, or a comma-separated list of codes.
    pub fn parse(s: &str) -> Self {
        match s.trim() {
            "" | "all" => Selection::All,
            other => match Category::parse(other) {
                Some(c) => Selection::Category(c),
                None => Selection::Codes(other.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("unknown rule code `{0}`")]
    UnknownRule(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleCount {
    pub code: String,
    pub category: Category,
    pub severity: Severity,
    pub findings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleRunResult {
    /// Sorted by file, line, column, then code.
    pub diagnostics: Vec<Diagnostic>,
    /// One entry per rule that ran, in registry order.
    pub counts: Vec<RuleCount>,
}

impl RuleRunResult {
    pub fn count(&self, s: Severity) -> usize {
        self.diagnostics.iter().filter(|d| d.severity == s).count()
    }

    pub fn has_errors(&self) -> bool {
        self.count(Severity::Error) > 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{} rules run: {} errors, {} warnings, {} notes",
            self.counts.len(),
            self.count(Severity::Error),
            self.count(Severity::Warning),
            self.count(Severity::Info)
        )
    }
}

pub fn run_rules(project: &Project, registry: &RuleRegistry, selection: &Selection, exec: Execution) -> Result<RuleRunResult, RunError> {
    if let Selection::Codes(codes) = selection {
        if let Some(c) = codes.iter().find(|c| registry.get(c).is_none()) {
            return Err(RunError::UnknownRule(c.clone()));
        }
    }
    let selected: Vec<&dyn Rule> = registry
        .rules()
        .filter(|r| match selection {
            Selection::All => true,
            Selection::Category(c) => r.category() == *c,
            Selection::Codes(codes) => codes.iter().any(|c| c == r.code()),
        })
        .collect();
    let per_rule = exec.map(&selected, |r| {
        let mut out = Vec::new();
        r.check(project, &mut out);
        out
    });
    let mut diagnostics = Vec::new();
    let mut counts = Vec::new();
    for (rule, findings) in selected.iter().zip(per_rule) {
        let severity = project
            .manifest
            .severity
            .iter()
            .find(|(c, _)| c == rule.code())
            .map_or(rule.default_severity(), |(_, s)| *s);
        counts.push(RuleCount {
            code: rule.code().to_string(),
            category: rule.category(),
            severity,
            findings: findings.len(),
        });
        diagnostics.extend(findings.into_iter().map(|f| Diagnostic {
            related: f.related,
            ..Diagnostic::new(rule.code(), severity, f.message).with_span(f.span)
        }));
    }
    diagnostics.sort();
    diagnostics.dedup();
    Ok(RuleRunResult { diagnostics, counts })
}
