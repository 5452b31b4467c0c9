//! Source locations and diagnostics shared by the parser, the project
//! loader, the rule engine and the safety checks.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A location in a project file. Lines and columns are 1-based; columns
/// count characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: u32, column: u32, length: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        Self {
            file: file.into(),
            line,
            column,
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Where a model object was declared.
///
/// Origins never take part in equality: two objects that differ only in
/// where they were written are structurally equal. This is what makes
/// `parse(serialize(x)) == x` a meaningful check.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Origin(pub Option<SourceSpan>);

impl Origin {
    pub fn none() -> Self {
        Origin(None)
    }

    pub fn at(span: SourceSpan) -> Self {
        Origin(Some(span))
    }

    pub fn span(&self) -> Option<&SourceSpan> {
        self.0.as_ref()
    }
}

impl PartialEq for Origin {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Origin {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "error" => Some(Severity::Error),
            "warning" => Some(Severity::Warning),
            "info" => Some(Severity::Info),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub severity: Severity,
    pub message: String,
    pub span: Option<SourceSpan>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<SourceSpan>,
}

impl Diagnostic {
    pub fn new(code: &str, severity: Severity, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            severity,
            message: message.into(),
            span: None,
            related: Vec::new(),
        }
    }

    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Self::new(code, Severity::Error, message)
    }

    pub fn warning(code: &str, message: impl Into<String>) -> Self {
        Self::new(code, Severity::Warning, message)
    }

    pub fn info(code: &str, message: impl Into<String>) -> Self {
        Self::new(code, Severity::Info, message)
    }

    pub fn with_span(mut self, span: Option<SourceSpan>) -> Self {
        self.span = span;
        self
    }

    pub fn at(self, origin: &Origin) -> Self {
        self.with_span(origin.0.clone())
    }

    pub fn with_related(mut self, span: Option<SourceSpan>) -> Self {
        self.related.extend(span);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Sort key: file, line, column, code, then message for total order.
    fn sort_key(&self) -> (&str, u32, u32, &str, &str) {
        match &self.span {
            Some(s) => (s.file.as_str(), s.line, s.column, &self.code, &self.message),
            None => ("", 0, 0, &self.code, &self.message),
        }
    }
}

impl PartialOrd for Diagnostic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Diagnostic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key()
            .cmp(&other.sort_key())
            .then_with(|| self.related.cmp(&other.related))
            .then_with(|| self.severity.cmp(&other.severity))
    }
}

/// `path:line:col: severity[CODE] message`
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(span) => write!(f, "{span}: ")?,
            None => f.write_str("<project>:0:0: ")?,
        }
        write!(f, "{}[{}] {}", self.severity, self.code, self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// Codes emitted by the parser, the loader and the safety checks. Rule codes
/// live in the rule registry.
pub mod codes {
    pub const LEX: &str = "PARSE-001";
    pub const SYNTAX: &str = "PARSE-002";
    pub const DUPLICATE: &str = "PARSE-003";
    pub const UNKNOWN_STEREOTYPE: &str = "PARSE-004";
    pub const UNRESOLVED: &str = "PARSE-005";
    pub const INVALID_VALUE: &str = "PARSE-006";
    pub const KIND_MISMATCH: &str = "PARSE-007";
    pub const ABSTRACT: &str = "PARSE-008";
    pub const CYCLE: &str = "PARSE-009";
    pub const REDEFINITION: &str = "PARSE-010";

    pub const MISSING_FILE: &str = "LOAD-001";
    pub const DUPLICATE_GLOBAL: &str = "LOAD-002";
    pub const UNRESOLVED_LINK: &str = "LOAD-003";
    pub const LINK_DOMAIN: &str = "LOAD-004";
    pub const UNKNOWN_LEVEL: &str = "LOAD-005";
    pub const FPM_ANNOTATION: &str = "LOAD-006";
    pub const CUSTOM_RULE: &str = "LOAD-007";

    pub const FHA_UNRESOLVED: &str = "FHA-001";
    pub const FHA_MISMATCH: &str = "FHA-002";
    pub const FHA_OVERRIDE: &str = "FHA-003";

    pub const SINGLE_POINT: &str = "S-SPF-001";
    pub const UNLINKED_TOP: &str = "S-TOP-001";
    pub const CUT_TRUNCATED: &str = "S-TRUNC-001";

    pub const CATALOG: &[(&str, &str)] = &[
        (LEX, "lexical error"),
        (SYNTAX, "syntax error"),
        (DUPLICATE, "duplicate declaration"),
        (UNKNOWN_STEREOTYPE, "unknown stereotype"),
        (UNRESOLVED, "unresolved reference"),
        (INVALID_VALUE, "invalid value"),
        (KIND_MISMATCH, "stereotype kind mismatch"),
        (ABSTRACT, "abstract stereotype applied"),
        (CYCLE, "inheritance cycle"),
        (REDEFINITION, "attribute redefined along inheritance chain"),
        (MISSING_FILE, "file cannot be read"),
        (DUPLICATE_GLOBAL, "duplicate project-wide name"),
        (UNRESOLVED_LINK, "unresolved trace link end"),
        (LINK_DOMAIN, "trace link domain or range violated"),
        (UNKNOWN_LEVEL, "unknown hierarchy level"),
        (FPM_ANNOTATION, "invalid fault propagation annotation"),
        (CUSTOM_RULE, "invalid custom rule"),
        (FHA_UNRESOLVED, "FHA result references unknown function"),
        (FHA_MISMATCH, "classification and FDAL disagree"),
        (FHA_OVERRIDE, "FHA result overrides authored FDAL"),
        (SINGLE_POINT, "minimal cut set order below requirement"),
        (UNLINKED_TOP, "top event without linked safety requirement"),
        (CUT_TRUNCATED, "cut set enumeration truncated"),
    ];

    pub fn is_registered(code: &str) -> bool {
        CATALOG.iter().any(|(c, _)| *c == code)
    }
}
