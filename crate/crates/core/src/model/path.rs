use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Plain identifiers: `[A-Za-z_][A-Za-z0-9_-]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Names usable for model objects once quoted: `[A-Za-z_][A-Za-z0-9_/ -]*`.
/// Dots are never allowed because they separate path segments.
pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '/' | ' ' | '-'))
}

const RESERVED: &[&str] = &["AND", "OR", "in_failure", "true", "false"];

/// Render a name the way the DSL expects it: bare if it is an identifier,
/// double-quoted otherwise.
pub fn quote_name(name: &str) -> Cow<'_, str> {
    if is_identifier(name) && !RESERVED.contains(&name) {
        Cow::Borrowed(name)
    } else {
        Cow::Owned(quote_string(name))
    }
}

pub fn quote_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn join_names<S: AsRef<str>>(segments: &[S]) -> String {
    segments
        .iter()
        .map(|s| quote_name(s.as_ref()).into_owned())
        .collect::<Vec<_>>()
        .join(".")
}

/// A model-qualified path to an element: `Model.Element[.Child]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementPath {
    pub model: String,
    pub segments: Vec<String>,
}

impl ElementPath {
    pub fn new(model: impl Into<String>, segments: Vec<String>) -> Self {
        Self {
            model: model.into(),
            segments,
        }
    }

    pub fn child(&self, name: &str) -> Self {
        let mut segments = self.segments.clone();
        segments.push(name.to_string());
        Self {
            model: self.model.clone(),
            segments,
        }
    }

    pub fn name(&self) -> &str {
        self.segments.last().map(String::as_str).unwrap_or(&self.model)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.segments.len() <= 1 {
            return None;
        }
        Some(Self {
            model: self.model.clone(),
            segments: self.segments[..self.segments.len() - 1].to_vec(),
        })
    }

    /// True if `self` equals `other` or contains it.
    pub fn contains(&self, other: &ElementPath) -> bool {
        self.model == other.model
            && other.segments.len() >= self.segments.len()
            && other.segments[..self.segments.len()] == self.segments[..]
    }

    /// The path inside the model, without the model name.
    pub fn relative(&self) -> String {
        join_names(&self.segments)
    }
}

impl fmt::Display for ElementPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", quote_name(&self.model))?;
        for s in &self.segments {
            write!(f, ".{}", quote_name(s))?;
        }
        Ok(())
    }
}
