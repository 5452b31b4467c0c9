//! Text formats for every project artifact. All of them share one lexer and
//! one block grammar; see [`syntax`].

mod fha;
mod fpm;
mod lexer;
mod manifest;
mod model;
mod profile;
mod requirements;
mod syntax;

pub use fha::{parse_fha, FhaEntry, FhaFile};
pub use fpm::{parse_fpm, serialize_fpm};
pub use manifest::{parse_manifest, ProjectManifest, DEFAULT_LEVELS};
pub use model::{parse_model, serialize_model};
pub use profile::{parse_profile, serialize_profile, ProfileFile};
pub use requirements::{parse_requirements, serialize_requirements, RequirementFile};

use crate::diag::{has_errors, Diagnostic};
use crate::model::{quote_name, quote_string, AttrValue, Dal, ValueKind};
use syntax::Value;

/// Result of parsing one file. `value` is present only when no error was
/// reported, so a file with errors never contributes partial content.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: Option<T>,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Parsed<T> {
    fn new(value: T, mut diagnostics: Vec<Diagnostic>) -> Self {
        diagnostics.sort();
        diagnostics.dedup();
        let value = (!has_errors(&diagnostics)).then_some(value);
        Self { value, diagnostics }
    }

    pub fn is_ok(&self) -> bool {
        self.value.is_some()
    }
}

fn file_stem(path: &str) -> String {
    std::path::Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Convert a literal to an attribute value of the expected kind.
fn attr_value(v: &Value, kind: &ValueKind) -> Result<AttrValue, String> {
    let got = || format!("expected {kind}, found {}", v.describe());
    let raw = match (kind, v) {
        (ValueKind::String, Value::Str(s)) => AttrValue::String(s.clone()),
        (ValueKind::Integer, Value::Int(i)) => AttrValue::Integer(*i),
        (ValueKind::Real, Value::Real(r)) => AttrValue::Real(*r),
        (ValueKind::Real, Value::Int(i)) => AttrValue::Real(*i as f64),
        (ValueKind::Boolean, _) => match v.as_ident() {
            Some("true") => AttrValue::Boolean(true),
            Some("false") => AttrValue::Boolean(false),
            _ => return Err(got()),
        },
        (ValueKind::Dal, _) => match v.as_ident().and_then(Dal::parse) {
            Some(d) => AttrValue::Dal(d),
            None => return Err(format!("expected a DAL (A to E), found {}", v.describe())),
        },
        (ValueKind::Enumeration(_), Value::Str(s)) => AttrValue::Enum(s.clone()),
        (ValueKind::Enumeration(_), _) if v.as_ident().is_some() => AttrValue::Enum(v.as_ident().unwrap().into()),
        _ => return Err(got()),
    };
    kind.coerce(raw)
        .map_err(|bad| format!("`{}` is not one of {kind}", bad.display_text()))
}

fn attr_value_text(v: &AttrValue) -> String {
    match v {
        AttrValue::String(s) => quote_string(s),
        AttrValue::Enum(s) => quote_name(s).into_owned(),
        other => other.display_text(),
    }
}
