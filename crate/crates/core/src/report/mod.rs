//! Breakdown views, trace matrix, graph exports and the compliance summary.

mod breakdown;
mod compliance;
mod dot;
mod matrix;

pub use breakdown::{breakdown_report, parse_breakdown_json};
pub use compliance::{
    compliance_report, ClaimedLevel, ComplianceReport, ComputedStatus, EvidenceQuery, Ledger, ObjectiveResult,
    ObjectiveSpec,
};
pub use dot::{export_fpm_dot, export_model_dot};
pub use matrix::{trace_matrix, MatrixRow, TraceMatrix};

/// Output flavour for reports that have both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "text" => Some(Format::Text),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
