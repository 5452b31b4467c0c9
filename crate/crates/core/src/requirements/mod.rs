//! Requirements store queries: trace chains, coverage and audits.

mod audit;
mod coverage;
mod trace;
mod types;

pub use audit::{audit_derived_and_assumptions, audit_findings, link_cycle_diagnostics, AuditFinding, AUDIT_CODES};
pub use coverage::{coverage_report, coverage_scope, CoverageReport, LevelTally};
pub use trace::{trace_chain, Direction, TraceError, TraceGraph};
pub use types::*;
