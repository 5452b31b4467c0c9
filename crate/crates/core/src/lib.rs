//! Text-first architecture modelling, requirements traceability and safety
//! analysis for aerospace development workflows.

pub mod diag;
pub mod dsl;
pub mod exec;
pub mod model;
pub mod project;
pub mod report;
pub mod requirements;
pub mod safety;
pub mod scaffold;
pub mod validation;

pub use diag::{Diagnostic, Severity, SourceSpan};
pub use exec::Execution;
pub use project::{discover_manifest, load_project, load_project_excluding, Project, ProjectLoad};
