//! Safety assessment exchange: FHA function lists and results, the fault
//! propagation model, and minimal cut sets.

mod check;
mod cutsets;
mod fha;
mod fpm;

pub use check::{check_against_safety_requirements, required_min_order, requirements_for_top};
pub use cutsets::{check_fpm, compute_minimal_cut_sets, CutSet, CutSetError, CutSetResult, FaultTree};
pub(crate) use fha::apply_fha;
pub use fha::{
    export_function_list, fdal_for, import_fha_results, render_function_list, FhaImport, FhaResult, FunctionListEntry,
    ATOMIC_FUNCTION,
};
pub use fpm::{
    basic_event_names, build_fpm, sync_fpm, BasicEvent, Expr, Fpm, FpmComponent, FpmPort, Orphan, OutFailure,
    PropagationEdge, SyncError, SyncReport, TopEvent,
};

use crate::exec::Execution;

/// Cut sets for several top events of one FPM, computed independently.
pub fn compute_all(
    fpm: &Fpm,
    tops: &[String],
    max_order: Option<usize>,
    exec: Execution,
) -> Vec<Result<CutSetResult, CutSetError>> {
    exec.map(tops, |t| compute_minimal_cut_sets(fpm, t, max_order))
}
