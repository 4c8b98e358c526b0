//! Ground-truth oracles, snapshot monitors, explicit-state reachability tools
//! and state-budget accounting.

mod budget;
mod census;
mod duel;
mod ordering_report;
mod reach;

pub use budget::{state_space_size, BudgetKind, StateBudget};
pub use census::{plurality_set, tournament_winner, ColorCensus};
pub use duel::{
    check_duel_invariants_core, check_duel_invariants_coupled, unstable_count, DuelViolation,
};
pub use ordering_report::{
    check_ordering_snapshot, ordering_converged, LinkedListReport, OrderingReport,
};
pub use reach::{
    common_reachable, reachable_set, stabilization_certificate, CertificateVerdict,
    CommonReachOutcome, ReachableSet,
};

use crate::coupled::CoupledState;
use crate::ordering::OrderingState;

/// Number of leader/root bits that flipped 0 -> 1 between two snapshots of
/// the same run. The protocols never allow such a flip, so any nonzero count
/// is a violation.
pub fn leader_root_regressions(prev: &[OrderingState], next: &[OrderingState]) -> usize {
    prev.iter()
        .zip(next)
        .map(|(p, n)| usize::from(!p.l && n.l) + usize::from(!p.r && n.r))
        .sum()
}

/// Ordering-layer view of a coupled configuration.
pub fn ordering_views(states: &[CoupledState]) -> Vec<OrderingState> {
    states.iter().map(|s| s.ordering_view()).collect()
}
