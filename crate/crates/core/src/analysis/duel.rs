use crate::coupled::CoupledState;
use crate::plurality_core::CoreState;

/// A violation of one of the two per-level duel invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DuelViolation {
    pub level: u8,
    /// Prefix group, as the binary value of the first `level` bits.
    pub prefix: u16,
    /// Offending agent for the per-agent invariant; `None` for group sums.
    pub agent: Option<u32>,
    pub detail: String,
}

/// Checks, for every level `i` and realized `i`-bit prefix group, that the
/// group's vote sum equals its mass sum, and per agent that `|w - c| <= 1`.
pub fn check_duel_invariants_core(states: &[CoreState]) -> Vec<DuelViolation> {
    let mut violations = Vec::new();
    let Some(first) = states.first() else {
        return violations;
    };
    let m = first.levels();
    for i in 0..m {
        // (vote sum, mass sum) per prefix value; i <= 8 so 2^i fits easily.
        let mut sums = vec![(0i64, 0i64); 1 << i];
        for (id, s) in states.iter().enumerate() {
            let mut prefix = 0usize;
            for b in 0..i {
                prefix = (prefix << 1) | usize::from(s.label.bit(b) == 1);
            }
            sums[prefix].0 += i64::from(s.votes[i]);
            sums[prefix].1 += i64::from(s.mass[i].w);
            let gap = (s.mass[i].w - s.votes[i]).abs();
            if gap > 1 {
                violations.push(DuelViolation {
                    level: i as u8,
                    prefix: prefix as u16,
                    agent: Some(id as u32),
                    detail: format!("|w - c| = {gap}"),
                });
            }
        }
        for (prefix, (votes, mass)) in sums.iter().enumerate() {
            if votes != mass {
                violations.push(DuelViolation {
                    level: i as u8,
                    prefix: prefix as u16,
                    agent: None,
                    detail: format!("vote sum {votes} != mass sum {mass}"),
                });
            }
        }
    }
    violations
}

/// Same check over the core fields of a coupled configuration, grouping by
/// the labels the agents actually play.
pub fn check_duel_invariants_coupled(states: &[CoupledState]) -> Vec<DuelViolation> {
    let cores: Vec<CoreState> = states.iter().map(|s| s.core).collect();
    check_duel_invariants_core(&cores)
}

/// Number of agents whose played label differs from their ordering label.
pub fn unstable_count(states: &[CoupledState], m: u8) -> usize {
    states.iter().filter(|s| !s.is_stable(m)).count()
}
