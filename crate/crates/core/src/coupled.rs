//! The coupled plurality protocol: the ordering layer and the label-duel core
//! run in parallel, and agents migrate between label groups only once their
//! duel mass is fully withdrawn.
//!
//! The ordering layer assigns every color a label `d`; the core duels over
//! the label an agent actually plays, `l`. While `l != d` the agent is
//! *unstable*: it stops refreshing votes and only settles its pending
//! imbalances against complementary partners in its current group. Once every
//! level is settled it re-enters the duels under its ordering label. The
//! `ans` field carries the currently claimed plurality color and is adopted
//! from whichever party of an interaction claims the tournament crown.
//!
//! The general-graph variant swaps the updated endpoint states after every
//! interaction, so agent states travel across the graph and every pair of
//! states keeps meeting even on sparse topologies.

use crate::engine::{CanonicalState, Color, Protocol};
use crate::error::Result;
use crate::ordering::{init_ordering, OrderingProtocol, OrderingState};
use crate::plurality_core::{gamma_r, gamma_r_level, settle, CoreState, Label, MAX_LEVELS};

/// Per-agent record of the coupled protocol: the ordering fields (with the
/// color renamed `ic` and the leader/root bits `ld`/`rt`), the core fields,
/// and the answer color.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct CoupledState {
    pub ic: Color,
    pub d: u16,
    pub ld: bool,
    pub rt: bool,
    pub pre: Color,
    pub suc: Color,
    pub core: CoreState,
    pub ans: Color,
}

impl CoupledState {
    pub fn ordering_view(&self) -> OrderingState {
        OrderingState {
            c: self.ic,
            d: self.d,
            l: self.ld,
            r: self.rt,
            pre: self.pre,
            suc: self.suc,
        }
    }

    fn store_ordering(&mut self, o: OrderingState) {
        self.d = o.d;
        self.ld = o.l;
        self.rt = o.r;
        self.pre = o.pre;
        self.suc = o.suc;
    }

    /// Stable agents play the label the ordering layer assigned them.
    pub fn is_stable(&self, m: u8) -> bool {
        self.core.label == Label::from_value(self.d, m).expect("d is reduced mod 2^m")
    }
}

impl CanonicalState for CoupledState {
    // Field order: ic, d, ld, rt, pre, suc, l, c, s, ans.
    fn write_canonical(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.ic.0.to_le_bytes());
        out.extend_from_slice(&self.d.to_le_bytes());
        out.push(self.ld as u8);
        out.push(self.rt as u8);
        out.extend_from_slice(&self.pre.0.to_le_bytes());
        out.extend_from_slice(&self.suc.0.to_le_bytes());
        self.core.write_canonical(out);
        out.extend_from_slice(&self.ans.0.to_le_bytes());
    }

    fn read_canonical(input: &mut &[u8]) -> Result<Self> {
        use crate::engine::config_bytes::*;
        Ok(CoupledState {
            ic: Color(read_u16(input)?),
            d: read_u16(input)?,
            ld: read_bool(input)?,
            rt: read_bool(input)?,
            pre: Color(read_u16(input)?),
            suc: Color(read_u16(input)?),
            core: CoreState::read_canonical(input)?,
            ans: Color(read_u16(input)?),
        })
    }
}

/// Plurality on complete graphs.
#[derive(Clone, Copy, Debug)]
pub struct CliqueProtocol {
    ordering: OrderingProtocol,
    m: u8,
}

impl CliqueProtocol {
    pub fn new(k: u16) -> Self {
        let ordering = OrderingProtocol::new(k);
        let m = ordering.label_bits();
        assert!(
            usize::from(m) <= MAX_LEVELS,
            "k = {k} exceeds the supported label range"
        );
        Self { ordering, m }
    }

    pub fn k(&self) -> u16 {
        self.ordering.k()
    }

    pub fn label_bits(&self) -> u8 {
        self.m
    }

    /// Initial state: fresh ordering fields, the all-minus-one label (label
    /// value 0), a fully backed core, and the own color as the answer.
    pub fn init_coupled(&self, color: Color) -> CoupledState {
        let o = init_ordering(color);
        let label = Label::from_value(0, self.m).expect("0 always fits");
        CoupledState {
            ic: o.c,
            d: o.d,
            ld: o.l,
            rt: o.r,
            pre: o.pre,
            suc: o.suc,
            core: CoreState::init(label),
            ans: color,
        }
    }

    /// The coupled transition function. In order:
    ///  1. the ordering fields update;
    ///  2. if either party currently claims the tournament crown, both adopt
    ///     the claimant's input color as `ans` (each keeps its own when both
    ///     claim);
    ///  3. two stable agents run the full core step;
    ///  4. an unstable agent with nothing pending re-enters under its
    ///     ordering label, otherwise the pair settles complementary pending
    ///     levels and runs plain duel steps on the rest — but only on the
    ///     levels pending for the unstable side(s) and shared by prefix;
    ///  5. a stable partner of an unstable agent still refreshes its votes.
    pub fn gamma_clique(
        &self,
        a0: &CoupledState,
        b0: &CoupledState,
    ) -> (CoupledState, CoupledState) {
        let mut a = *a0;
        let mut b = *b0;

        // (1) ordering layer
        let (oa, ob) = self
            .ordering
            .gamma_o(&a.ordering_view(), &b.ordering_view());
        a.store_ordering(oa);
        b.store_ordering(ob);

        // (2) answer adoption, evaluated on the pre-interaction core fields
        let claim_a = a.core.is_winner_claimant();
        let claim_b = b.core.is_winner_claimant();
        match (claim_a, claim_b) {
            (true, true) => {
                a.ans = a.ic;
                b.ans = b.ic;
            }
            (true, false) => {
                a.ans = a.ic;
                b.ans = a.ic;
            }
            (false, true) => {
                a.ans = b.ic;
                b.ans = b.ic;
            }
            (false, false) => {}
        }

        let stable_a = a.is_stable(self.m);
        let stable_b = b.is_stable(self.m);

        // (3) both stable: the full core step
        if stable_a && stable_b {
            let (ca, cb) = gamma_r(&a.core, &b.core);
            a.core = ca;
            b.core = cb;
            return (a, b);
        }

        // (4) migration bookkeeping, on the imbalances as they stand now
        let pending_a = a.core.imbalance_levels();
        let pending_b = b.core.imbalance_levels();
        if !stable_a && pending_a == 0 {
            a.core = CoreState::init(Label::from_value(a.d, self.m).expect("d reduced"));
        }
        if !stable_b && pending_b == 0 {
            b.core = CoreState::init(Label::from_value(b.d, self.m).expect("d reduced"));
        }
        let pending = match (stable_a, stable_b) {
            (false, true) => pending_a,
            (true, false) => pending_b,
            (false, false) => pending_a & pending_b,
            (true, true) => unreachable!(),
        };
        // A reinitialized side contributes an empty pending set, so this loop
        // only ever runs on states whose labels survived step (4).
        for i in 0..usize::from(self.m) {
            if pending & (1 << i) == 0 || !a.core.label.shares_prefix(&b.core.label, i) {
                continue;
            }
            let da = a.core.imbalance(i);
            let db = b.core.imbalance(i);
            if da == -db && da != 0 {
                // Complementary pending levels restore each other's mass.
                a.core.mass[i] = settle(a.core.mass[i], a.core.votes[i]);
                b.core.mass[i] = settle(b.core.mass[i], b.core.votes[i]);
            } else {
                gamma_r_level(&mut a.core, &mut b.core, i);
            }
        }

        // (5) stable partners keep their votes current
        if stable_a {
            a.core.refresh_votes();
        }
        if stable_b {
            b.core.refresh_votes();
        }
        (a, b)
    }
}

impl Protocol for CliqueProtocol {
    type State = CoupledState;

    fn init_state(&self, color: Color) -> CoupledState {
        self.init_coupled(color)
    }

    fn apply(&self, a: &CoupledState, b: &CoupledState) -> (CoupledState, CoupledState) {
        self.gamma_clique(a, b)
    }
}

/// Plurality on arbitrary connected graphs: the clique step followed by a
/// swap of the updated endpoint states, so states travel across the graph.
#[derive(Clone, Copy, Debug)]
pub struct GeneralProtocol(CliqueProtocol);

impl GeneralProtocol {
    pub fn new(k: u16) -> Self {
        Self(CliqueProtocol::new(k))
    }

    pub fn k(&self) -> u16 {
        self.0.k()
    }

    pub fn label_bits(&self) -> u8 {
        self.0.label_bits()
    }

    pub fn clique(&self) -> &CliqueProtocol {
        &self.0
    }
}

impl Protocol for GeneralProtocol {
    type State = CoupledState;

    fn init_state(&self, color: Color) -> CoupledState {
        self.0.init_coupled(color)
    }

    fn apply(&self, a: &CoupledState, b: &CoupledState) -> (CoupledState, CoupledState) {
        let (na, nb) = self.0.gamma_clique(a, b);
        (nb, na)
    }
}
