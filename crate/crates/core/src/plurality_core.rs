//! The label-indexed plurality core: a knockout tournament over m-bit labels
//! driven by per-level exact-majority duels with conserved vote mass.
//!
//! Every agent carries an immutable m-bit label (bits are -1 or +1, most
//! significant first). Level `i` runs a duel inside each group of agents that
//! share the first `i` label bits: agents whose label is still alive at all
//! deeper levels vote their own bit `i`, everyone else abstains. Opposing
//! mass tokens cancel and the surviving side's holders pin the level output;
//! an exactly tied duel cancels out completely and the output gossip lands
//! the group on one side, which is sound because a tied duel means both
//! candidate labels have the same supporter count. An agent whose outputs
//! match its label at every level claims the tournament crown; at
//! convergence the claimants are exactly the supporters of one plurality
//! label.
//!
//! Two invariants hold at every step, per level and prefix group: the vote
//! sum equals the mass sum, and per agent `|w - c| <= 1`. Vote changes are
//! gated on settled mass (`w = c`), so both invariants are preserved rule by
//! rule. The per-level state fits in 8 combinations, keeping the whole state
//! space polynomial in the label range.
//!
//! The module also hosts two k = 2 baselines used by the verification tools:
//! a four-state exact-majority protocol and a deliberately under-provisioned
//! one-state-per-color voter protocol.

use crate::engine::{CanonicalState, Color, Protocol};
use crate::error::{Error, Result};

/// Hard cap on label length; supports color universes up to 2^8.
pub const MAX_LEVELS: usize = 8;

/// A never-changing m-bit label, each bit -1 or +1, most significant first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Label {
    bits: [i8; MAX_LEVELS],
    m: u8,
}

impl Label {
    /// MSB-first binary expansion of `value` with 0 mapped to -1 and 1 to +1.
    pub fn from_value(value: u16, m: u8) -> Result<Self> {
        if usize::from(m) > MAX_LEVELS || (m < 16 && value >= 1 << m) {
            return Err(Error::LabelOutOfRange {
                value: value as u32,
                bits: m,
            });
        }
        let mut bits = [0i8; MAX_LEVELS];
        for (i, slot) in bits.iter_mut().enumerate().take(usize::from(m)) {
            let bit = (value >> (usize::from(m) - 1 - i)) & 1;
            *slot = if bit == 1 { 1 } else { -1 };
        }
        Ok(Self { bits, m })
    }

    pub fn levels(&self) -> usize {
        usize::from(self.m)
    }

    pub fn bit(&self, i: usize) -> i8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits[..usize::from(self.m)]
    }

    /// Do the first `i` bits agree? Vacuously true at i = 0, which makes
    /// level 0 the one global duel.
    pub fn shares_prefix(&self, other: &Label, i: usize) -> bool {
        self.bits[..i] == other.bits[..i]
    }

    /// Inverse of [`Label::from_value`].
    pub fn value(&self) -> u16 {
        let mut v = 0u16;
        for i in 0..usize::from(self.m) {
            v = (v << 1) | u16::from(self.bits[i] == 1);
        }
        v
    }
}

/// One level's duel token: a weight in {-1, 0, +1} and an output bit in
/// {-1, +1}. Nonzero weight pins the output to its sign.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct MassEntry {
    pub w: i8,
    pub o: i8,
}

/// The `[v]` constructor: reset the token to carry `vote`. A zero vote keeps
/// the previous output bit (the constructor must be total).
pub fn settle(entry: MassEntry, vote: i8) -> MassEntry {
    MassEntry {
        w: vote,
        o: if vote != 0 { vote } else { entry.o },
    }
}

/// Per-agent core record: label `l`, vote array `c`, mass array `s`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct CoreState {
    pub label: Label,
    pub votes: [i8; MAX_LEVELS],
    pub mass: [MassEntry; MAX_LEVELS],
}

impl CoreState {
    /// Initialization: vote the own label bit at every level, fully backed.
    pub fn init(label: Label) -> Self {
        let mut votes = [0i8; MAX_LEVELS];
        let mut mass = [MassEntry { w: 0, o: -1 }; MAX_LEVELS];
        for i in 0..label.levels() {
            votes[i] = label.bit(i);
            mass[i] = MassEntry {
                w: label.bit(i),
                o: label.bit(i),
            };
        }
        Self { label, votes, mass }
    }

    pub fn levels(&self) -> usize {
        self.label.levels()
    }

    /// The vote this agent wants to cast at level `i`: its own bit while its
    /// label is still winning every deeper duel, abstention otherwise. The
    /// deepest level is always contested.
    pub fn desired_vote(&self, i: usize) -> i8 {
        for j in (i + 1)..self.levels() {
            if self.mass[j].o != self.label.bit(j) {
                return 0;
            }
        }
        self.label.bit(i)
    }

    /// True when the agent's outputs match its label at every level, i.e. the
    /// agent currently claims the crown of the root duel.
    pub fn is_winner_claimant(&self) -> bool {
        (0..self.levels()).all(|i| self.mass[i].o == self.label.bit(i))
    }

    /// Vote minus backed mass at a level; nonzero while a withdrawal or
    /// restore is pending.
    pub fn imbalance(&self, i: usize) -> i8 {
        self.votes[i] - self.mass[i].w
    }

    /// Bitmask of levels with `c != w`.
    pub fn imbalance_levels(&self) -> u32 {
        let mut mask = 0u32;
        for i in 0..self.levels() {
            if self.imbalance(i) != 0 {
                mask |= 1 << i;
            }
        }
        mask
    }

    /// Aligns votes with desired votes wherever the backing mass is settled,
    /// deepest level first so a flip cascades upward in one pass.
    pub fn refresh_votes(&mut self) {
        for i in (0..self.levels()).rev() {
            if self.mass[i].w == self.votes[i] {
                let want = self.desired_vote(i);
                if want != self.votes[i] {
                    self.votes[i] = want;
                    self.mass[i] = settle(self.mass[i], want);
                }
            }
        }
    }
}

impl CanonicalState for CoreState {
    // Field order: label bits, votes, then (w, o) pairs; length prefix first.
    fn write_canonical(&self, out: &mut Vec<u8>) {
        let m = self.levels();
        out.push(m as u8);
        for i in 0..m {
            out.push(self.label.bit(i) as u8);
        }
        for i in 0..m {
            out.push(self.votes[i] as u8);
        }
        for i in 0..m {
            out.push(self.mass[i].w as u8);
            out.push(self.mass[i].o as u8);
        }
    }

    fn read_canonical(input: &mut &[u8]) -> Result<Self> {
        use crate::engine::config_bytes::*;
        let m = read_u8(input)?;
        if usize::from(m) > MAX_LEVELS {
            return Err(Error::MalformedState(format!("label length {m}")));
        }
        let mut label = Label {
            bits: [0; MAX_LEVELS],
            m,
        };
        let mut state = CoreState {
            label,
            votes: [0; MAX_LEVELS],
            mass: [MassEntry { w: 0, o: -1 }; MAX_LEVELS],
        };
        for i in 0..usize::from(m) {
            label.bits[i] = read_i8(input)?;
        }
        state.label = label;
        for i in 0..usize::from(m) {
            state.votes[i] = read_i8(input)?;
        }
        for i in 0..usize::from(m) {
            state.mass[i] = MassEntry {
                w: read_i8(input)?,
                o: read_i8(input)?,
            };
        }
        Ok(state)
    }
}

/// Number of levels on which two labels can duel: every level whose prefix
/// both share.
fn shared_levels(a: &Label, b: &Label) -> usize {
    let m = a.levels();
    let mut leading = 0;
    while leading < m && a.bit(leading) == b.bit(leading) {
        leading += 1;
    }
    (leading + 1).min(m)
}

/// One level of the duel dynamics, first match only:
///  1. gated settle-swap — complementary pending imbalances restore each
///     other's mass, but only if a vote change actually hangs on it;
///  2. cancellation — opposite masses annihilate and zero the outputs'
///     anchor (both parties' outputs drop to -1);
///  3. correction — a mass holder overwrites a massless agent's output;
///  4. output gossip — a massless responder adopts a massless initiator's
///     output.
///
/// The output layer is a voter model pinned by the surviving mass holders.
/// With a nonzero surplus the holders act as zealots, so the only absorbing
/// output pattern is the holders' sign and the group reaches it in polynomial
/// time. On an exact tie every token cancels and the gossip lands the whole
/// group on one side; either side is fine, because an exact tie means both
/// candidate labels have the same supporter count, so the landed winner is
/// still a plurality label — and the entire winning side re-learns the win,
/// keeping its full weight alive in the shallower duels.
pub(crate) fn gamma_r_level(a: &mut CoreState, b: &mut CoreState, i: usize) {
    let da = a.imbalance(i);
    let db = b.imbalance(i);
    if da == -db && da != 0 && (a.desired_vote(i) != a.votes[i] || b.desired_vote(i) != b.votes[i])
    {
        a.mass[i] = settle(a.mass[i], a.votes[i]);
        b.mass[i] = settle(b.mass[i], b.votes[i]);
    } else if a.mass[i].w * b.mass[i].w < 0 {
        a.mass[i] = MassEntry { w: 0, o: -1 };
        b.mass[i] = MassEntry { w: 0, o: -1 };
    } else if a.mass[i].w != 0 && b.mass[i].w == 0 {
        b.mass[i].o = a.mass[i].w.signum();
    } else if b.mass[i].w != 0 && a.mass[i].w == 0 {
        a.mass[i].o = b.mass[i].w.signum();
    } else if a.mass[i].w == 0 && b.mass[i].w == 0 && b.mass[i].o != a.mass[i].o {
        b.mass[i].o = a.mass[i].o;
    }
}

/// The core transition function: run the duel step at every shared-prefix
/// level, then both agents refresh their votes.
pub fn gamma_r(a0: &CoreState, b0: &CoreState) -> (CoreState, CoreState) {
    let mut a = *a0;
    let mut b = *b0;
    for i in 0..shared_levels(&a.label, &b.label) {
        gamma_r_level(&mut a, &mut b, i);
    }
    a.refresh_votes();
    b.refresh_votes();
    (a, b)
}

/// The plurality core as a standalone protocol: colors are used directly as
/// label values. This is the reference duel dynamics the coupled protocol
/// embeds.
#[derive(Clone, Copy, Debug)]
pub struct PluralityCoreProtocol {
    m: u8,
}

impl PluralityCoreProtocol {
    pub fn new(k: u16) -> Self {
        let m = crate::ordering::label_bits(k);
        assert!(
            usize::from(m) <= MAX_LEVELS,
            "k = {k} exceeds the supported label range"
        );
        Self { m }
    }

    pub fn label_bits(&self) -> u8 {
        self.m
    }
}

impl Protocol for PluralityCoreProtocol {
    type State = CoreState;

    fn init_state(&self, color: Color) -> CoreState {
        CoreState::init(Label::from_value(color.0, self.m).expect("color checked against k"))
    }

    fn apply(&self, a: &CoreState, b: &CoreState) -> (CoreState, CoreState) {
        gamma_r(a, b)
    }
}

// ---------------------------------------------------------------------------
// k = 2 baselines
// ---------------------------------------------------------------------------

/// Four-state exact-majority state: a strong or weak opinion with a sign.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum MajorityState {
    StrongPlus,
    StrongMinus,
    WeakPlus,
    WeakMinus,
}

impl MajorityState {
    pub fn output(&self) -> Color {
        match self {
            MajorityState::StrongPlus | MajorityState::WeakPlus => Color(0),
            MajorityState::StrongMinus | MajorityState::WeakMinus => Color(1),
        }
    }
}

impl CanonicalState for MajorityState {
    fn write_canonical(&self, out: &mut Vec<u8>) {
        out.push(match self {
            MajorityState::StrongPlus => 0,
            MajorityState::StrongMinus => 1,
            MajorityState::WeakPlus => 2,
            MajorityState::WeakMinus => 3,
        });
    }

    fn read_canonical(input: &mut &[u8]) -> Result<Self> {
        match crate::engine::config_bytes::read_u8(input)? {
            0 => Ok(MajorityState::StrongPlus),
            1 => Ok(MajorityState::StrongMinus),
            2 => Ok(MajorityState::WeakPlus),
            3 => Ok(MajorityState::WeakMinus),
            other => Err(Error::MalformedState(format!("bad majority state {other}"))),
        }
    }
}

/// Ordered-pair rules for the four-state baseline, first match only. Strong
/// opposites cancel into weak minus (the tie-break side), strong opinions
/// convert weak ones, and weak disagreement collapses toward minus.
pub fn four_state_majority_step(
    a: MajorityState,
    b: MajorityState,
) -> (MajorityState, MajorityState) {
    use MajorityState::*;
    match (a, b) {
        (StrongPlus, StrongMinus) => (WeakMinus, WeakMinus),
        (StrongPlus, WeakMinus) => (StrongPlus, WeakPlus),
        (StrongMinus, WeakPlus) => (StrongMinus, WeakMinus),
        (WeakPlus, WeakMinus) => (WeakMinus, WeakMinus),
        other => other,
    }
}

/// The k = 2 testing baseline.
#[derive(Clone, Copy, Debug)]
pub struct FourStateMajority;

impl Protocol for FourStateMajority {
    type State = MajorityState;

    fn init_state(&self, color: Color) -> MajorityState {
        if color.0 == 0 {
            MajorityState::StrongPlus
        } else {
            MajorityState::StrongMinus
        }
    }

    fn apply(&self, a: &MajorityState, b: &MajorityState) -> (MajorityState, MajorityState) {
        four_state_majority_step(*a, *b)
    }
}

/// One-state-per-color voter dynamics: the responder adopts the initiator's
/// color. Deliberately too small to solve plurality; kept as the negative
/// control for the indistinguishability tooling.
#[derive(Clone, Copy, Debug)]
pub struct VoterProtocol;

impl Protocol for VoterProtocol {
    type State = Color;

    fn init_state(&self, color: Color) -> Color {
        color
    }

    fn apply(&self, a: &Color, _b: &Color) -> (Color, Color) {
        (*a, *a)
    }
}
