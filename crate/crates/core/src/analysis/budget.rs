use crate::ordering::label_bits;

/// Which protocol's encoding to count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetKind {
    Ordering,
    Coupled,
}

/// Exact count of encodable per-agent states for the chosen encoding,
/// together with the polynomial budget it must stay within.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateBudget {
    pub kind: BudgetKind,
    pub k: u16,
    pub m: u8,
    pub count: u128,
    pub bound: u128,
    pub within: bool,
}

/// Field-range product for the chosen protocol.
///
/// Ordering states: color x label x leader bit x root bit x pre x suc
/// = `k * 2^m * 2 * 2 * k * k`, which stays within `8 k^4`.
///
/// Coupled states add the played label, the per-level duel fields and the
/// answer color. Each level admits 8 legal (vote, weight, output) triples
/// (weight pinned to the vote or one step behind it, output pinned to a
/// nonzero weight), so the count is
/// `k * 2^m * 2 * 2 * k * k * 2^m * 8^m * k`, within `8 k^11`.
pub fn state_space_size(kind: BudgetKind, k: u16) -> StateBudget {
    assert!(k >= 1);
    let m = label_bits(k);
    let k = k as u128;
    let labels = 1u128 << m;
    let (count, bound) = match kind {
        BudgetKind::Ordering => (k * labels * 2 * 2 * k * k, 8 * k.pow(4)),
        BudgetKind::Coupled => {
            let per_level = 8u128.pow(m as u32);
            (
                k * labels * 2 * 2 * k * k * labels * per_level * k,
                8 * k.pow(11),
            )
        }
    };
    StateBudget {
        kind,
        k: k as u16,
        m,
        count,
        bound,
        within: count <= bound,
    }
}
