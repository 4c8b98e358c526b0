//! The ordering protocol: agents agree on a bijection from the colors present
//! in the population to the labels `0..k'-1`.
//!
//! Per-color leaders link themselves into a single root-headed list; an
//! agent's position in that list is its color's label. Competing lists
//! self-destruct head-first, and evicted leaders re-attach by climbing the
//! surviving list from its root. Followers copy the label of their color's
//! leader.
//!
//! All label arithmetic is modulo `2^m` with `m = ceil(log2 k)`, so the state
//! space stays within `8k^4` states.

use serde::{Deserialize, Serialize};

use crate::engine::{CanonicalState, Color, Protocol};
use crate::error::{Error, Result};

/// Per-agent record for the ordering protocol.
///
/// Field roles:
/// * `c` — input color, immutable.
/// * `d` — assigned label, in `[0, 2^m)`.
/// * `l` / `r` — leader and root bits. Neither ever flips 0 -> 1.
/// * `pre` — color of the predecessor on the linked list; own color when the
///   agent is a root or not on a list.
/// * `suc` — color of the successor on the list, or of the agent currently
///   being followed while climbing; own color when there is neither.
///
/// Followers (`l = 0`) keep `pre = suc = c`, which shrinks the reachable
/// space and sharpens the monitors.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct OrderingState {
    pub c: Color,
    pub d: u16,
    pub l: bool,
    pub r: bool,
    pub pre: Color,
    pub suc: Color,
}

impl OrderingState {
    pub fn is_leader(&self) -> bool {
        self.l
    }

    pub fn is_root(&self) -> bool {
        self.l && self.r
    }

    /// A leader that is either a root or carries a predecessor link.
    pub fn is_on_list(&self) -> bool {
        self.l && (self.r || self.pre != self.c)
    }

    /// A non-root leader with no predecessor.
    pub fn is_isolated(&self) -> bool {
        self.l && !self.r && self.pre == self.c
    }
}

impl CanonicalState for OrderingState {
    // Field order: c, d, l, r, pre, suc.
    fn write_canonical(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.c.0.to_le_bytes());
        out.extend_from_slice(&self.d.to_le_bytes());
        out.push(self.l as u8);
        out.push(self.r as u8);
        out.extend_from_slice(&self.pre.0.to_le_bytes());
        out.extend_from_slice(&self.suc.0.to_le_bytes());
    }

    fn read_canonical(input: &mut &[u8]) -> Result<Self> {
        use crate::engine::config_bytes::*;
        Ok(OrderingState {
            c: Color(read_u16(input)?),
            d: read_u16(input)?,
            l: read_bool(input)?,
            r: read_bool(input)?,
            pre: Color(read_u16(input)?),
            suc: Color(read_u16(input)?),
        })
    }
}

/// Initial state: every agent is a root-leader with label 0 and no links.
pub fn init_ordering(color: Color) -> OrderingState {
    OrderingState {
        c: color,
        d: 0,
        l: true,
        r: true,
        pre: color,
        suc: color,
    }
}

/// The ordering protocol for a color universe of size `k`.
#[derive(Clone, Copy, Debug)]
pub struct OrderingProtocol {
    k: u16,
    m: u8,
    modulus: u32,
}

/// Number of label bits: `ceil(log2 k)`, zero for k = 1.
pub fn label_bits(k: u16) -> u8 {
    assert!(k >= 1, "k must be at least 1");
    (16 - (k - 1).leading_zeros()) as u8
}

impl OrderingProtocol {
    pub fn new(k: u16) -> Self {
        let m = label_bits(k);
        Self {
            k,
            m,
            modulus: 1u32 << m,
        }
    }

    pub fn k(&self) -> u16 {
        self.k
    }

    pub fn label_bits(&self) -> u8 {
        self.m
    }

    #[inline]
    fn inc(&self, d: u16) -> u16 {
        (((d as u32) + 1) & (self.modulus - 1)) as u16
    }

    /// Isolates a leader: drops the root bit and every link, resets the label.
    /// The result is an isolated leader whose follow pointer targets itself.
    pub fn clear(&self, s: &OrderingState) -> Result<OrderingState> {
        if !s.l {
            return Err(Error::NotALeader);
        }
        Ok(cleared(s))
    }

    /// The transition function. Rules are tried top to bottom on the ordered
    /// pair (a = initiator, b = responder); the first match applies.
    ///
    ///  R1  same-color leader duel: the root side survives (initiator on
    ///      ties); the loser is demoted to a plain follower.
    ///  R2  a leader pushes its label to a same-color follower.
    ///  R3  root duel across colors: the responder root is isolated, which
    ///      starts the head-first destruction of its former list.
    ///  R4  an isolated agent following a leader that is not on a list gives
    ///      up and clears itself.
    ///  R5  a root with a free or matching successor slot recruits / repairs:
    ///      the other leader becomes (or is confirmed as) its successor.
    ///  R6  climbing: an isolated agent following a list member advances its
    ///      pointer toward the tail (6a, 6c from the root) or appends itself
    ///      at a proper tail (6b).
    ///  R7  a non-root list member whose forward link the successor-color
    ///      leader does not confirm drops that link.
    ///  R8  a list member whose predecessor claim the predecessor-color
    ///      leader does not confirm is cleared.
    ///  R9  mutual links with inconsistent labels clear the claiming side.
    ///  R10 orientation mirrors of R2 and R5.
    ///  R11 otherwise, no state change.
    pub fn gamma_o(
        &self,
        a0: &OrderingState,
        b0: &OrderingState,
    ) -> (OrderingState, OrderingState) {
        let mut a = *a0;
        let mut b = *b0;

        // R1: leaders of the same color.
        if a.l && b.l && a.c == b.c {
            // Root survival keeps both leader and root bits monotone: the
            // surviving side already carries r = r_a | r_b.
            if !a.r && b.r {
                a = demoted(&a);
            } else {
                b = demoted(&b);
            }
            return (a, b);
        }
        // R2: leader pushes its label to a same-color follower.
        if a.l && !b.l && a.c == b.c {
            b.d = a.d;
            return (a, b);
        }
        // R3: root duel across colors.
        if a.is_root() && b.is_root() && a.c != b.c {
            b = cleared(&b);
            return (a, b);
        }
        // R4: follow target turned out not to be on a list. Only the target
        // color's leader can testify; followers are inert for the list
        // machinery here and in R7/R8, otherwise every demoted agent of a
        // linked color would keep resetting its color's list neighbors.
        if a.is_isolated() && a.suc == b.c && b.c != a.c && b.l && !b.is_on_list() {
            a = cleared(&a);
            return (a, b);
        }
        // R5: root recruits or repairs its first link.
        if a.is_root() && b.l && !b.r && (a.suc == a.c || a.suc == b.c) {
            a.suc = b.c;
            b.pre = a.c;
            b.d = self.inc(a.d);
            return (a, b);
        }
        // R6a: climb past a list member that has a successor.
        if a.is_isolated() && a.suc == b.c && b.is_on_list() && b.suc != b.c {
            a.suc = b.suc;
            return (a, b);
        }
        // R6b: append at a proper (non-root) tail.
        if a.is_isolated() && a.suc == b.c && b.is_on_list() && !b.is_root() && b.suc == b.c {
            b.suc = a.c;
            a.pre = b.c;
            a.d = self.inc(b.d);
            a.suc = a.c;
            return (a, b);
        }
        // R6c: start climbing from the root.
        if a.is_isolated() && a.suc == a.c && b.is_root() && b.suc != b.c {
            a.suc = b.suc;
            return (a, b);
        }
        // R7: drop a forward link the successor-color leader does not confirm.
        if a.is_on_list()
            && !a.is_root()
            && a.suc == b.c
            && b.c != a.c
            && b.l
            && !(b.pre == a.c && b.d == self.inc(a.d))
        {
            a.suc = a.c;
            return (a, b);
        }
        // R8: clear a predecessor claim the predecessor-color leader does not
        // confirm.
        if b.is_on_list()
            && !b.is_root()
            && b.pre == a.c
            && a.l
            && !(a.is_on_list() && a.suc == b.c && b.d == self.inc(a.d))
        {
            b = cleared(&b);
            return (a, b);
        }
        // R9: mutually linked pair with a label mismatch.
        if a.is_on_list()
            && !a.is_root()
            && a.suc == b.c
            && b.is_on_list()
            && b.pre == a.c
            && b.d != self.inc(a.d)
        {
            b = cleared(&b);
            a.suc = a.c;
            return (a, b);
        }
        // R10: mirrors of R2 and R5 for the opposite orientation.
        if b.l && !a.l && a.c == b.c {
            a.d = b.d;
            return (a, b);
        }
        if b.is_root() && a.l && !a.r && (b.suc == b.c || b.suc == a.c) {
            b.suc = a.c;
            a.pre = b.c;
            a.d = self.inc(b.d);
            return (a, b);
        }
        // R11: no rule applies.
        (a, b)
    }
}

fn demoted(s: &OrderingState) -> OrderingState {
    OrderingState {
        l: false,
        r: false,
        pre: s.c,
        suc: s.c,
        ..*s
    }
}

fn cleared(s: &OrderingState) -> OrderingState {
    OrderingState {
        r: false,
        pre: s.c,
        suc: s.c,
        d: 0,
        ..*s
    }
}

impl Protocol for OrderingProtocol {
    type State = OrderingState;

    fn init_state(&self, color: Color) -> OrderingState {
        init_ordering(color)
    }

    fn apply(&self, a: &OrderingState, b: &OrderingState) -> (OrderingState, OrderingState) {
        self.gamma_o(a, b)
    }
}
