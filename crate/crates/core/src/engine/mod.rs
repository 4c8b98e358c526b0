//! Generic execution substrate: interaction graphs, typed configurations,
//! schedulers, run loops and fairness auditing.
//!
//! Protocols plug into the engine through the [`Protocol`] trait. A protocol
//! owns a per-agent state type and a transition function over *ordered*
//! (initiator, responder) state pairs; undirected graphs expose both
//! orientations of every edge to the schedulers.

mod config;
mod fairness;
mod graph;
mod run;
mod scheduler;

/// Byte-level readers shared by the canonical encodings of the state types.
pub(crate) mod config_bytes {
    pub(crate) use super::config::{read_bool, read_i8, read_u16, read_u8};
}

pub use config::{states_canonical_bytes, states_canonical_hex, CanonicalState, Configuration};
pub use fairness::{audit_fairness, EdgeStats, FairnessReport};
pub use graph::{Color, GraphSpec, Instance, InstanceSpec, InteractionGraph};
pub use run::{
    apply_interaction, read_trace, run, run_observed, write_trace, Cadence, InteractionRecord,
    RunOptions, RunOutcome, Snapshot, StopCondition, StopSpec, Trace, TraceLine, Window,
};
pub use scheduler::{Scheduler, SchedulerSpec};

/// A population protocol: a per-agent state space plus a transition function
/// over directed pair interactions.
///
/// Transition functions must be pure; the engine guarantees that a single run
/// is sequential and deterministic, and distinct runs may execute
/// concurrently.
pub trait Protocol {
    type State: Copy + Eq + std::hash::Hash + std::fmt::Debug + CanonicalState;

    /// The state an agent starts in, given its input color.
    fn init_state(&self, color: Color) -> Self::State;

    /// Applies one interaction to the ordered pair (initiator, responder).
    fn apply(&self, initiator: &Self::State, responder: &Self::State)
        -> (Self::State, Self::State);
}
