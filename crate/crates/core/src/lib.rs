//! Simulation, reference implementation and finite-instance verification for
//! population protocols that compute the plurality (relative majority) of the
//! initial colors.
//!
//! The crate is organized around:
//!
//! * [`engine`] — interaction graphs, configurations, fair schedulers, run
//!   loops, traces and fairness auditing;
//! * [`ordering`] — the linked-list protocol that maps the colors present in
//!   the population onto the labels `0..k'-1`;
//! * [`plurality_core`] — the label-duel tournament that elects a plurality
//!   label, plus two small k = 2 baselines;
//! * [`coupled`] — the composition of the two, for complete graphs and (via
//!   state swapping) for arbitrary connected graphs;
//! * [`analysis`] — plurality and tournament oracles, snapshot monitors,
//!   explicit-state reachability, stabilization certificates,
//!   indistinguishability search and state-budget accounting.

pub mod analysis;
pub mod coupled;
pub mod engine;
pub mod error;
pub mod ordering;
pub mod plurality_core;

pub use engine::{Color, Configuration, Instance, InteractionGraph, Protocol};
pub use error::{Error, Result};
