use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::graph::InteractionGraph;

/// Scheduler kinds as they appear in instance files.
///
/// * `uniform_random` picks every directed edge with equal positive
///   probability each step; it satisfies global fairness with probability 1.
/// * `round_robin` cycles through all directed edges in lexicographic order,
///   so every edge appears once per cycle (weak fairness, realized exactly
///   over any window of one full cycle).
/// * `scripted` replays a finite activation sequence and then either stops or
///   cycles it, as declared by the script.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchedulerSpec {
    UniformRandom {
        seed: u64,
    },
    RoundRobin,
    Scripted {
        script: Vec<(u32, u32)>,
        #[serde(default)]
        cycle: bool,
    },
}

impl SchedulerSpec {
    /// Same kind with the seed replaced, for seed sweeps. Non-random kinds
    /// are returned unchanged.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            SchedulerSpec::UniformRandom { .. } => SchedulerSpec::UniformRandom { seed },
            other => other.clone(),
        }
    }
}

/// A scheduler bound to a concrete graph.
///
/// Randomness comes from ChaCha8 seeded through `seed_from_u64`; the edge
/// index is `next_u64() % |directed edges|`. Both choices are part of the
/// trace format contract: replaying the same (kind, seed, graph) must yield
/// the identical activation sequence everywhere.
pub struct Scheduler {
    mode: Mode,
}

enum Mode {
    Uniform {
        rng: Box<ChaCha8Rng>,
        directed: Vec<(u32, u32)>,
    },
    RoundRobin {
        directed: Vec<(u32, u32)>,
        cursor: usize,
    },
    Scripted {
        script: Vec<(u32, u32)>,
        cursor: usize,
        cycle: bool,
    },
}

impl Scheduler {
    pub fn new(spec: &SchedulerSpec, graph: &InteractionGraph) -> Result<Self> {
        let mode = match spec {
            SchedulerSpec::UniformRandom { seed } => Mode::Uniform {
                rng: Box::new(ChaCha8Rng::seed_from_u64(*seed)),
                directed: graph.directed_edges().to_vec(),
            },
            SchedulerSpec::RoundRobin => Mode::RoundRobin {
                directed: graph.directed_edges().to_vec(),
                cursor: 0,
            },
            SchedulerSpec::Scripted { script, cycle } => {
                for &(u, v) in script {
                    if !graph.has_edge(u, v) {
                        return Err(Error::NonAdjacentEdge(u, v));
                    }
                }
                Mode::Scripted {
                    script: script.clone(),
                    cursor: 0,
                    cycle: *cycle,
                }
            }
        };
        Ok(Self { mode })
    }

    /// Next directed activation, or `None` once the scheduler is exhausted
    /// (finite script ran out, or the graph has no edges at all).
    pub fn next_edge(&mut self) -> Option<(u32, u32)> {
        match &mut self.mode {
            Mode::Uniform { rng, directed } => {
                if directed.is_empty() {
                    return None;
                }
                let idx = (rng.next_u64() % directed.len() as u64) as usize;
                Some(directed[idx])
            }
            Mode::RoundRobin { directed, cursor } => {
                if directed.is_empty() {
                    return None;
                }
                let edge = directed[*cursor];
                *cursor = (*cursor + 1) % directed.len();
                Some(edge)
            }
            Mode::Scripted {
                script,
                cursor,
                cycle,
            } => {
                if script.is_empty() {
                    return None;
                }
                if *cursor >= script.len() {
                    if !*cycle {
                        return None;
                    }
                    *cursor = 0;
                }
                let edge = script[*cursor];
                *cursor += 1;
                Some(edge)
            }
        }
    }
}
