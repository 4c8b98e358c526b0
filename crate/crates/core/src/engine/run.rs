use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::config::{CanonicalState, Configuration};
use super::graph::{Instance, InteractionGraph};
use super::scheduler::Scheduler;
use super::Protocol;

/// One applied activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub step: u64,
    pub edge: (u32, u32),
    pub changed: bool,
}

/// Periodic copy of the full configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot<S> {
    pub step: u64,
    pub states: Vec<S>,
}

/// Ordered interaction log with periodic snapshots and convergence metadata.
///
/// `convergence_step` is the step at which the monitored condition first held
/// and kept holding through the required window. `step_cap_exceeded` is set
/// when the run ended (step cap or scheduler exhaustion) without meeting its
/// stop condition; it is reported as metadata, not as a failure.
#[derive(Clone, Debug)]
pub struct Trace<S> {
    pub records: Vec<InteractionRecord>,
    pub snapshots: Vec<Snapshot<S>>,
    pub convergence_step: Option<u64>,
    pub step_cap_exceeded: bool,
    pub steps: u64,
}

pub struct RunOutcome<S> {
    pub trace: Trace<S>,
    pub final_config: Configuration<S>,
}

/// Window lengths for hold-and-verify stop conditions: either a fixed number
/// of steps or a multiple of the step at which the condition started holding.
#[derive(Clone, Copy, Debug)]
pub enum Window {
    Fixed(u64),
    Factor(u64),
}

impl Window {
    fn length(&self, hold_start: u64) -> u64 {
        match self {
            Window::Fixed(w) => *w,
            Window::Factor(f) => f.saturating_mul(hold_start.max(1)),
        }
    }
}

/// Boxed configuration predicate used by hold-and-verify stops.
pub type StatePredicate<'a, S> = Box<dyn FnMut(&[S]) -> bool + 'a>;

/// When to stop a run. Termination detection is deliberately external to the
/// agents: these are omniscient conditions evaluated by the engine.
pub enum StopCondition<'a, S> {
    /// Stop after exactly this many applied interactions.
    MaxSteps(u64),
    /// Stop once no interaction has changed any state for a full window.
    Quiescence { window: Window, max_steps: u64 },
    /// Stop once the predicate has held through a full window.
    ConvergedWindow {
        predicate: StatePredicate<'a, S>,
        window: Window,
        max_steps: u64,
    },
}

impl<'a, S> StopCondition<'a, S> {
    pub fn converged(
        predicate: impl FnMut(&[S]) -> bool + 'a,
        window: Window,
        max_steps: u64,
    ) -> Self {
        StopCondition::ConvergedWindow {
            predicate: Box::new(predicate),
            window,
            max_steps,
        }
    }
}

/// Stop conditions as they appear in instance files. `converged` leaves the
/// predicate to the protocol driving the run (each protocol has a canonical
/// convergence predicate; see the CLI).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopSpec {
    MaxSteps { n: u64 },
    Quiescence { window: u64, max_steps: u64 },
    Converged { window_factor: u64, max_steps: u64 },
}

impl StopSpec {
    pub fn to_condition<'a, S>(
        &self,
        predicate: impl FnMut(&[S]) -> bool + 'a,
    ) -> StopCondition<'a, S> {
        match self {
            StopSpec::MaxSteps { n } => StopCondition::MaxSteps(*n),
            StopSpec::Quiescence { window, max_steps } => StopCondition::Quiescence {
                window: Window::Fixed(*window),
                max_steps: *max_steps,
            },
            StopSpec::Converged {
                window_factor,
                max_steps,
            } => StopCondition::converged(predicate, Window::Factor(*window_factor), *max_steps),
        }
    }

    pub fn max_steps(&self) -> u64 {
        match self {
            StopSpec::MaxSteps { n } => *n,
            StopSpec::Quiescence { max_steps, .. } | StopSpec::Converged { max_steps, .. } => {
                *max_steps
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Cadence {
    /// Snapshot every `ceil(n * ln(n + 1))` steps.
    Default,
    Every(u64),
    None,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub snapshot_cadence: Cadence,
    pub record_interactions: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            snapshot_cadence: Cadence::Default,
            record_interactions: true,
        }
    }
}

fn default_cadence(n: u32) -> u64 {
    ((n as f64) * ((n as f64) + 1.0).ln()).ceil().max(1.0) as u64
}

/// Applies one directed interaction and returns the successor configuration.
/// The input configuration is left untouched; only the two endpoint entries
/// may differ in the result, and the step count goes up by one.
pub fn apply_interaction<P: Protocol>(
    protocol: &P,
    graph: &InteractionGraph,
    config: &Configuration<P::State>,
    edge: (u32, u32),
) -> Result<Configuration<P::State>> {
    let (u, v) = edge;
    for id in [u, v] {
        if id >= graph.n() {
            return Err(crate::error::Error::IdOutOfRange { id, n: graph.n() });
        }
    }
    if !graph.has_edge(u, v) {
        return Err(crate::error::Error::NonAdjacentEdge(u, v));
    }
    let mut next = config.clone();
    let (a, b) = protocol.apply(&config.states[u as usize], &config.states[v as usize]);
    next.states[u as usize] = a;
    next.states[v as usize] = b;
    next.step += 1;
    Ok(next)
}

/// Runs a protocol from the instance's initial configuration until the stop
/// condition triggers. Deterministic given (protocol, instance, scheduler
/// kind, seed, stop).
pub fn run<P: Protocol>(
    protocol: &P,
    instance: &Instance,
    scheduler: &mut Scheduler,
    stop: StopCondition<'_, P::State>,
    opts: &RunOptions,
) -> RunOutcome<P::State> {
    run_observed(protocol, instance, scheduler, stop, opts, |_, _, _, _| {})
}

/// Like [`run`], with a per-step observer called after every applied
/// interaction as `(step, states, edge, changed)`. Observers are how monitors
/// watch full per-step state without forcing per-step snapshots into the
/// trace.
pub fn run_observed<P: Protocol>(
    protocol: &P,
    instance: &Instance,
    scheduler: &mut Scheduler,
    mut stop: StopCondition<'_, P::State>,
    opts: &RunOptions,
    mut observer: impl FnMut(u64, &[P::State], (u32, u32), bool),
) -> RunOutcome<P::State> {
    let mut states = instance.initial_states(protocol);
    let mut trace = Trace {
        records: Vec::new(),
        snapshots: Vec::new(),
        convergence_step: None,
        step_cap_exceeded: false,
        steps: 0,
    };
    let cadence = match opts.snapshot_cadence {
        Cadence::Default => Some(default_cadence(instance.n())),
        Cadence::Every(c) => Some(c.max(1)),
        Cadence::None => None,
    };
    if let Some(_c) = cadence {
        trace.snapshots.push(Snapshot {
            step: 0,
            states: states.clone(),
        });
    }

    let mut step: u64 = 0;
    // Last step at which some state changed; step 0 is the baseline.
    let mut last_change: u64 = 0;
    // For ConvergedWindow: step since which the predicate has held.
    let mut hold_since: Option<u64> = match &mut stop {
        StopCondition::ConvergedWindow { predicate, .. } => predicate(&states).then_some(0),
        _ => None,
    };

    loop {
        // Check the stop condition before drawing the next activation.
        match &stop {
            StopCondition::MaxSteps(n) => {
                if step >= *n {
                    break;
                }
            }
            StopCondition::Quiescence { window, max_steps } => {
                if step - last_change >= window.length(last_change) {
                    trace.convergence_step = Some(last_change);
                    break;
                }
                if step >= *max_steps {
                    trace.step_cap_exceeded = true;
                    break;
                }
            }
            StopCondition::ConvergedWindow {
                window, max_steps, ..
            } => {
                if let Some(t0) = hold_since {
                    if step - t0 >= window.length(t0) {
                        trace.convergence_step = Some(t0);
                        break;
                    }
                }
                if step >= *max_steps {
                    trace.step_cap_exceeded = true;
                    break;
                }
            }
        }

        let Some((u, v)) = scheduler.next_edge() else {
            // Scheduler exhausted. With no edges at all nothing can ever
            // change, so quiescence-style conditions hold vacuously; a
            // finished script simply ends the run short.
            if instance.graph.directed_edges().is_empty() {
                match &mut stop {
                    StopCondition::MaxSteps(_) => {}
                    StopCondition::Quiescence { .. } => {
                        trace.convergence_step = Some(last_change);
                    }
                    StopCondition::ConvergedWindow { .. } => {
                        if let Some(t0) = hold_since {
                            trace.convergence_step = Some(t0);
                        } else {
                            trace.step_cap_exceeded = true;
                        }
                    }
                }
            } else if !matches!(stop, StopCondition::MaxSteps(_)) {
                trace.step_cap_exceeded = true;
            }
            break;
        };

        let (a0, b0) = (states[u as usize], states[v as usize]);
        let (a1, b1) = protocol.apply(&a0, &b0);
        let changed = a1 != a0 || b1 != b0;
        states[u as usize] = a1;
        states[v as usize] = b1;
        step += 1;
        if changed {
            last_change = step;
        }

        if opts.record_interactions {
            trace.records.push(InteractionRecord {
                step,
                edge: (u, v),
                changed,
            });
        }
        observer(step, &states, (u, v), changed);

        if changed {
            if let StopCondition::ConvergedWindow { predicate, .. } = &mut stop {
                if predicate(&states) {
                    hold_since.get_or_insert(step);
                } else {
                    hold_since = None;
                }
            }
        }

        if let Some(c) = cadence {
            if step.is_multiple_of(c) {
                trace.snapshots.push(Snapshot {
                    step,
                    states: states.clone(),
                });
            }
        }
    }

    if let Some(_c) = cadence {
        if trace.snapshots.last().map(|s| s.step) != Some(step) {
            trace.snapshots.push(Snapshot {
                step,
                states: states.clone(),
            });
        }
    }
    trace.steps = step;
    RunOutcome {
        trace,
        final_config: Configuration { states, step },
    }
}

/// One line of a trace file: either an interaction record
/// `{"step":..,"edge":[u,v],"changed":..}` or a snapshot
/// `{"step":..,"config":"<canonical hex>"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceLine {
    Record {
        step: u64,
        edge: (u32, u32),
        changed: bool,
    },
    Snapshot {
        step: u64,
        config: String,
    },
}

/// Writes a trace as line-delimited JSON, records and snapshots merged in
/// step order (snapshots after the record of the same step).
pub fn write_trace<S: CanonicalState + Clone>(mut out: impl Write, trace: &Trace<S>) -> Result<()> {
    let mut snaps = trace.snapshots.iter().peekable();
    let mut emit_snaps_upto = |out: &mut dyn Write, step: u64| -> Result<()> {
        while let Some(s) = snaps.peek() {
            if s.step <= step {
                let config = hex::encode(super::config::states_canonical_bytes(&s.states));
                let line = serde_json::to_string(&TraceLine::Snapshot {
                    step: s.step,
                    config,
                })?;
                writeln!(out, "{line}")?;
                snaps.next();
            } else {
                break;
            }
        }
        Ok(())
    };
    for rec in &trace.records {
        emit_snaps_upto(&mut out, rec.step.saturating_sub(1))?;
        let line = serde_json::to_string(&TraceLine::Record {
            step: rec.step,
            edge: rec.edge,
            changed: rec.changed,
        })?;
        writeln!(out, "{line}")?;
    }
    emit_snaps_upto(&mut out, u64::MAX)?;
    Ok(())
}

/// Reads a trace file back as raw lines.
pub fn read_trace(input: impl std::io::Read) -> Result<Vec<TraceLine>> {
    let reader = std::io::BufReader::new(input);
    let mut lines = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        lines.push(serde_json::from_str(&line)?);
    }
    Ok(lines)
}
