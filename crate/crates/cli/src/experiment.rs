//! Experiment specs and the seed-sweep executor behind `popsim run`.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use popsim_core::analysis::{
    check_duel_invariants_coupled, check_ordering_snapshot, leader_root_regressions,
    ordering_converged, ordering_views, ColorCensus,
};
use popsim_core::coupled::{CliqueProtocol, CoupledState, GeneralProtocol};
use popsim_core::engine::audit_fairness;
use popsim_core::engine::{
    run, write_trace, Cadence, Instance, InstanceSpec, Protocol, RunOptions, Scheduler,
    SchedulerSpec, StopCondition, StopSpec, Trace,
};
use popsim_core::ordering::OrderingProtocol;
use popsim_core::plurality_core::FourStateMajority;

use crate::ProtocolName;

/// Which per-run checks to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    OrderingReport,
    DuelInvariants,
    FairnessAudit,
    OracleCompare,
}

impl FromStr for Check {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ordering_report" => Ok(Check::OrderingReport),
            "duel_invariants" => Ok(Check::DuelInvariants),
            "fairness_audit" => Ok(Check::FairnessAudit),
            "oracle_compare" => Ok(Check::OracleCompare),
            other => bail!("unknown check '{other}'"),
        }
    }
}

/// A validated run request: instance file, protocol, checks, outputs, seeds.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub instance_path: PathBuf,
    pub protocol: ProtocolName,
    pub checks: BTreeSet<Check>,
    pub out_dir: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub max_steps: Option<u64>,
    pub window: Option<u64>,
    pub snapshots: Option<u64>,
}

/// One summary line. Field order is part of the output format.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub converged_step: Option<u64>,
    pub outputs: serde_json::Value,
    pub violations: u64,
}

pub struct ExperimentOutcome {
    pub summaries: Vec<RunSummary>,
    pub all_passed: bool,
}

pub fn execute_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let file = InstanceSpec::from_path(&spec.instance_path)
        .with_context(|| format!("loading {}", spec.instance_path.display()))?;
    let instance = file
        .build_instance()
        .map_err(|e| anyhow::anyhow!("instance: {e}"))?;
    validate(spec, &file, &instance)?;

    let stop_spec = override_stop(&file.stop, spec);
    let census = ColorCensus::from_instance(&instance);
    let plurality = census
        .plurality_set()
        .map_err(|e| anyhow::anyhow!("census: {e}"))?;

    let summaries = match spec.protocol {
        ProtocolName::Ordering => {
            let protocol = OrderingProtocol::new(instance.k);
            let k = instance.k;
            sweep(
                spec,
                &instance,
                &file.scheduler,
                &stop_spec,
                &protocol,
                Hooks {
                    predicate: Box::new(move |states| ordering_converged(states, k)),
                    outputs: Box::new(move |states| {
                        match check_ordering_snapshot(states, k).label_map {
                            Some(map) => json!({
                                "labels": map
                                    .iter()
                                    .map(|(c, d)| (c.0.to_string(), *d))
                                    .collect::<std::collections::BTreeMap<_, _>>()
                            }),
                            None => serde_json::Value::Null,
                        }
                    }),
                    violations: Box::new(move |trace, final_states, checks| {
                        let mut v = 0u64;
                        if checks.contains(&Check::OrderingReport) {
                            for pair in trace.snapshots.windows(2) {
                                v += leader_root_regressions(&pair[0].states, &pair[1].states)
                                    as u64;
                            }
                            if !check_ordering_snapshot(final_states, k).verdict {
                                v += 1;
                            }
                        }
                        if checks.contains(&Check::OracleCompare)
                            && check_ordering_snapshot(final_states, k).label_map.is_none()
                        {
                            v += 1;
                        }
                        v
                    }),
                },
            )?
        }
        ProtocolName::Clique | ProtocolName::General => {
            let k = instance.k;
            let plur = plurality.clone();
            let make_hooks = |m: u8| -> Hooks<'_, CoupledState> {
                let plur_pred = plur.clone();
                let plur_oracle = plur.clone();
                Hooks {
                    predicate: Box::new(move |states: &[CoupledState]| {
                        let ans = states[0].ans;
                        states.iter().all(|s| s.ans == ans && s.is_stable(m))
                            && plur_pred.contains(&ans)
                    }),
                    outputs: Box::new(|states: &[CoupledState]| {
                        let distinct: BTreeSet<u16> = states.iter().map(|s| s.ans.0).collect();
                        json!({ "ans": distinct })
                    }),
                    violations: Box::new(move |trace, final_states, checks| {
                        let mut v = 0u64;
                        if checks.contains(&Check::DuelInvariants) {
                            for snap in &trace.snapshots {
                                v += check_duel_invariants_coupled(&snap.states).len() as u64;
                            }
                            v += check_duel_invariants_coupled(final_states).len() as u64;
                        }
                        if checks.contains(&Check::OrderingReport) {
                            let views = ordering_views(final_states);
                            if !check_ordering_snapshot(&views, k).verdict {
                                v += 1;
                            }
                        }
                        if checks.contains(&Check::OracleCompare) {
                            let ans = final_states[0].ans;
                            let agreed = final_states.iter().all(|s| s.ans == ans)
                                && plur_oracle.contains(&ans);
                            if !agreed {
                                v += 1;
                            }
                        }
                        v
                    }),
                }
            };
            if spec.protocol == ProtocolName::Clique {
                let protocol = CliqueProtocol::new(instance.k);
                sweep(
                    spec,
                    &instance,
                    &file.scheduler,
                    &stop_spec,
                    &protocol,
                    make_hooks(protocol.label_bits()),
                )?
            } else {
                let protocol = GeneralProtocol::new(instance.k);
                sweep(
                    spec,
                    &instance,
                    &file.scheduler,
                    &stop_spec,
                    &protocol,
                    make_hooks(protocol.label_bits()),
                )?
            }
        }
        ProtocolName::Baseline4 => {
            let protocol = FourStateMajority;
            let plur = plurality.clone();
            let plur_oracle = plurality.clone();
            sweep(
                spec,
                &instance,
                &file.scheduler,
                &stop_spec,
                &protocol,
                Hooks {
                    predicate: Box::new(move |states| {
                        let out = states[0].output();
                        states.iter().all(|s| s.output() == out) && plur.contains(&out)
                    }),
                    outputs: Box::new(|states| {
                        let distinct: BTreeSet<u16> = states.iter().map(|s| s.output().0).collect();
                        json!({ "out": distinct })
                    }),
                    violations: Box::new(move |_trace, final_states, checks| {
                        let mut v = 0u64;
                        if checks.contains(&Check::OracleCompare) {
                            let out = final_states[0].output();
                            if !(final_states.iter().all(|s| s.output() == out)
                                && plur_oracle.contains(&out))
                            {
                                v += 1;
                            }
                        }
                        v
                    }),
                },
            )?
        }
    };

    let all_passed = summaries.iter().all(|s| s.violations == 0);
    if let Some(dir) = &spec.out_dir {
        let mut out = std::fs::File::create(dir.join("summary.jsonl"))?;
        for s in &summaries {
            writeln!(out, "{}", serde_json::to_string(s)?)?;
        }
    }
    Ok(ExperimentOutcome {
        summaries,
        all_passed,
    })
}

fn validate(spec: &ExperimentSpec, file: &InstanceSpec, instance: &Instance) -> Result<()> {
    if spec.seeds.is_empty() {
        bail!("spec invalid: empty seed list");
    }
    if spec.protocol == ProtocolName::Clique && !instance.graph.is_complete() {
        bail!("spec invalid: the clique protocol requires a complete graph");
    }
    if spec.protocol == ProtocolName::Baseline4 && instance.k != 2 {
        bail!(
            "spec invalid: baseline4 is a k = 2 protocol, instance has k = {}",
            instance.k
        );
    }
    if spec.seeds.len() > 1 && !matches!(file.scheduler, SchedulerSpec::UniformRandom { .. }) {
        bail!("spec invalid: seed sweeps need a uniform_random scheduler");
    }
    for check in &spec.checks {
        let ok = match check {
            Check::OrderingReport => {
                matches!(
                    spec.protocol,
                    ProtocolName::Ordering | ProtocolName::Clique | ProtocolName::General
                )
            }
            Check::DuelInvariants => {
                matches!(spec.protocol, ProtocolName::Clique | ProtocolName::General)
            }
            Check::FairnessAudit | Check::OracleCompare => true,
        };
        if !ok {
            bail!(
                "spec invalid: check {check:?} does not apply to {:?}",
                spec.protocol
            );
        }
    }
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
    }
    Ok(())
}

fn override_stop(stop: &StopSpec, spec: &ExperimentSpec) -> StopSpec {
    let mut stop = stop.clone();
    match &mut stop {
        StopSpec::MaxSteps { n } => {
            if let Some(m) = spec.max_steps {
                *n = m;
            }
        }
        StopSpec::Quiescence { window, max_steps } => {
            if let Some(w) = spec.window {
                *window = w;
            }
            if let Some(m) = spec.max_steps {
                *max_steps = m;
            }
        }
        StopSpec::Converged {
            window_factor,
            max_steps,
        } => {
            if let Some(w) = spec.window {
                *window_factor = w;
            }
            if let Some(m) = spec.max_steps {
                *max_steps = m;
            }
        }
    }
    stop
}

type PredicateHook<'a, S> = Box<dyn Fn(&[S]) -> bool + Send + Sync + 'a>;
type OutputsHook<'a, S> = Box<dyn Fn(&[S]) -> serde_json::Value + Send + Sync + 'a>;
type ViolationsHook<'a, S> =
    Box<dyn Fn(&Trace<S>, &[S], &BTreeSet<Check>) -> u64 + Send + Sync + 'a>;

/// Per-protocol plumbing for the generic sweep: the convergence predicate for
/// `converged` stops, the summary `outputs` value, and the violation counter
/// over the run's snapshots and final configuration.
struct Hooks<'a, S> {
    predicate: PredicateHook<'a, S>,
    outputs: OutputsHook<'a, S>,
    violations: ViolationsHook<'a, S>,
}

fn sweep<P>(
    spec: &ExperimentSpec,
    instance: &Instance,
    scheduler: &SchedulerSpec,
    stop: &StopSpec,
    protocol: &P,
    hooks: Hooks<'_, P::State>,
) -> Result<Vec<RunSummary>>
where
    P: Protocol + Sync,
    P::State: Send + Sync,
{
    let wants_records = spec.out_dir.is_some() || spec.checks.contains(&Check::FairnessAudit);
    let cadence = match spec.snapshots {
        Some(0) => Cadence::None,
        Some(s) => Cadence::Every(s),
        None => Cadence::Default,
    };
    let opts = RunOptions {
        snapshot_cadence: cadence,
        record_interactions: wants_records,
    };

    let rows: Vec<Result<RunSummary>> = spec
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut sched = Scheduler::new(&scheduler.with_seed(seed), &instance.graph)
                .map_err(|e| anyhow::anyhow!("scheduler: {e}"))?;
            let stop_condition: StopCondition<'_, P::State> =
                stop.to_condition(|states: &[P::State]| (hooks.predicate)(states));
            let outcome = run(protocol, instance, &mut sched, stop_condition, &opts);

            let mut violations =
                (hooks.violations)(&outcome.trace, &outcome.final_config.states, &spec.checks);
            if outcome.trace.step_cap_exceeded {
                violations += 1;
            }
            if spec.checks.contains(&Check::FairnessAudit) {
                let report =
                    audit_fairness(&outcome.trace.records, &instance.graph, outcome.trace.steps)
                        .map_err(|e| anyhow::anyhow!("fairness: {e}"))?;
                violations += report.absent.len() as u64;
            }
            if let Some(dir) = &spec.out_dir {
                let path = dir.join(format!("trace_seed{seed}.jsonl"));
                let file = std::fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                write_trace(std::io::BufWriter::new(file), &outcome.trace)
                    .map_err(|e| anyhow::anyhow!("writing trace: {e}"))?;
            }
            Ok(RunSummary {
                seed,
                converged_step: outcome.trace.convergence_step,
                outputs: (hooks.outputs)(&outcome.final_config.states),
                violations,
            })
        })
        .collect();
    rows.into_iter().collect()
}
