use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::graph::InteractionGraph;
use super::run::InteractionRecord;

/// Per-directed-edge activation statistics over a finite trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeStats {
    pub edge: (u32, u32),
    pub count: u64,
    /// Longest stretch of steps without this edge, including the stretches
    /// before the first and after the last activation.
    pub max_gap: u64,
}

/// Finite-window weak-fairness report. Fairness proper quantifies over
/// infinite executions and is not decidable from a finite trace; this report
/// only states what the observed window shows, hence `finite_window`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FairnessReport {
    pub per_edge: Vec<EdgeStats>,
    pub absent: Vec<(u32, u32)>,
    pub total_steps: u64,
    pub finite_window: bool,
}

impl FairnessReport {
    pub fn all_edges_present(&self) -> bool {
        self.absent.is_empty()
    }
}

/// Counts activations and gaps per directed edge and flags edges the trace
/// never activated.
pub fn audit_fairness(
    records: &[InteractionRecord],
    graph: &InteractionGraph,
    total_steps: u64,
) -> Result<FairnessReport> {
    let mut stats: std::collections::BTreeMap<(u32, u32), (u64, u64, u64)> = graph
        .directed_edges()
        .iter()
        .map(|&e| (e, (0u64, 0u64, 0u64))) // (count, last_step, max_gap)
        .collect();
    for rec in records {
        if let Some((count, last, max_gap)) = stats.get_mut(&rec.edge) {
            *max_gap = (*max_gap).max(rec.step - *last);
            *last = rec.step;
            *count += 1;
        }
    }
    let mut per_edge = Vec::with_capacity(stats.len());
    let mut absent = Vec::new();
    for (edge, (count, last, max_gap)) in stats {
        if count == 0 {
            absent.push(edge);
        }
        per_edge.push(EdgeStats {
            edge,
            count,
            max_gap: max_gap.max(total_steps - last),
        });
    }
    Ok(FairnessReport {
        per_edge,
        absent,
        total_steps,
        finite_window: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{
        run, Color, Instance, RunOptions, Scheduler, SchedulerSpec, StopCondition,
    };
    use crate::ordering::OrderingProtocol;

    fn k4_instance() -> Instance {
        Instance::new(
            InteractionGraph::complete(4).unwrap(),
            4,
            vec![Color(0), Color(1), Color(2), Color(3)],
        )
        .unwrap()
    }

    #[test]
    fn round_robin_cycle_has_full_coverage_and_bounded_gaps() {
        let instance = k4_instance();
        let protocol = OrderingProtocol::new(4);
        let cycle = instance.graph.directed_edges().len() as u64;
        let mut sched = Scheduler::new(&SchedulerSpec::RoundRobin, &instance.graph).unwrap();
        let outcome = run(
            &protocol,
            &instance,
            &mut sched,
            StopCondition::MaxSteps(3 * cycle),
            &RunOptions::default(),
        );
        let report =
            audit_fairness(&outcome.trace.records, &instance.graph, outcome.trace.steps).unwrap();
        assert!(report.all_edges_present());
        assert!(report
            .per_edge
            .iter()
            .all(|e| e.count >= 1 && e.max_gap <= cycle));
    }

    #[test]
    fn scripted_single_edge_flags_the_rest() {
        let instance = k4_instance();
        let protocol = OrderingProtocol::new(4);
        let mut sched = Scheduler::new(
            &SchedulerSpec::Scripted {
                script: vec![(0, 1), (0, 1)],
                cycle: false,
            },
            &instance.graph,
        )
        .unwrap();
        let outcome = run(
            &protocol,
            &instance,
            &mut sched,
            StopCondition::MaxSteps(100),
            &RunOptions::default(),
        );
        let report =
            audit_fairness(&outcome.trace.records, &instance.graph, outcome.trace.steps).unwrap();
        assert_eq!(
            report.absent.len(),
            instance.graph.directed_edges().len() - 1
        );
        assert!(!report.absent.contains(&(0, 1)));
    }

    #[test]
    fn uniform_ten_thousand_steps_covers_k4() {
        let instance = k4_instance();
        let protocol = OrderingProtocol::new(4);
        for seed in 0..5 {
            let mut sched =
                Scheduler::new(&SchedulerSpec::UniformRandom { seed }, &instance.graph).unwrap();
            let outcome = run(
                &protocol,
                &instance,
                &mut sched,
                StopCondition::MaxSteps(10_000),
                &RunOptions::default(),
            );
            let report =
                audit_fairness(&outcome.trace.records, &instance.graph, outcome.trace.steps)
                    .unwrap();
            assert!(report.all_edges_present(), "seed {seed} missed an edge");
        }
    }
}
