use std::collections::HashMap;
use std::collections::VecDeque;

use crate::engine::{states_canonical_bytes, Instance, InteractionGraph, Protocol};
use crate::error::{Error, Result};

/// Breadth-first closure of a configuration under every directed edge
/// application, deduplicated by canonical serialization (exact: the canonical
/// bytes are the configuration, so collisions are impossible by
/// construction).
pub struct ReachableSet<S> {
    /// Configurations in BFS discovery order.
    pub configs: Vec<Vec<S>>,
    /// Canonical bytes -> index into `configs`.
    pub index: HashMap<Vec<u8>, usize>,
    /// One-step successors per configuration (deduplicated, sorted).
    pub successors: Vec<Vec<usize>>,
    /// Whether the closure was fully explored within the cap.
    pub complete: bool,
    /// Discovered configurations per BFS depth.
    pub frontier_sizes: Vec<usize>,
}

impl<S> ReachableSet<S> {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

pub fn reachable_set<P: Protocol>(
    protocol: &P,
    graph: &InteractionGraph,
    start: &[P::State],
    cap: usize,
) -> ReachableSet<P::State> {
    assert!(cap > 0, "exploration cap must be positive");
    let mut configs = vec![start.to_vec()];
    let mut index = HashMap::new();
    index.insert(states_canonical_bytes(start), 0usize);
    let mut successors: Vec<Vec<usize>> = Vec::new();
    let mut complete = true;
    let mut frontier_sizes = vec![1usize];

    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut depth_marker = 0usize; // last id of the current depth
    let mut next_frontier = 0usize;

    while let Some(id) = queue.pop_front() {
        let mut succs = Vec::with_capacity(graph.directed_edges().len());
        for &(u, v) in graph.directed_edges() {
            let config = &configs[id];
            let (a, b) = protocol.apply(&config[u as usize], &config[v as usize]);
            if a == config[u as usize] && b == config[v as usize] {
                succs.push(id);
                continue;
            }
            let mut next = config.clone();
            next[u as usize] = a;
            next[v as usize] = b;
            let bytes = states_canonical_bytes(&next);
            match index.get(&bytes) {
                Some(&existing) => succs.push(existing),
                None => {
                    if configs.len() >= cap {
                        complete = false;
                        continue;
                    }
                    let new_id = configs.len();
                    index.insert(bytes, new_id);
                    configs.push(next);
                    succs.push(new_id);
                    queue.push_back(new_id);
                    next_frontier += 1;
                }
            }
        }
        succs.sort_unstable();
        succs.dedup();
        successors.push(succs);
        if id == depth_marker {
            if next_frontier > 0 {
                frontier_sizes.push(next_frontier);
            }
            depth_marker = configs.len() - 1;
            next_frontier = 0;
        }
    }
    ReachableSet {
        configs,
        index,
        successors,
        complete,
        frontier_sizes,
    }
}

/// Outcome of the stabilization check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertificateVerdict {
    /// From every reachable configuration some locked configuration is
    /// reachable, where locked means every configuration reachable from it
    /// has correct outputs. Under a globally fair scheduler this is exactly
    /// "every execution is eventually always correct".
    Certified,
    /// Witness configuration from which no locked configuration is reachable.
    Refuted { config_id: usize },
    /// The closure hit the exploration cap.
    Inconclusive,
}

/// Exhaustively certifies eventual stabilization to correct outputs.
pub fn stabilization_certificate<P: Protocol>(
    protocol: &P,
    graph: &InteractionGraph,
    start: &[P::State],
    cap: usize,
    correct_outputs: impl Fn(&[P::State]) -> bool,
) -> (CertificateVerdict, ReachableSet<P::State>) {
    let reach = reachable_set(protocol, graph, start, cap);
    if !reach.complete {
        return (CertificateVerdict::Inconclusive, reach);
    }
    let n = reach.len();
    let ok: Vec<bool> = reach.configs.iter().map(|c| correct_outputs(c)).collect();

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (id, succs) in reach.successors.iter().enumerate() {
        for &s in succs {
            preds[s].push(id);
        }
    }
    let backward_closure = |seeds: Vec<usize>| -> Vec<bool> {
        let mut hit = vec![false; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in seeds {
            if !hit[s] {
                hit[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &p in &preds[x] {
                if !hit[p] {
                    hit[p] = true;
                    queue.push_back(p);
                }
            }
        }
        hit
    };

    // A configuration is tainted if some incorrect configuration is reachable
    // from it; locked configurations are the untainted ones.
    let tainted = backward_closure((0..n).filter(|&i| !ok[i]).collect());
    let locked: Vec<usize> = (0..n).filter(|&i| !tainted[i]).collect();
    if locked.is_empty() {
        return (CertificateVerdict::Refuted { config_id: 0 }, reach);
    }
    let can_stabilize = backward_closure(locked);
    match (0..n).find(|&i| !can_stabilize[i]) {
        None => (CertificateVerdict::Certified, reach),
        Some(bad) => (CertificateVerdict::Refuted { config_id: bad }, reach),
    }
}

/// Result of the indistinguishability search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommonReachOutcome<S> {
    /// A configuration reachable from both initial configurations. Any
    /// protocol whose two instances have different plurality colors but a
    /// common reachable configuration must fail on one of them.
    Witness(Vec<S>),
    /// Both closures are complete and disjoint.
    Disjoint,
    /// At least one closure was capped and no witness surfaced.
    Inconclusive,
}

/// Searches for a configuration reachable from both instances' initial
/// configurations. The instances must agree on population size and color
/// range (they share the protocol's state space); their graphs may differ.
pub fn common_reachable<P: Protocol>(
    protocol: &P,
    instance_a: &Instance,
    instance_b: &Instance,
    cap: usize,
) -> Result<CommonReachOutcome<P::State>> {
    if instance_a.n() != instance_b.n() || instance_a.k != instance_b.k {
        return Err(Error::SpecInvalid(format!(
            "instances differ in shape: n {} vs {}, k {} vs {}",
            instance_a.n(),
            instance_b.n(),
            instance_a.k,
            instance_b.k
        )));
    }
    let reach_a = reachable_set(
        protocol,
        &instance_a.graph,
        &instance_a.initial_states(protocol),
        cap,
    );
    let reach_b = reachable_set(
        protocol,
        &instance_b.graph,
        &instance_b.initial_states(protocol),
        cap,
    );
    for config in &reach_a.configs {
        if reach_b.index.contains_key(&states_canonical_bytes(config)) {
            return Ok(CommonReachOutcome::Witness(config.clone()));
        }
    }
    if reach_a.complete && reach_b.complete {
        Ok(CommonReachOutcome::Disjoint)
    } else {
        Ok(CommonReachOutcome::Inconclusive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Color, Instance};
    use crate::plurality_core::{FourStateMajority, MajorityState, VoterProtocol};

    fn instance(colors: &[u16], k: u16) -> Instance {
        Instance::new(
            InteractionGraph::complete(colors.len() as u32).unwrap(),
            k,
            colors.iter().map(|&c| Color(c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn baseline_pair_closure_is_two_configs() {
        let inst = instance(&[0, 1], 2);
        let p = FourStateMajority;
        let reach = reachable_set(&p, &inst.graph, &inst.initial_states(&p), 100);
        assert!(reach.complete);
        assert_eq!(reach.len(), 2);
        use MajorityState::*;
        assert!(reach.configs.contains(&vec![StrongPlus, StrongMinus]));
        assert!(reach.configs.contains(&vec![WeakMinus, WeakMinus]));
    }

    #[test]
    fn single_agent_closure_is_a_singleton() {
        let inst = instance(&[0], 2);
        let p = FourStateMajority;
        let reach = reachable_set(&p, &inst.graph, &inst.initial_states(&p), 10);
        assert!(reach.complete);
        assert_eq!(reach.len(), 1);
    }

    #[test]
    fn closure_is_independent_of_the_cap_once_complete() {
        let inst = instance(&[0, 0, 1], 2);
        let p = FourStateMajority;
        let small = reachable_set(&p, &inst.graph, &inst.initial_states(&p), 1_000);
        let large = reachable_set(&p, &inst.graph, &inst.initial_states(&p), 100_000);
        assert!(small.complete && large.complete);
        assert_eq!(small.len(), large.len());
    }

    #[test]
    fn closure_is_independent_of_exploration_order() {
        // A depth-first explorer applying edges in reverse order must find
        // exactly the same configuration set.
        fn dfs_closure<P: Protocol>(
            protocol: &P,
            graph: &InteractionGraph,
            start: &[P::State],
        ) -> std::collections::HashSet<Vec<u8>> {
            let mut seen = std::collections::HashSet::new();
            let mut stack = vec![start.to_vec()];
            seen.insert(states_canonical_bytes(start));
            while let Some(config) = stack.pop() {
                for &(u, v) in graph.directed_edges().iter().rev() {
                    let (a, b) = protocol.apply(&config[u as usize], &config[v as usize]);
                    let mut next = config.clone();
                    next[u as usize] = a;
                    next[v as usize] = b;
                    if seen.insert(states_canonical_bytes(&next)) {
                        stack.push(next);
                    }
                }
            }
            seen
        }
        let inst = instance(&[0, 0, 1, 1], 2);
        let p = FourStateMajority;
        let start = inst.initial_states(&p);
        let bfs = reachable_set(&p, &inst.graph, &start, 1_000_000);
        assert!(bfs.complete);
        let bfs_set: std::collections::HashSet<Vec<u8>> = bfs.index.keys().cloned().collect();
        assert_eq!(bfs_set, dfs_closure(&p, &inst.graph, &start));
    }

    #[test]
    fn capped_exploration_reports_incomplete() {
        let inst = instance(&[0, 0, 1, 1, 0], 2);
        let p = FourStateMajority;
        let reach = reachable_set(&p, &inst.graph, &inst.initial_states(&p), 3);
        assert!(!reach.complete);
        assert_eq!(reach.len(), 3);
    }

    #[test]
    fn baseline_majority_is_certified_on_a_small_census() {
        let inst = instance(&[0, 0, 0, 1, 1], 2);
        let p = FourStateMajority;
        let (verdict, _) = stabilization_certificate(
            &p,
            &inst.graph,
            &inst.initial_states(&p),
            1_000_000,
            |states| states.iter().all(|s| s.output() == Color(0)),
        );
        assert_eq!(verdict, CertificateVerdict::Certified);
    }

    #[test]
    fn voter_protocol_is_refuted() {
        let inst = instance(&[0, 0, 1], 2);
        let p = VoterProtocol;
        let (verdict, _) =
            stabilization_certificate(&p, &inst.graph, &inst.initial_states(&p), 1_000, |states| {
                states.iter().all(|&s| s == Color(0))
            });
        assert!(matches!(verdict, CertificateVerdict::Refuted { .. }));
    }

    #[test]
    fn identical_instances_share_their_initial_configuration() {
        let a = instance(&[0, 1, 0], 2);
        let b = instance(&[0, 1, 0], 2);
        let p = FourStateMajority;
        match common_reachable(&p, &a, &b, 10_000).unwrap() {
            CommonReachOutcome::Witness(w) => {
                assert_eq!(w, a.initial_states(&p));
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn baseline_closures_with_flipped_majorities_are_disjoint() {
        let a = instance(&[0, 0, 1], 2);
        let b = instance(&[0, 1, 1], 2);
        let p = FourStateMajority;
        assert_eq!(
            common_reachable(&p, &a, &b, 1_000_000).unwrap(),
            CommonReachOutcome::Disjoint
        );
    }

    #[test]
    fn voter_instances_with_flipped_majorities_collide() {
        let a = instance(&[0, 0, 1], 2);
        let b = instance(&[0, 1, 1], 2);
        assert!(matches!(
            common_reachable(&VoterProtocol, &a, &b, 1_000_000).unwrap(),
            CommonReachOutcome::Witness(_)
        ));
    }

    #[test]
    fn mismatched_instances_are_rejected() {
        let a = instance(&[0, 0, 1], 2);
        let b = instance(&[0, 1], 2);
        assert!(common_reachable(&FourStateMajority, &a, &b, 100).is_err());
    }
}
