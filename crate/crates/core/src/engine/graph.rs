use std::collections::VecDeque;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::run::StopSpec;
use super::scheduler::SchedulerSpec;

/// An input value. Agents can only test colors for equality; none of the
/// protocol rules may consult the numeric ordering of the underlying index.
/// (The `Ord` impl exists solely so analysis code can key maps by color.)
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(pub u16);

impl std::fmt::Display for Color {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected connected interaction graph over agents `0..n`.
#[derive(Clone, Debug)]
pub struct InteractionGraph {
    n: u32,
    /// Normalized undirected edges, `u < v`, sorted and deduplicated.
    edges: Vec<(u32, u32)>,
    /// Both orientations of every edge, lexicographically sorted. This is the
    /// activation alphabet the schedulers draw from.
    directed: Vec<(u32, u32)>,
    /// Sorted adjacency lists.
    adj: Vec<Vec<u32>>,
}

impl InteractionGraph {
    pub fn new(n: u32, raw_edges: &[(u32, u32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one agent".into()));
        }
        let mut edges = Vec::with_capacity(raw_edges.len());
        for &(a, b) in raw_edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at agent {a}")));
            }
            for id in [a, b] {
                if id >= n {
                    return Err(Error::IdOutOfRange { id, n });
                }
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        if edges.len() != before {
            return Err(Error::InvalidGraph("duplicate edge".into()));
        }

        let mut adj = vec![Vec::new(); n as usize];
        let mut directed = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
            directed.push((u, v));
            directed.push((v, u));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        directed.sort_unstable();

        let graph = Self {
            n,
            edges,
            directed,
            adj,
        };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    pub fn complete(n: u32) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        Self::new(n, &edges)
    }

    pub fn path(n: u32) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::new(n, &edges)
    }

    pub fn cycle(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph("cycle needs at least 3 agents".into()));
        }
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        edges.push((n - 1, 0));
        Self::new(n, &edges)
    }

    /// G(n, p) conditioned on connectivity: edges are sampled from a ChaCha8
    /// stream keyed by `seed`; disconnected samples retry with a shifted key
    /// so the result stays a pure function of (n, p, seed).
    pub fn erdos_renyi(n: u32, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidGraph(format!(
                "edge probability {p} not in [0, 1]"
            )));
        }
        let threshold = (p * u64::MAX as f64) as u64;
        for attempt in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            );
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.next_u64() <= threshold {
                        edges.push((u, v));
                    }
                }
            }
            if let Ok(graph) = Self::new(n, &edges) {
                return Ok(graph);
            }
        }
        Err(Error::InvalidGraph(format!(
            "no connected G({n}, {p}) sample within 1000 attempts of seed {seed}"
        )))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn directed_edges(&self) -> &[(u32, u32)] {
        &self.directed
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adj[u as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        u != v
            && (u.max(v) as usize) < self.adj.len()
            && self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n as u64;
        self.edges.len() as u64 == n * (n - 1) / 2
    }

    fn is_connected(&self) -> bool {
        let n = self.n as usize;
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }

    /// Shortest path from `u` to `v` (BFS, lowest-id tie-break).
    pub fn path_between(&self, u: u32, v: u32) -> Result<Vec<u32>> {
        for id in [u, v] {
            if id >= self.n {
                return Err(Error::IdOutOfRange { id, n: self.n });
            }
        }
        if u == v {
            return Err(Error::SameAgent(u));
        }
        let mut parent = vec![u32::MAX; self.n as usize];
        let mut queue = VecDeque::from([u]);
        parent[u as usize] = u;
        while let Some(x) = queue.pop_front() {
            if x == v {
                break;
            }
            for &y in &self.adj[x as usize] {
                if parent[y as usize] == u32::MAX {
                    parent[y as usize] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != u {
            cur = parent[cur as usize];
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    /// The activation sequence that walks one chosen `u`-`v` path forward and
    /// then replays the same edges in reverse order. Under the state-swapping
    /// general-graph protocol this makes the pair {u, v} interact at least
    /// once and returns both states to their home nodes.
    pub fn path_activation_sequence(&self, u: u32, v: u32) -> Result<Vec<(u32, u32)>> {
        let path = self.path_between(u, v)?;
        let forward: Vec<(u32, u32)> = path.windows(2).map(|w| (w[0], w[1])).collect();
        let mut seq = forward.clone();
        seq.extend(forward.into_iter().rev());
        Ok(seq)
    }
}

/// Graph constructors as they appear in instance files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphSpec {
    Complete,
    Path,
    Cycle,
    Er { p: f64, seed: u64 },
    Edges { edges: Vec<(u32, u32)> },
}

impl GraphSpec {
    pub fn build(&self, n: u32) -> Result<InteractionGraph> {
        match self {
            GraphSpec::Complete => InteractionGraph::complete(n),
            GraphSpec::Path => InteractionGraph::path(n),
            GraphSpec::Cycle => InteractionGraph::cycle(n),
            GraphSpec::Er { p, seed } => InteractionGraph::erdos_renyi(n, *p, *seed),
            GraphSpec::Edges { edges } => InteractionGraph::new(n, edges),
        }
    }
}

/// An interaction graph together with the initial color assignment.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: InteractionGraph,
    pub k: u16,
    pub colors: Vec<Color>,
}

impl Instance {
    pub fn new(graph: InteractionGraph, k: u16, colors: Vec<Color>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("k must be at least 1".into()));
        }
        if colors.len() != graph.n() as usize {
            return Err(Error::InvalidInstance(format!(
                "{} colors for {} agents",
                colors.len(),
                graph.n()
            )));
        }
        if let Some(c) = colors.iter().find(|c| c.0 >= k) {
            return Err(Error::InvalidInstance(format!(
                "color {} out of range for k={k}",
                c.0
            )));
        }
        Ok(Self { graph, k, colors })
    }

    pub fn n(&self) -> u32 {
        self.graph.n()
    }

    /// The configuration every run starts from.
    pub fn initial_states<P: super::Protocol>(&self, protocol: &P) -> Vec<P::State> {
        self.colors
            .iter()
            .map(|&c| protocol.init_state(c))
            .collect()
    }
}

/// On-disk instance format. Field order is fixed: n, k, colors, graph,
/// scheduler, stop. Integers are decimal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: u32,
    pub k: u16,
    pub colors: Vec<u16>,
    pub graph: GraphSpec,
    pub scheduler: SchedulerSpec,
    pub stop: StopSpec,
}

impl InstanceSpec {
    pub fn build_instance(&self) -> Result<Instance> {
        let graph = self.graph.build(self.n)?;
        Instance::new(
            graph,
            self.k,
            self.colors.iter().map(|&c| Color(c)).collect(),
        )
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_path(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
