use std::collections::{BTreeMap, BTreeSet};

use crate::engine::Color;
use crate::ordering::{label_bits, OrderingState};

/// One extracted root-headed chain: the maximal prefix of confirmed links
/// (successor-color leader unique, predecessor and label mutually matching)
/// starting at a root.
#[derive(Clone, Debug)]
pub struct LinkedListReport {
    pub agents: Vec<u32>,
    pub colors: Vec<Color>,
    /// The chain ends on an agent whose forward pointer rests on its own
    /// color, i.e. the tail is closed and the whole chain is frozen.
    pub proper_tail: bool,
    /// Local approximation of the real consistency notion (immutability of
    /// every member under any further activations, tail forward pointer
    /// exempt): the chain counts as consistent once the snapshot has a unique
    /// leader per present color and a unique root, which is exactly when no
    /// rule can touch a confirmed member anymore. The reachability tools
    /// check the exact notion on small instances and must agree.
    pub consistent: bool,
}

/// Snapshot report of the ordering layer.
#[derive(Clone, Debug)]
pub struct OrderingReport {
    pub leaders_per_color: BTreeMap<Color, Vec<u32>>,
    pub root_count: usize,
    pub lists: Vec<LinkedListReport>,
    pub good_agents: Vec<u32>,
    /// Color-to-label assignment read off the single consistent list, when
    /// the snapshot has converged far enough to define one.
    pub label_map: Option<BTreeMap<Color, u16>>,
    /// Some cycle of pre-links among non-root list members is label-consistent
    /// all the way around. The label arithmetic makes this unreachable once
    /// every color has a unique leader; the monitors treat it as a violation.
    pub d_consistent_cycle: bool,
    /// Converged: one leader per present color, a single root, one consistent
    /// list spanning the present colors with labels 0..k'-1 in order, and
    /// every follower carrying its color's label.
    pub verdict: bool,
}

/// Inspects a configuration of ordering states.
pub fn check_ordering_snapshot(states: &[OrderingState], k: u16) -> OrderingReport {
    let m = label_bits(k);
    let modulus = 1u32 << m;
    let inc = |d: u16| (((d as u32) + 1) & (modulus - 1)) as u16;

    let mut leaders_per_color: BTreeMap<Color, Vec<u32>> = BTreeMap::new();
    let mut present: BTreeSet<Color> = BTreeSet::new();
    let mut roots = Vec::new();
    for (id, s) in states.iter().enumerate() {
        present.insert(s.c);
        if s.l {
            leaders_per_color.entry(s.c).or_default().push(id as u32);
        }
        if s.is_root() {
            roots.push(id as u32);
        }
    }

    let unique_leader = |color: Color| -> Option<u32> {
        match leaders_per_color.get(&color).map(|v| v.as_slice()) {
            Some([only]) => Some(*only),
            _ => None,
        }
    };
    let one_leader_each = present.iter().all(|c| unique_leader(*c).is_some());
    // Confirmed chain members can only mutate while leader duels or root
    // duels are still possible.
    let settled_leadership = one_leader_each && roots.len() == 1;

    // Walk suc-links from every root, keeping the confirmed prefix.
    let mut lists = Vec::new();
    for &root in &roots {
        let mut agents = vec![root];
        let mut colors = vec![states[root as usize].c];
        let mut seen: BTreeSet<u32> = BTreeSet::from([root]);
        let mut cur = root;
        let proper_tail = loop {
            let cur_state = &states[cur as usize];
            if cur_state.suc == cur_state.c {
                break true;
            }
            let Some(next) = unique_leader(cur_state.suc) else {
                break false; // ambiguous or missing target: chain ends here
            };
            let next_state = &states[next as usize];
            if next_state.pre != cur_state.c
                || next_state.d != inc(cur_state.d)
                || !seen.insert(next)
            {
                break false;
            }
            agents.push(next);
            colors.push(next_state.c);
            cur = next;
        };
        lists.push(LinkedListReport {
            agents,
            colors,
            proper_tail,
            consistent: settled_leadership,
        });
    }

    // Good agents: isolated, following nothing or a consistent-list member.
    let consistent_colors: BTreeSet<Color> = lists
        .iter()
        .filter(|l| l.consistent)
        .flat_map(|l| l.colors.iter().copied())
        .collect();
    let good_agents: Vec<u32> = states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_isolated() && (s.suc == s.c || consistent_colors.contains(&s.suc)))
        .map(|(id, _)| id as u32)
        .collect();

    let d_consistent_cycle = has_label_consistent_pre_cycle(states, &leaders_per_color, inc);

    let mut verdict = settled_leadership && lists.len() == 1;
    let mut label_map = None;
    if verdict {
        let list = &lists[0];
        verdict &= list.proper_tail
            && list.colors.len() == present.len()
            && list
                .agents
                .iter()
                .enumerate()
                .all(|(pos, &id)| states[id as usize].d == pos as u16);
        if verdict {
            let map: BTreeMap<Color, u16> = list
                .agents
                .iter()
                .map(|&id| (states[id as usize].c, states[id as usize].d))
                .collect();
            // Followers carry their color's label.
            verdict &= states
                .iter()
                .filter(|s| !s.l)
                .all(|s| map.get(&s.c) == Some(&s.d));
            if verdict {
                label_map = Some(map);
            }
        }
    }

    OrderingReport {
        leaders_per_color,
        root_count: roots.len(),
        lists,
        good_agents,
        label_map,
        d_consistent_cycle,
        verdict,
    }
}

/// Allocation-light equivalent of [`check_ordering_snapshot`]'s verdict, for
/// use as a per-step stop predicate. Kept independent of the report builder
/// so the two act as cross-checks; the test suites assert they agree.
pub fn ordering_converged(states: &[OrderingState], k: u16) -> bool {
    let m = label_bits(k);
    let mask = (1u32 << m) - 1;
    let inc = |d: u16| (((d as u32) + 1) & mask) as u16;
    let ku = k as usize;

    let mut leader = vec![u32::MAX; ku];
    let mut present = vec![false; ku];
    let mut root = usize::MAX;
    for (id, s) in states.iter().enumerate() {
        let c = s.c.0 as usize;
        if c >= ku {
            return false;
        }
        present[c] = true;
        if s.l {
            if leader[c] != u32::MAX {
                return false; // two leaders of one color
            }
            leader[c] = id as u32;
        }
        if s.is_root() {
            if root != usize::MAX {
                return false; // two roots
            }
            root = id;
        }
    }
    if root == usize::MAX {
        return false;
    }
    let k_present = present.iter().filter(|&&p| p).count();
    if (0..ku).any(|c| present[c] && leader[c] == u32::MAX) {
        return false;
    }

    // Walk the single list. Positions are labels: k' <= 2^m, so no wrap.
    if states[root].d != 0 {
        return false;
    }
    let mut cur = root;
    let mut length = 1usize;
    while states[cur].suc != states[cur].c {
        let next_color = states[cur].suc.0 as usize;
        if next_color >= ku || !present[next_color] {
            return false;
        }
        let next = leader[next_color] as usize;
        let ns = &states[next];
        if ns.pre != states[cur].c || ns.d != inc(states[cur].d) {
            return false;
        }
        length += 1;
        if length > k_present {
            return false;
        }
        cur = next;
    }
    if length != k_present {
        return false;
    }
    states
        .iter()
        .all(|s| s.l || s.d == states[leader[s.c.0 as usize] as usize].d)
}

/// Looks for a cycle among on-list non-root leaders in which every pre-link
/// is confirmed by matching labels (`d = d_pre + 1` around the whole cycle).
fn has_label_consistent_pre_cycle(
    states: &[OrderingState],
    leaders_per_color: &BTreeMap<Color, Vec<u32>>,
    inc: impl Fn(u16) -> u16,
) -> bool {
    let nodes: Vec<u32> = states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_on_list() && !s.is_root())
        .map(|(id, _)| id as u32)
        .collect();
    // Edge x -> y when y could be x's predecessor: y is an on-list non-root
    // leader of color pre_x with d_x = d_y + 1.
    let succs = |x: u32| -> Vec<u32> {
        let sx = &states[x as usize];
        leaders_per_color
            .get(&sx.pre)
            .into_iter()
            .flatten()
            .copied()
            .filter(|&y| {
                let sy = &states[y as usize];
                sy.is_on_list() && !sy.is_root() && sx.d == inc(sy.d)
            })
            .collect()
    };
    // DFS cycle detection over at most n nodes.
    let mut state: BTreeMap<u32, u8> = BTreeMap::new(); // 1 = in progress, 2 = done
    fn dfs(x: u32, succs: &dyn Fn(u32) -> Vec<u32>, state: &mut BTreeMap<u32, u8>) -> bool {
        state.insert(x, 1);
        for y in succs(x) {
            match state.get(&y) {
                Some(1) => return true,
                Some(_) => {}
                None => {
                    if dfs(y, succs, state) {
                        return true;
                    }
                }
            }
        }
        state.insert(x, 2);
        false
    }
    let succs_ref: &dyn Fn(u32) -> Vec<u32> = &succs;
    nodes
        .iter()
        .any(|&x| !state.contains_key(&x) && dfs(x, succs_ref, &mut state))
}
