//! Constructive scheduler over an unscheduled shortest path set.
//!
//! Starts and goals are paired by a minimum-distance assignment and joined by
//! shortest paths. Orienting every path from start to goal gives an acyclic
//! edge set in which some goal lies on a single path. Paths are then peeled
//! off one at a time (shortest route from any remaining start to such a goal)
//! and agent `i` of that order departs at time `i`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::graph::{validate_plan, Graph, Instance, Mode, Path, Plan, VertexId};

use super::assignment::min_distance_assignment;
use super::{horizon_bound, PlannerError, SolveResult};

/// Unscheduled paths `q_1..q_n`, each oriented from its head (a start) to its
/// tail (a goal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedPathSet {
    pub paths: Vec<Vec<VertexId>>,
}

impl OrientedPathSet {
    pub fn new(paths: Vec<Vec<VertexId>>) -> Self {
        Self { paths }
    }

    pub fn head(&self, i: usize) -> VertexId {
        self.paths[i][0]
    }

    pub fn tail(&self, i: usize) -> VertexId {
        *self.paths[i].last().unwrap()
    }

    pub fn len(&self, i: usize) -> usize {
        self.paths[i].len() - 1
    }

    pub fn total_length(&self) -> usize {
        (0..self.paths.len()).map(|i| self.len(i)).sum()
    }

    /// Directed edge multiplicities induced by the paths.
    pub fn oriented_edges(&self) -> BTreeMap<(VertexId, VertexId), usize> {
        let mut out = BTreeMap::new();
        for p in &self.paths {
            for w in p.windows(2) {
                *out.entry((w[0], w[1])).or_insert(0) += 1;
            }
        }
        out
    }

    /// Edges used in both directions, as `(u, v)` with `u < v`.
    pub fn bidirectional_edges(&self) -> Vec<(VertexId, VertexId)> {
        let edges = self.oriented_edges();
        edges
            .keys()
            .filter(|&&(u, v)| u < v && edges.contains_key(&(v, u)))
            .copied()
            .collect()
    }

    /// A directed cycle in the oriented edge set, as its vertex sequence.
    pub fn find_directed_cycle(&self) -> Option<Vec<VertexId>> {
        let mut succ: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for &(u, v) in self.oriented_edges().keys() {
            succ.entry(u).or_default().push(v);
        }
        // 0 = unvisited, 1 = on stack, 2 = finished
        let mut state: HashMap<VertexId, u8> = HashMap::new();
        let roots: Vec<VertexId> = succ.keys().copied().collect();
        for root in roots {
            if state.get(&root).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
            state.insert(root, 1);
            while let Some(&mut (u, ref mut idx)) = stack.last_mut() {
                let next = succ.get(&u).and_then(|s| s.get(*idx)).copied();
                *idx += 1;
                match next {
                    Some(w) => match state.get(&w).copied().unwrap_or(0) {
                        0 => {
                            state.insert(w, 1);
                            stack.push((w, 0));
                        }
                        1 => {
                            let from = stack.iter().position(|&(x, _)| x == w).unwrap();
                            return Some(stack[from..].iter().map(|&(x, _)| x).collect());
                        }
                        _ => {}
                    },
                    None => {
                        state.insert(u, 2);
                        stack.pop();
                    }
                }
            }
        }
        None
    }

    /// Goals (tails) lying on exactly one path of the set.
    pub fn standalone_goals(&self) -> Vec<VertexId> {
        let mut on_paths: HashMap<VertexId, usize> = HashMap::new();
        for p in &self.paths {
            let unique: BTreeSet<VertexId> = p.iter().copied().collect();
            for v in unique {
                *on_paths.entry(v).or_insert(0) += 1;
            }
        }
        let mut out: Vec<VertexId> = (0..self.paths.len())
            .map(|i| self.tail(i))
            .filter(|g| on_paths.get(g) == Some(&1))
            .collect();
        out.sort_unstable();
        out
    }

    /// Distinct heads in the starts, distinct tails in the goals, every path
    /// a walk on `graph` of minimum length between its endpoints.
    pub fn is_shortest_pairing(&self, inst: &Instance) -> bool {
        let heads: BTreeSet<_> = (0..self.paths.len()).map(|i| self.head(i)).collect();
        let tails: BTreeSet<_> = (0..self.paths.len()).map(|i| self.tail(i)).collect();
        let starts: BTreeSet<_> = inst.starts.iter().copied().collect();
        let goals: BTreeSet<_> = inst.goals.iter().copied().collect();
        if heads != starts || tails != goals || self.paths.len() != inst.agent_count() {
            return false;
        }
        self.paths.iter().all(|p| {
            p.windows(2).all(|w| inst.graph.has_edge(w[0], w[1]))
                && inst.graph.distances_from(p[0]).unwrap()[*p.last().unwrap()] == Some(p.len() - 1)
        })
    }

    fn swap_tails_at(&mut self, i: usize, j: usize, at: VertexId) {
        let pi = self.paths[i]
            .iter()
            .position(|&x| x == at)
            .expect("shared vertex");
        let pj = self.paths[j]
            .iter()
            .position(|&x| x == at)
            .expect("shared vertex");
        let tail_i = self.paths[i].split_off(pi + 1);
        let tail_j = self.paths[j].split_off(pj + 1);
        self.paths[i].extend(tail_j);
        self.paths[j].extend(tail_i);
        shortcut_loops(&mut self.paths[i]);
        shortcut_loops(&mut self.paths[j]);
    }

    /// Removes opposite-direction uses of a shared edge by exchanging the
    /// tails of the two paths involved; each exchange shortens the set by at
    /// least two. Returns the number of exchanges.
    pub fn repair_opposite_edges(&mut self, cap: usize) -> Result<usize, PlannerError> {
        let mut swaps = 0;
        while let Some((u, v)) = self.bidirectional_edges().first().copied() {
            if swaps >= cap {
                return Err(PlannerError::SolverBug(
                    "opposite-edge repair did not converge".into(),
                ));
            }
            let uses = |a: VertexId, b: VertexId| {
                self.paths
                    .iter()
                    .position(|p| p.windows(2).any(|w| w[0] == a && w[1] == b))
                    .unwrap()
            };
            let (i, j) = (uses(u, v), uses(v, u));
            let before = self.total_length();
            self.swap_tails_at(i, j, u);
            if self.total_length() + 2 > before {
                return Err(PlannerError::SolverBug(
                    "tail exchange did not shorten paths".into(),
                ));
            }
            swaps += 1;
        }
        Ok(swaps)
    }

    /// Eliminates directed cycles in the oriented edge set. One path is
    /// extended along the cycle by repeated tail exchanges until it closes on
    /// itself and the loop is cut out. Returns the number of exchanges.
    pub fn break_cycles(&mut self, cap: usize) -> Result<usize, PlannerError> {
        let mut swaps = 0;
        while let Some(cycle) = self.find_directed_cycle() {
            let k = cycle.len();
            let succ: HashMap<VertexId, VertexId> =
                (0..k).map(|a| (cycle[a], cycle[(a + 1) % k])).collect();
            let on_cycle = |p: &[VertexId], a: usize| succ.get(&p[a]) == Some(&p[a + 1]);
            let i = self
                .paths
                .iter()
                .position(|p| (0..p.len() - 1).any(|a| on_cycle(p, a)))
                .expect("cycle edges come from paths");
            loop {
                if swaps >= cap {
                    return Err(PlannerError::SolverBug(
                        "cycle repair did not converge".into(),
                    ));
                }
                let p = &self.paths[i];
                let Some(first) = (0..p.len() - 1).find(|&a| on_cycle(p, a)) else {
                    break;
                };
                let mut end = first + 1;
                while end + 1 < p.len() && on_cycle(p, end) {
                    end += 1;
                }
                let v = p[end];
                let next = succ[&v];
                let j = self
                    .paths
                    .iter()
                    .enumerate()
                    .position(|(idx, q)| {
                        idx != i && q.windows(2).any(|w| w[0] == v && w[1] == next)
                    })
                    .expect("every cycle edge lies on some path");
                let before = self.total_length();
                let before_i = self.paths[i].len();
                self.swap_tails_at(i, j, v);
                swaps += 1;
                if self.total_length() > before {
                    return Err(PlannerError::SolverBug(
                        "cycle exchange lengthened paths".into(),
                    ));
                }
                if self.total_length() < before || self.paths[i].len() < before_i {
                    break;
                }
            }
        }
        Ok(swaps)
    }
}

/// Cuts out every closed sub-walk, leaving a simple path.
pub(crate) fn shortcut_loops(path: &mut Vec<VertexId>) {
    let mut out: Vec<VertexId> = Vec::with_capacity(path.len());
    let mut index: HashMap<VertexId, usize> = HashMap::new();
    for &v in path.iter() {
        if let Some(&pos) = index.get(&v) {
            for dropped in out.drain(pos + 1..) {
                index.remove(&dropped);
            }
        } else {
            index.insert(v, out.len());
            out.push(v);
        }
    }
    *path = out;
}

/// One peel-off step of the scheduler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionStep {
    /// Goals lying on exactly one remaining path before this step.
    pub standalone_goals: Vec<VertexId>,
    /// The path assigned to the agent departing at this step.
    pub path: Vec<VertexId>,
}

#[derive(Debug, Clone)]
pub struct DagSchedule {
    pub result: SolveResult,
    /// Paths in departure order.
    pub path_set: OrientedPathSet,
    pub steps: Vec<ExtractionStep>,
    /// Total length of the starting path set (the assignment bound).
    pub assignment_total: usize,
}

/// Orders `set` so that each path is a shortest route, over the edges still
/// in use, from a remaining start to a goal that no other remaining path
/// touches.
///
/// The remaining paths are tracked as directed edge multiplicities, so the
/// peeled-off path need not be one of the input paths; the remaining
/// multiset always decomposes into paths with the same total length.
pub fn order_paths(
    set: &OrientedPathSet,
) -> Result<(OrientedPathSet, Vec<ExtractionStep>), PlannerError> {
    let mut mult: BTreeMap<VertexId, BTreeMap<VertexId, usize>> = BTreeMap::new();
    let mut pred: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for ((u, v), c) in set.oriented_edges() {
        mult.entry(u).or_default().insert(v, c);
        pred.entry(v).or_default().insert(u);
    }
    let mut heads: BTreeSet<VertexId> = (0..set.paths.len()).map(|i| set.head(i)).collect();
    let mut tails: BTreeSet<VertexId> = (0..set.paths.len()).map(|i| set.tail(i)).collect();
    let mut ordered = Vec::with_capacity(set.paths.len());
    let mut steps = Vec::with_capacity(set.paths.len());

    while !heads.is_empty() {
        let standalone: Vec<VertexId> = tails
            .iter()
            .copied()
            .filter(|g| mult.get(g).is_none_or(|m| m.is_empty()))
            .collect();
        if standalone.is_empty() {
            return Err(PlannerError::SolverBug(
                "no standalone goal among remaining paths".into(),
            ));
        }
        // Reverse BFS over edges still in use: hops to the nearest standalone goal.
        let mut hops: HashMap<VertexId, usize> = standalone.iter().map(|&g| (g, 0)).collect();
        let mut queue: VecDeque<VertexId> = standalone.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            let d = hops[&v];
            if let Some(ps) = pred.get(&v) {
                for &u in ps {
                    if let std::collections::hash_map::Entry::Vacant(slot) = hops.entry(u) {
                        slot.insert(d + 1);
                        queue.push_back(u);
                    }
                }
            }
        }
        let (best, head) = heads
            .iter()
            .filter_map(|h| hops.get(h).map(|&d| (d, *h)))
            .min()
            .ok_or_else(|| PlannerError::SolverBug("no start reaches a standalone goal".into()))?;
        let mut path = vec![head];
        let mut cur = head;
        for remaining in (0..best).rev() {
            let next = mult[&cur]
                .iter()
                .filter(|&(_, &c)| c > 0)
                .map(|(&w, _)| w)
                .find(|w| hops.get(w) == Some(&remaining))
                .expect("hop layering");
            path.push(next);
            cur = next;
        }
        for w in path.windows(2) {
            let m = mult.get_mut(&w[0]).unwrap();
            let c = m.get_mut(&w[1]).unwrap();
            *c -= 1;
            if *c == 0 {
                m.remove(&w[1]);
                pred.get_mut(&w[1]).unwrap().remove(&w[0]);
            }
        }
        heads.remove(&head);
        tails.remove(&cur);
        steps.push(ExtractionStep {
            standalone_goals: standalone,
            path: path.clone(),
        });
        ordered.push(path);
    }
    if mult.values().any(|m| !m.is_empty()) {
        return Err(PlannerError::SolverBug(
            "edges left over after ordering".into(),
        ));
    }
    Ok((OrientedPathSet::new(ordered), steps))
}

/// Initial path set: minimum-distance pairing joined by shortest paths.
pub fn initial_path_set(inst: &Instance) -> (OrientedPathSet, usize) {
    let assignment = min_distance_assignment(inst);
    let paths = assignment
        .pairs()
        .map(|(s, g)| {
            inst.graph
                .shortest_path(inst.starts[s], inst.goals[g])
                .expect("connected graph")
        })
        .collect();
    (OrientedPathSet::new(paths), assignment.total)
}

/// Sequential schedule over an ordered path set: the `i`-th path departs at
/// time `i` and moves without waiting.
pub fn schedule(inst: &Instance, ordered: &OrientedPathSet, horizon: usize) -> Plan {
    let mut paths = vec![None; inst.agent_count()];
    for (delay, q) in ordered.paths.iter().enumerate() {
        let agent = inst
            .starts
            .iter()
            .position(|&s| s == q[0])
            .expect("head is a start");
        let mut vertices = vec![q[0]; delay];
        vertices.extend_from_slice(q);
        paths[agent] = Some(Path::new(vertices).padded(horizon));
    }
    Plan::new(
        paths
            .into_iter()
            .map(|p| p.expect("every start scheduled"))
            .collect(),
    )
}

/// Builds the departure-ordered schedule for an unlabeled instance.
pub fn build_dag_schedule(inst: &Instance) -> Result<DagSchedule, PlannerError> {
    super::require_valid(inst)?;
    if inst.mode != Mode::Unlabeled {
        return Err(PlannerError::UnsupportedMode {
            mode: inst.mode,
            operation: "dag schedule",
        });
    }
    let (mut set, assignment_total) = initial_path_set(inst);
    let cap = inst.agent_count() * inst.graph.edge_count().max(1);
    set.repair_opposite_edges(cap)?;
    set.break_cycles(cap)?;
    if !set.bidirectional_edges().is_empty() || set.find_directed_cycle().is_some() {
        return Err(PlannerError::SolverBug(
            "oriented path set is not acyclic".into(),
        ));
    }
    if set.total_length() != assignment_total {
        return Err(PlannerError::SolverBug(format!(
            "repairs changed total length {} -> {}",
            assignment_total,
            set.total_length()
        )));
    }
    let (ordered, steps) = order_paths(&set)?;
    if ordered.total_length() != assignment_total {
        return Err(PlannerError::SolverBug(
            "ordering changed total length".into(),
        ));
    }
    let horizon = horizon_bound(inst);
    let plan = schedule(inst, &ordered, horizon);
    let verdict = validate_plan(inst, &plan).map_err(|e| PlannerError::SolverBug(e.to_string()))?;
    if let Some(v) = verdict.first() {
        return Err(PlannerError::SolverBug(format!(
            "scheduled plan invalid: {v}"
        )));
    }
    let result = SolveResult {
        objective_value: plan.total_distance(),
        horizon_used: horizon,
        certificate: Some(assignment_total),
        plan,
    };
    Ok(DagSchedule {
        result,
        path_set: ordered,
        steps,
        assignment_total,
    })
}

/// Checks that `graph` contains every step of every path.
pub fn paths_on_graph(graph: &Graph, set: &OrientedPathSet) -> bool {
    set.paths
        .iter()
        .all(|p| p.windows(2).all(|w| graph.has_edge(w[0], w[1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::two_star;

    #[test]
    fn shortcut_removes_loops() {
        let mut p = vec![1, 2, 3, 2, 4];
        shortcut_loops(&mut p);
        assert_eq!(p, vec![1, 2, 4]);
        let mut p = vec![1, 2, 3, 4, 1, 5];
        shortcut_loops(&mut p);
        assert_eq!(p, vec![1, 5]);
    }

    #[test]
    fn opposite_edges_are_exchanged() {
        // path 0-1-2-3; q1: 0->1->2->3, q2: 2->1 (uses 1-2 backwards)
        let mut set = OrientedPathSet::new(vec![vec![0, 1, 2, 3], vec![2, 1]]);
        assert_eq!(set.bidirectional_edges(), vec![(1, 2)]);
        let swaps = set.repair_opposite_edges(10).unwrap();
        assert_eq!(swaps, 1);
        assert!(set.bidirectional_edges().is_empty());
        assert_eq!(set.total_length(), 2);
        assert_eq!(set.paths, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn directed_cycle_is_broken() {
        // square a=0,b=1,c=2,d=3 with pendants s1=4 on a, g1=5 on c,
        // s2=6 on c, g2=7 on a
        let mut set = OrientedPathSet::new(vec![vec![4, 0, 1, 2, 5], vec![6, 2, 3, 0, 7]]);
        assert!(set.find_directed_cycle().is_some());
        set.break_cycles(20).unwrap();
        assert!(set.find_directed_cycle().is_none());
        assert_eq!(set.total_length(), 4);
        let mut ends: Vec<_> = (0..2).map(|i| (set.head(i), set.tail(i))).collect();
        ends.sort();
        assert_eq!(ends, vec![(4, 7), (6, 5)]);
    }

    #[test]
    fn two_star_schedule() {
        let inst = two_star(2, 3);
        let dag = build_dag_schedule(&inst).unwrap();
        assert_eq!(dag.result.plan.makespan(), 4);
        assert_eq!(dag.result.plan.total_distance(), 6);
        assert_eq!(dag.steps.len(), 2);
    }

    #[test]
    fn single_agent_has_no_delay() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let inst = Instance::new(g, vec![0], vec![3], Mode::Unlabeled);
        let dag = build_dag_schedule(&inst).unwrap();
        assert_eq!(dag.result.plan.paths[0].vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn standalone_goals_of_crossing_paths() {
        // q1 passes through q2's goal 2
        let set = OrientedPathSet::new(vec![vec![0, 2, 3], vec![1, 2]]);
        assert_eq!(set.standalone_goals(), vec![3]);
    }
}
