//! Exhaustive search over joint agent configurations.
//!
//! Only usable on tiny instances, but independent of the flow machinery:
//! the search knows nothing but the move rules (distinct targets, no swaps)
//! and returns a witness plan alongside every optimum.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use rand::Rng;
use thiserror::Error;

use crate::generate::random_connected_instance;
use crate::graph::{Graph, Instance, Mode, Path, Plan, VertexId};
use crate::planner::horizon_bound;

pub const DEFAULT_STATE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("this search does not handle {0} instances")]
    UnsupportedMode(Mode),
    #[error("state space of {states} configurations exceeds the limit of {limit}")]
    GuardExceeded { states: u128, limit: u128 },
    #[error("no plan within {0} steps")]
    StepCapReached(usize),
    #[error("escape search limited to {max_evaders} evaders on {max_vertices} vertices")]
    EscapeTooLarge {
        max_evaders: usize,
        max_vertices: usize,
    },
}

/// An optimum together with a plan attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub value: usize,
    pub plan: Plan,
}

/// Lexicographic optima for a pair of objectives `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tradeoff {
    /// `(a, b)` of the best plan for `a`, ties broken by `b`.
    pub best_first: (usize, usize),
    /// `(a, b)` of the best plan for `b`, ties broken by `a`.
    pub best_second: (usize, usize),
    pub first_plan: Plan,
    pub second_plan: Plan,
}

impl Tradeoff {
    /// No plan is optimal for both objectives.
    pub fn is_incompatible(&self) -> bool {
        self.best_first.0 < self.best_second.0 && self.best_second.1 < self.best_first.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalReplacementOptima {
    /// Lexicographically largest arrival counts, index = timestep.
    pub histogram: Vec<usize>,
    pub histogram_plan: Plan,
    pub min_total_arrival: Optimum,
    pub min_makespan: Optimum,
}

/// Exhaustive solver with a bound on the number of configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    /// Largest allowed `C(V, n)`.
    pub state_limit: u128,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Sorted positions; done when they equal the goal set.
    Plain,
    /// Sorted codes `pos + V * settled`; settled agents never move again.
    Arrival,
    /// Sorted positions of agents not yet absorbed by a goal.
    Vanish,
}

struct Step {
    next: Vec<usize>,
    /// `(from, to)` for every agent that was free to move.
    moves: Vec<(VertexId, VertexId)>,
    movers: usize,
    active: usize,
    vanished: usize,
}

struct Space<'a> {
    inst: &'a Instance,
    kind: Kind,
}

/// Calls `visit` with every legal joint target vector.
fn enumerate_moves(
    graph: &Graph,
    pos: &[VertexId],
    movable: &[bool],
    shared: &dyn Fn(VertexId) -> bool,
    visit: &mut dyn FnMut(&[VertexId]),
) {
    fn rec(
        i: usize,
        graph: &Graph,
        pos: &[VertexId],
        movable: &[bool],
        shared: &dyn Fn(VertexId) -> bool,
        targets: &mut Vec<VertexId>,
        visit: &mut dyn FnMut(&[VertexId]),
    ) {
        if i == pos.len() {
            visit(targets);
            return;
        }
        let here = pos[i];
        let options = std::iter::once(here).chain(
            graph
                .neighbors(here)
                .iter()
                .map(|&(w, _)| w)
                .filter(|_| movable[i]),
        );
        for t in options {
            let clash = (0..i).any(|j| {
                (targets[j] == t && !shared(t)) || (t != here && targets[j] == here && t == pos[j])
            });
            if clash {
                continue;
            }
            targets.push(t);
            rec(i + 1, graph, pos, movable, shared, targets, visit);
            targets.pop();
        }
    }
    let mut targets = Vec::with_capacity(pos.len());
    rec(0, graph, pos, movable, shared, &mut targets, visit);
}

impl<'a> Space<'a> {
    fn vc(&self) -> usize {
        self.inst.graph.vertex_count()
    }

    fn initial(&self) -> Vec<usize> {
        let mut s = self.inst.starts.clone();
        s.sort_unstable();
        s
    }

    fn is_terminal(&self, s: &[usize]) -> bool {
        match self.kind {
            Kind::Plain => {
                let mut g = self.inst.goals.clone();
                g.sort_unstable();
                s == g.as_slice()
            }
            Kind::Arrival => s.iter().all(|&c| c >= self.vc()),
            Kind::Vanish => s.is_empty(),
        }
    }

    fn successors(&self, s: &[usize]) -> Vec<Step> {
        let vc = self.vc();
        let inst = self.inst;
        let (pos, movable): (Vec<usize>, Vec<bool>) = match self.kind {
            Kind::Arrival => s.iter().map(|&c| (c % vc, c < vc)).unzip(),
            _ => (s.to_vec(), vec![true; s.len()]),
        };
        let vanish = self.kind == Kind::Vanish;
        let shared = move |v: VertexId| vanish && inst.is_goal(v);
        let mut out = Vec::new();
        enumerate_moves(&inst.graph, &pos, &movable, &shared, &mut |targets| {
            let moves: Vec<(VertexId, VertexId)> = (0..pos.len())
                .filter(|&i| movable[i])
                .map(|i| (pos[i], targets[i]))
                .collect();
            let movers = moves.iter().filter(|(a, b)| a != b).count();
            let active = moves.len();
            match self.kind {
                Kind::Plain => {
                    let mut next = targets.to_vec();
                    next.sort_unstable();
                    out.push(Step {
                        next,
                        moves,
                        movers,
                        active,
                        vanished: 0,
                    });
                }
                Kind::Vanish => {
                    let mut next: Vec<usize> = targets
                        .iter()
                        .copied()
                        .filter(|&v| !inst.is_goal(v))
                        .collect();
                    let vanished = targets.len() - next.len();
                    next.sort_unstable();
                    out.push(Step {
                        next,
                        moves,
                        movers,
                        active,
                        vanished,
                    });
                }
                Kind::Arrival => {
                    let landing: Vec<usize> = (0..pos.len())
                        .filter(|&i| movable[i] && inst.is_goal(targets[i]))
                        .collect();
                    for mask in 0..(1usize << landing.len()) {
                        let mut next: Vec<usize> = (0..pos.len())
                            .map(|i| {
                                let settle = !movable[i]
                                    || landing
                                        .iter()
                                        .position(|&l| l == i)
                                        .is_some_and(|k| mask >> k & 1 == 1);
                                targets[i] + if settle { vc } else { 0 }
                            })
                            .collect();
                        next.sort_unstable();
                        out.push(Step {
                            next,
                            moves: moves.clone(),
                            movers,
                            active,
                            vanished: 0,
                        });
                    }
                }
            }
        });
        out
    }

    /// Replays move lists from the start configuration into a plan.
    fn replay(&self, steps: &[Vec<(VertexId, VertexId)>]) -> Plan {
        let n = self.inst.agent_count();
        let mut cur = self.inst.starts.clone();
        let mut active = vec![true; n];
        let mut paths: Vec<Vec<VertexId>> = cur.iter().map(|&v| vec![v]).collect();
        for moves in steps {
            let mut next = cur.clone();
            for &(from, to) in moves {
                let a = (0..n)
                    .find(|&a| active[a] && cur[a] == from)
                    .expect("every move starts at an agent");
                next[a] = to;
            }
            if self.kind == Kind::Vanish {
                for a in 0..n {
                    if self.inst.is_goal(next[a]) {
                        active[a] = false;
                    }
                }
            }
            cur = next;
            for (p, &v) in paths.iter_mut().zip(&cur) {
                p.push(v);
            }
        }
        Plan::new(paths.into_iter().map(Path::new).collect())
    }
}

struct Found {
    cost: (usize, usize),
    plan: Plan,
}

/// Predecessor state and the moves taken from it.
type Back = Option<(usize, Vec<(VertexId, VertexId)>)>;

/// Uniform-cost search with lexicographic pair costs.
fn search(
    space: &Space,
    cost: &dyn Fn(&Step) -> (usize, usize),
    step_cap: Option<usize>,
) -> Option<Found> {
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut states: Vec<Vec<usize>> = Vec::new();
    let mut best: Vec<(usize, usize)> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let mut parent: Vec<Back> = Vec::new();
    let mut closed: Vec<bool> = Vec::new();
    let mut heap = BinaryHeap::new();

    let start = space.initial();
    index.insert(start.clone(), 0);
    states.push(start);
    best.push((0, 0));
    depth.push(0);
    parent.push(None);
    closed.push(false);
    heap.push(Reverse(((0usize, 0usize), 0usize)));

    while let Some(Reverse((c, id))) = heap.pop() {
        if closed[id] || c > best[id] {
            continue;
        }
        closed[id] = true;
        if space.is_terminal(&states[id]) {
            let mut chain = Vec::new();
            let mut cur = id;
            while let Some((p, moves)) = &parent[cur] {
                chain.push(moves.clone());
                cur = *p;
            }
            chain.reverse();
            return Some(Found {
                cost: c,
                plan: space.replay(&chain),
            });
        }
        if step_cap.is_some_and(|cap| depth[id] >= cap) {
            continue;
        }
        for step in space.successors(&states[id]) {
            let (a, b) = cost(&step);
            let nc = (c.0 + a, c.1 + b);
            let nid = match index.get(&step.next) {
                Some(&nid) => {
                    if closed[nid] || nc >= best[nid] {
                        continue;
                    }
                    nid
                }
                None => {
                    let nid = states.len();
                    index.insert(step.next.clone(), nid);
                    states.push(step.next);
                    best.push(nc);
                    depth.push(0);
                    parent.push(None);
                    closed.push(false);
                    nid
                }
            };
            best[nid] = nc;
            depth[nid] = depth[id] + 1;
            parent[nid] = Some((id, step.moves));
            heap.push(Reverse((nc, nid)));
        }
    }
    None
}

impl Oracle {
    pub fn new(state_limit: u128) -> Self {
        Self { state_limit }
    }

    fn check(&self, inst: &Instance, mode: Mode) -> Result<(), OracleError> {
        let report = inst.validate();
        if !report.is_valid() {
            return Err(OracleError::InvalidInstance(report.to_string()));
        }
        if inst.mode != mode {
            return Err(OracleError::UnsupportedMode(inst.mode));
        }
        let states = binomial(inst.graph.vertex_count(), inst.agent_count());
        if states > self.state_limit {
            return Err(OracleError::GuardExceeded {
                states,
                limit: self.state_limit,
            });
        }
        Ok(())
    }

    fn optimum(
        &self,
        inst: &Instance,
        mode: Mode,
        kind: Kind,
        cost: &dyn Fn(&Step) -> (usize, usize),
        step_cap: Option<usize>,
    ) -> Result<Found, OracleError> {
        self.check(inst, mode)?;
        let space = Space { inst, kind };
        search(&space, cost, step_cap).ok_or(OracleError::StepCapReached(step_cap.unwrap_or(0)))
    }

    /// Fewest steps until the agents occupy the goal set.
    pub fn min_makespan(&self, inst: &Instance) -> Result<Optimum, OracleError> {
        let cap = horizon_bound(inst);
        let f = self.optimum(inst, Mode::Unlabeled, Kind::Plain, &|_| (1, 0), Some(cap))?;
        Ok(Optimum {
            value: f.cost.0,
            plan: f.plan,
        })
    }

    /// Fewest edge traversals, waiting being free.
    pub fn min_total_distance(&self, inst: &Instance) -> Result<Optimum, OracleError> {
        let f = self.optimum(inst, Mode::Unlabeled, Kind::Plain, &|s| (s.movers, 1), None)?;
        Ok(Optimum {
            value: f.cost.0,
            plan: f.plan,
        })
    }

    /// Smallest sum of arrival times.
    pub fn min_total_arrival(&self, inst: &Instance) -> Result<Optimum, OracleError> {
        let f = self.optimum(
            inst,
            Mode::Unlabeled,
            Kind::Arrival,
            &|s| (s.active, 1),
            None,
        )?;
        Ok(Optimum {
            value: f.cost.0,
            plan: f.plan,
        })
    }

    /// Total arrival against makespan.
    pub fn arrival_makespan_tradeoff(&self, inst: &Instance) -> Result<Tradeoff, OracleError> {
        let a = self.optimum(
            inst,
            Mode::Unlabeled,
            Kind::Arrival,
            &|s| (s.active, 1),
            None,
        )?;
        let m = self.optimum(
            inst,
            Mode::Unlabeled,
            Kind::Arrival,
            &|s| (1, s.active),
            None,
        )?;
        Ok(Tradeoff {
            best_first: a.cost,
            best_second: (m.cost.1, m.cost.0),
            first_plan: a.plan,
            second_plan: m.plan,
        })
    }

    /// Total distance against makespan.
    pub fn distance_makespan_tradeoff(&self, inst: &Instance) -> Result<Tradeoff, OracleError> {
        let d = self.optimum(inst, Mode::Unlabeled, Kind::Plain, &|s| (s.movers, 1), None)?;
        let m = self.optimum(inst, Mode::Unlabeled, Kind::Plain, &|s| (1, s.movers), None)?;
        Ok(Tradeoff {
            best_first: d.cost,
            best_second: (m.cost.1, m.cost.0),
            first_plan: d.plan,
            second_plan: m.plan,
        })
    }

    /// Optima for goal-replacement instances, where each agent is absorbed
    /// by the first goal it reaches.
    pub fn goal_replacement(&self, inst: &Instance) -> Result<GoalReplacementOptima, OracleError> {
        let cap = horizon_bound(inst);
        let mk = self.optimum(
            inst,
            Mode::GoalReplacement,
            Kind::Vanish,
            &|_| (1, 0),
            Some(cap),
        )?;
        let arr = self.optimum(
            inst,
            Mode::GoalReplacement,
            Kind::Vanish,
            &|s| (s.active, 1),
            None,
        )?;
        let space = Space {
            inst,
            kind: Kind::Vanish,
        };

        // Breadth-first layers keeping only configurations whose arrival
        // counts so far are lexicographically best.
        type Layer = HashMap<Vec<usize>, Option<(Vec<usize>, Vec<(VertexId, VertexId)>)>>;
        let mut layers: Vec<Layer> = vec![HashMap::from([(space.initial(), None)])];
        let mut histogram = vec![0];
        let layer_cap = cap + binomial(inst.graph.vertex_count(), inst.agent_count()) as usize;
        while !layers.last().unwrap().contains_key(&Vec::new()) {
            if layers.len() > layer_cap {
                return Err(OracleError::StepCapReached(layer_cap));
            }
            let current = layers.last().unwrap();
            let mut keys: Vec<&Vec<usize>> = current.keys().collect();
            keys.sort();
            let mut next: Layer = HashMap::new();
            let mut best = 0;
            for s in keys {
                for step in space.successors(s) {
                    if step.vanished > best {
                        best = step.vanished;
                        next.clear();
                    }
                    if step.vanished == best {
                        next.entry(step.next)
                            .or_insert_with(|| Some((s.clone(), step.moves)));
                    }
                }
            }
            histogram.push(best);
            layers.push(next);
        }
        let mut chain = Vec::new();
        let mut cur: Vec<usize> = Vec::new();
        for layer in layers.iter().rev() {
            match &layer[&cur] {
                Some((prev, moves)) => {
                    chain.push(moves.clone());
                    cur = prev.clone();
                }
                None => break,
            }
        }
        chain.reverse();
        Ok(GoalReplacementOptima {
            histogram,
            histogram_plan: space.replay(&chain),
            min_total_arrival: Optimum {
                value: arr.cost.0,
                plan: arr.plan,
            },
            min_makespan: Optimum {
                value: mk.cost.0,
                plan: mk.plan,
            },
        })
    }
}

pub fn oracle_min_makespan(inst: &Instance) -> Result<Optimum, OracleError> {
    Oracle::default().min_makespan(inst)
}

pub fn oracle_min_total_distance(inst: &Instance) -> Result<Optimum, OracleError> {
    Oracle::default().min_total_distance(inst)
}

pub fn oracle_min_total_arrival(inst: &Instance) -> Result<Optimum, OracleError> {
    Oracle::default().min_total_arrival(inst)
}

pub fn oracle_goal_replacement(inst: &Instance) -> Result<GoalReplacementOptima, OracleError> {
    Oracle::default().goal_replacement(inst)
}

pub const ESCAPE_MAX_EVADERS: usize = 5;
pub const ESCAPE_MAX_VERTICES: usize = 16;

/// Backtracking search for vertex-disjoint paths from every evader to its
/// own boundary vertex. Paths stop at the first boundary vertex they reach.
pub fn oracle_escape(
    graph: &Graph,
    evaders: &[VertexId],
    boundary: &[VertexId],
) -> Result<Option<Vec<Vec<VertexId>>>, OracleError> {
    let is_boundary: BTreeSet<VertexId> = boundary.iter().copied().collect();
    if evaders.len() > is_boundary.len() {
        return Ok(None);
    }
    if evaders.len() > ESCAPE_MAX_EVADERS || graph.vertex_count() > ESCAPE_MAX_VERTICES {
        return Err(OracleError::EscapeTooLarge {
            max_evaders: ESCAPE_MAX_EVADERS,
            max_vertices: ESCAPE_MAX_VERTICES,
        });
    }
    let mut used = vec![false; graph.vertex_count()];
    for &e in evaders {
        used[e] = true;
    }
    let mut paths: Vec<Vec<VertexId>> = Vec::new();

    fn route(
        k: usize,
        graph: &Graph,
        evaders: &[VertexId],
        is_boundary: &BTreeSet<VertexId>,
        used: &mut [bool],
        paths: &mut Vec<Vec<VertexId>>,
    ) -> bool {
        if k == evaders.len() {
            return true;
        }
        let mut path = vec![evaders[k]];
        extend(k, graph, evaders, is_boundary, used, paths, &mut path)
    }

    fn extend(
        k: usize,
        graph: &Graph,
        evaders: &[VertexId],
        is_boundary: &BTreeSet<VertexId>,
        used: &mut [bool],
        paths: &mut Vec<Vec<VertexId>>,
        path: &mut Vec<VertexId>,
    ) -> bool {
        let end = *path.last().unwrap();
        if is_boundary.contains(&end) {
            paths.push(path.clone());
            if route(k + 1, graph, evaders, is_boundary, used, paths) {
                return true;
            }
            paths.pop();
            return false;
        }
        for &(w, _) in graph.neighbors(end) {
            if used[w] {
                continue;
            }
            used[w] = true;
            path.push(w);
            if extend(k, graph, evaders, is_boundary, used, paths, path) {
                return true;
            }
            path.pop();
            used[w] = false;
        }
        false
    }

    let found = route(0, graph, evaders, &is_boundary, &mut used, &mut paths);
    Ok(found.then_some(paths))
}

/// An instance on which two objectives cannot both be optimal.
#[derive(Debug, Clone)]
pub struct TradeoffWitness {
    pub instance: Instance,
    pub tradeoff: Tradeoff,
}

#[derive(Debug, Clone, Default)]
pub struct TradeoffSearch {
    pub arrival_makespan: Option<TradeoffWitness>,
    pub distance_makespan: Option<TradeoffWitness>,
    pub instances_tried: usize,
}

/// Random search over small connected graphs for instances on which total
/// arrival and makespan, and total distance and makespan, are incompatible.
///
/// `target_arrival` and `target_distance`, when given, are the exact
/// `(best_first, best_second)` vectors to look for; the search keeps going
/// until they are matched or `attempts` runs out, returning the first
/// incompatible instance otherwise.
pub fn search_tradeoffs<R: Rng>(
    rng: &mut R,
    max_vertices: usize,
    max_agents: usize,
    attempts: usize,
    target_arrival: Option<((usize, usize), (usize, usize))>,
    target_distance: Option<((usize, usize), (usize, usize))>,
) -> TradeoffSearch {
    let oracle = Oracle::default();
    let mut out = TradeoffSearch::default();
    let matches = |w: &Option<TradeoffWitness>,
                   target: Option<((usize, usize), (usize, usize))>| match (
        w, target,
    ) {
        (Some(w), Some(t)) => (w.tradeoff.best_first, w.tradeoff.best_second) == t,
        (Some(_), None) => true,
        (None, _) => false,
    };
    for _ in 0..attempts {
        if matches(&out.arrival_makespan, target_arrival)
            && matches(&out.distance_makespan, target_distance)
        {
            break;
        }
        let v = rng.gen_range(4..=max_vertices);
        let n = rng.gen_range(2..=max_agents.min(v / 2));
        // Sparse graphs have the bottlenecks that force tradeoffs.
        let density = [0.0, 0.05, 0.1, 0.2][rng.gen_range(0..4)];
        let inst = random_connected_instance(rng, v, density, n, Mode::Unlabeled);
        out.instances_tried += 1;
        if !matches(&out.arrival_makespan, target_arrival) {
            if let Ok(t) = oracle.arrival_makespan_tradeoff(&inst) {
                let exact = target_arrival.is_some_and(|x| (t.best_first, t.best_second) == x);
                if t.is_incompatible() && (out.arrival_makespan.is_none() || exact) {
                    out.arrival_makespan = Some(TradeoffWitness {
                        instance: inst.clone(),
                        tradeoff: t,
                    });
                }
            }
        }
        if !matches(&out.distance_makespan, target_distance) {
            if let Ok(t) = oracle.distance_makespan_tradeoff(&inst) {
                let exact = target_distance.is_some_and(|x| (t.best_first, t.best_second) == x);
                if t.is_incompatible() && (out.distance_makespan.is_none() || exact) {
                    out.distance_makespan = Some(TradeoffWitness {
                        instance: inst,
                        tradeoff: t,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::two_star;
    use crate::graph::validate_plan;

    fn line(len: usize, starts: Vec<usize>, goals: Vec<usize>, mode: Mode) -> Instance {
        let edges: Vec<_> = (0..len - 1).map(|i| (i, i + 1)).collect();
        Instance::new(Graph::new(len, &edges).unwrap(), starts, goals, mode)
    }

    fn assert_witness(inst: &Instance, plan: &Plan) {
        assert!(validate_plan(inst, plan).unwrap().is_valid(), "{plan:?}");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(9, 3), 84);
        assert_eq!(binomial(36, 5), 376_992);
        assert_eq!(binomial(2, 3), 0);
    }

    #[test]
    fn single_agent_on_a_line() {
        let inst = line(4, vec![0], vec![3], Mode::Unlabeled);
        assert_eq!(oracle_min_makespan(&inst).unwrap().value, 3);
        assert_eq!(oracle_min_total_distance(&inst).unwrap().value, 3);
        let arr = oracle_min_total_arrival(&inst).unwrap();
        assert_eq!(arr.value, 3);
        assert_witness(&inst, &arr.plan);
    }

    #[test]
    fn two_star_optima() {
        let inst = two_star(2, 3);
        let mk = oracle_min_makespan(&inst).unwrap();
        assert_eq!(mk.value, 4);
        assert_eq!(mk.plan.makespan(), 4);
        assert_witness(&inst, &mk.plan);
        assert_eq!(oracle_min_total_distance(&inst).unwrap().value, 6);
        let arr = oracle_min_total_arrival(&inst).unwrap();
        assert_eq!(arr.value, 7);
        assert_eq!(arr.plan.total_arrival(), 7);
        assert_witness(&inst, &arr.plan);
    }

    #[test]
    fn goal_replacement_forced_histograms() {
        let one = line(3, vec![0], vec![2], Mode::GoalReplacement);
        let r = oracle_goal_replacement(&one).unwrap();
        assert_eq!(r.histogram, vec![0, 0, 1]);
        let two = line(4, vec![0, 1], vec![2, 3], Mode::GoalReplacement);
        let r = oracle_goal_replacement(&two).unwrap();
        assert_eq!(r.histogram, vec![0, 1, 1]);
        assert_eq!(r.min_total_arrival.value, 3);
        assert_eq!(r.min_makespan.value, 2);
        assert_witness(&two, &r.histogram_plan);
        assert_eq!(r.histogram_plan.arrival_histogram(), vec![0, 1, 1]);
    }

    #[test]
    fn guard_and_mode() {
        let g = Graph::grid(6, 6, |_, _| false);
        let inst = Instance::new(
            g,
            vec![0, 1, 2, 3, 4],
            vec![31, 32, 33, 34, 35],
            Mode::Unlabeled,
        );
        assert!(matches!(
            Oracle::new(50_000).min_makespan(&inst),
            Err(OracleError::GuardExceeded {
                states: 376_992,
                ..
            })
        ));
        let gr = line(3, vec![0], vec![2], Mode::GoalReplacement);
        assert_eq!(
            oracle_min_makespan(&gr).unwrap_err(),
            OracleError::UnsupportedMode(Mode::GoalReplacement)
        );
    }

    #[test]
    fn escape_backtracking() {
        let g = Graph::grid(3, 3, |_, _| false);
        let boundary: Vec<_> = (0..9).filter(|&v| v != 4).collect();
        assert_eq!(
            oracle_escape(&g, &[4], &boundary).unwrap().unwrap()[0].len(),
            2
        );
        let all: Vec<_> = (0..9).collect();
        assert!(oracle_escape(&g, &all, &boundary).unwrap().is_none());
    }
}
