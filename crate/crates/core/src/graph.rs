//! Graph, instance, path and plan data model.
//!
//! Vertices are dense ids `0..V`. Every edge has unit length. Plans are
//! stored as one timestep-indexed vertex sequence per agent, all padded to a
//! common horizon by repeating the final vertex.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (graph has {count} vertices)")]
    VertexOutOfRange { vertex: VertexId, count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("grid coordinates do not match the vertex count")]
    BadGridShape,
}

/// Row/column placement of vertices for instances loaded from a grid map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col)` of every vertex, indexed by vertex id.
    pub coords: Vec<(usize, usize)>,
}

impl GridShape {
    pub fn vertex_at(&self, row: usize, col: usize) -> Option<VertexId> {
        self.coords.iter().position(|&c| c == (row, col))
    }
}

/// Simple undirected graph with unit edge lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    /// Normalized `(min, max)` endpoint pairs; the index is the edge id.
    edges: Vec<(VertexId, VertexId)>,
    /// `(neighbor, edge id)` per vertex, sorted by neighbor.
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    grid: Option<GridShape>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range
    /// endpoints. Edge ids follow the order of `edges`.
    pub fn new(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: w,
                        count: vertex_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            normalized.push(key);
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            vertex_count,
            edges: normalized,
            adjacency,
            grid: None,
        })
    }

    /// 4-connected grid graph over the free cells of a `rows x cols` map.
    /// Free cells are numbered in row-major order.
    pub fn grid(rows: usize, cols: usize, blocked: impl Fn(usize, usize) -> bool) -> Self {
        let mut ids = vec![None; rows * cols];
        let mut coords = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if !blocked(r, c) {
                    ids[r * cols + c] = Some(coords.len());
                    coords.push((r, c));
                }
            }
        }
        let mut edges = Vec::new();
        for &(r, c) in &coords {
            let here = ids[r * cols + c].expect("free cell");
            if c + 1 < cols {
                if let Some(right) = ids[r * cols + c + 1] {
                    edges.push((here, right));
                }
            }
            if r + 1 < rows {
                if let Some(down) = ids[(r + 1) * cols + c] {
                    edges.push((here, down));
                }
            }
        }
        let mut graph = Self::new(coords.len(), &edges).expect("grid edges are simple");
        graph.grid = Some(GridShape { rows, cols, coords });
        graph
    }

    pub fn with_grid_shape(mut self, shape: GridShape) -> Result<Self, GraphError> {
        if shape.coords.len() != self.vertex_count {
            return Err(GraphError::BadGridShape);
        }
        self.grid = Some(shape);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> (VertexId, VertexId) {
        self.edges[id]
    }

    /// Neighbors of `v` with the connecting edge id, in increasing neighbor order.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let list = self.adjacency.get(u)?;
        list.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_between(u, v).is_some()
    }

    pub fn grid_shape(&self) -> Option<&GridShape> {
        self.grid.as_ref()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        self.bfs(0).iter().all(Option::is_some)
    }

    fn bfs(&self, source: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &(w, _) in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Hop distances from `source`; `None` marks unreachable vertices (only
    /// possible on a disconnected graph).
    pub fn distances_from(&self, source: VertexId) -> Result<Vec<Option<usize>>, GraphError> {
        if source >= self.vertex_count {
            return Err(GraphError::VertexOutOfRange {
                vertex: source,
                count: self.vertex_count,
            });
        }
        Ok(self.bfs(source))
    }

    /// One shortest path from `from` to `to`, preferring lower-id vertices.
    pub fn shortest_path(&self, from: VertexId, to: VertexId) -> Option<Vec<VertexId>> {
        // Distances towards `to`, then a greedy walk that always takes the
        // smallest neighbor one step closer.
        let dist = self.bfs(to);
        dist[from]?;
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            let d = dist[cur].unwrap();
            let next = self.adjacency[cur]
                .iter()
                .map(|&(w, _)| w)
                .find(|&w| dist[w] == Some(d - 1))
                .expect("bfs layering");
            path.push(next);
            cur = next;
        }
        Some(path)
    }
}

/// Which endpoint condition a plan must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Agent `i` must end at `goals[i]`.
    Labeled,
    /// Every goal is taken by exactly one agent, in any assignment.
    #[default]
    Unlabeled,
    /// Goals absorb any number of agents; meets are allowed on goal vertices.
    GoalReplacement,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Labeled => "labeled",
            Mode::Unlabeled => "unlabeled",
            Mode::GoalReplacement => "goal_replacement",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "labeled" => Ok(Mode::Labeled),
            "unlabeled" => Ok(Mode::Unlabeled),
            "goal_replacement" => Ok(Mode::GoalReplacement),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub starts: Vec<VertexId>,
    pub goals: Vec<VertexId>,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    CountMismatch { starts: usize, goals: usize },
    TooManyAgents { agents: usize, vertices: usize },
    VertexOutOfRange(VertexId),
    DuplicateStart(VertexId),
    DuplicateGoal(VertexId),
    StartGoalOverlap(VertexId),
    NotConnected,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "instance has no agents"),
            Violation::CountMismatch { starts, goals } => {
                write!(f, "{starts} starts but {goals} goals")
            }
            Violation::TooManyAgents { agents, vertices } => {
                write!(f, "{agents} agents exceed {vertices} vertices")
            }
            Violation::VertexOutOfRange(v) => write!(f, "vertex {v} out of range"),
            Violation::DuplicateStart(v) => write!(f, "duplicate start {v}"),
            Violation::DuplicateGoal(v) => write!(f, "duplicate goal {v}"),
            Violation::StartGoalOverlap(v) => {
                write!(f, "starts/goals not disjoint (vertex {v})")
            }
            Violation::NotConnected => write!(f, "not connected"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Lists every violated instance or graph precondition.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let v_count = inst.graph.vertex_count();
    let n = inst.starts.len();
    if n == 0 {
        violations.push(Violation::NoAgents);
    }
    if inst.starts.len() != inst.goals.len() {
        violations.push(Violation::CountMismatch {
            starts: n,
            goals: inst.goals.len(),
        });
    }
    if n > v_count {
        violations.push(Violation::TooManyAgents {
            agents: n,
            vertices: v_count,
        });
    }
    let mut start_set = BTreeSet::new();
    for &s in &inst.starts {
        if s >= v_count {
            violations.push(Violation::VertexOutOfRange(s));
        } else if !start_set.insert(s) {
            violations.push(Violation::DuplicateStart(s));
        }
    }
    let mut goal_set = BTreeSet::new();
    for &g in &inst.goals {
        if g >= v_count {
            violations.push(Violation::VertexOutOfRange(g));
        } else if !goal_set.insert(g) {
            violations.push(Violation::DuplicateGoal(g));
        }
    }
    for v in start_set.intersection(&goal_set) {
        violations.push(Violation::StartGoalOverlap(*v));
    }
    if !inst.graph.is_connected() {
        violations.push(Violation::NotConnected);
    }
    ValidationReport { violations }
}

impl Instance {
    pub fn new(graph: Graph, starts: Vec<VertexId>, goals: Vec<VertexId>, mode: Mode) -> Self {
        Self {
            graph,
            starts,
            goals,
            mode,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.starts.len()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_instance(self)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn is_goal(&self, v: VertexId) -> bool {
        self.goals.contains(&v)
    }

    /// Start-by-goal hop distance matrix. Panics on a disconnected graph.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        self.starts
            .iter()
            .map(|&s| {
                let dist = self.graph.bfs(s);
                self.goals
                    .iter()
                    .map(|&g| dist[g].expect("connected graph"))
                    .collect()
            })
            .collect()
    }

    /// Largest start-to-goal distance over all start/goal pairs.
    pub fn ell(&self) -> usize {
        compute_ell(self)
    }
}

/// Largest hop distance between any start and any goal.
pub fn compute_ell(inst: &Instance) -> usize {
    inst.distance_matrix()
        .iter()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0)
}

/// Timestep-indexed vertex sequence of one agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub vertices: Vec<VertexId>,
}

impl Path {
    pub fn new(vertices: Vec<VertexId>) -> Self {
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn at(&self, t: usize) -> VertexId {
        *self
            .vertices
            .get(t)
            .unwrap_or_else(|| self.vertices.last().expect("non-empty path"))
    }

    /// First index of the final constant run.
    pub fn arrival_time(&self) -> usize {
        let last = match self.vertices.last() {
            Some(&v) => v,
            None => return 0,
        };
        let mut k = self.vertices.len() - 1;
        while k > 0 && self.vertices[k - 1] == last {
            k -= 1;
        }
        k
    }

    /// Number of non-wait steps.
    pub fn distance(&self) -> usize {
        self.vertices.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Repeats the final vertex until the path has `horizon + 1` entries.
    pub fn padded(mut self, horizon: usize) -> Self {
        if let Some(&last) = self.vertices.last() {
            self.vertices.resize(horizon + 1, last);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanStats {
    pub horizon: usize,
    pub makespan: usize,
    pub total_arrival: usize,
    pub total_distance: usize,
}

/// One path per agent, all of identical length `horizon + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub paths: Vec<Path>,
}

impl Plan {
    pub fn new(paths: Vec<Path>) -> Self {
        Self { paths }
    }

    pub fn agent_count(&self) -> usize {
        self.paths.len()
    }

    pub fn horizon(&self) -> usize {
        self.paths.first().map_or(0, |p| p.len().saturating_sub(1))
    }

    pub fn makespan(&self) -> usize {
        self.paths.iter().map(Path::arrival_time).max().unwrap_or(0)
    }

    pub fn total_arrival(&self) -> usize {
        self.paths.iter().map(Path::arrival_time).sum()
    }

    pub fn total_distance(&self) -> usize {
        self.paths.iter().map(Path::distance).sum()
    }

    pub fn stats(&self) -> PlanStats {
        PlanStats {
            horizon: self.horizon(),
            makespan: self.makespan(),
            total_arrival: self.total_arrival(),
            total_distance: self.total_distance(),
        }
    }

    /// Number of agents whose arrival time is `t`, for `t` in `0..=horizon`.
    pub fn arrival_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.horizon() + 1];
        for p in &self.paths {
            hist[p.arrival_time()] += 1;
        }
        hist
    }

    /// Truncates or pads every path to `horizon + 1` entries. Truncation is
    /// only meaningful when all agents have settled by `horizon`.
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        for p in &mut self.paths {
            p.vertices.truncate(horizon + 1);
            let last = *p.vertices.last().expect("non-empty path");
            p.vertices.resize(horizon + 1, last);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("paths have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("plan contains an empty path")]
    EmptyPath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanViolation {
    AgentCount {
        expected: usize,
        found: usize,
    },
    InvalidVertex {
        agent: usize,
        step: usize,
        vertex: VertexId,
    },
    WrongStart {
        agent: usize,
        expected: VertexId,
        found: VertexId,
    },
    IllegalMove {
        agent: usize,
        step: usize,
        from: VertexId,
        to: VertexId,
    },
    WrongGoal {
        agent: usize,
        expected: VertexId,
        found: VertexId,
    },
    NotAtGoal {
        agent: usize,
        vertex: VertexId,
    },
    GoalShared {
        goal: VertexId,
        agents: (usize, usize),
    },
    GoalUnreached {
        goal: VertexId,
    },
    Meet {
        step: usize,
        vertex: VertexId,
        agents: (usize, usize),
    },
    HeadOn {
        step: usize,
        edge: (VertexId, VertexId),
        agents: (usize, usize),
    },
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use PlanViolation::*;
        match self {
            AgentCount { expected, found } => {
                write!(f, "expected {expected} paths, found {found}")
            }
            InvalidVertex {
                agent,
                step,
                vertex,
            } => {
                write!(
                    f,
                    "agent {agent} at timestep {step}: vertex {vertex} out of range"
                )
            }
            WrongStart {
                agent,
                expected,
                found,
            } => {
                write!(f, "agent {agent} starts at {found}, expected {expected}")
            }
            IllegalMove {
                agent,
                step,
                from,
                to,
            } => {
                write!(
                    f,
                    "agent {agent} at timestep {step}: {from} -> {to} is not an edge"
                )
            }
            WrongGoal {
                agent,
                expected,
                found,
            } => {
                write!(f, "agent {agent} ends at {found}, expected goal {expected}")
            }
            NotAtGoal { agent, vertex } => {
                write!(f, "agent {agent} ends at {vertex}, which is not a goal")
            }
            GoalShared { goal, agents } => {
                write!(
                    f,
                    "goal {goal} taken by agents {} and {}",
                    agents.0, agents.1
                )
            }
            GoalUnreached { goal } => write!(f, "goal {goal} is not reached"),
            Meet {
                step,
                vertex,
                agents,
            } => write!(
                f,
                "meet collision at timestep {step}: agents {} and {} at vertex {vertex}",
                agents.0, agents.1
            ),
            HeadOn { step, edge, agents } => write!(
                f,
                "head-on collision at timestep {step}: agents {} and {} swap across ({}, {})",
                agents.0, agents.1, edge.0, edge.1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanVerdict {
    pub violations: Vec<PlanViolation>,
}

impl PlanVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&PlanViolation> {
        self.violations.first()
    }
}

/// Checks starts, moves, endpoint condition and collisions of `plan`.
///
/// In goal-replacement mode meets on goal vertices are allowed; head-on
/// swaps never are.
pub fn validate_plan(inst: &Instance, plan: &Plan) -> Result<PlanVerdict, PlanError> {
    let horizon_len = match plan.paths.first() {
        Some(p) => p.len(),
        None => 0,
    };
    for p in &plan.paths {
        if p.is_empty() {
            return Err(PlanError::EmptyPath);
        }
        if p.len() != horizon_len {
            return Err(PlanError::LengthMismatch(horizon_len, p.len()));
        }
    }

    let mut out = Vec::new();
    let n = inst.agent_count();
    if plan.paths.len() != n {
        out.push(PlanViolation::AgentCount {
            expected: n,
            found: plan.paths.len(),
        });
        return Ok(PlanVerdict { violations: out });
    }
    let v_count = inst.graph.vertex_count();
    for (agent, p) in plan.paths.iter().enumerate() {
        if let Some((step, &vertex)) = p.vertices.iter().enumerate().find(|(_, &v)| v >= v_count) {
            out.push(PlanViolation::InvalidVertex {
                agent,
                step,
                vertex,
            });
        }
    }
    if !out.is_empty() {
        return Ok(PlanVerdict { violations: out });
    }

    for (agent, p) in plan.paths.iter().enumerate() {
        if p.vertices[0] != inst.starts[agent] {
            out.push(PlanViolation::WrongStart {
                agent,
                expected: inst.starts[agent],
                found: p.vertices[0],
            });
        }
        for (step, w) in p.vertices.windows(2).enumerate() {
            if w[0] != w[1] && !inst.graph.has_edge(w[0], w[1]) {
                out.push(PlanViolation::IllegalMove {
                    agent,
                    step,
                    from: w[0],
                    to: w[1],
                });
            }
        }
    }

    let goal_set: BTreeSet<VertexId> = inst.goals.iter().copied().collect();
    let ends: Vec<VertexId> = plan
        .paths
        .iter()
        .map(|p| *p.vertices.last().unwrap())
        .collect();
    match inst.mode {
        Mode::Labeled => {
            for (agent, (&end, &goal)) in ends.iter().zip(&inst.goals).enumerate() {
                if end != goal {
                    out.push(PlanViolation::WrongGoal {
                        agent,
                        expected: goal,
                        found: end,
                    });
                }
            }
        }
        Mode::Unlabeled => {
            let mut owner: HashMap<VertexId, usize> = HashMap::new();
            for (agent, &end) in ends.iter().enumerate() {
                if !goal_set.contains(&end) {
                    out.push(PlanViolation::NotAtGoal { agent, vertex: end });
                } else if let Some(&other) = owner.get(&end) {
                    out.push(PlanViolation::GoalShared {
                        goal: end,
                        agents: (other, agent),
                    });
                } else {
                    owner.insert(end, agent);
                }
            }
            for &g in &goal_set {
                if !owner.contains_key(&g) {
                    out.push(PlanViolation::GoalUnreached { goal: g });
                }
            }
        }
        Mode::GoalReplacement => {
            for (agent, &end) in ends.iter().enumerate() {
                if !goal_set.contains(&end) {
                    out.push(PlanViolation::NotAtGoal { agent, vertex: end });
                }
            }
        }
    }

    let meets_allowed_at_goals = inst.mode == Mode::GoalReplacement;
    let mut occupant: HashMap<VertexId, usize> = HashMap::with_capacity(n);
    let mut moves: HashMap<(VertexId, VertexId), usize> = HashMap::with_capacity(n);
    for step in 0..horizon_len {
        occupant.clear();
        for (agent, p) in plan.paths.iter().enumerate() {
            let v = p.vertices[step];
            if let Some(&other) = occupant.get(&v) {
                if !(meets_allowed_at_goals && goal_set.contains(&v)) {
                    out.push(PlanViolation::Meet {
                        step,
                        vertex: v,
                        agents: (other, agent),
                    });
                }
            } else {
                occupant.insert(v, agent);
            }
        }
        if step + 1 == horizon_len {
            break;
        }
        moves.clear();
        for (agent, p) in plan.paths.iter().enumerate() {
            let (a, b) = (p.vertices[step], p.vertices[step + 1]);
            if a == b {
                continue;
            }
            if let Some(&other) = moves.get(&(b, a)) {
                out.push(PlanViolation::HeadOn {
                    step,
                    edge: (b, a),
                    agents: (other, agent),
                });
            }
            moves.insert((a, b), agent);
        }
    }
    Ok(PlanVerdict { violations: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path_graph(v: usize) -> Graph {
        let edges: Vec<_> = (0..v.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Graph::new(v, &edges).unwrap()
    }

    fn cycle(v: usize) -> Graph {
        let edges: Vec<_> = (0..v).map(|i| (i, (i + 1) % v)).collect();
        Graph::new(v, &edges).unwrap()
    }

    #[test]
    fn rejects_non_simple_graphs() {
        assert_eq!(Graph::new(2, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::new(2, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            Graph::new(2, &[(0, 2)]),
            Err(GraphError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn validate_instance_reports() {
        let inst = Instance::new(path_graph(3), vec![0], vec![2], Mode::Unlabeled);
        assert!(validate_instance(&inst).is_valid());

        let inst = Instance::new(path_graph(3), vec![0], vec![0], Mode::Unlabeled);
        let report = validate_instance(&inst);
        assert_eq!(report.violations, vec![Violation::StartGoalOverlap(0)]);
        assert!(report.to_string().contains("starts/goals not disjoint"));

        let inst = Instance::new(
            Graph::new(2, &[]).unwrap(),
            vec![0],
            vec![1],
            Mode::Unlabeled,
        );
        assert_eq!(
            validate_instance(&inst).violations,
            vec![Violation::NotConnected]
        );

        let inst = Instance::new(path_graph(3), vec![0, 0], vec![1, 1], Mode::Unlabeled);
        let v = validate_instance(&inst).violations;
        assert!(v.contains(&Violation::DuplicateStart(0)));
        assert!(v.contains(&Violation::DuplicateGoal(1)));
    }

    #[test]
    fn distances() {
        let d = path_graph(3).distances_from(0).unwrap();
        assert_eq!(d, vec![Some(0), Some(1), Some(2)]);
        let d = cycle(4).distances_from(1).unwrap();
        assert_eq!(d[3], Some(2));
        let grid = Graph::grid(5, 5, |_, _| false);
        let d = grid.distances_from(0).unwrap();
        assert_eq!(d[24], Some(8));
        assert!(path_graph(3).distances_from(3).is_err());
    }

    #[test]
    fn ell_on_path_and_two_star() {
        let inst = Instance::new(path_graph(4), vec![0], vec![3], Mode::Unlabeled);
        assert_eq!(compute_ell(&inst), 3);
        // r1=0, r2=1 on hub 2; b1=4, b2=5 on hub 3
        let g = Graph::new(6, &[(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)]).unwrap();
        let inst = Instance::new(g, vec![0, 1], vec![4, 5], Mode::Unlabeled);
        assert_eq!(compute_ell(&inst), 3);
    }

    fn plan(paths: &[&[usize]]) -> Plan {
        Plan::new(paths.iter().map(|p| Path::new(p.to_vec())).collect())
    }

    #[test]
    fn head_on_and_meet_are_rejected() {
        let inst = Instance::new(path_graph(2), vec![0, 1], vec![1, 0], Mode::Labeled);
        // starts/goals overlap makes the instance invalid but the plan checker
        // still reports the swap.
        let verdict = validate_plan(&inst, &plan(&[&[0, 1], &[1, 0]])).unwrap();
        assert!(matches!(
            verdict.first(),
            Some(PlanViolation::HeadOn { step: 0, .. })
        ));

        let inst = Instance::new(path_graph(3), vec![0, 2], vec![2, 0], Mode::Labeled);
        let verdict = validate_plan(&inst, &plan(&[&[0, 1, 2], &[2, 1, 0]])).unwrap();
        assert!(verdict.violations.iter().any(|v| matches!(
            v,
            PlanViolation::Meet {
                step: 1,
                vertex: 1,
                ..
            }
        )));
    }

    #[test]
    fn rotation_is_not_a_collision() {
        let g = cycle(4);
        let inst = Instance::new(g, vec![0, 1, 2], vec![1, 2, 3], Mode::Labeled);
        let verdict = validate_plan(&inst, &plan(&[&[0, 1], &[1, 2], &[2, 3]])).unwrap();
        assert!(verdict.is_valid(), "{verdict:?}");
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let inst = Instance::new(path_graph(3), vec![0], vec![2], Mode::Unlabeled);
        let bad = plan(&[&[0, 1, 2], &[0]]);
        assert!(matches!(
            validate_plan(&inst, &bad),
            Err(PlanError::LengthMismatch(3, 1))
        ));
    }

    #[test]
    fn endpoint_conditions() {
        let inst = Instance::new(path_graph(4), vec![0, 1], vec![2, 3], Mode::Unlabeled);
        let ok = plan(&[&[0, 1, 2], &[1, 2, 3]]);
        assert!(validate_plan(&inst, &ok).unwrap().is_valid());
        let labeled = inst.clone().with_mode(Mode::Labeled);
        assert!(validate_plan(&labeled, &ok).unwrap().is_valid());
        let crossed = Instance::new(path_graph(4), vec![0, 1], vec![3, 2], Mode::Labeled);
        assert!(!validate_plan(&crossed, &ok).unwrap().is_valid());
        assert!(validate_plan(&crossed.with_mode(Mode::Unlabeled), &ok)
            .unwrap()
            .is_valid());

        let short = plan(&[&[0, 1], &[1, 2]]);
        let v = validate_plan(&inst, &short).unwrap();
        assert!(v
            .violations
            .iter()
            .any(|v| matches!(v, PlanViolation::NotAtGoal { agent: 0, .. })));
    }

    #[test]
    fn goal_replacement_allows_meets_on_goals() {
        // 0 - 1 - 2 with a single useful goal 2; goal 3 hangs off 0
        let g = Graph::new(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let inst = Instance::new(g, vec![1, 0], vec![2, 3], Mode::GoalReplacement);
        let p = plan(&[&[1, 2, 2], &[0, 1, 2]]);
        assert!(validate_plan(&inst, &p).unwrap().is_valid());
        let strict = inst.clone().with_mode(Mode::Unlabeled);
        assert!(!validate_plan(&strict, &p).unwrap().is_valid());
    }

    #[test]
    fn stats_follow_final_constant_run() {
        let p = plan(&[&[0, 1, 1, 2, 2], &[3, 3, 3, 3, 3]]);
        assert_eq!(p.paths[0].arrival_time(), 3);
        assert_eq!(p.paths[1].arrival_time(), 0);
        let s = p.stats();
        assert_eq!(
            (s.horizon, s.makespan, s.total_arrival, s.total_distance),
            (4, 3, 3, 2)
        );
        assert_eq!(p.arrival_histogram(), vec![1, 0, 0, 1, 0]);
    }

    #[test]
    fn shortest_path_prefers_low_ids() {
        let g = Graph::grid(2, 2, |_, _| false);
        assert_eq!(g.shortest_path(0, 3), Some(vec![0, 1, 3]));
    }
}
