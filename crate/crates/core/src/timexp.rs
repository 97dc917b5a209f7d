//! Time-expanded flow network for a planning instance and horizon `T`.
//!
//! Per vertex `v` there are `2T + 1` copies: `v(0)` (which doubles as
//! `v(0)'`), and `v(t)`, `v(t)'` for `t = 1..=T`. A holdover edge
//! `v(t)' -> v(t+1)` lets an agent wait; a gate edge `v(t) -> v(t)'` of unit
//! capacity admits one agent per vertex per timestep. Every graph edge
//! `(u, v)` and step `t` gets a two-node gadget
//!
//! ```text
//!   u(t)' \              / u(t+1)
//!          tail -> head
//!   v(t)' /              \ v(t+1)
//! ```
//!
//! whose unit middle edge is shared by both directions, so two agents can
//! never swap across an edge in one step.
//!
//! Node ids are laid out layer by layer (source, layer 0 copies, then per
//! step: gadgets, in-copies, out-copies, and finally the sink), which makes
//! the id order a topological order: every edge goes from a lower id to a
//! higher id.

use std::fmt::Write as _;

use thiserror::Error;

use crate::flow::{Edge, Flow, FlowNetwork, NodeId};
use crate::graph::{validate_plan, EdgeId, Instance, Mode, Path, Plan, PlanError, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SinkMode {
    /// `v(T)' -> sink` for every goal `v`.
    #[default]
    FinalLayer,
    /// `v(t)' -> sink` for every goal `v` and every `t`, with cost `t`.
    EveryLayerArrivalCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BuildOptions {
    pub holdover_cost: i32,
    pub sink_mode: SinkMode,
    /// Goal vertices get gate, holdover and sink capacities of `n`.
    pub goal_replacement: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            holdover_cost: 1,
            sink_mode: SinkMode::FinalLayer,
            goal_replacement: false,
        }
    }
}

impl BuildOptions {
    /// Defaults with `goal_replacement` set from the instance mode.
    pub fn for_mode(mode: Mode) -> Self {
        Self {
            goal_replacement: mode == Mode::GoalReplacement,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    InCopy,
    OutCopy,
    GadgetTail,
    GadgetHead,
    SuperSource,
    SuperSink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TenNode {
    pub kind: NodeKind,
    pub base_vertex: Option<VertexId>,
    /// Timestep of the copy; gadget nodes carry the step `t` of `t -> t+1`.
    pub layer: usize,
    pub base_edge: Option<EdgeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    GadgetArm,
    GadgetMiddle,
    Holdover,
    VertexGate,
    SourceLink,
    SinkLink,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::GadgetArm => "gadget_arm",
            EdgeKind::GadgetMiddle => "gadget_middle",
            EdgeKind::Holdover => "holdover",
            EdgeKind::VertexGate => "vertex_gate",
            EdgeKind::SourceLink => "source_link",
            EdgeKind::SinkLink => "sink_link",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TenError {
    #[error("horizon must be at least 1")]
    HorizonTooSmall,
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("network too large for 32-bit capacities and costs")]
    TooLarge,
    #[error("plan horizon {plan} differs from network horizon {network}")]
    HorizonMismatch { plan: usize, network: usize },
    #[error("plan is not valid: {0}")]
    InvalidPlan(String),
    #[error("unit path {index} does not follow the layer structure: {reason}")]
    BadUnitPath { index: usize, reason: String },
}

impl From<PlanError> for TenError {
    fn from(e: PlanError) -> Self {
        TenError::InvalidPlan(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct TimeExpandedNetwork {
    network: FlowNetwork,
    edge_kinds: Vec<EdgeKind>,
    horizon: usize,
    vertex_count: usize,
    graph_edge_count: usize,
    options: BuildOptions,
}

/// Builds the time-expanded network for `inst` over `horizon` steps.
pub fn build_ten(
    inst: &Instance,
    horizon: usize,
    opts: BuildOptions,
) -> Result<TimeExpandedNetwork, TenError> {
    if horizon < 1 {
        return Err(TenError::HorizonTooSmall);
    }
    let report = inst.validate();
    if !report.is_valid() {
        return Err(TenError::InvalidInstance(report.to_string()));
    }
    let g = &inst.graph;
    let (v_count, e_count, n) = (g.vertex_count(), g.edge_count(), inst.agent_count());
    let node_count = v_count * (2 * horizon + 1) + 2 * e_count * horizon + 2;
    if node_count >= u32::MAX as usize / 2 || horizon >= i32::MAX as usize || n >= i32::MAX as usize
    {
        return Err(TenError::TooLarge);
    }
    let mut ten = TimeExpandedNetwork {
        network: FlowNetwork::new(2, Vec::new(), 0, 1),
        edge_kinds: Vec::new(),
        horizon,
        vertex_count: v_count,
        graph_edge_count: e_count,
        options: opts,
    };
    debug_assert_eq!(ten.sink(), node_count - 1);

    let mut is_goal = vec![false; v_count];
    for &goal in &inst.goals {
        is_goal[goal] = true;
    }
    let wide = |v: VertexId| -> i32 {
        if opts.goal_replacement && is_goal[v] {
            n as i32
        } else {
            1
        }
    };

    let sink_links = match opts.sink_mode {
        SinkMode::FinalLayer => n,
        SinkMode::EveryLayerArrivalCost => n * (horizon + 1),
    };
    let edge_total = 5 * e_count * horizon + 2 * v_count * horizon + n + sink_links;
    let mut edges = Vec::with_capacity(edge_total);
    let mut kinds = Vec::with_capacity(edge_total);
    let mut push = |from: NodeId, to: NodeId, capacity: i32, cost: i32, kind: EdgeKind| {
        edges.push(Edge {
            from: from as u32,
            to: to as u32,
            capacity,
            cost,
        });
        kinds.push(kind);
    };

    let mut sorted_starts = inst.starts.clone();
    sorted_starts.sort_unstable();
    for &s in &sorted_starts {
        push(ten.source(), ten.out_copy(s, 0), 1, 0, EdgeKind::SourceLink);
    }
    for t in 0..horizon {
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let (tail, head) = (ten.gadget_tail(e, t), ten.gadget_head(e, t));
            push(ten.out_copy(u, t), tail, 1, 0, EdgeKind::GadgetArm);
            push(ten.out_copy(v, t), tail, 1, 0, EdgeKind::GadgetArm);
            push(tail, head, 1, 1, EdgeKind::GadgetMiddle);
            push(head, ten.in_copy(u, t + 1), 1, 0, EdgeKind::GadgetArm);
            push(head, ten.in_copy(v, t + 1), 1, 0, EdgeKind::GadgetArm);
        }
        for v in 0..v_count {
            push(
                ten.out_copy(v, t),
                ten.in_copy(v, t + 1),
                wide(v),
                opts.holdover_cost,
                EdgeKind::Holdover,
            );
        }
        for v in 0..v_count {
            push(
                ten.in_copy(v, t + 1),
                ten.out_copy(v, t + 1),
                wide(v),
                0,
                EdgeKind::VertexGate,
            );
        }
    }
    let mut sorted_goals = inst.goals.clone();
    sorted_goals.sort_unstable();
    let sink_cap = if opts.goal_replacement { n as i32 } else { 1 };
    match opts.sink_mode {
        SinkMode::FinalLayer => {
            for &goal in &sorted_goals {
                push(
                    ten.out_copy(goal, horizon),
                    ten.sink(),
                    sink_cap,
                    0,
                    EdgeKind::SinkLink,
                );
            }
        }
        SinkMode::EveryLayerArrivalCost => {
            for t in 0..=horizon {
                for &goal in &sorted_goals {
                    push(
                        ten.out_copy(goal, t),
                        ten.sink(),
                        sink_cap,
                        t as i32,
                        EdgeKind::SinkLink,
                    );
                }
            }
        }
    }
    debug_assert_eq!(edges.len(), edge_total);
    ten.network = FlowNetwork::new(node_count, edges, 0, node_count - 1);
    ten.edge_kinds = kinds;
    Ok(ten)
}

impl TimeExpandedNetwork {
    pub fn network(&self) -> &FlowNetwork {
        &self.network
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn options(&self) -> BuildOptions {
        self.options
    }

    pub fn node_count(&self) -> usize {
        self.vertex_count * (2 * self.horizon + 1) + 2 * self.graph_edge_count * self.horizon + 2
    }

    pub fn edge_count(&self) -> usize {
        self.network.edge_count()
    }

    pub fn edge_kind(&self, edge: usize) -> EdgeKind {
        self.edge_kinds[edge]
    }

    pub fn source(&self) -> NodeId {
        0
    }

    pub fn sink(&self) -> NodeId {
        self.node_count() - 1
    }

    fn step_base(&self, t: usize) -> usize {
        1 + self.vertex_count + t * (2 * self.graph_edge_count + 2 * self.vertex_count)
    }

    /// `v(t)`; at `t = 0` this is the same node as `v(0)'`.
    pub fn in_copy(&self, v: VertexId, t: usize) -> NodeId {
        if t == 0 {
            1 + v
        } else {
            self.step_base(t - 1) + 2 * self.graph_edge_count + v
        }
    }

    /// `v(t)'`.
    pub fn out_copy(&self, v: VertexId, t: usize) -> NodeId {
        if t == 0 {
            1 + v
        } else {
            self.step_base(t - 1) + 2 * self.graph_edge_count + self.vertex_count + v
        }
    }

    pub fn gadget_tail(&self, e: EdgeId, t: usize) -> NodeId {
        self.step_base(t) + 2 * e
    }

    pub fn gadget_head(&self, e: EdgeId, t: usize) -> NodeId {
        self.step_base(t) + 2 * e + 1
    }

    /// Decodes a node id into its role in the construction.
    pub fn node(&self, id: NodeId) -> TenNode {
        let (v_count, e_count) = (self.vertex_count, self.graph_edge_count);
        if id == self.source() {
            return TenNode {
                kind: NodeKind::SuperSource,
                base_vertex: None,
                layer: 0,
                base_edge: None,
            };
        }
        if id == self.sink() {
            return TenNode {
                kind: NodeKind::SuperSink,
                base_vertex: None,
                layer: self.horizon,
                base_edge: None,
            };
        }
        if id <= v_count {
            return TenNode {
                kind: NodeKind::InCopy,
                base_vertex: Some(id - 1),
                layer: 0,
                base_edge: None,
            };
        }
        let block = 2 * e_count + 2 * v_count;
        let offset = id - 1 - v_count;
        let t = offset / block;
        let r = offset % block;
        if r < 2 * e_count {
            let kind = if r.is_multiple_of(2) {
                NodeKind::GadgetTail
            } else {
                NodeKind::GadgetHead
            };
            TenNode {
                kind,
                base_vertex: None,
                layer: t,
                base_edge: Some(r / 2),
            }
        } else if r < 2 * e_count + v_count {
            TenNode {
                kind: NodeKind::InCopy,
                base_vertex: Some(r - 2 * e_count),
                layer: t + 1,
                base_edge: None,
            }
        } else {
            TenNode {
                kind: NodeKind::OutCopy,
                base_vertex: Some(r - 2 * e_count - v_count),
                layer: t + 1,
                base_edge: None,
            }
        }
    }

    /// Plain-text edge list `from to capacity cost kind`, one edge per line.
    pub fn dump_edges(&self) -> String {
        let mut out = String::new();
        for (id, e) in self.network.edges().iter().enumerate() {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                e.from,
                e.to,
                e.capacity,
                e.cost,
                self.edge_kinds[id].as_str()
            );
        }
        out
    }
}

/// Maps unit source-to-sink node paths back to one vertex path per agent.
///
/// Gadget nodes are dropped and each timestep is sampled once. Paths that
/// leave for the sink before the horizon are padded at their final vertex.
/// Agents are matched to unit paths by start vertex.
pub fn project_flow_to_plan(
    inst: &Instance,
    net: &TimeExpandedNetwork,
    unit_paths: &[Vec<NodeId>],
) -> Result<Plan, TenError> {
    let horizon = net.horizon();
    let mut by_start: Vec<Option<Path>> = vec![None; inst.agent_count()];
    for (index, nodes) in unit_paths.iter().enumerate() {
        let bad = |reason: String| TenError::BadUnitPath { index, reason };
        if nodes.len() < 3 || nodes[0] != net.source() || *nodes.last().unwrap() != net.sink() {
            return Err(bad(
                "must run from the super source to the super sink".into()
            ));
        }
        let mut vertices: Vec<VertexId> = Vec::with_capacity(horizon + 1);
        let inner = &nodes[1..nodes.len() - 1];
        for (k, &id) in inner.iter().enumerate() {
            let node = net.node(id);
            match node.kind {
                NodeKind::InCopy => {
                    let v = node.base_vertex.unwrap();
                    if node.layer != vertices.len() {
                        return Err(bad(format!(
                            "reaches layer {} after {} samples",
                            node.layer,
                            vertices.len()
                        )));
                    }
                    vertices.push(v);
                }
                NodeKind::OutCopy => {
                    let v = node.base_vertex.unwrap();
                    if vertices.len() != node.layer + 1 || vertices[node.layer] != v {
                        return Err(bad(format!("out-copy of {v} without its in-copy")));
                    }
                }
                NodeKind::GadgetTail | NodeKind::GadgetHead => {
                    if k == 0 {
                        return Err(bad("starts inside a gadget".into()));
                    }
                }
                NodeKind::SuperSource | NodeKind::SuperSink => {
                    return Err(bad("terminal in the middle of a path".into()));
                }
            }
        }
        if vertices.is_empty() || vertices.len() > horizon + 1 {
            return Err(bad("no layer samples".into()));
        }
        let start = vertices[0];
        let agent = inst
            .starts
            .iter()
            .position(|&s| s == start)
            .ok_or_else(|| bad(format!("vertex {start} is not a start")))?;
        if by_start[agent].is_some() {
            return Err(bad(format!("second unit path from start {start}")));
        }
        by_start[agent] = Some(Path::new(vertices).padded(horizon));
    }
    let paths = by_start
        .into_iter()
        .enumerate()
        .map(|(agent, p)| {
            p.ok_or(TenError::BadUnitPath {
                index: agent,
                reason: format!("no unit path from start {}", inst.starts[agent]),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Plan::new(paths))
}

/// Routes each agent's path through the network as one unit of flow.
pub fn plan_to_flow(
    inst: &Instance,
    net: &TimeExpandedNetwork,
    plan: &Plan,
) -> Result<Flow, TenError> {
    let verdict = validate_plan(inst, plan)?;
    if let Some(v) = verdict.first() {
        return Err(TenError::InvalidPlan(v.to_string()));
    }
    if plan.horizon() != net.horizon() {
        return Err(TenError::HorizonMismatch {
            plan: plan.horizon(),
            network: net.horizon(),
        });
    }
    let network = net.network();
    let mut edge_flow = vec![0i32; network.edge_count()];
    let missing = |from: NodeId, to: NodeId| {
        TenError::InvalidPlan(format!("network has no edge {from} -> {to}"))
    };
    let mut route = |from: NodeId, to: NodeId| -> Result<(), TenError> {
        let e = network
            .find_edge(from, to)
            .ok_or_else(|| missing(from, to))?;
        edge_flow[e] += 1;
        Ok(())
    };
    let horizon = net.horizon();
    for path in &plan.paths {
        let p = &path.vertices;
        route(net.source(), net.out_copy(p[0], 0))?;
        let exit = match net.options().sink_mode {
            SinkMode::FinalLayer => horizon,
            SinkMode::EveryLayerArrivalCost => path.arrival_time(),
        };
        for t in 0..exit {
            let (a, b) = (p[t], p[t + 1]);
            if a == b {
                route(net.out_copy(a, t), net.in_copy(a, t + 1))?;
            } else {
                let e = inst.graph.edge_between(a, b).ok_or_else(|| missing(a, b))?;
                let (tail, head) = (net.gadget_tail(e, t), net.gadget_head(e, t));
                route(net.out_copy(a, t), tail)?;
                route(tail, head)?;
                route(head, net.in_copy(b, t + 1))?;
            }
            route(net.in_copy(b, t + 1), net.out_copy(b, t + 1))?;
        }
        route(net.out_copy(p[exit], exit), net.sink())?;
    }
    Ok(Flow::from_edge_flow(network, edge_flow))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{check_flow, decompose, max_flow};
    use crate::graph::Graph;

    fn single_edge() -> Instance {
        Instance::new(
            Graph::new(2, &[(0, 1)]).unwrap(),
            vec![0],
            vec![1],
            Mode::Unlabeled,
        )
    }

    #[test]
    fn smallest_build_counts() {
        let ten = build_ten(&single_edge(), 1, BuildOptions::default()).unwrap();
        assert_eq!(ten.node_count(), 10);
        assert_eq!(ten.network().node_count(), 10);
        assert_eq!(ten.edge_count(), 11);
        let count = |k: EdgeKind| {
            (0..ten.edge_count())
                .filter(|&e| ten.edge_kind(e) == k)
                .count()
        };
        assert_eq!(count(EdgeKind::GadgetArm), 4);
        assert_eq!(count(EdgeKind::GadgetMiddle), 1);
        assert_eq!(count(EdgeKind::Holdover), 2);
        assert_eq!(count(EdgeKind::VertexGate), 2);
        assert_eq!(count(EdgeKind::SourceLink), 1);
        assert_eq!(count(EdgeKind::SinkLink), 1);
    }

    #[test]
    fn rejects_zero_horizon() {
        assert_eq!(
            build_ten(&single_edge(), 0, BuildOptions::default()).unwrap_err(),
            TenError::HorizonTooSmall
        );
    }

    #[test]
    fn node_decoding_round_trips() {
        let g = Graph::grid(2, 3, |_, _| false);
        let inst = Instance::new(g, vec![0, 1], vec![4, 5], Mode::Unlabeled);
        let ten = build_ten(&inst, 3, BuildOptions::default()).unwrap();
        for t in 0..=3 {
            for v in 0..6 {
                let n = ten.node(ten.in_copy(v, t));
                assert_eq!((n.base_vertex, n.layer), (Some(v), t));
                let n = ten.node(ten.out_copy(v, t));
                assert_eq!((n.base_vertex, n.layer), (Some(v), t));
            }
        }
        for t in 0..3 {
            for e in 0..inst.graph.edge_count() {
                let n = ten.node(ten.gadget_tail(e, t));
                assert_eq!(
                    (n.kind, n.base_edge, n.layer),
                    (NodeKind::GadgetTail, Some(e), t)
                );
                let n = ten.node(ten.gadget_head(e, t));
                assert_eq!(
                    (n.kind, n.base_edge, n.layer),
                    (NodeKind::GadgetHead, Some(e), t)
                );
            }
        }
    }

    #[test]
    fn projects_move_and_wait() {
        let inst = single_edge();
        let ten = build_ten(&inst, 1, BuildOptions::default()).unwrap();
        let f = max_flow(ten.network());
        let plan =
            project_flow_to_plan(&inst, &ten, &decompose(ten.network(), &f).unwrap()).unwrap();
        assert_eq!(plan.paths[0].vertices, vec![0, 1]);

        let ten = build_ten(&inst, 2, BuildOptions::default()).unwrap();
        let wait_then_move = Plan::new(vec![Path::new(vec![0, 0, 1])]);
        let flow = plan_to_flow(&inst, &ten, &wait_then_move).unwrap();
        assert!(check_flow(ten.network(), &flow).is_empty());
        let back = project_flow_to_plan(&inst, &ten, &decompose(ten.network(), &flow).unwrap());
        assert_eq!(back.unwrap(), wait_then_move);
    }

    #[test]
    fn plan_to_flow_rejects_bad_input() {
        let inst = single_edge();
        let ten = build_ten(&inst, 2, BuildOptions::default()).unwrap();
        let short = Plan::new(vec![Path::new(vec![0, 1])]);
        assert!(matches!(
            plan_to_flow(&inst, &ten, &short),
            Err(TenError::HorizonMismatch { .. })
        ));

        let ten_inst = Instance::new(
            Graph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap(),
            vec![1, 2],
            vec![0, 3],
            Mode::Unlabeled,
        );
        let ten = build_ten(&ten_inst, 1, BuildOptions::default()).unwrap();
        let swap = Plan::new(vec![Path::new(vec![1, 2]), Path::new(vec![2, 1])]);
        assert!(matches!(
            plan_to_flow(&ten_inst, &ten, &swap),
            Err(TenError::InvalidPlan(_))
        ));
    }

    #[test]
    fn dump_has_one_line_per_edge() {
        let ten = build_ten(&single_edge(), 1, BuildOptions::default()).unwrap();
        let dump = ten.dump_edges();
        assert_eq!(dump.lines().count(), 11);
        assert!(dump
            .lines()
            .any(|l| l.ends_with("gadget_middle") && l.contains(" 1 1 ")));
    }
}
