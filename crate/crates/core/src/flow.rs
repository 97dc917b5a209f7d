//! Integral max-flow and min-cost max-flow on directed capacitated networks.
//!
//! All arithmetic is integral. Residual arcs come in pairs: arc `2e` is the
//! forward copy of edge `e`, arc `2e + 1` its reverse. Neighbor iteration is
//! ordered by head node id, so equal-length (or equal-cost) augmenting paths
//! are always chosen the same way.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;

use thiserror::Error;

pub type NodeId = usize;

const NO_ARC: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub capacity: i32,
    pub cost: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("edge {edge} has negative cost {cost}")]
    NegativeCost { edge: usize, cost: i32 },
    #[error("edge {edge} has negative capacity {capacity}")]
    NegativeCapacity { edge: usize, capacity: i32 },
    #[error("flow vector has {found} entries, network has {expected} edges")]
    WrongLength { expected: usize, found: usize },
    #[error("flow violates its constraints: {0}")]
    Infeasible(String),
    #[error("flow support contains a cycle through node {0}")]
    CyclicSupport(NodeId),
}

/// Directed network with a designated source and sink.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    node_count: usize,
    edges: Vec<Edge>,
    source: NodeId,
    sink: NodeId,
    /// CSR offsets into `out_edges`, one slot per node plus a terminator.
    out_start: Vec<u32>,
    out_edges: Vec<u32>,
}

impl FlowNetwork {
    pub fn new(node_count: usize, edges: Vec<Edge>, source: NodeId, sink: NodeId) -> Self {
        assert!(
            source < node_count && sink < node_count,
            "terminals out of range"
        );
        assert!(node_count < u32::MAX as usize && edges.len() < (u32::MAX / 2) as usize);
        let mut degree = vec![0u32; node_count + 1];
        for e in &edges {
            assert!((e.from as usize) < node_count && (e.to as usize) < node_count);
            degree[e.from as usize + 1] += 1;
        }
        for i in 0..node_count {
            degree[i + 1] += degree[i];
        }
        let out_start = degree;
        let mut fill = out_start.clone();
        let mut out_edges = vec![0u32; edges.len()];
        for (id, e) in edges.iter().enumerate() {
            let slot = &mut fill[e.from as usize];
            out_edges[*slot as usize] = id as u32;
            *slot += 1;
        }
        Self {
            node_count,
            edges,
            source,
            sink,
            out_start,
            out_edges,
        }
    }

    /// Convenience constructor from `(from, to, capacity, cost)` tuples.
    pub fn from_tuples(
        node_count: usize,
        edges: &[(NodeId, NodeId, i32, i32)],
        source: NodeId,
        sink: NodeId,
    ) -> Self {
        let edges = edges
            .iter()
            .map(|&(from, to, capacity, cost)| Edge {
                from: from as u32,
                to: to as u32,
                capacity,
                cost,
            })
            .collect();
        Self::new(node_count, edges, source, sink)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    /// Ids of edges leaving `node`, in insertion order.
    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = (
            self.out_start[node] as usize,
            self.out_start[node + 1] as usize,
        );
        self.out_edges[a..b].iter().map(|&e| e as usize)
    }

    /// Edge `from -> to`, if present (first match).
    pub fn find_edge(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.out_edges(from)
            .find(|&e| self.edges[e].to as usize == to)
    }

    /// Total cost of `edge_flow` under this network's costs.
    pub fn cost_of(&self, edge_flow: &[i32]) -> i64 {
        self.edges
            .iter()
            .zip(edge_flow)
            .map(|(e, &f)| e.cost as i64 * f as i64)
            .sum()
    }

    /// Net flow out of the source.
    pub fn value_of(&self, edge_flow: &[i32]) -> i64 {
        let mut value = 0i64;
        for (e, &f) in self.edges.iter().zip(edge_flow) {
            if e.from as usize == self.source {
                value += f as i64;
            }
            if e.to as usize == self.source {
                value -= f as i64;
            }
        }
        value
    }
}

/// Integral edge-flow assignment on a [`FlowNetwork`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    pub edge_flow: Vec<i32>,
    pub value: i64,
    pub cost: i64,
    /// Augmenting paths used by the engine that produced this flow.
    pub augmentations: usize,
}

impl Flow {
    pub fn zero(net: &FlowNetwork) -> Self {
        Self {
            edge_flow: vec![0; net.edge_count()],
            value: 0,
            cost: 0,
            augmentations: 0,
        }
    }

    pub fn from_edge_flow(net: &FlowNetwork, edge_flow: Vec<i32>) -> Self {
        let value = net.value_of(&edge_flow);
        let cost = net.cost_of(&edge_flow);
        Self {
            edge_flow,
            value,
            cost,
            augmentations: 0,
        }
    }
}

/// Residual graph with CSR adjacency ordered by head node id.
struct Residual<'a> {
    net: &'a FlowNetwork,
    cap: Vec<i32>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
}

impl<'a> Residual<'a> {
    fn new(net: &'a FlowNetwork) -> Self {
        let m = net.edge_count();
        let mut cap = Vec::with_capacity(2 * m);
        for e in net.edges() {
            cap.push(e.capacity);
            cap.push(0);
        }
        let nodes = net.node_count();
        let mut start = vec![0u32; nodes + 1];
        for e in net.edges() {
            start[e.from as usize + 1] += 1;
            start[e.to as usize + 1] += 1;
        }
        for i in 0..nodes {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut adj = vec![0u32; 2 * m];
        for (id, e) in net.edges().iter().enumerate() {
            let f = &mut fill[e.from as usize];
            adj[*f as usize] = 2 * id as u32;
            *f += 1;
            let b = &mut fill[e.to as usize];
            adj[*b as usize] = 2 * id as u32 + 1;
            *b += 1;
        }
        let mut res = Self {
            net,
            cap,
            adj_start: start,
            adj,
        };
        for v in 0..nodes {
            let (a, b) = (res.adj_start[v] as usize, res.adj_start[v + 1] as usize);
            let mut slice = res.adj[a..b].to_vec();
            slice.sort_by_key(|&arc| (res.head(arc), arc));
            res.adj[a..b].copy_from_slice(&slice);
        }
        res
    }

    #[inline]
    fn head(&self, arc: u32) -> usize {
        let e = &self.net.edges[(arc >> 1) as usize];
        if arc & 1 == 0 {
            e.to as usize
        } else {
            e.from as usize
        }
    }

    #[inline]
    fn tail(&self, arc: u32) -> usize {
        self.head(arc ^ 1)
    }

    #[inline]
    fn cost(&self, arc: u32) -> i64 {
        let c = self.net.edges[(arc >> 1) as usize].cost as i64;
        if arc & 1 == 0 {
            c
        } else {
            -c
        }
    }

    #[inline]
    fn arcs(&self, v: usize) -> &[u32] {
        &self.adj[self.adj_start[v] as usize..self.adj_start[v + 1] as usize]
    }

    fn bottleneck(&self, pred: &[u32]) -> i32 {
        let mut delta = i32::MAX;
        let mut v = self.net.sink;
        while v != self.net.source {
            let arc = pred[v];
            delta = delta.min(self.cap[arc as usize]);
            v = self.tail(arc);
        }
        delta
    }

    fn augment(&mut self, pred: &[u32], delta: i32) {
        let mut v = self.net.sink;
        while v != self.net.source {
            let arc = pred[v];
            self.cap[arc as usize] -= delta;
            self.cap[(arc ^ 1) as usize] += delta;
            v = self.tail(arc);
        }
    }

    fn into_flow(self, augmentations: usize) -> Flow {
        let edge_flow: Vec<i32> = (0..self.net.edge_count())
            .map(|e| self.cap[2 * e + 1])
            .collect();
        let mut flow = Flow::from_edge_flow(self.net, edge_flow);
        flow.augmentations = augmentations;
        flow
    }
}

/// Maximum flow by Edmonds–Karp (breadth-first shortest augmenting paths).
/// Costs are ignored.
pub fn max_flow(net: &FlowNetwork) -> Flow {
    let mut res = Residual::new(net);
    let nodes = net.node_count();
    let (source, sink) = (net.source(), net.sink());
    let mut pred = vec![NO_ARC; nodes];
    let mut queue = VecDeque::new();
    let mut augmentations = 0;
    if source == sink {
        return res.into_flow(0);
    }
    loop {
        pred.fill(NO_ARC);
        queue.clear();
        queue.push_back(source);
        let mut reached = false;
        'bfs: while let Some(u) = queue.pop_front() {
            for &arc in res.arcs(u) {
                if res.cap[arc as usize] <= 0 {
                    continue;
                }
                let w = res.head(arc);
                if w == source || pred[w] != NO_ARC {
                    continue;
                }
                pred[w] = arc;
                if w == sink {
                    reached = true;
                    break 'bfs;
                }
                queue.push_back(w);
            }
        }
        if !reached {
            break;
        }
        let delta = res.bottleneck(&pred);
        res.augment(&pred, delta);
        augmentations += 1;
    }
    res.into_flow(augmentations)
}

/// Minimum-cost maximum flow by successive shortest paths with node
/// potentials (Dijkstra on reduced costs). Requires nonnegative costs.
pub fn min_cost_max_flow(net: &FlowNetwork) -> Result<Flow, FlowError> {
    for (id, e) in net.edges().iter().enumerate() {
        if e.cost < 0 {
            return Err(FlowError::NegativeCost {
                edge: id,
                cost: e.cost,
            });
        }
        if e.capacity < 0 {
            return Err(FlowError::NegativeCapacity {
                edge: id,
                capacity: e.capacity,
            });
        }
    }
    let mut res = Residual::new(net);
    let nodes = net.node_count();
    let (source, sink) = (net.source(), net.sink());
    if source == sink {
        return Ok(res.into_flow(0));
    }
    // Zero potentials are valid while every residual arc is a forward arc
    // with nonnegative cost.
    let mut potential = vec![0i64; nodes];
    let mut dist = vec![i64::MAX; nodes];
    let mut pred = vec![NO_ARC; nodes];
    let mut done = vec![false; nodes];
    let mut heap = BinaryHeap::new();
    let mut augmentations = 0;
    loop {
        dist.fill(i64::MAX);
        pred.fill(NO_ARC);
        done.fill(false);
        heap.clear();
        dist[source] = 0;
        heap.push(Reverse((0i64, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &arc in res.arcs(u) {
                if res.cap[arc as usize] <= 0 {
                    continue;
                }
                let w = res.head(arc);
                if done[w] {
                    continue;
                }
                let reduced = res.cost(arc) + potential[u] - potential[w];
                debug_assert!(reduced >= 0, "negative reduced cost on arc {arc}");
                let nd = d + reduced;
                if nd < dist[w] {
                    dist[w] = nd;
                    pred[w] = arc;
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        if dist[sink] == i64::MAX {
            break;
        }
        for v in 0..nodes {
            if dist[v] != i64::MAX {
                potential[v] += dist[v];
            }
        }
        let delta = res.bottleneck(&pred);
        res.augment(&pred, delta);
        augmentations += 1;
    }
    Ok(res.into_flow(augmentations))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowViolation {
    WrongLength {
        expected: usize,
        found: usize,
    },
    Negative {
        edge: usize,
        flow: i32,
    },
    OverCapacity {
        edge: usize,
        flow: i32,
        capacity: i32,
    },
    Conservation {
        node: NodeId,
        imbalance: i64,
    },
    ValueMismatch {
        source_out: i64,
        sink_in: i64,
        recorded: i64,
    },
    CostMismatch {
        computed: i64,
        recorded: i64,
    },
}

impl fmt::Display for FlowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowViolation::WrongLength { expected, found } => {
                write!(f, "flow has {found} entries for {expected} edges")
            }
            FlowViolation::Negative { edge, flow } => write!(f, "edge {edge} carries {flow} < 0"),
            FlowViolation::OverCapacity {
                edge,
                flow,
                capacity,
            } => {
                write!(f, "edge {edge} carries {flow} > capacity {capacity}")
            }
            FlowViolation::Conservation { node, imbalance } => {
                write!(f, "node {node} is unbalanced by {imbalance}")
            }
            FlowViolation::ValueMismatch {
                source_out,
                sink_in,
                recorded,
            } => write!(
                f,
                "source emits {source_out}, sink absorbs {sink_in}, recorded value {recorded}"
            ),
            FlowViolation::CostMismatch { computed, recorded } => {
                write!(f, "cost is {computed}, recorded {recorded}")
            }
        }
    }
}

/// Checks capacity bounds, conservation at non-terminals and the recorded
/// value and cost.
pub fn check_flow(net: &FlowNetwork, flow: &Flow) -> Vec<FlowViolation> {
    let mut out = Vec::new();
    if flow.edge_flow.len() != net.edge_count() {
        out.push(FlowViolation::WrongLength {
            expected: net.edge_count(),
            found: flow.edge_flow.len(),
        });
        return out;
    }
    let mut balance = vec![0i64; net.node_count()];
    for (id, (e, &f)) in net.edges().iter().zip(&flow.edge_flow).enumerate() {
        if f < 0 {
            out.push(FlowViolation::Negative { edge: id, flow: f });
        }
        if f > e.capacity {
            out.push(FlowViolation::OverCapacity {
                edge: id,
                flow: f,
                capacity: e.capacity,
            });
        }
        balance[e.from as usize] -= f as i64;
        balance[e.to as usize] += f as i64;
    }
    for (node, &b) in balance.iter().enumerate() {
        if node != net.source() && node != net.sink() && b != 0 {
            out.push(FlowViolation::Conservation { node, imbalance: b });
        }
    }
    let source_out = -balance[net.source()];
    let sink_in = balance[net.sink()];
    if source_out != sink_in || source_out != flow.value {
        out.push(FlowViolation::ValueMismatch {
            source_out,
            sink_in,
            recorded: flow.value,
        });
    }
    let computed = net.cost_of(&flow.edge_flow);
    if computed != flow.cost {
        out.push(FlowViolation::CostMismatch {
            computed,
            recorded: flow.cost,
        });
    }
    out
}

/// Splits an integral flow into `value` unit source-to-sink node paths.
///
/// At every node the lowest-id head with remaining flow is taken first.
/// Each edge appears across the returned paths exactly `f(e)` times.
pub fn decompose(net: &FlowNetwork, flow: &Flow) -> Result<Vec<Vec<NodeId>>, FlowError> {
    if flow.edge_flow.len() != net.edge_count() {
        return Err(FlowError::WrongLength {
            expected: net.edge_count(),
            found: flow.edge_flow.len(),
        });
    }
    if let Some(v) = check_flow(net, flow).first() {
        return Err(FlowError::Infeasible(v.to_string()));
    }
    let nodes = net.node_count();
    // Out-edges with positive flow, sorted by head id.
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (id, &f) in flow.edge_flow.iter().enumerate() {
        if f > 0 {
            out[net.edge(id).from as usize].push(id);
        }
    }
    for list in &mut out {
        list.sort_by_key(|&e| (net.edge(e).to, e));
    }
    let mut remaining = flow.edge_flow.clone();
    let mut cursor = vec![0usize; nodes];
    let mut on_path = vec![false; nodes];
    let mut paths = Vec::with_capacity(flow.value.max(0) as usize);
    for _ in 0..flow.value.max(0) {
        let mut path = vec![net.source()];
        on_path[net.source()] = true;
        let mut v = net.source();
        while v != net.sink() {
            while cursor[v] < out[v].len() && remaining[out[v][cursor[v]]] == 0 {
                cursor[v] += 1;
            }
            let e = *out[v]
                .get(cursor[v])
                .ok_or_else(|| FlowError::Infeasible(format!("flow stops at node {v}")))?;
            remaining[e] -= 1;
            v = net.edge(e).to as usize;
            if on_path[v] {
                return Err(FlowError::CyclicSupport(v));
            }
            on_path[v] = true;
            path.push(v);
        }
        for &u in &path {
            on_path[u] = false;
        }
        paths.push(path);
    }
    if let Some(e) = remaining.iter().position(|&r| r != 0) {
        // Leftover flow with no source-sink path is a circulation.
        return Err(FlowError::CyclicSupport(net.edge(e).from as usize));
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> FlowNetwork {
        FlowNetwork::from_tuples(3, &[(0, 1, 1, 0), (1, 2, 1, 0)], 0, 2)
    }

    fn diamond() -> FlowNetwork {
        FlowNetwork::from_tuples(
            4,
            &[(0, 1, 1, 0), (0, 2, 1, 0), (1, 3, 1, 0), (2, 3, 1, 0)],
            0,
            3,
        )
    }

    fn parallel_paths() -> FlowNetwork {
        // source 0 -> {1 (cost 1), 2 (cost 3)} -> sink 3
        FlowNetwork::from_tuples(
            4,
            &[(0, 1, 1, 1), (1, 3, 1, 0), (0, 2, 1, 3), (2, 3, 1, 0)],
            0,
            3,
        )
    }

    #[test]
    fn max_flow_small() {
        assert_eq!(max_flow(&chain()).value, 1);
        let f = max_flow(&diamond());
        assert_eq!(f.value, 2);
        assert_eq!(f.augmentations, 2);
        assert!(check_flow(&diamond(), &f).is_empty());
    }

    #[test]
    fn min_cost_picks_cheaper_path() {
        // demand 1: cap the source with a unit super-source edge
        let net = FlowNetwork::from_tuples(
            5,
            &[
                (4, 0, 1, 0),
                (0, 1, 1, 1),
                (1, 3, 1, 0),
                (0, 2, 1, 3),
                (2, 3, 1, 0),
            ],
            4,
            3,
        );
        let f = min_cost_max_flow(&net).unwrap();
        assert_eq!((f.value, f.cost), (1, 1));
        let f = min_cost_max_flow(&parallel_paths()).unwrap();
        assert_eq!((f.value, f.cost), (2, 4));
    }

    #[test]
    fn min_cost_rejects_negative_costs() {
        let net = FlowNetwork::from_tuples(2, &[(0, 1, 1, -1)], 0, 1);
        assert!(matches!(
            min_cost_max_flow(&net),
            Err(FlowError::NegativeCost { edge: 0, .. })
        ));
    }

    #[test]
    fn min_cost_uses_reverse_arcs() {
        // Classic case where the first shortest path must be partly undone.
        // 0->1->2->3 is cheapest for one unit but two units need 0->1->3 and 0->2->3.
        let net = FlowNetwork::from_tuples(
            4,
            &[
                (0, 1, 1, 0),
                (1, 2, 1, 0),
                (2, 3, 1, 0),
                (1, 3, 1, 5),
                (0, 2, 1, 5),
            ],
            0,
            3,
        );
        let f = min_cost_max_flow(&net).unwrap();
        assert_eq!((f.value, f.cost), (2, 10));
        assert!(check_flow(&net, &f).is_empty());
    }

    #[test]
    fn check_flow_reports_violations() {
        let net = diamond();
        assert!(check_flow(&net, &Flow::zero(&net)).is_empty());
        let mut f = max_flow(&net);
        f.edge_flow[0] = 2;
        let v = check_flow(&net, &f);
        assert!(v.contains(&FlowViolation::OverCapacity {
            edge: 0,
            flow: 2,
            capacity: 1
        }));
        assert!(v
            .iter()
            .any(|x| matches!(x, FlowViolation::Conservation { node: 1, .. })));
    }

    #[test]
    fn decompose_diamond() {
        let net = diamond();
        let f = max_flow(&net);
        let paths = decompose(&net, &f).unwrap();
        assert_eq!(paths, vec![vec![0, 1, 3], vec![0, 2, 3]]);
        let single = Flow::from_edge_flow(&chain(), vec![1, 1]);
        assert_eq!(decompose(&chain(), &single).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn decompose_rejects_circulation() {
        let net = FlowNetwork::from_tuples(4, &[(0, 3, 1, 0), (1, 2, 1, 0), (2, 1, 1, 0)], 0, 3);
        let f = Flow::from_edge_flow(&net, vec![1, 1, 1]);
        assert!(matches!(
            decompose(&net, &f),
            Err(FlowError::CyclicSupport(_))
        ));
    }
}
