//! Vertex-disjoint escape routes from a set of cells to the boundary.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::flow::{max_flow, Edge, FlowNetwork};
use crate::graph::{Graph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EscapeError {
    #[error("evader vertex {0} is not in the graph")]
    EvaderOffGraph(VertexId),
    #[error("boundary vertex {0} is not in the graph")]
    BoundaryOffGraph(VertexId),
    #[error("evader vertex {0} is listed twice")]
    DuplicateEvader(VertexId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EscapeOutcome {
    /// One path per evader, in evader order, pairwise vertex-disjoint and
    /// ending at distinct boundary vertices.
    Feasible(Vec<Vec<VertexId>>),
    /// At most `max_escapes` evaders can leave at once.
    Infeasible { max_escapes: usize },
}

impl EscapeOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, EscapeOutcome::Feasible(_))
    }
}

/// Frame cells for graphs loaded from a grid, otherwise vertices of degree
/// below four.
pub fn default_boundary(graph: &Graph) -> Vec<VertexId> {
    match graph.grid_shape() {
        Some(shape) => (0..graph.vertex_count())
            .filter(|&v| {
                let (r, c) = shape.coords[v];
                r == 0 || c == 0 || r + 1 == shape.rows || c + 1 == shape.cols
            })
            .collect(),
        None => (0..graph.vertex_count())
            .filter(|&v| graph.degree(v) < 4)
            .collect(),
    }
}

/// Decides whether every evader can reach its own boundary vertex along
/// pairwise vertex-disjoint paths.
///
/// Each vertex is split into an in/out pair joined by a unit edge; the
/// source feeds the evaders' in-nodes and boundary out-nodes drain into the
/// sink.
pub fn solve_escape(
    graph: &Graph,
    evaders: &[VertexId],
    boundary: &[VertexId],
) -> Result<EscapeOutcome, EscapeError> {
    let vc = graph.vertex_count();
    let mut seen = BTreeSet::new();
    for &e in evaders {
        if e >= vc {
            return Err(EscapeError::EvaderOffGraph(e));
        }
        if !seen.insert(e) {
            return Err(EscapeError::DuplicateEvader(e));
        }
    }
    if let Some(&b) = boundary.iter().find(|&&b| b >= vc) {
        return Err(EscapeError::BoundaryOffGraph(b));
    }
    let is_boundary: BTreeSet<VertexId> = boundary.iter().copied().collect();
    let source = 0;
    let sink = 2 * vc + 1;
    let in_node = |v: VertexId| 1 + 2 * v;
    let out_node = |v: VertexId| 2 + 2 * v;
    let unit = |from: usize, to: usize| Edge {
        from: from as u32,
        to: to as u32,
        capacity: 1,
        cost: 0,
    };
    let mut edges = Vec::new();
    for &e in evaders {
        edges.push(unit(source, in_node(e)));
    }
    for v in 0..vc {
        edges.push(unit(in_node(v), out_node(v)));
        // Paths end at the first boundary vertex they reach.
        if is_boundary.contains(&v) {
            edges.push(unit(out_node(v), sink));
        } else {
            for &(w, _) in graph.neighbors(v) {
                edges.push(unit(out_node(v), in_node(w)));
            }
        }
    }
    let net = FlowNetwork::new(sink + 1, edges, source, sink);
    let flow = max_flow(&net);
    if (flow.value as usize) < evaders.len() {
        return Ok(EscapeOutcome::Infeasible {
            max_escapes: flow.value as usize,
        });
    }
    // Every node carries at most one unit, so each evader's unit can be
    // followed edge by edge; circulations away from the evaders are ignored.
    let mut paths = Vec::with_capacity(evaders.len());
    for &e in evaders {
        let mut path = vec![e];
        let mut node = out_node(e);
        loop {
            let next = net
                .out_edges(node)
                .find(|&id| flow.edge_flow[id] > 0)
                .map(|id| net.edge(id).to as usize)
                .expect("conservation at split nodes");
            if next == sink {
                break;
            }
            let w = (next - 1) / 2;
            path.push(w);
            node = out_node(w);
        }
        paths.push(path);
    }
    Ok(EscapeOutcome::Feasible(paths))
}

/// Checks that `paths` is a valid escape for `evaders`.
pub fn check_escape(
    graph: &Graph,
    evaders: &[VertexId],
    boundary: &[VertexId],
    paths: &[Vec<VertexId>],
) -> bool {
    let is_boundary: BTreeSet<VertexId> = boundary.iter().copied().collect();
    let mut used = BTreeSet::new();
    paths.len() == evaders.len()
        && paths.iter().zip(evaders).all(|(p, &e)| {
            p.first() == Some(&e)
                && p.last().is_some_and(|b| is_boundary.contains(b))
                && p.windows(2).all(|w| graph.has_edge(w[0], w[1]))
                && p.iter().all(|&v| used.insert(v))
        })
}
