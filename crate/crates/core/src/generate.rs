//! Seeded instance generators for tests, benchmarks and batch runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, Instance, Mode};

/// `n` start leaves on one hub, `n` goal leaves on another, hubs joined by a
/// path of `ell - 2` edges, so every start is exactly `ell` from every goal.
///
/// All agents must squeeze through the hub path one after another, which
/// makes `n + ell - 1` steps both necessary and sufficient.
pub fn two_star(n: usize, ell: usize) -> Instance {
    assert!(n >= 1 && ell >= 3, "two-star needs n >= 1 and ell >= 3");
    // layout: start leaves, hub path c1..c2, goal leaves
    let hubs = ell - 1;
    let c1 = n;
    let c2 = n + hubs - 1;
    let vertex_count = 2 * n + hubs;
    let mut edges = Vec::new();
    for s in 0..n {
        edges.push((s, c1));
    }
    for h in c1..c2 {
        edges.push((h, h + 1));
    }
    let goals: Vec<_> = (c2 + 1..vertex_count).collect();
    for &g in &goals {
        edges.push((c2, g));
    }
    let graph = Graph::new(vertex_count, &edges).expect("two-star edges are simple");
    Instance::new(graph, (0..n).collect(), goals, Mode::Unlabeled)
}

/// Four agents on a chain `s1 - s2 - s3 - s4` with a goal hanging off each
/// of `s2, s3, s4` and a fourth goal reached from `s1` by a detour of length
/// three that also touches `s4`.
///
/// Either three agents step straight into their goals and `s1` takes the
/// detour (total arrival 6, makespan 3, distance 6), or the whole chain
/// shifts by one and every agent needs two steps (total 8, makespan 2,
/// distance 8). No plan gets the best of both.
pub fn four_agent_tradeoff() -> Instance {
    // s1..s4 = 0..4, g1..g4 = 4..8, detour a = 8, b = 9
    let edges = [
        (0, 1),
        (1, 2),
        (2, 3),
        (1, 5),
        (2, 6),
        (3, 7),
        (0, 8),
        (8, 9),
        (9, 4),
        (3, 9),
    ];
    let graph = Graph::new(10, &edges).expect("fixture edges are simple");
    Instance::new(graph, vec![0, 1, 2, 3], vec![4, 5, 6, 7], Mode::Unlabeled)
}

/// Shape of a random grid instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    pub agents: usize,
    /// Probability that a cell is blocked.
    pub obstacle_density: f64,
    pub mode: Mode,
}

/// Random grid instance whose free cells form one connected region of at
/// least `2 * agents` cells. Retries obstacle layouts until one fits.
pub fn random_grid_instance<R: Rng>(rng: &mut R, cfg: &GridConfig) -> Instance {
    assert!(
        cfg.rows * cfg.cols >= 2 * cfg.agents,
        "grid too small for the agents"
    );
    loop {
        let blocked: Vec<bool> = (0..cfg.rows * cfg.cols)
            .map(|_| rng.gen_bool(cfg.obstacle_density))
            .collect();
        let graph = Graph::grid(cfg.rows, cfg.cols, |r, c| blocked[r * cfg.cols + c]);
        if graph.vertex_count() < 2 * cfg.agents || !graph.is_connected() {
            continue;
        }
        let mut cells: Vec<usize> = (0..graph.vertex_count()).collect();
        cells.shuffle(rng);
        let starts = cells[..cfg.agents].to_vec();
        let goals = cells[cfg.agents..2 * cfg.agents].to_vec();
        return Instance::new(graph, starts, goals, cfg.mode);
    }
}

/// Random connected graph on `vertex_count` vertices: a random spanning tree
/// plus each remaining pair with probability `extra_edge_probability`.
pub fn random_connected_graph<R: Rng>(
    rng: &mut R,
    vertex_count: usize,
    extra_edge_probability: f64,
) -> Graph {
    let mut order: Vec<usize> = (0..vertex_count).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..vertex_count {
        let j = rng.gen_range(0..i);
        edges.push((order[i].min(order[j]), order[i].max(order[j])));
    }
    for u in 0..vertex_count {
        for v in u + 1..vertex_count {
            if !edges.contains(&(u, v)) && rng.gen_bool(extra_edge_probability) {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    Graph::new(vertex_count, &edges).expect("generated edges are simple")
}

pub fn random_connected_instance<R: Rng>(
    rng: &mut R,
    vertex_count: usize,
    extra_edge_probability: f64,
    agents: usize,
    mode: Mode,
) -> Instance {
    let graph = random_connected_graph(rng, vertex_count, extra_edge_probability);
    let mut cells: Vec<usize> = (0..vertex_count).collect();
    cells.shuffle(rng);
    let starts = cells[..agents].to_vec();
    let goals = cells[agents..2 * agents].to_vec();
    Instance::new(graph, starts, goals, mode)
}

/// `count` grid instances with sizes drawn uniformly from the given ranges,
/// reproducible from `seed`.
pub fn grid_corpus(
    seed: u64,
    count: usize,
    max_side: usize,
    max_agents: usize,
    mode: Mode,
) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rows = rng.gen_range(2..=max_side);
            let cols = rng.gen_range(2..=max_side);
            let cap = max_agents.min(rows * cols / 3).max(1);
            let cfg = GridConfig {
                rows,
                cols,
                agents: rng.gen_range(1..=cap),
                obstacle_density: 0.15,
                mode,
            };
            random_grid_instance(&mut rng, &cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_star_distances() {
        for n in 1..=4 {
            for ell in 3..=5 {
                let inst = two_star(n, ell);
                assert!(inst.validate().is_valid());
                assert!(inst.distance_matrix().iter().flatten().all(|&d| d == ell));
            }
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = grid_corpus(7, 10, 5, 4, Mode::Unlabeled);
        let b = grid_corpus(7, 10, 5, 4, Mode::Unlabeled);
        assert_eq!(a.len(), 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(
                (&x.starts, &x.goals, &x.graph),
                (&y.starts, &y.goals, &y.graph)
            );
            assert!(x.validate().is_valid());
        }
    }

    #[test]
    fn random_graphs_connect() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for v in 2..10 {
            assert!(random_connected_graph(&mut rng, v, 0.3).is_connected());
        }
    }
}
