//! Distance helpers against textbook oracles.

use mapflow::generate::random_connected_instance;
use mapflow::planner::{horizon_bound, min_distance_assignment, solve_assignment};
use mapflow::Mode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn floyd_warshall(vertex_count: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let inf = usize::MAX / 2;
    let mut d = vec![vec![inf; vertex_count]; vertex_count];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for &(u, v) in edges {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..vertex_count {
        for i in 0..vertex_count {
            for j in 0..vertex_count {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..n {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn ell_matches_all_pairs_shortest_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let v = rng.gen_range(2..=14);
        let n = rng.gen_range(1..=v / 2);
        let inst = random_connected_instance(&mut rng, v, 0.15, n, Mode::Unlabeled);
        let d = floyd_warshall(v, inst.graph.edges());
        let ell = inst
            .starts
            .iter()
            .flat_map(|&s| inst.goals.iter().map(move |&g| (s, g)));
        let ell = ell.map(|(s, g)| d[s][g]).max().unwrap();
        assert_eq!(inst.ell(), ell);
        assert_eq!(horizon_bound(&inst), n + ell - 1);
        for (i, &s) in inst.starts.iter().enumerate() {
            for (j, &g) in inst.goals.iter().enumerate() {
                assert_eq!(inst.distance_matrix()[i][j], d[s][g]);
            }
        }
    }
}

#[test]
fn assignment_matches_permutation_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let cost: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0..20)).collect())
            .collect();
        let best = permutations(n)
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(i, &j)| cost[i][j])
                    .sum::<usize>()
            })
            .min()
            .unwrap();
        let a = solve_assignment(&cost);
        assert_eq!(a.total, best);
        assert_eq!(a.pairs().map(|(i, j)| cost[i][j]).sum::<usize>(), best);
        let mut used = a.goal_of.clone();
        used.sort_unstable();
        assert_eq!(used, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn instance_assignment_uses_hop_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..50 {
        let inst = random_connected_instance(&mut rng, 10, 0.1, 4, Mode::Unlabeled);
        let d = inst.distance_matrix();
        let best = permutations(4)
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| d[i][j]).sum::<usize>())
            .min()
            .unwrap();
        assert_eq!(min_distance_assignment(&inst).total, best);
    }
}
