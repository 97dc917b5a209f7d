//! Minimum-cost perfect matching between starts and goals.

use crate::graph::Instance;

/// Pairing of start index `i` with goal index `goal_of[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub goal_of: Vec<usize>,
    pub total: usize,
}

impl Assignment {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.goal_of.iter().copied().enumerate()
    }
}

/// Solves the square assignment problem on `cost` by successive shortest
/// augmenting paths with dual potentials. Runs in `O(n^3)`.
pub fn solve_assignment(cost: &[Vec<usize>]) -> Assignment {
    let n = cost.len();
    if n == 0 {
        return Assignment {
            goal_of: Vec::new(),
            total: 0,
        };
    }
    assert!(
        cost.iter().all(|row| row.len() == n),
        "cost matrix must be square"
    );
    const INF: i64 = i64::MAX / 4;
    // 1-based columns; column 0 is the virtual root of each augmentation.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        row_of[0] = row;
        let mut col0 = 0;
        let mut min_to = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = row_of[col0];
            let mut delta = INF;
            let mut next = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[r - 1][col - 1] as i64 - u[r] - v[col];
                if reduced < min_to[col] {
                    min_to[col] = reduced;
                    way[col] = col0;
                }
                if min_to[col] < delta {
                    delta = min_to[col];
                    next = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[row_of[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            col0 = next;
            if row_of[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of[col0] = row_of[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut goal_of = vec![0; n];
    for col in 1..=n {
        goal_of[row_of[col] - 1] = col - 1;
    }
    let total = goal_of.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
    Assignment { goal_of, total }
}

/// Minimum total hop distance pairing of starts with goals. Its total is a
/// lower bound on the distance travelled by any plan.
pub fn min_distance_assignment(inst: &Instance) -> Assignment {
    solve_assignment(&inst.distance_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Mode};

    #[test]
    fn single_pair() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let inst = Instance::new(g, vec![0], vec![2], Mode::Unlabeled);
        let a = min_distance_assignment(&inst);
        assert_eq!((a.goal_of.clone(), a.total), (vec![0], 2));
    }

    #[test]
    fn prefers_crossed_pairing_when_cheaper() {
        let a = solve_assignment(&[vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]]);
        assert_eq!(a.total, 5);
        assert_eq!(a.goal_of, vec![1, 0, 2]);
    }

    #[test]
    fn uniform_matrix() {
        let a = solve_assignment(&[vec![3, 3], vec![3, 3]]);
        assert_eq!(a.total, 6);
    }
}
