//! Whole-instance parallelism.
//!
//! With the `parallel` feature (on by default) the map runs on the rayon
//! thread pool; without it everything runs on the calling thread. Results
//! keep the input order either way.

use crate::graph::Instance;
use crate::planner::{solve, Objective, PlannerError, SolveResult};

#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

pub fn seq_map<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Solves every instance, in parallel when the feature is enabled.
pub fn solve_all(
    instances: &[Instance],
    objective: Objective,
) -> Vec<Result<SolveResult, PlannerError>> {
    par_map(instances, |inst| solve(inst, objective))
}

/// Solves every instance on the calling thread.
pub fn solve_all_sequential(
    instances: &[Instance],
    objective: Objective,
) -> Vec<Result<SolveResult, PlannerError>> {
    seq_map(instances, |inst| solve(inst, objective))
}

/// Runs `f` inside a pool of `threads` workers, or directly when the
/// feature is off or `threads` is `None`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
        {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::grid_corpus;
    use crate::graph::Mode;

    #[test]
    fn parallel_matches_sequential() {
        let corpus = grid_corpus(11, 12, 4, 3, Mode::Unlabeled);
        let a = solve_all(&corpus, Objective::Makespan);
        let b = solve_all_sequential(&corpus, Objective::Makespan);
        assert_eq!(a, b);
    }

    #[test]
    fn thread_pool_runs_closure() {
        assert_eq!(with_threads(Some(2), || 40 + 2), 42);
        assert_eq!(with_threads(None, || 7), 7);
    }
}
