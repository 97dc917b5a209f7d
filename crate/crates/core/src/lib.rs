//! Multi-agent path planning on graphs by reduction to network flow.
//!
//! Agents move in lockstep on an undirected graph. In the unlabeled setting
//! any agent may end at any goal, and every instance is solvable within
//! `n + ell - 1` steps, where `ell` is the largest start-to-goal distance.
//! Planning is done by building a time-expanded network ([`timexp`]) and
//! running max-flow or min-cost flow on it ([`flow`]).
//!
//! ```
//! use mapflow::{generate::two_star, planner::solve_min_makespan};
//!
//! let inst = two_star(2, 3);
//! let result = solve_min_makespan(&inst).unwrap();
//! assert_eq!(result.objective_value, 4);
//! ```

pub mod batch;
pub mod flow;
pub mod format;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod planner;
pub mod timexp;

pub use graph::{Graph, Instance, Mode, Path, Plan};
pub use planner::{solve, Objective, PlannerError, SolveResult};
