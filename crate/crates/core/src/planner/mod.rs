//! Solvers for unlabeled and goal-replacement instances.
//!
//! Every solver builds a time-expanded network, runs a flow engine on it,
//! splits the flow into unit paths and maps those back to a [`Plan`]. The
//! returned plan is always re-checked with [`validate_plan`].

pub mod assignment;
pub mod dag;
pub mod escape;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::flow::{decompose, max_flow, min_cost_max_flow, Flow, FlowError};
use crate::graph::{validate_plan, Instance, Mode, Plan, VertexId};
use crate::timexp::{
    build_ten, project_flow_to_plan, BuildOptions, SinkMode, TenError, TimeExpandedNetwork,
};

pub use assignment::{min_distance_assignment, solve_assignment, Assignment};
pub use dag::{build_dag_schedule, DagSchedule, ExtractionStep, OrientedPathSet};
pub use escape::{default_boundary, solve_escape, EscapeError, EscapeOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("{operation} is not available for {mode} instances")]
    UnsupportedMode { mode: Mode, operation: &'static str },
    #[error("internal solver error: {0}")]
    SolverBug(String),
    #[error(transparent)]
    Network(#[from] TenError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Feasible,
    Makespan,
    Distance,
    Arrival,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Feasible => "feasible",
            Objective::Makespan => "makespan",
            Objective::Distance => "distance",
            Objective::Arrival => "arrival",
        }
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "feasible" => Ok(Objective::Feasible),
            "makespan" => Ok(Objective::Makespan),
            "distance" => Ok(Objective::Distance),
            "arrival" => Ok(Objective::Arrival),
            other => Err(format!("unknown objective '{other}'")),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub plan: Plan,
    /// Makespan, total distance or total arrival, depending on the solver.
    pub objective_value: usize,
    pub horizon_used: usize,
    /// A lower bound on the objective; equal to `objective_value` when the
    /// solver proved optimality.
    pub certificate: Option<usize>,
}

/// Earliest-arrival solution with its per-timestep arrival counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EarliestArrival {
    pub result: SolveResult,
    pub histogram: Vec<usize>,
    pub total_arrival: usize,
    pub makespan: usize,
}

/// `n + ell - 1`: every unlabeled instance is solvable within this many steps.
pub fn horizon_bound(inst: &Instance) -> usize {
    inst.agent_count() + inst.ell() - 1
}

/// `(n-1)(n-2)/2 + V`: a horizon long enough for a plan minimising total
/// arrival time.
pub fn arrival_horizon_bound(n: usize, vertex_count: usize) -> usize {
    let pairs = n.saturating_sub(1) * n.saturating_sub(2) / 2;
    pairs + vertex_count
}

/// Lower bound on the makespan from distances to the nearest goal (and, when
/// every goal must be filled, from the nearest start to each goal).
pub fn makespan_lower_bound(inst: &Instance) -> usize {
    let d = inst.distance_matrix();
    let from_starts = d
        .iter()
        .map(|row| row.iter().copied().min().unwrap_or(0))
        .max()
        .unwrap_or(0);
    if inst.mode == Mode::GoalReplacement {
        return from_starts;
    }
    let from_goals = (0..inst.agent_count())
        .map(|g| d.iter().map(|row| row[g]).min().unwrap_or(0))
        .max()
        .unwrap_or(0);
    from_starts.max(from_goals)
}

pub(crate) fn require_valid(inst: &Instance) -> Result<(), PlannerError> {
    let report = inst.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(PlannerError::InvalidInstance(report.to_string()))
    }
}

fn require_mode(
    inst: &Instance,
    allowed: &[Mode],
    operation: &'static str,
) -> Result<(), PlannerError> {
    require_valid(inst)?;
    if allowed.contains(&inst.mode) {
        Ok(())
    } else {
        Err(PlannerError::UnsupportedMode {
            mode: inst.mode,
            operation,
        })
    }
}

/// Keeps each goal-replacement agent at the first goal it reaches.
fn settle_at_first_goal(inst: &Instance, mut plan: Plan) -> Plan {
    let horizon = plan.horizon();
    for path in &mut plan.paths {
        if let Some(k) = path.vertices.iter().position(|&v| inst.is_goal(v)) {
            let g = path.vertices[k];
            path.vertices.truncate(k + 1);
            path.vertices.resize(horizon + 1, g);
        }
    }
    plan
}

fn checked(inst: &Instance, plan: Plan) -> Result<Plan, PlannerError> {
    let verdict = validate_plan(inst, &plan).map_err(|e| PlannerError::SolverBug(e.to_string()))?;
    match verdict.first() {
        Some(v) => Err(PlannerError::SolverBug(format!(
            "flow projected to an invalid plan: {v}"
        ))),
        None => Ok(plan),
    }
}

/// Runs a flow engine at one horizon; `None` when fewer than `n` units fit.
fn flow_at(
    inst: &Instance,
    horizon: usize,
    opts: BuildOptions,
    min_cost: bool,
) -> Result<Option<(Plan, Flow, TimeExpandedNetwork)>, PlannerError> {
    let ten = build_ten(inst, horizon, opts)?;
    let flow = if min_cost {
        min_cost_max_flow(ten.network())?
    } else {
        max_flow(ten.network())
    };
    if flow.value < inst.agent_count() as i64 {
        return Ok(None);
    }
    let units = decompose(ten.network(), &flow)?;
    let mut plan = project_flow_to_plan(inst, &ten, &units)?;
    if inst.mode == Mode::GoalReplacement {
        plan = settle_at_first_goal(inst, plan);
    }
    Ok(Some((checked(inst, plan)?, flow, ten)))
}

/// Maximum flow value on the `horizon`-step network, without extracting a
/// plan. Values below `n` mean no plan fits in `horizon` steps.
pub fn probe_flow_value(inst: &Instance, horizon: usize) -> Result<usize, PlannerError> {
    require_mode(
        inst,
        &[Mode::Unlabeled, Mode::GoalReplacement],
        "flow probe",
    )?;
    let ten = build_ten(inst, horizon, BuildOptions::for_mode(inst.mode))?;
    Ok(max_flow(ten.network()).value as usize)
}

/// Any valid plan within `n + ell - 1` steps.
pub fn solve_feasible(inst: &Instance) -> Result<SolveResult, PlannerError> {
    require_mode(
        inst,
        &[Mode::Unlabeled, Mode::GoalReplacement],
        "feasibility",
    )?;
    let horizon = horizon_bound(inst);
    let (plan, _, _) = flow_at(inst, horizon, BuildOptions::for_mode(inst.mode), false)?
        .ok_or_else(|| {
            PlannerError::SolverBug(format!("no plan fits the horizon bound {horizon}"))
        })?;
    Ok(SolveResult {
        objective_value: plan.makespan(),
        horizon_used: horizon,
        certificate: None,
        plan,
    })
}

/// Minimum-makespan plan by binary search over the horizon.
pub fn solve_min_makespan(inst: &Instance) -> Result<SolveResult, PlannerError> {
    require_mode(
        inst,
        &[Mode::Unlabeled, Mode::GoalReplacement],
        "makespan minimisation",
    )?;
    let opts = BuildOptions::for_mode(inst.mode);
    let lower = makespan_lower_bound(inst).max(1);
    let upper = horizon_bound(inst);
    let mut found: BTreeMap<usize, Plan> = BTreeMap::new();
    let (mut lo, mut hi) = (lower, upper);
    // invariant: horizons below `lo` are infeasible, `hi` is feasible
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match flow_at(inst, mid, opts, false)? {
            Some((plan, _, _)) => {
                found.insert(mid, plan);
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let best = lo;
    let plan = match found.remove(&best) {
        Some(p) => p,
        None => {
            flow_at(inst, best, opts, false)?
                .ok_or_else(|| {
                    PlannerError::SolverBug(format!("no plan fits the horizon bound {best}"))
                })?
                .0
        }
    };
    if plan.makespan() != best {
        return Err(PlannerError::SolverBug(format!(
            "plan at horizon {best} settles at {}",
            plan.makespan()
        )));
    }
    Ok(SolveResult {
        objective_value: best,
        horizon_used: best,
        certificate: Some(best),
        plan,
    })
}

/// Minimum total-distance plan within `n + ell - 1` steps. Waiting is free,
/// so the flow cost counts edge traversals only.
pub fn solve_min_total_distance(inst: &Instance) -> Result<SolveResult, PlannerError> {
    require_mode(inst, &[Mode::Unlabeled], "distance minimisation")?;
    let horizon = horizon_bound(inst);
    let opts = BuildOptions {
        holdover_cost: 0,
        ..BuildOptions::for_mode(inst.mode)
    };
    let (plan, flow, _) = flow_at(inst, horizon, opts, true)?.ok_or_else(|| {
        PlannerError::SolverBug(format!("no plan fits the horizon bound {horizon}"))
    })?;
    let lower = min_distance_assignment(inst).total;
    let value = plan.total_distance();
    if value as i64 != flow.cost || value != lower {
        return Err(PlannerError::SolverBug(format!(
            "distance {value}, flow cost {}, assignment bound {lower} disagree",
            flow.cost
        )));
    }
    Ok(SolveResult {
        objective_value: value,
        horizon_used: horizon,
        certificate: Some(lower),
        plan,
    })
}

fn arrival_options() -> BuildOptions {
    BuildOptions {
        holdover_cost: 1,
        sink_mode: SinkMode::EveryLayerArrivalCost,
        goal_replacement: true,
    }
}

fn earliest_arrival_at(
    inst: &Instance,
    horizon: usize,
) -> Result<Option<EarliestArrival>, PlannerError> {
    let Some((plan, flow, _)) = flow_at(inst, horizon, arrival_options(), true)? else {
        return Ok(None);
    };
    // Every step costs one unit and leaving at layer t costs t more.
    let total_arrival = plan.total_arrival();
    if flow.cost != 2 * total_arrival as i64 {
        return Err(PlannerError::SolverBug(format!(
            "flow cost {} does not match total arrival {total_arrival}",
            flow.cost
        )));
    }
    let makespan = plan.makespan();
    Ok(Some(EarliestArrival {
        histogram: plan.arrival_histogram(),
        result: SolveResult {
            objective_value: total_arrival,
            horizon_used: horizon,
            certificate: None,
            plan,
        },
        total_arrival,
        makespan,
    }))
}

/// Goal-replacement plan that lets as many agents as possible arrive at each
/// timestep, earliest timesteps first.
pub fn solve_earliest_arrival(inst: &Instance) -> Result<EarliestArrival, PlannerError> {
    require_mode(inst, &[Mode::GoalReplacement], "earliest arrival")?;
    let horizon = horizon_bound(inst);
    earliest_arrival_at(inst, horizon)?
        .ok_or_else(|| PlannerError::SolverBug(format!("no plan fits the horizon bound {horizon}")))
}

/// Dispatches on `objective` using the default horizon.
pub fn solve(inst: &Instance, objective: Objective) -> Result<SolveResult, PlannerError> {
    match objective {
        Objective::Feasible => solve_feasible(inst),
        Objective::Makespan => solve_min_makespan(inst),
        Objective::Distance => solve_min_total_distance(inst),
        Objective::Arrival => solve_earliest_arrival(inst).map(|ea| ea.result),
    }
}

/// Solves at a caller-chosen horizon; `None` when no plan fits.
///
/// The makespan objective searches horizons up to `horizon`.
pub fn solve_at_horizon(
    inst: &Instance,
    objective: Objective,
    horizon: usize,
) -> Result<Option<SolveResult>, PlannerError> {
    let modes: &[Mode] = match objective {
        Objective::Feasible | Objective::Makespan => &[Mode::Unlabeled, Mode::GoalReplacement],
        Objective::Distance => &[Mode::Unlabeled],
        Objective::Arrival => &[Mode::GoalReplacement],
    };
    require_mode(inst, modes, "solving")?;
    if horizon == 0 {
        return Err(TenError::HorizonTooSmall.into());
    }
    let opts = BuildOptions::for_mode(inst.mode);
    let result = match objective {
        Objective::Feasible => {
            flow_at(inst, horizon, opts, false)?.map(|(plan, _, _)| SolveResult {
                objective_value: plan.makespan(),
                horizon_used: horizon,
                certificate: None,
                plan,
            })
        }
        Objective::Makespan => {
            if flow_at(inst, horizon, opts, false)?.is_none() {
                return Ok(None);
            }
            let mut r = if horizon >= horizon_bound(inst) {
                solve_min_makespan(inst)?
            } else {
                let mut best = None;
                for t in makespan_lower_bound(inst).max(1)..=horizon {
                    if let Some((plan, _, _)) = flow_at(inst, t, opts, false)? {
                        best = Some(SolveResult {
                            objective_value: t,
                            horizon_used: t,
                            certificate: Some(t),
                            plan,
                        });
                        break;
                    }
                }
                best.ok_or_else(|| PlannerError::SolverBug("feasible horizon lost".into()))?
            };
            r.plan = r.plan.with_horizon(horizon);
            r.horizon_used = horizon;
            Some(r)
        }
        Objective::Distance => {
            let opts = BuildOptions {
                holdover_cost: 0,
                ..opts
            };
            flow_at(inst, horizon, opts, true)?.map(|(plan, _, _)| SolveResult {
                objective_value: plan.total_distance(),
                horizon_used: horizon,
                certificate: Some(min_distance_assignment(inst).total),
                plan,
            })
        }
        Objective::Arrival => earliest_arrival_at(inst, horizon)?.map(|ea| ea.result),
    };
    Ok(result)
}

/// Goal assigned to each agent by a plan (its final vertex).
pub fn final_positions(plan: &Plan) -> Vec<VertexId> {
    plan.paths
        .iter()
        .map(|p| *p.vertices.last().expect("non-empty path"))
        .collect()
}
