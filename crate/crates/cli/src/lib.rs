//! Command-line front end for the `mapflow` planners.
//!
//! [`run`] takes the argument list and two output streams and returns the
//! process exit code, so the binary is a thin wrapper and tests can drive
//! every command in-process.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mapflow::batch::{par_map, with_threads};
use mapflow::format::{agents_by_start, format_vertex, parse_instance, parse_plan, print_plan};
use mapflow::graph::validate_plan;
use mapflow::oracle::{Oracle, OracleError};
use mapflow::planner::{
    arrival_horizon_bound, default_boundary, horizon_bound, makespan_lower_bound,
    min_distance_assignment, solve_at_horizon, solve_earliest_arrival, solve_escape, EscapeOutcome,
};
use mapflow::{solve, Instance, Mode, Objective, Plan, PlannerError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVALID_PLAN: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "mapflow",
    version,
    about = "Unlabeled multi-agent path planning by network flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Feasible,
    Makespan,
    Distance,
    Arrival,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Feasible => Objective::Feasible,
            ObjectiveArg::Makespan => Objective::Makespan,
            ObjectiveArg::Distance => Objective::Distance,
            ObjectiveArg::Arrival => Objective::Arrival,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan paths for an instance file.
    Solve {
        #[arg(long, value_enum, default_value = "makespan")]
        objective: ObjectiveArg,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Write the plan here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Plan over exactly this many steps instead of the default bound.
        #[arg(long, value_name = "T")]
        horizon: Option<usize>,
    },
    /// Check a plan file against an instance file.
    Verify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        plan: PathBuf,
    },
    /// Route the agents (as evaders) to distinct boundary cells.
    Escape {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Exact optimum by exhaustive search, for small instances.
    Oracle {
        #[arg(long, value_enum, default_value = "makespan")]
        objective: ObjectiveArg,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Largest number of joint configurations to explore.
        #[arg(long, default_value_t = mapflow::oracle::DEFAULT_STATE_LIMIT)]
        state_limit: u128,
    },
    /// Size and bound summary of an instance.
    Stats {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Solve every instance file in a directory.
    Batch {
        #[arg(long, value_name = "DIR")]
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "makespan")]
        objective: ObjectiveArg,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Error carrying the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<String, Failure>;

fn planner_failure(e: PlannerError) -> Failure {
    match e {
        PlannerError::UnsupportedMode {
            mode: Mode::Labeled,
            ..
        } => Failure::new(EXIT_INFEASIBLE, e.to_string()),
        PlannerError::UnsupportedMode { .. } | PlannerError::InvalidInstance(_) => {
            Failure::new(EXIT_INPUT, e.to_string())
        }
        other => Failure::new(EXIT_INFEASIBLE, other.to_string()),
    }
}

fn oracle_failure(e: OracleError) -> Failure {
    match e {
        OracleError::GuardExceeded { .. } | OracleError::EscapeTooLarge { .. } => {
            Failure::new(EXIT_GUARD, e.to_string())
        }
        OracleError::UnsupportedMode(_) | OracleError::StepCapReached(_) => {
            Failure::new(EXIT_INFEASIBLE, e.to_string())
        }
        OracleError::InvalidInstance(_) => Failure::new(EXIT_INPUT, e.to_string()),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = read_text(path)?;
    parse_instance(&text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn cmd_solve(
    input: &Path,
    objective: Objective,
    out: Option<&Path>,
    horizon: Option<usize>,
) -> Outcome {
    let inst = load_instance(input)?;
    let result = match horizon {
        None => solve(&inst, objective).map_err(planner_failure)?,
        Some(t) => solve_at_horizon(&inst, objective, t)
            .map_err(planner_failure)?
            .ok_or_else(|| Failure::new(EXIT_INFEASIBLE, format!("no plan within horizon {t}")))?,
    };
    let text = print_plan(&inst, &result.plan);
    match out {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
            let s = result.plan.stats();
            Ok(format!(
                "wrote {} makespan {} total_distance {} total_arrival {}\n",
                path.display(),
                s.makespan,
                s.total_distance,
                s.total_arrival
            ))
        }
        None => Ok(text),
    }
}

/// Rebuilds instance and plan with agents numbered by plan row, so
/// diagnostics refer to lines of the plan file.
fn by_plan_row(inst: &Instance, plan: &Plan) -> (Instance, Plan) {
    let order = agents_by_start(inst);
    let starts = order.iter().map(|&a| inst.starts[a]).collect();
    let goals = order.iter().map(|&a| inst.goals[a]).collect();
    let paths = order.iter().map(|&a| plan.paths[a].clone()).collect();
    (
        Instance::new(inst.graph.clone(), starts, goals, inst.mode),
        Plan::new(paths),
    )
}

fn cmd_verify(input: &Path, plan_path: &Path) -> Outcome {
    let inst = load_instance(input)?;
    let text = read_text(plan_path)?;
    let plan = parse_plan(&inst, &text)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", plan_path.display())))?;
    let (inst, plan) = by_plan_row(&inst, &plan);
    let verdict = validate_plan(&inst, &plan)
        .map_err(|e| Failure::new(EXIT_INVALID_PLAN, format!("invalid: {e}")))?;
    if let Some(v) = verdict.first() {
        return Err(Failure::new(EXIT_INVALID_PLAN, format!("invalid: {v}")));
    }
    let s = plan.stats();
    Ok(format!(
        "valid makespan {} total_distance {} total_arrival {}\n",
        s.makespan, s.total_distance, s.total_arrival
    ))
}

fn cmd_escape(input: &Path) -> Outcome {
    let inst = load_instance(input)?;
    let boundary = default_boundary(&inst.graph);
    let outcome = solve_escape(&inst.graph, &inst.starts, &boundary)
        .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    match outcome {
        EscapeOutcome::Feasible(paths) => {
            let mut out = format!("escape feasible {}\n", paths.len());
            for path in paths {
                let row: Vec<String> = path.iter().map(|&v| format_vertex(&inst, v)).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
            Ok(out)
        }
        EscapeOutcome::Infeasible { max_escapes } => Err(Failure::new(
            EXIT_INFEASIBLE,
            format!(
                "escape infeasible: at most {max_escapes} of {} evaders can leave",
                inst.agent_count()
            ),
        )),
    }
}

fn cmd_oracle(input: &Path, objective: Objective, state_limit: u128) -> Outcome {
    let inst = load_instance(input)?;
    let oracle = Oracle::new(state_limit);
    let mut out = String::new();
    let optimum = match objective {
        Objective::Feasible | Objective::Makespan => oracle.min_makespan(&inst),
        Objective::Distance => oracle.min_total_distance(&inst),
        Objective::Arrival if inst.mode == Mode::GoalReplacement => {
            let gr = oracle.goal_replacement(&inst).map_err(oracle_failure)?;
            let hist: Vec<String> = gr.histogram.iter().map(usize::to_string).collect();
            writeln!(out, "arrival_histogram {}", hist.join(" ")).unwrap();
            writeln!(out, "min_makespan {}", gr.min_makespan.value).unwrap();
            Ok(gr.min_total_arrival)
        }
        Objective::Arrival => oracle.min_total_arrival(&inst),
    }
    .map_err(oracle_failure)?;
    let name = match objective {
        Objective::Feasible | Objective::Makespan => "makespan",
        Objective::Distance => "total_distance",
        Objective::Arrival => "total_arrival",
    };
    writeln!(out, "optimal {name} {}", optimum.value).unwrap();
    out.push_str(&print_plan(&inst, &optimum.plan));
    Ok(out)
}

fn cmd_stats(input: &Path) -> Outcome {
    let inst = load_instance(input)?;
    let n = inst.agent_count();
    let v = inst.graph.vertex_count();
    let mut out = String::new();
    writeln!(out, "mode {}", inst.mode.as_str()).unwrap();
    writeln!(out, "n {n}").unwrap();
    writeln!(out, "V {v}").unwrap();
    writeln!(out, "E {}", inst.graph.edge_count()).unwrap();
    writeln!(out, "ell {}", inst.ell()).unwrap();
    writeln!(out, "horizon_bound {}", horizon_bound(&inst)).unwrap();
    writeln!(out, "arrival_horizon_bound {}", arrival_horizon_bound(n, v)).unwrap();
    writeln!(out, "makespan_lower_bound {}", makespan_lower_bound(&inst)).unwrap();
    if inst.mode != Mode::GoalReplacement {
        writeln!(
            out,
            "distance_lower_bound {}",
            min_distance_assignment(&inst).total
        )
        .unwrap();
    }
    if inst.mode == Mode::GoalReplacement {
        if let Ok(ea) = solve_earliest_arrival(&inst) {
            let used = ea
                .histogram
                .iter()
                .rposition(|&c| c > 0)
                .map_or(0, |i| i + 1);
            let hist: Vec<String> = ea.histogram[..used].iter().map(usize::to_string).collect();
            writeln!(out, "earliest_arrival_histogram {}", hist.join(" ")).unwrap();
        }
    }
    Ok(out)
}

fn batch_line(path: &Path, objective: Objective) -> (i32, String) {
    let name = path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    let solved =
        load_instance(path).and_then(|inst| solve(&inst, objective).map_err(planner_failure));
    match solved {
        Ok(r) => {
            let s = r.plan.stats();
            let line = format!(
                "{name} ok {} {} makespan {} total_distance {} total_arrival {}",
                objective, r.objective_value, s.makespan, s.total_distance, s.total_arrival
            );
            (EXIT_OK, line)
        }
        Err(f) => (f.code, format!("{name} error {}", f.message)),
    }
}

fn cmd_batch(
    dir: &Path,
    objective: Objective,
    jobs: Option<usize>,
) -> Result<(i32, String), Failure> {
    let entries = fs::read_dir(dir)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            p.is_file()
                && !p
                    .file_name()
                    .is_some_and(|n| n.to_string_lossy().starts_with('.'))
        })
        .collect();
    files.sort();
    let lines = with_threads(jobs, || par_map(&files, |p| batch_line(p, objective)));
    let code = lines
        .iter()
        .map(|(c, _)| *c)
        .find(|&c| c != EXIT_OK)
        .unwrap_or(EXIT_OK);
    let mut out = String::new();
    for (_, line) in &lines {
        writeln!(out, "{line}").unwrap();
    }
    let solved = lines.iter().filter(|(c, _)| *c == EXIT_OK).count();
    writeln!(out, "solved {solved} of {}", lines.len()).unwrap();
    Ok((code, out))
}

/// Runs one command. `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve {
            objective,
            input,
            out,
            horizon,
        } => cmd_solve(&input, objective.into(), out.as_deref(), horizon).map(|s| (EXIT_OK, s)),
        Command::Verify { input, plan } => cmd_verify(&input, &plan).map(|s| (EXIT_OK, s)),
        Command::Escape { input } => cmd_escape(&input).map(|s| (EXIT_OK, s)),
        Command::Oracle {
            objective,
            input,
            state_limit,
        } => cmd_oracle(&input, objective.into(), state_limit).map(|s| (EXIT_OK, s)),
        Command::Stats { input } => cmd_stats(&input).map(|s| (EXIT_OK, s)),
        Command::Batch {
            dir,
            objective,
            jobs,
        } => cmd_batch(&dir, objective.into(), jobs),
    };
    match outcome {
        Ok((code, text)) => {
            let _ = stdout.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
