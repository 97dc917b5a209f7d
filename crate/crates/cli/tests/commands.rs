use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mapflow::format::print_instance;
use mapflow::generate::{grid_corpus, two_star};
use mapflow_cli::{run, EXIT_GUARD, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_INVALID_PLAN, EXIT_OK};
use tempfile::TempDir;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn mapflow(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mapflow").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn footer_value(plan_text: &str, key: &str) -> usize {
    let footer = plan_text.lines().last().unwrap();
    let toks: Vec<&str> = footer.split_whitespace().collect();
    let at = toks.iter().position(|&t| t == key).unwrap();
    toks[at + 1].parse().unwrap()
}

#[test]
fn two_star_makespan_footer() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "star.txt", &print_instance(&two_star(2, 3)));
    let out = mapflow(&["solve", "--objective", "makespan", "--in", s(&inst)]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.starts_with("plan 2 4\n"));
    assert!(out
        .stdout
        .lines()
        .last()
        .unwrap()
        .starts_with("makespan 4 "));
}

#[test]
fn horizon_below_bound_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "star.txt", &print_instance(&two_star(3, 4)));
    let below = mapflow(&["solve", "--in", s(&inst), "--horizon", "5"]);
    assert_eq!(below.code, EXIT_INFEASIBLE);
    let at = mapflow(&[
        "solve",
        "--objective",
        "feasible",
        "--in",
        s(&inst),
        "--horizon",
        "6",
    ]);
    assert_eq!(at.code, EXIT_OK);
    assert!(at.stdout.starts_with("plan 3 6\n"));
}

#[test]
fn verify_reports_head_on_swap() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "line.txt",
        "graph 4 3\n0 1\n1 2\n2 3\nagents 2\n0 1\n3 2\n",
    );
    let good = write(
        &dir,
        "good.txt",
        "plan 2 1\n0 1\n3 2\nmakespan 1 total_distance 2 total_arrival 2\n",
    );
    let bad = write(
        &dir,
        "bad.txt",
        "plan 2 2\n0 1 2\n3 2 1\nmakespan 2 total_distance 4 total_arrival 4\n",
    );

    let ok = mapflow(&["verify", "--in", s(&inst), "--plan", s(&good)]);
    assert_eq!(ok.code, EXIT_OK);
    assert_eq!(
        ok.stdout,
        "valid makespan 1 total_distance 2 total_arrival 2\n"
    );

    let out = mapflow(&["verify", "--in", s(&inst), "--plan", s(&bad)]);
    assert_eq!(out.code, EXIT_INVALID_PLAN);
    assert!(out.stderr.contains("timestep 1"), "{}", out.stderr);
    assert!(out.stderr.contains("agents 0 and 1"), "{}", out.stderr);
}

#[test]
fn distance_plans_verify_and_match_oracle() {
    let dir = TempDir::new().unwrap();
    let mut certified = 0;
    for (i, inst) in grid_corpus(50, 50, 4, 3, mapflow::Mode::Unlabeled)
        .iter()
        .enumerate()
    {
        let file = write(&dir, &format!("i{i}.txt"), &print_instance(inst));
        let plan = dir.path().join(format!("p{i}.txt"));
        let solved = mapflow(&[
            "solve",
            "--objective",
            "distance",
            "--in",
            s(&file),
            "--out",
            s(&plan),
        ]);
        assert_eq!(solved.code, EXIT_OK, "{}", solved.stderr);
        let verified = mapflow(&["verify", "--in", s(&file), "--plan", s(&plan)]);
        assert_eq!(verified.code, EXIT_OK, "{}", verified.stderr);

        let distance = footer_value(&fs::read_to_string(&plan).unwrap(), "total_distance");
        let exact = mapflow(&[
            "oracle",
            "--objective",
            "distance",
            "--in",
            s(&file),
            "--state-limit",
            "20000",
        ]);
        match exact.code {
            EXIT_OK => {
                let first = exact.stdout.lines().next().unwrap();
                assert_eq!(first, format!("optimal total_distance {distance}"));
                certified += 1;
            }
            EXIT_GUARD => {}
            code => panic!("oracle exited {code}: {}", exact.stderr),
        }
    }
    assert!(certified >= 25, "only {certified} instances certified");
}

#[test]
fn grid_plans_print_cells() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "g.txt", "grid 2 3\n...\n.#.\nagents 1\n0 0 1 2\n");
    let out = mapflow(&["solve", "--in", s(&inst)]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(
        out.stdout,
        "plan 1 3\n0,0 0,1 0,2 1,2\nmakespan 3 total_distance 3 total_arrival 3\n"
    );
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "bad.txt", "graph 3 2\n0 1\n1 5\nagents 1\n0 2\n");
    let out = mapflow(&["solve", "--in", s(&broken)]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("line 3"), "{}", out.stderr);

    let wall = write(
        &dir,
        "wall.txt",
        "grid 3 3\n.#.\n.#.\n.#.\nagents 1\n0 0 0 2\n",
    );
    let out = mapflow(&["stats", "--in", s(&wall)]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("not connected"), "{}", out.stderr);

    assert_eq!(
        mapflow(&["solve", "--in", s(&dir.path().join("missing"))]).code,
        EXIT_INPUT
    );
    assert_eq!(mapflow(&["solve", "--bogus"]).code, EXIT_INPUT);

    let plain = write(&dir, "plain.txt", "graph 3 2\n0 1\n1 2\nagents 1\n0 2\n");
    let out = mapflow(&["solve", "--objective", "arrival", "--in", s(&plain)]);
    assert_eq!(out.code, EXIT_INPUT);
}

#[test]
fn labeled_solve_is_refused() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "l.txt",
        "graph 3 2\n0 1\n1 2\nagents 1\n0 2\nmode labeled\n",
    );
    let out = mapflow(&["solve", "--in", s(&inst)]);
    assert_eq!(out.code, EXIT_INFEASIBLE);
}

#[test]
fn oracle_guard_exit_code() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "big.txt",
        &print_instance(&grid_corpus(1, 1, 8, 6, mapflow::Mode::Unlabeled)[0]),
    );
    let out = mapflow(&["oracle", "--in", s(&inst), "--state-limit", "10"]);
    assert_eq!(out.code, EXIT_GUARD);
}

#[test]
fn goal_replacement_arrival() {
    let dir = TempDir::new().unwrap();
    // both agents are one step from goal 2; goal 4 is farther away
    let inst = write(
        &dir,
        "gr.txt",
        "graph 5 4\n0 2\n1 2\n2 3\n3 4\nagents 2\n0 2\n1 4\nmode goal_replacement\n",
    );
    let out = mapflow(&["solve", "--objective", "arrival", "--in", s(&inst)]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(footer_value(&out.stdout, "total_arrival"), 2);

    let exact = mapflow(&["oracle", "--objective", "arrival", "--in", s(&inst)]);
    assert_eq!(exact.code, EXIT_OK);
    assert!(exact
        .stdout
        .starts_with("arrival_histogram 0 2\nmin_makespan 1\noptimal total_arrival 2\n"));

    let stats = mapflow(&["stats", "--in", s(&inst)]);
    assert!(stats.stdout.contains("earliest_arrival_histogram 0 2\n"));
}

#[test]
fn stats_keys() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "star.txt", &print_instance(&two_star(2, 3)));
    let out = mapflow(&["stats", "--in", s(&inst)]);
    assert_eq!(out.code, EXIT_OK);
    for line in [
        "n 2",
        "V 6",
        "E 5",
        "ell 3",
        "horizon_bound 4",
        "arrival_horizon_bound 6",
        "distance_lower_bound 6",
    ] {
        assert!(
            out.stdout.lines().any(|l| l == line),
            "missing {line} in\n{}",
            out.stdout
        );
    }
}

#[test]
fn escape_outcomes() {
    let dir = TempDir::new().unwrap();
    let centre = write(
        &dir,
        "c.txt",
        "grid 3 3\n...\n...\n...\nagents 1\n1 1 0 0\n",
    );
    let out = mapflow(&["escape", "--in", s(&centre)]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.starts_with("escape feasible 1\n1,1 "));

    // inner 3x3 block of a 5x5 grid fully occupied: the middle evader is walled in
    let mut text = String::from("grid 5 5\n.....\n.....\n.....\n.....\n.....\nagents 9\n");
    let rim = [
        (0, 0),
        (0, 1),
        (0, 2),
        (0, 3),
        (0, 4),
        (1, 0),
        (2, 0),
        (3, 0),
        (4, 0),
    ];
    for (i, (gr, gc)) in rim.iter().enumerate() {
        text += &format!("{} {} {gr} {gc}\n", 1 + i / 3, 1 + i % 3);
    }
    let walled = write(&dir, "w.txt", &text);
    let out = mapflow(&["escape", "--in", s(&walled)]);
    assert_eq!(out.code, EXIT_INFEASIBLE);
    assert!(out.stderr.contains("at most 8 of 9"), "{}", out.stderr);
}

#[test]
fn batch_directory_with_jobs() {
    let dir = TempDir::new().unwrap();
    write(&dir, "a.txt", &print_instance(&two_star(2, 3)));
    write(&dir, "b.txt", &print_instance(&two_star(3, 3)));
    let out = mapflow(&["batch", "--dir", s(dir.path()), "--jobs", "2"]);
    assert_eq!(out.code, EXIT_OK);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert!(lines[0].starts_with("a.txt ok makespan 4 "));
    assert!(lines[1].starts_with("b.txt ok makespan 5 "));
    assert_eq!(lines[2], "solved 2 of 2");

    write(&dir, "c.txt", "nonsense\n");
    let out = mapflow(&["batch", "--dir", s(dir.path()), "--objective", "feasible"]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stdout.contains("c.txt error"));
    assert!(out.stdout.ends_with("solved 2 of 3\n"));
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "star.txt", &print_instance(&two_star(2, 3)));
    let bin = env!("CARGO_BIN_EXE_mapflow");
    let ok = Command::new(bin)
        .args(["solve", "--in", s(&inst)])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("makespan 4 "));
    let below = Command::new(bin)
        .args(["solve", "--in", s(&inst), "--horizon", "3"])
        .output()
        .unwrap();
    assert_eq!(below.status.code(), Some(3));
}
