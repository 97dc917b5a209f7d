//! Plain-text instance and plan files.
//!
//! Instances come in two forms:
//!
//! ```text
//! grid 2 3          graph 3 2
//! ..#               0 1
//! ...               1 2
//! agents 1          agents 1
//! 0 0 1 2           0 2
//! mode unlabeled    mode unlabeled
//! ```
//!
//! The `mode` line is optional and defaults to `unlabeled`. Grid agents are
//! given as `start_row start_col goal_row goal_col`.
//!
//! A plan file has a `plan n T` header, one line of `T + 1` positions per
//! agent (ordered by start vertex id), and a statistics footer.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, Instance, Mode, Path, Plan, VertexId, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Non-empty lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
                .filter(|(_, l)| !l.trim().is_empty()),
        );
        Self {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(ParseError::at(
                self.last + 1,
                1,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn peek(&mut self) -> Option<&(usize, &'a str)> {
        self.inner.peek()
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn number(line: usize, (column, tok): (usize, &str), what: &str) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::at(line, column, format!("expected {what}, found '{tok}'")))
}

/// Splits `line` into exactly `count` numbers.
fn numbers(line_no: usize, line: &str, count: usize, what: &str) -> Result<Vec<usize>, ParseError> {
    let toks = tokens(line);
    if toks.len() != count {
        let column = toks.get(count).map_or(line.len() + 1, |t| t.0);
        return Err(ParseError::at(
            line_no,
            column,
            format!("expected {count} numbers ({what})"),
        ));
    }
    toks.into_iter().map(|t| number(line_no, t, what)).collect()
}

fn keyword_line(
    lines: &mut Lines,
    keyword: &str,
    count: usize,
) -> Result<(usize, Vec<usize>), ParseError> {
    let (n, line) = lines.next(&format!("'{keyword}' line"))?;
    let toks = tokens(line);
    match toks.first() {
        Some(&(_, k)) if k == keyword => {}
        Some(&(c, k)) => {
            return Err(ParseError::at(
                n,
                c,
                format!("expected '{keyword}', found '{k}'"),
            ))
        }
        None => return Err(ParseError::at(n, 1, format!("expected '{keyword}'"))),
    }
    if toks.len() != count + 1 {
        let column = toks.get(count + 1).map_or(line.len() + 1, |t| t.0);
        return Err(ParseError::at(
            n,
            column,
            format!("'{keyword}' takes {count} numbers"),
        ));
    }
    let values = toks[1..]
        .iter()
        .map(|&t| number(n, t, "a number"))
        .collect::<Result<_, _>>()?;
    Ok((n, values))
}

fn parse_mode(lines: &mut Lines) -> Result<Mode, ParseError> {
    let Some(&(n, line)) = lines.peek() else {
        return Ok(Mode::Unlabeled);
    };
    lines.next("mode")?;
    let toks = tokens(line);
    if toks.first().map(|t| t.1) != Some("mode") {
        return Err(ParseError::at(
            n,
            toks[0].0,
            format!("unexpected trailing line '{}'", line.trim()),
        ));
    }
    if toks.len() != 2 {
        return Err(ParseError::at(n, line.len() + 1, "'mode' takes one value"));
    }
    let mode = toks[1]
        .1
        .parse()
        .map_err(|e: String| ParseError::at(n, toks[1].0, e))?;
    if let Some(&(extra, _)) = lines.peek() {
        return Err(ParseError::at(extra, 1, "unexpected content after 'mode'"));
    }
    Ok(mode)
}

fn check_agents(
    starts: &[VertexId],
    goals: &[VertexId],
    agent_lines: &[usize],
) -> Result<(), ParseError> {
    let mut seen_s = BTreeSet::new();
    let mut seen_g = BTreeSet::new();
    for (i, (&s, &g)) in starts.iter().zip(goals).enumerate() {
        let line = agent_lines[i];
        if !seen_s.insert(s) {
            return Err(ParseError::at(line, 1, format!("duplicate start {s}")));
        }
        if !seen_g.insert(g) {
            return Err(ParseError::at(line, 1, format!("duplicate goal {g}")));
        }
    }
    for (i, &s) in starts.iter().enumerate() {
        if seen_g.contains(&s) {
            return Err(ParseError::at(
                agent_lines[i],
                1,
                Violation::StartGoalOverlap(s).to_string(),
            ));
        }
    }
    Ok(())
}

fn finish(inst: Instance, header_line: usize) -> Result<Instance, ParseError> {
    let report = inst.validate();
    match report.violations.first() {
        None => Ok(inst),
        Some(v) => Err(ParseError::at(header_line, 1, v.to_string())),
    }
}

fn parse_grid(
    lines: &mut Lines,
    header: usize,
    rows: usize,
    cols: usize,
) -> Result<Instance, ParseError> {
    if rows == 0 || cols == 0 {
        return Err(ParseError::at(
            header,
            1,
            "grid must have at least one row and column",
        ));
    }
    let mut blocked = vec![false; rows * cols];
    for r in 0..rows {
        let (n, line) = lines.next("grid row")?;
        let cells: Vec<char> = line.trim_end().chars().collect();
        if cells.len() != cols {
            return Err(ParseError::at(
                n,
                cells.len().min(cols) + 1,
                format!("grid row must have {cols} cells"),
            ));
        }
        for (c, &ch) in cells.iter().enumerate() {
            match ch {
                '.' => {}
                '#' => blocked[r * cols + c] = true,
                other => {
                    return Err(ParseError::at(
                        n,
                        c + 1,
                        format!("unexpected cell '{other}'"),
                    ))
                }
            }
        }
    }
    let graph = Graph::grid(rows, cols, |r, c| blocked[r * cols + c]);
    let shape = graph.grid_shape().expect("grid graph").clone();
    let (_, agents) = keyword_line(lines, "agents", 1)?;
    let mut starts = Vec::new();
    let mut goals = Vec::new();
    let mut agent_lines = Vec::new();
    for _ in 0..agents[0] {
        let (n, line) = lines.next("agent line")?;
        let v = numbers(n, line, 4, "start row, start col, goal row, goal col")?;
        let toks = tokens(line);
        let cell = |k: usize| -> Result<VertexId, ParseError> {
            let (r, c) = (v[k], v[k + 1]);
            if r >= rows || c >= cols {
                return Err(ParseError::at(
                    n,
                    toks[k].0,
                    format!("cell ({r}, {c}) is outside the grid"),
                ));
            }
            shape
                .vertex_at(r, c)
                .ok_or_else(|| ParseError::at(n, toks[k].0, format!("cell ({r}, {c}) is blocked")))
        };
        starts.push(cell(0)?);
        goals.push(cell(2)?);
        agent_lines.push(n);
    }
    check_agents(&starts, &goals, &agent_lines)?;
    let mode = parse_mode(lines)?;
    finish(Instance::new(graph, starts, goals, mode), header)
}

fn parse_graph(
    lines: &mut Lines,
    header: usize,
    vertex_count: usize,
    edge_count: usize,
) -> Result<Instance, ParseError> {
    let mut edges = Vec::with_capacity(edge_count);
    for _ in 0..edge_count {
        let (n, line) = lines.next("edge line")?;
        let v = numbers(n, line, 2, "edge endpoints")?;
        let toks = tokens(line);
        for k in 0..2 {
            if v[k] >= vertex_count {
                return Err(ParseError::at(
                    n,
                    toks[k].0,
                    format!("vertex {} out of range", v[k]),
                ));
            }
        }
        if v[0] == v[1] {
            return Err(ParseError::at(
                n,
                1,
                format!("self-loop at vertex {}", v[0]),
            ));
        }
        if edges
            .iter()
            .any(|&(a, b)| (a, b) == (v[0], v[1]) || (a, b) == (v[1], v[0]))
        {
            return Err(ParseError::at(
                n,
                1,
                format!("duplicate edge {} {}", v[0], v[1]),
            ));
        }
        edges.push((v[0], v[1]));
    }
    let graph =
        Graph::new(vertex_count, &edges).map_err(|e| ParseError::at(header, 1, e.to_string()))?;
    let (_, agents) = keyword_line(lines, "agents", 1)?;
    let mut starts = Vec::new();
    let mut goals = Vec::new();
    let mut agent_lines = Vec::new();
    for _ in 0..agents[0] {
        let (n, line) = lines.next("agent line")?;
        let v = numbers(n, line, 2, "start and goal vertex")?;
        let toks = tokens(line);
        for k in 0..2 {
            if v[k] >= vertex_count {
                return Err(ParseError::at(
                    n,
                    toks[k].0,
                    format!("vertex {} out of range", v[k]),
                ));
            }
        }
        starts.push(v[0]);
        goals.push(v[1]);
        agent_lines.push(n);
    }
    check_agents(&starts, &goals, &agent_lines)?;
    let mode = parse_mode(lines)?;
    finish(Instance::new(graph, starts, goals, mode), header)
}

/// Parses a GRID or GRAPH instance and checks every instance precondition.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = Lines::new(text);
    let (n, line) = lines.next("'grid' or 'graph' header")?;
    let toks = tokens(line);
    let kind = toks.first().map(|t| t.1);
    if toks.len() != 3 || !matches!(kind, Some("grid") | Some("graph")) {
        return Err(ParseError::at(
            n,
            1,
            "header must be 'grid R C' or 'graph V E'",
        ));
    }
    let a = number(n, toks[1], "a number")?;
    let b = number(n, toks[2], "a number")?;
    match kind {
        Some("grid") => parse_grid(&mut lines, n, a, b),
        _ => parse_graph(&mut lines, n, a, b),
    }
}

fn write_mode(out: &mut String, mode: Mode) {
    if mode != Mode::Unlabeled {
        writeln!(out, "mode {mode}").unwrap();
    }
}

/// Inverse of [`parse_instance`]; graphs loaded from a grid print as grids.
pub fn print_instance(inst: &Instance) -> String {
    let mut out = String::new();
    match inst.graph.grid_shape() {
        Some(shape) => {
            writeln!(out, "grid {} {}", shape.rows, shape.cols).unwrap();
            let free: BTreeSet<(usize, usize)> = shape.coords.iter().copied().collect();
            for r in 0..shape.rows {
                let row: String = (0..shape.cols)
                    .map(|c| if free.contains(&(r, c)) { '.' } else { '#' })
                    .collect();
                writeln!(out, "{row}").unwrap();
            }
            writeln!(out, "agents {}", inst.agent_count()).unwrap();
            for (&s, &g) in inst.starts.iter().zip(&inst.goals) {
                let (sr, sc) = shape.coords[s];
                let (gr, gc) = shape.coords[g];
                writeln!(out, "{sr} {sc} {gr} {gc}").unwrap();
            }
        }
        None => {
            writeln!(
                out,
                "graph {} {}",
                inst.graph.vertex_count(),
                inst.graph.edge_count()
            )
            .unwrap();
            for &(u, v) in inst.graph.edges() {
                writeln!(out, "{u} {v}").unwrap();
            }
            writeln!(out, "agents {}", inst.agent_count()).unwrap();
            for (&s, &g) in inst.starts.iter().zip(&inst.goals) {
                writeln!(out, "{s} {g}").unwrap();
            }
        }
    }
    write_mode(&mut out, inst.mode);
    out
}

/// Agent indices ordered by start vertex id.
pub fn agents_by_start(inst: &Instance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..inst.agent_count()).collect();
    order.sort_by_key(|&a| inst.starts[a]);
    order
}

struct Vertex<'a>(&'a Instance, VertexId);

impl fmt::Display for Vertex<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.graph.grid_shape() {
            Some(shape) => {
                let (r, c) = shape.coords[self.1];
                write!(f, "{r},{c}")
            }
            None => write!(f, "{}", self.1),
        }
    }
}

/// Formats a vertex as `r,c` for grid instances and as its id otherwise.
pub fn format_vertex(inst: &Instance, v: VertexId) -> String {
    Vertex(inst, v).to_string()
}

pub fn print_plan(inst: &Instance, plan: &Plan) -> String {
    let mut out = String::new();
    writeln!(out, "plan {} {}", plan.agent_count(), plan.horizon()).unwrap();
    for a in agents_by_start(inst) {
        let row: Vec<String> = plan.paths[a]
            .vertices
            .iter()
            .map(|&v| format_vertex(inst, v))
            .collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    let s = plan.stats();
    writeln!(
        out,
        "makespan {} total_distance {} total_arrival {}",
        s.makespan, s.total_distance, s.total_arrival
    )
    .unwrap();
    out
}

fn parse_position(
    inst: &Instance,
    line: usize,
    column: usize,
    tok: &str,
) -> Result<VertexId, ParseError> {
    let err = |msg: String| ParseError::at(line, column, msg);
    match inst.graph.grid_shape() {
        Some(shape) => {
            let (r, c) = tok
                .split_once(',')
                .ok_or_else(|| err(format!("expected 'row,col', found '{tok}'")))?;
            let r: usize = r.parse().map_err(|_| err(format!("bad row in '{tok}'")))?;
            let c: usize = c
                .parse()
                .map_err(|_| err(format!("bad column in '{tok}'")))?;
            shape
                .vertex_at(r, c)
                .ok_or_else(|| err(format!("cell ({r}, {c}) is not a free cell")))
        }
        None => {
            let v: usize = tok
                .parse()
                .map_err(|_| err(format!("expected a vertex id, found '{tok}'")))?;
            if v >= inst.graph.vertex_count() {
                return Err(err(format!("vertex {v} out of range")));
            }
            Ok(v)
        }
    }
}

/// Reads a plan for `inst`. Line `i` is taken as the path of the agent with
/// the `i`-th smallest start; the footer, if present, is not trusted.
pub fn parse_plan(inst: &Instance, text: &str) -> Result<Plan, ParseError> {
    let mut lines = Lines::new(text);
    let (header, values) = keyword_line(&mut lines, "plan", 2)?;
    let (n, horizon) = (values[0], values[1]);
    if n != inst.agent_count() {
        return Err(ParseError::at(
            header,
            1,
            format!("plan has {n} agents, instance has {}", inst.agent_count()),
        ));
    }
    let mut paths = vec![Path::new(Vec::new()); n];
    for a in agents_by_start(inst) {
        let (ln, line) = lines.next("path line")?;
        let toks = tokens(line);
        if toks.len() != horizon + 1 {
            return Err(ParseError::at(
                ln,
                1,
                format!("expected {} positions, found {}", horizon + 1, toks.len()),
            ));
        }
        let vertices = toks
            .into_iter()
            .map(|(c, t)| parse_position(inst, ln, c, t))
            .collect::<Result<Vec<_>, _>>()?;
        paths[a] = Path::new(vertices);
    }
    if let Some(&(ln, line)) = lines.peek() {
        let toks = tokens(line);
        let keys: Vec<&str> = toks.iter().step_by(2).map(|t| t.1).collect();
        if keys != ["makespan", "total_distance", "total_arrival"] || toks.len() != 6 {
            return Err(ParseError::at(
                ln,
                1,
                "expected 'makespan M total_distance D total_arrival S'",
            ));
        }
        for &t in toks.iter().skip(1).step_by(2) {
            number(ln, t, "a number")?;
        }
        lines.next("footer")?;
        if let Some(&(extra, _)) = lines.peek() {
            return Err(ParseError::at(
                extra,
                1,
                "unexpected content after the footer",
            ));
        }
    }
    Ok(Plan::new(paths))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_form() {
        let inst = parse_instance("graph 3 2\n0 1\n1 2\nagents 1\n0 2\n").unwrap();
        assert_eq!((inst.agent_count(), inst.mode), (1, Mode::Unlabeled));
        assert_eq!(inst.graph.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(
            print_instance(&inst),
            "graph 3 2\n0 1\n1 2\nagents 1\n0 2\n"
        );
    }

    #[test]
    fn grid_form_with_mode() {
        let text = "grid 2 3\n..#\n...\nagents 1\n0 0 1 2\nmode goal_replacement\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.graph.vertex_count(), 5);
        assert_eq!(inst.mode, Mode::GoalReplacement);
        assert_eq!(print_instance(&inst), text);
    }

    #[test]
    fn wall_disconnects() {
        let err = parse_instance("grid 3 3\n.#.\n.#.\n.#.\nagents 1\n0 0 0 2\n").unwrap_err();
        assert!(err.message.contains("not connected"), "{err}");
    }

    #[test]
    fn diagnostics_name_positions() {
        let err = parse_instance("grid 2 2\n..\n.#\nagents 1\n0 0 1 1\n").unwrap_err();
        assert_eq!((err.line, err.column), (5, 5));
        assert!(err.message.contains("blocked"));
        let err = parse_instance("graph 2 1\n0 1\nagents 1\n0 0\n").unwrap_err();
        assert!(err.message.contains("not disjoint"));
        let err = parse_instance("graph 2 1\n0 x\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        let err = parse_instance("tree 2 1\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse_instance("graph 3 2\n0 1\n1 2\nagents 2\n0 2\n0 1\n").unwrap_err();
        assert!(err.message.contains("duplicate start"));
    }

    #[test]
    fn plan_round_trip() {
        let inst = parse_instance("grid 1 3\n...\nagents 1\n0 0 0 2\n").unwrap();
        let plan = Plan::new(vec![Path::new(vec![0, 1, 2])]);
        let text = print_plan(&inst, &plan);
        assert_eq!(
            text,
            "plan 1 2\n0,0 0,1 0,2\nmakespan 2 total_distance 2 total_arrival 2\n"
        );
        assert_eq!(parse_plan(&inst, &text).unwrap(), plan);
    }

    #[test]
    fn plan_lines_follow_start_order() {
        let inst = parse_instance("graph 4 3\n0 1\n1 2\n2 3\nagents 2\n1 3\n0 2\n").unwrap();
        let plan = Plan::new(vec![Path::new(vec![1, 2, 3]), Path::new(vec![0, 1, 2])]);
        let text = print_plan(&inst, &plan);
        assert!(text.starts_with("plan 2 2\n0 1 2\n1 2 3\n"));
        assert_eq!(parse_plan(&inst, &text).unwrap(), plan);
    }
}
