//! Line-oriented text formats for graphs, colorings, witnesses, traces and
//! exchange logs.
//!
//! Every format ignores blank lines and `#` comments.

use std::fmt::Write as _;

use thiserror::Error;

use crate::coloring::{Color, Exchange};
use crate::driver::{ColoringRun, TraceEvent};
use crate::graph::{DensityWitness, GraphError, Multigraph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing header line `p multigraph <n> <m>`")]
    MissingHeader,
    #[error("header announces {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Content lines with their 1-based numbers, comments stripped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn number<T: std::str::FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T, FormatError> {
    let token = token.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| syntax(line, format!("bad {what} {token:?}")))
}

fn no_more<'a>(line: usize, mut tokens: impl Iterator<Item = &'a str>) -> Result<(), FormatError> {
    match tokens.next() {
        Some(t) => Err(syntax(line, format!("unexpected token {t:?}"))),
        None => Ok(()),
    }
}

pub fn parse_graph(text: &str) -> Result<Multigraph, FormatError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(FormatError::MissingHeader)?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("p") || tokens.next() != Some("multigraph") {
        return Err(FormatError::MissingHeader);
    }
    let n: usize = number(hl, tokens.next(), "vertex count")?;
    let m: usize = number(hl, tokens.next(), "edge count")?;
    no_more(hl, tokens)?;
    let mut edges = Vec::with_capacity(m);
    for (ln, line) in lines {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("e") => {
                let u: Vertex = number(ln, tokens.next(), "endpoint")?;
                let v: Vertex = number(ln, tokens.next(), "endpoint")?;
                no_more(ln, tokens)?;
                edges.push((u, v));
            }
            Some(other) => return Err(syntax(ln, format!("expected `e`, found {other:?}"))),
            None => unreachable!(),
        }
    }
    if edges.len() != m {
        return Err(FormatError::EdgeCount {
            expected: m,
            found: edges.len(),
        });
    }
    Ok(Multigraph::new(n, &edges)?)
}

pub fn write_graph(graph: &Multigraph) -> String {
    let mut out = format!("p multigraph {} {}\n", graph.vertex_count(), graph.edge_count());
    for &(u, v) in graph.edges() {
        writeln!(out, "e {u} {v}").unwrap();
    }
    out
}

/// Read `c <edge> <color>` lines into an assignment indexed by edge id.
///
/// Edges without a line stay uncolored (0). Summary lines starting with
/// `s` are skipped so that the output of `color` can be read back.
pub fn parse_coloring(text: &str, graph: &Multigraph) -> Result<Vec<Color>, FormatError> {
    let mut colors = vec![0; graph.edge_count()];
    let mut seen = vec![false; graph.edge_count()];
    for (ln, line) in content_lines(text) {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("c") => {
                let e: usize = number(ln, tokens.next(), "edge id")?;
                let c: Color = number(ln, tokens.next(), "color")?;
                no_more(ln, tokens)?;
                if e >= graph.edge_count() {
                    return Err(syntax(ln, format!("edge {e} does not exist")));
                }
                if std::mem::replace(&mut seen[e], true) {
                    return Err(syntax(ln, format!("edge {e} listed twice")));
                }
                colors[e] = c;
            }
            Some("s") => {}
            Some(other) => return Err(syntax(ln, format!("expected `c`, found {other:?}"))),
            None => unreachable!(),
        }
    }
    Ok(colors)
}

pub fn write_coloring(colors: &[Color]) -> String {
    let mut out = String::new();
    for (e, c) in colors.iter().enumerate() {
        writeln!(out, "c {e} {c}").unwrap();
    }
    out
}

pub fn write_summary(run: &ColoringRun) -> String {
    format!(
        "s k_used={} colors_used={} reduce_calls={} witnesses={} escalations={}\n",
        run.k_final,
        run.colors_used,
        run.stats.reduce_calls,
        run.witnesses.len(),
        run.escalations.len()
    )
}

/// `w refuted=<k> ceiling=<c> edges=<m> vertices=<v,v,...>`
pub fn write_witness(w: &DensityWitness) -> String {
    let vertices: Vec<String> = w.vertices.iter().map(ToString::to_string).collect();
    format!(
        "w refuted={} ceiling={} edges={} vertices={}\n",
        w.refuted,
        w.ceiling(),
        w.induced_edges,
        vertices.join(",")
    )
}

/// Parse every `w` line and re-verify each witness against `graph`.
/// Degree refutations (`d` lines) are skipped.
pub fn parse_witnesses(text: &str, graph: &Multigraph) -> Result<Vec<DensityWitness>, FormatError> {
    let mut out = Vec::new();
    for (ln, line) in content_lines(text) {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("w") => {}
            Some("d") => continue,
            _ => return Err(syntax(ln, "expected `w`")),
        }
        let mut refuted = None;
        let mut vertices = None;
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| syntax(ln, format!("expected key=value, found {tok:?}")))?;
            match key {
                "refuted" => refuted = Some(number::<usize>(ln, Some(value), "palette size")?),
                "vertices" => {
                    let vs = value
                        .split(',')
                        .map(|v| number::<Vertex>(ln, Some(v), "vertex"))
                        .collect::<Result<Vec<_>, _>>()?;
                    vertices = Some(vs);
                }
                "ceiling" | "edges" => {}
                _ => return Err(syntax(ln, format!("unknown key {key:?}"))),
            }
        }
        let refuted = refuted.ok_or_else(|| syntax(ln, "missing refuted="))?;
        let vertices = vertices.ok_or_else(|| syntax(ln, "missing vertices="))?;
        out.push(DensityWitness::certify(graph, vertices, refuted)?);
    }
    Ok(out)
}

/// `t <event> <potential> <tree_size>`
pub fn write_trace(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for t in trace {
        writeln!(out, "t {} {} {}", t.event, t.potential, t.tree_size).unwrap();
    }
    out
}

pub fn write_log(log: &[Exchange]) -> String {
    let mut out = String::new();
    for op in log {
        match op {
            Exchange::Component { alpha, beta, vertex } => {
                writeln!(out, "x component {alpha} {beta} {vertex}")
            }
            Exchange::Outside { alpha, beta, inside } => {
                let inside: Vec<String> = inside.iter().map(ToString::to_string).collect();
                writeln!(out, "x outside {alpha} {beta} {}", inside.join(","))
            }
            Exchange::Assign { edge, color } => writeln!(out, "x assign {edge} {color}"),
            Exchange::Palette { k } => writeln!(out, "x palette {k}"),
        }
        .unwrap();
    }
    out
}

pub fn parse_log(text: &str) -> Result<Vec<Exchange>, FormatError> {
    let mut out = Vec::new();
    for (ln, line) in content_lines(text) {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("x") {
            return Err(syntax(ln, "expected `x`"));
        }
        let op = match tokens.next() {
            Some("component") => Exchange::Component {
                alpha: number(ln, tokens.next(), "color")?,
                beta: number(ln, tokens.next(), "color")?,
                vertex: number(ln, tokens.next(), "vertex")?,
            },
            Some("outside") => {
                let alpha = number(ln, tokens.next(), "color")?;
                let beta = number(ln, tokens.next(), "color")?;
                let inside = match tokens.next() {
                    Some(list) => list
                        .split(',')
                        .map(|v| number(ln, Some(v), "vertex"))
                        .collect::<Result<Vec<_>, _>>()?,
                    None => Vec::new(),
                };
                Exchange::Outside { alpha, beta, inside }
            }
            Some("assign") => Exchange::Assign {
                edge: number(ln, tokens.next(), "edge id")?,
                color: number(ln, tokens.next(), "color")?,
            },
            Some("palette") => Exchange::Palette {
                k: number(ln, tokens.next(), "palette size")?,
            },
            Some(other) => return Err(syntax(ln, format!("unknown exchange {other:?}"))),
            None => return Err(syntax(ln, "missing exchange kind")),
        };
        no_more(ln, tokens)?;
        out.push(op);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_with_comments() {
        let g = parse_graph("# triangle\np multigraph 3 3\n\ne 0 1\ne 1 2 # last two\ne 2 0\n").unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(write_graph(&g), "p multigraph 3 3\ne 0 1\ne 1 2\ne 2 0\n");
    }

    #[test]
    fn graph_errors() {
        assert_eq!(parse_graph(""), Err(FormatError::MissingHeader));
        assert_eq!(
            parse_graph("p multigraph 3 2\ne 0 1\n"),
            Err(FormatError::EdgeCount { expected: 2, found: 1 })
        );
        assert!(matches!(
            parse_graph("p multigraph 3 1\ne 0 x\n"),
            Err(FormatError::Syntax { line: 2, .. })
        ));
        assert!(matches!(parse_graph("p multigraph 2 1\ne 1 1\n"), Err(FormatError::Graph(_))));
    }

    #[test]
    fn coloring_rejects_duplicates() {
        let g = parse_graph("p multigraph 2 2\ne 0 1\ne 0 1\n").unwrap();
        assert_eq!(parse_coloring("c 1 2\n", &g).unwrap(), vec![0, 2]);
        assert!(parse_coloring("c 0 1\nc 0 2\n", &g).is_err());
        assert!(parse_coloring("c 2 1\n", &g).is_err());
    }

    #[test]
    fn log_round_trip() {
        let log = vec![
            Exchange::Assign { edge: 3, color: 1 },
            Exchange::Component { alpha: 1, beta: 2, vertex: 0 },
            Exchange::Outside { alpha: 2, beta: 3, inside: vec![0, 4] },
            Exchange::Outside { alpha: 2, beta: 3, inside: vec![] },
            Exchange::Palette { k: 5 },
        ];
        assert_eq!(parse_log(&write_log(&log)).unwrap(), log);
    }
}
