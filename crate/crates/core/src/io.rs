//! Text formats for bipartite and intersection graphs.
//!
//! ```text
//! bipartite <n> <m>          graph <n>
//! a <attr> <node>            e <u> <v>      (u < v)
//! ```
//!
//! Writers emit lines in sorted order, so equal graphs serialize to equal
//! bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, RigError};
use crate::model::{BipartiteGraph, IntersectionGraph};

pub fn format_bipartite(b: &BipartiteGraph) -> String {
    let mut out = String::with_capacity(16 * (b.edge_count() + 1));
    writeln!(out, "bipartite {} {}", b.n_nodes(), b.n_attributes()).unwrap();
    for (a, v) in b.incidences() {
        writeln!(out, "a {a} {v}").unwrap();
    }
    out
}

pub fn format_graph(g: &IntersectionGraph) -> String {
    let mut out = String::with_capacity(16 * (g.edge_count() + 1));
    writeln!(out, "graph {}", g.n()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "e {u} {v}").unwrap();
    }
    out
}

fn parse_usize(token: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let token = token.ok_or_else(|| RigError::parse(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| RigError::parse(line, format!("bad {what} `{token}`")))
}

/// Splits into non-empty lines with 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_ascii_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
}

pub fn parse_bipartite(text: &str) -> Result<BipartiteGraph> {
    let mut lines = records(text);
    let (line, header) = lines.next().ok_or_else(|| RigError::parse(1, "empty input"))?;
    if header.len() != 3 || header[0] != "bipartite" {
        return Err(RigError::parse(line, "expected `bipartite <n> <m>`"));
    }
    let n = parse_usize(header.get(1).copied(), line, "node count")?;
    let m = parse_usize(header.get(2).copied(), line, "attribute count")?;
    let mut incidences = Vec::new();
    for (line, tokens) in lines {
        if tokens.len() != 3 || tokens[0] != "a" {
            return Err(RigError::parse(line, "expected `a <attr> <node>`"));
        }
        let a = parse_usize(Some(tokens[1]), line, "attribute index")?;
        let v = parse_usize(Some(tokens[2]), line, "node index")?;
        if a >= m || v >= n {
            return Err(RigError::parse(line, "index out of range"));
        }
        incidences.push((a, v));
    }
    BipartiteGraph::from_incidences(n, m, incidences)
}

pub fn parse_graph(text: &str) -> Result<IntersectionGraph> {
    let mut lines = records(text);
    let (line, header) = lines.next().ok_or_else(|| RigError::parse(1, "empty input"))?;
    if header.len() != 2 || header[0] != "graph" {
        return Err(RigError::parse(line, "expected `graph <n>`"));
    }
    let n = parse_usize(header.get(1).copied(), line, "vertex count")?;
    let mut edges = Vec::new();
    for (line, tokens) in lines {
        if tokens.len() != 3 || tokens[0] != "e" {
            return Err(RigError::parse(line, "expected `e <u> <v>`"));
        }
        let u = parse_usize(Some(tokens[1]), line, "vertex")?;
        let v = parse_usize(Some(tokens[2]), line, "vertex")?;
        if u >= v {
            return Err(RigError::parse(line, "edge endpoints must satisfy u < v"));
        }
        if v >= n {
            return Err(RigError::parse(line, "vertex out of range"));
        }
        edges.push((u, v));
    }
    IntersectionGraph::from_edges(n, edges)
}

pub fn read_bipartite(path: &Path) -> Result<BipartiteGraph> {
    parse_bipartite(&fs::read_to_string(path)?)
}

pub fn read_graph(path: &Path) -> Result<IntersectionGraph> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn write_bipartite(path: &Path, b: &BipartiteGraph) -> Result<()> {
    Ok(fs::write(path, format_bipartite(b))?)
}

pub fn write_graph(path: &Path, g: &IntersectionGraph) -> Result<()> {
    Ok(fs::write(path, format_graph(g))?)
}
