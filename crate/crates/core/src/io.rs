//! JSON serialization for graphs and chains, plus file helpers that keep
//! the offending path in every error message.
//!
//! Graphs are `{"n": 3, "edges": [[1,2],[2,1], ...]}` and chains are
//! `{"n": 3, "rows": [[0.0, 1.0, 0.0], ...]}`, both 1-based where labels
//! appear. A chain's graph is the support of its rows, so a chain file is
//! self-contained.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{MarkovChain, STOCHASTIC_TOL};
use crate::error::{Error, Result};
use crate::graph::DiGraph;

/// Wire form of a [`DiGraph`]: node count plus 1-based edge pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl From<&DiGraph> for GraphJson {
    fn from(g: &DiGraph) -> Self {
        GraphJson { n: g.n(), edges: g.edges() }
    }
}

impl GraphJson {
    pub fn build(&self) -> Result<DiGraph> {
        DiGraph::new(self.n, self.edges.iter().copied())
    }
}

/// Wire form of a [`MarkovChain`]: node count plus dense row probabilities.
/// The graph is recovered from the support, so every strictly positive entry
/// becomes an edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainJson {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

impl From<&MarkovChain> for ChainJson {
    fn from(c: &MarkovChain) -> Self {
        ChainJson { n: c.n(), rows: c.rows() }
    }
}

impl ChainJson {
    pub fn build(&self) -> Result<MarkovChain> {
        let n = self.n;
        if self.rows.len() != n || self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!(
                "chain rows must form an {n} x {n} matrix"
            )));
        }
        let mut edges = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p != 0.0 {
                    edges.push((i + 1, j + 1));
                }
            }
        }
        let g = DiGraph::new(n, edges)?;
        MarkovChain::from_rows(&g, &self.rows, STOCHASTIC_TOL)
    }
}

/// Parses the plain-text edge-list format: one `i j` pair of 1-based labels
/// per line, `#` starting a comment, blank lines ignored. The node count is
/// the largest label mentioned.
pub fn graph_from_edge_list(text: &str) -> Result<DiGraph> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [i, j] = fields.as_slice() else {
            return Err(Error::Parse(format!(
                "line {}: expected `i j`, got {line:?}",
                idx + 1
            )));
        };
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| {
                Error::Parse(format!("line {}: {s:?} is not a node label", idx + 1))
            })
        };
        edges.push((parse(i)?, parse(j)?));
    }
    if edges.is_empty() {
        return Err(Error::Parse("edge list has no edges".into()));
    }
    let n = edges.iter().map(|&(i, j)| i.max(j)).max().unwrap();
    DiGraph::new(n, edges)
}

pub fn graph_to_json(g: &DiGraph) -> String {
    serde_json::to_string(&GraphJson::from(g)).expect("graph serialization cannot fail")
}

pub fn graph_from_json(text: &str) -> Result<DiGraph> {
    serde_json::from_str::<GraphJson>(text)?.build()
}

pub fn chain_to_json(c: &MarkovChain) -> String {
    serde_json::to_string(&ChainJson::from(c)).expect("chain serialization cannot fail")
}

pub fn chain_from_json(text: &str) -> Result<MarkovChain> {
    serde_json::from_str::<ChainJson>(text)?.build()
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes `text` to `path`, keeping the path in any error message.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Json(j) => Error::Parse(format!("{}: {j}", path.display())),
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Loads a graph from JSON or, when the file does not open with `{`, from
/// the edge-list text format.
pub fn load_graph(path: &Path) -> Result<DiGraph> {
    let text = read_file(path)?;
    let parsed = if text.trim_start().starts_with('{') {
        graph_from_json(&text)
    } else {
        graph_from_edge_list(&text)
    };
    parsed.map_err(|e| with_path(e, path))
}

pub fn save_graph(g: &DiGraph, path: &Path) -> Result<()> {
    write_text(path, &graph_to_json(g))
}

pub fn load_chain(path: &Path) -> Result<MarkovChain> {
    chain_from_json(&read_file(path)?).map_err(|e| with_path(e, path))
}

/// Loads a chain and validates it against a given graph instead of its own
/// support, so probabilities off the graph's edge set are rejected.
pub fn load_chain_on(path: &Path, g: &DiGraph) -> Result<MarkovChain> {
    let parsed: ChainJson =
        serde_json::from_str(&read_file(path)?).map_err(|e| with_path(Error::Json(e), path))?;
    if parsed.rows.len() != parsed.n || parsed.rows.iter().any(|r| r.len() != parsed.n) {
        return Err(Error::Parse(format!(
            "{}: chain rows must form an {n} x {n} matrix",
            path.display(),
            n = parsed.n
        )));
    }
    MarkovChain::from_rows(g, &parsed.rows, STOCHASTIC_TOL)
}

pub fn save_chain(c: &MarkovChain, path: &Path) -> Result<()> {
    write_text(path, &chain_to_json(c))
}
