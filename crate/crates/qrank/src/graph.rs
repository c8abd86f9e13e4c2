//! Directed web graphs and the matrices derived from them: the hyperlink
//! matrix, its dangling-node patch, and the Google matrix.
//!
//! Orientation convention, fixed project-wide: matrices are column-stochastic,
//! entry `(i, j)` is the probability of hopping from node `j` to node `i`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};

/// Conventional damping value; the probability of following a link rather
/// than teleporting uniformly.
pub const DEFAULT_ALPHA: f64 = 0.85;

/// Column sums of stochastic matrices must hold to this tolerance.
pub const COLUMN_SUM_TOL: f64 = 1e-12;

/// Slack for entrywise bounds subject to floating-point rounding.
pub const ENTRY_TOL: f64 = 1e-15;

/// A directed graph over dense 0-based node ids. Edges form a set (no
/// multi-edges); self-loops are allowed. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WebGraph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
    labels: Vec<Option<String>>,
    out_degrees: Vec<usize>,
}

impl WebGraph {
    /// Builds a graph with `node_count` nodes, deduplicating `edges`.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Validation("node count must be positive".into()));
        }
        let mut set = BTreeSet::new();
        for (source, target) in edges {
            if source >= node_count || target >= node_count {
                return Err(Error::Validation(format!(
                    "edge ({source}, {target}) has an endpoint outside [0, {node_count})"
                )));
            }
            set.insert((source, target));
        }
        let mut out_degrees = vec![0usize; node_count];
        for &(source, _) in &set {
            out_degrees[source] += 1;
        }
        Ok(Self {
            node_count,
            edges: set,
            labels: vec![None; node_count],
            out_degrees,
        })
    }

    /// Parses the edge-list text format: one `source target` pair per line,
    /// `#` starts a comment line, blank lines are skipped, and an optional
    /// `nodes N` header fixes the node count (otherwise `N = 1 + max id`).
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut max_id: Option<usize> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens[0] == "nodes" {
                if declared.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "duplicate `nodes` header".into(),
                    });
                }
                if tokens.len() != 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "header must be `nodes N`".into(),
                    });
                }
                let n: usize = tokens[1].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid node count `{}`", tokens[1]),
                })?;
                declared = Some(n);
                continue;
            }
            if tokens.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `source target`, got {} tokens", tokens.len()),
                });
            }
            let mut pair = [0usize; 2];
            for (slot, tok) in pair.iter_mut().zip(&tokens) {
                let id: i64 = tok.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid node id `{tok}`"),
                })?;
                if id < 0 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("negative node id `{tok}`"),
                    });
                }
                *slot = id as usize;
            }
            max_id = Some(max_id.unwrap_or(0).max(pair[0]).max(pair[1]));
            edges.push((pair[0], pair[1]));
        }

        let node_count = match (declared, max_id) {
            (Some(n), _) => n,
            (None, Some(m)) => m + 1,
            (None, None) => {
                return Err(Error::Parse {
                    line: 0,
                    message: "no `nodes N` header and no edges; node count unknown".into(),
                })
            }
        };
        Self::new(node_count, edges)
    }

    /// Inverse of [`WebGraph::parse_edge_list`]; labels are presentation-only
    /// metadata and are not serialized.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes {}", self.node_count);
        for &(source, target) in &self.edges {
            let _ = writeln!(out, "{source} {target}");
        }
        out
    }

    /// An undirected line of `node_count` sites, as directed edges both ways.
    pub fn line(node_count: usize) -> Result<Self> {
        let edges = (0..node_count.saturating_sub(1))
            .flat_map(|i| [(i, i + 1), (i + 1, i)]);
        Self::new(node_count, edges)
    }

    /// A random directed graph for fixtures: `edge_count` distinct edges drawn
    /// uniformly (capped at `node_count^2`). Deterministic for a seeded rng.
    pub fn random<R: Rng + ?Sized>(node_count: usize, edge_count: usize, rng: &mut R) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Validation("node count must be positive".into()));
        }
        let target = edge_count.min(node_count * node_count);
        let mut set = BTreeSet::new();
        while set.len() < target {
            let s = rng.random_range(0..node_count);
            let t = rng.random_range(0..node_count);
            set.insert((s, t));
        }
        Self::new(node_count, set)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_degrees[node]
    }

    /// The backlink set of `node`: all pages linking to it.
    pub fn backlinks(&self, node: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter(|&&(_, t)| t == node)
            .map(|&(s, _)| s)
            .collect()
    }

    pub fn label(&self, node: usize) -> Option<&str> {
        self.labels[node].as_deref()
    }

    pub fn set_label(&mut self, node: usize, label: impl Into<String>) {
        self.labels[node] = Some(label.into());
    }

    /// The hyperlink matrix: column `j` spreads weight `1/outdeg(j)` over the
    /// targets of `j`; columns of dangling nodes are all zeros.
    pub fn hyperlink_matrix(&self) -> Array2<f64> {
        let n = self.node_count;
        let mut h = Array2::zeros((n, n));
        for &(source, target) in &self.edges {
            h[[target, source]] = 1.0 / self.out_degrees[source] as f64;
        }
        h
    }
}

/// A column-stochastic matrix: entries in `[0, 1]`, every column summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    entries: Array2<f64>,
}

impl StochasticMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::Validation(format!(
                "stochastic matrix must be square, got {rows}x{cols}"
            )));
        }
        for (idx, &v) in entries.indexed_iter() {
            if !(-ENTRY_TOL..=1.0 + ENTRY_TOL).contains(&v) {
                return Err(Error::Validation(format!(
                    "entry {idx:?} = {v} outside [0, 1]"
                )));
            }
        }
        for j in 0..cols {
            let sum: f64 = entries.column(j).sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::Validation(format!(
                    "column {j} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Patches dangling-node columns: every all-zero column of `h` is replaced
    /// by the uniform column `1/N`. Pre: each column sums to 0 or 1.
    pub fn patch_dangling(h: &Array2<f64>) -> Result<Self> {
        let (rows, cols) = h.dim();
        if rows != cols {
            return Err(Error::Validation(format!(
                "hyperlink matrix must be square, got {rows}x{cols}"
            )));
        }
        let n = rows;
        let mut patched = h.clone();
        for j in 0..n {
            let sum: f64 = h.column(j).sum();
            if sum.abs() <= COLUMN_SUM_TOL {
                patched.column_mut(j).fill(1.0 / n as f64);
            } else if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::Validation(format!(
                    "column {j} sums to {sum}, expected 0 or 1"
                )));
            }
        }
        Self::new(patched)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// The Google matrix `G = alpha E + (1 - alpha)/N * ones`, column-stochastic
/// and strictly positive for `alpha < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoogleMatrix {
    matrix: StochasticMatrix,
    alpha: f64,
}

impl GoogleMatrix {
    pub fn new(e: &StochasticMatrix, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Validation(format!(
                "alpha = {alpha} outside [0, 1]"
            )));
        }
        let n = e.dim();
        let teleport = (1.0 - alpha) / n as f64;
        let g = e.entries().mapv(|v| alpha * v + teleport);
        let floor = teleport - ENTRY_TOL;
        if let Some((idx, &v)) = g.indexed_iter().find(|&(_, &v)| v < floor) {
            return Err(Error::Validation(format!(
                "entry {idx:?} = {v} below the teleportation floor {floor}"
            )));
        }
        Ok(Self {
            matrix: StochasticMatrix::new(g)?,
            alpha,
        })
    }

    /// Full pipeline from a graph: hyperlink matrix, dangling patch, damping.
    pub fn from_graph(graph: &WebGraph, alpha: f64) -> Result<Self> {
        let e = StochasticMatrix::patch_dangling(&graph.hyperlink_matrix())?;
        Self::new(&e, alpha)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn entries(&self) -> &Array2<f64> {
        self.matrix.entries()
    }

    pub fn stochastic(&self) -> &StochasticMatrix {
        &self.matrix
    }
}
