//! Row-stochastic transition matrices tied to a supporting graph.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DiGraph;

/// Default tolerance for accepting row sums as stochastic.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// A Markov chain whose support lies inside a directed graph's edge set.
/// Rows are renormalized at construction, so row sums are exact to machine
/// precision from then on.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    graph: DiGraph,
    p: DMatrix<f64>,
}

impl MarkovChain {
    /// Validates and adopts a transition matrix over graph `g`.
    ///
    /// Checks run row by row in a fixed order: negativity, row sum within
    /// `tol` of 1, then support containment. Rows that pass are divided by
    /// their exact sum.
    pub fn from_matrix(g: &DiGraph, m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = g.n();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Domain(format!(
                "matrix is {}x{}, graph has {} nodes",
                m.nrows(),
                m.ncols(),
                n
            )));
        }
        let mut p = m;
        for i in 0..n {
            for j in 0..n {
                let v = p[(i, j)];
                if v < 0.0 {
                    return Err(Error::NegativeEntry { row: i + 1, col: j + 1, value: v });
                }
            }
            let sum: f64 = p.row(i).iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::RowNotStochastic { row: i + 1, sum, tol });
            }
            for j in 0..n {
                let v = p[(i, j)];
                if v > 0.0 && !g.has_edge0(i, j) {
                    return Err(Error::OffSupport { row: i + 1, col: j + 1, value: v });
                }
            }
            for j in 0..n {
                p[(i, j)] /= sum;
            }
        }
        Ok(MarkovChain { graph: g.clone(), p })
    }

    /// Convenience wrapper taking row slices.
    pub fn from_rows(g: &DiGraph, rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = g.n();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain(format!("expected {n} rows of length {n}")));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(g, m, tol)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &DiGraph {
        &self.graph
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Transition probability with 1-based labels.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.p[(i - 1, j - 1)]
    }

    /// Rows as plain vectors, for serialization.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.p.row(i).iter().copied().collect()).collect()
    }
}

/// True when the chain's positive-probability support is strongly connected.
pub fn is_irreducible(c: &MarkovChain) -> bool {
    let n = c.n();
    let p = c.matrix();
    let reach = |forward: bool| -> bool {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let w = if forward { p[(u, v)] } else { p[(v, u)] };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// The unique stationary row vector of an irreducible chain.
///
/// Solved directly: one balance equation is replaced by the normalization
/// constraint, which also covers periodic chains where power iteration
/// would cycle forever.
pub fn stationary_distribution(c: &MarkovChain) -> Result<Distribution> {
    if !is_irreducible(c) {
        return Err(Error::Reducible);
    }
    let n = c.n();
    // Balance: (P^T - I) pi = 0, with the last equation replaced by sum = 1.
    let mut a = c.matrix().transpose();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("stationary solve is singular".into()))?;
    let residual = (c.matrix().transpose() * &pi - &pi).abs().max();
    if residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "stationary residual {residual:.3e} exceeds 1e-10"
        )));
    }
    Ok(Distribution { v: pi })
}

/// A probability vector over the nodes, 1-based accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    v: DVector<f64>,
}

impl Distribution {
    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.v[i - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.v.as_slice()
    }

    pub fn min_entry(&self) -> f64 {
        self.v.min()
    }

    #[cfg(test)]
    pub(crate) fn vector(&self) -> &DVector<f64> {
        &self.v
    }
}

/// Samples a chain on `g` with every row drawn uniformly from the simplex
/// over that node's out-neighbors (flat Dirichlet via normalized exponential
/// draws). Deterministic for a given seed; positive mass on every out-edge.
pub fn random_chain(g: &DiGraph, seed: u64) -> Result<MarkovChain> {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = DMatrix::zeros(n, n);
    for u in 0..n {
        let outs = g.out0(u);
        let draws: Vec<f64> = outs
            .iter()
            .map(|_| {
                let u01: f64 = rng.random();
                -(1.0 - u01).ln()
            })
            .collect();
        let total: f64 = draws.iter().sum();
        for (&v, d) in outs.iter().zip(&draws) {
            p[(u, v)] = d / total;
        }
    }
    MarkovChain::from_matrix(g, p, 1e-12)
}
