//! Closed-form patrol strategies for canonical topologies, with the exact
//! values they achieve.

use nalgebra::DMatrix;

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::graph::{build_complete, build_line, build_star, DiGraph};

/// Interior rightward probabilities of a line strategy, one per interior
/// node, each strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LineParams {
    x: Vec<f64>,
}

impl LineParams {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        for (k, &v) in x.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!(
                    "line parameter x[{}] = {v} must lie strictly inside (0, 1)",
                    k + 1
                )));
            }
        }
        Ok(LineParams { x })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The coordinatewise reflection x -> 1 - x.
    pub fn reflected(&self) -> LineParams {
        LineParams { x: self.x.iter().map(|v| 1.0 - v).collect() }
    }
}

/// Hub-and-spoke strategy: the hub moves to a uniformly random leaf and
/// every leaf returns to the hub deterministically. The chain is periodic
/// with period 2, so no hub self-loop mass is ever optimal here.
pub fn star_optimal(n: usize) -> Result<MarkovChain> {
    let g = build_star(n)?;
    let p = 1.0 / (n - 1) as f64;
    let m = DMatrix::from_fn(n, n, |i, j| match (i, j) {
        (0, 0) => 0.0,
        (0, _) => p,
        (_, 0) => 1.0,
        _ => 0.0,
    });
    MarkovChain::from_matrix(&g, m, 1e-12)
}

/// Value of [`star_optimal`] against the omniscient intruder.
pub fn star_value(n: usize, tau: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("star needs n >= 3, got {n}")));
    }
    if tau < 2 {
        return Err(Error::Domain("star value needs a window of at least 2".into()));
    }
    let q = 1.0 - 1.0 / (n - 1) as f64;
    let exponent = if tau % 2 == 1 { (tau - 1) / 2 } else { tau / 2 };
    Ok(1.0 - q.powi(exponent as i32))
}

/// Validates that `g` is the successively labeled line on n nodes: all
/// consecutive adjacencies in both directions and nothing else off-diagonal.
fn require_labeled_line(g: &DiGraph) -> Result<()> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Topology("line needs at least 2 nodes".into()));
    }
    for v in 1..n {
        if !g.has_edge(v, v + 1) || !g.has_edge(v + 1, v) {
            return Err(Error::Topology(format!(
                "missing consecutive adjacency between {v} and {}",
                v + 1
            )));
        }
    }
    for (u, v) in g.edges() {
        if u != v && u.abs_diff(v) != 1 {
            return Err(Error::Topology(format!(
                "edge ({u}, {v}) is not consecutive; graph is not a labeled line"
            )));
        }
    }
    Ok(())
}

/// Line strategy from interior rightward probabilities: ends bounce back
/// deterministically, interior node i+1 moves right with probability x[i].
pub fn line_param(g: &DiGraph, x: &LineParams) -> Result<MarkovChain> {
    require_labeled_line(g)?;
    let n = g.n();
    if x.len() != n - 2 {
        return Err(Error::Domain(format!(
            "expected {} interior parameters for n = {n}, got {}",
            n - 2,
            x.len()
        )));
    }
    let mut m = DMatrix::zeros(n, n);
    m[(0, 1)] = 1.0;
    m[(n - 1, n - 2)] = 1.0;
    for i in 1..n - 1 {
        m[(i, i + 1)] = x.x()[i - 1];
        m[(i, i - 1)] = 1.0 - x.x()[i - 1];
    }
    MarkovChain::from_matrix(g, m, 1e-12)
}

/// The balanced line strategy: every interior node moves either way with
/// probability one half.
pub fn line_optimal(n: usize) -> Result<MarkovChain> {
    let g = build_line(n)?;
    let x = LineParams::new(vec![0.5; n.saturating_sub(2)])?;
    line_param(&g, &x)
}

/// Block-cyclic strategy on the complete graph: nodes split into `tau`
/// consecutive blocks of size n/tau, each block jumping uniformly onto the
/// next block of the canonical cycle. Requires `tau <= n` and `tau | n`;
/// achieves the universal bound `tau / n` exactly.
///
/// For n = 2 the optimum is returned for every window: the uniform matrix
/// when tau = 1 and the two-cycle swap when tau >= 2.
pub fn complete_kron(n: usize, tau: usize) -> Result<MarkovChain> {
    if tau == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    if n == 2 {
        let g = build_complete(2)?;
        let rows = if tau == 1 {
            vec![vec![0.5, 0.5], vec![0.5, 0.5]]
        } else {
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        };
        return MarkovChain::from_rows(&g, &rows, 1e-12);
    }
    let canonical: Vec<usize> = (0..tau).map(|b| (b + 1) % tau).collect();
    complete_kron_with(n, tau, &canonical)
}

/// Block-cyclic strategy with an explicit block permutation. `perm` maps
/// block b (0-based) to its successor and must be one cycle through all
/// `tau` blocks, otherwise the chain would be reducible.
pub fn complete_kron_with(n: usize, tau: usize, perm: &[usize]) -> Result<MarkovChain> {
    if n < 2 {
        return Err(Error::Domain(format!("complete graph needs n >= 2, got {n}")));
    }
    if tau == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    if tau > n || !n.is_multiple_of(tau) {
        return Err(Error::NotApplicable(format!(
            "block-cyclic form needs tau <= n and tau | n (got n = {n}, tau = {tau}); \
             use the maximin solver for other windows"
        )));
    }
    if perm.len() != tau {
        return Err(Error::Domain(format!(
            "permutation has {} entries, expected {tau}",
            perm.len()
        )));
    }
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..tau).collect::<Vec<_>>() {
        return Err(Error::Domain("block map is not a permutation".into()));
    }
    let mut visited = vec![false; tau];
    let mut cur = 0usize;
    for _ in 0..tau {
        if visited[cur] {
            return Err(Error::Domain(
                "block permutation must be a single cycle through all blocks".into(),
            ));
        }
        visited[cur] = true;
        cur = perm[cur];
    }
    let g = build_complete(n)?;
    let m = n / tau;
    let w = tau as f64 / n as f64;
    let mat = DMatrix::from_fn(n, n, |v, u| {
        if perm[v / m] == u / m {
            w
        } else {
            0.0
        }
    });
    MarkovChain::from_matrix(&g, mat, 1e-12)
}

/// The memoryless benchmark: every step lands on a uniformly random node.
pub fn random_walk(n: usize) -> Result<MarkovChain> {
    let g = build_complete(n)?;
    let w = 1.0 / n as f64;
    MarkovChain::from_matrix(&g, DMatrix::from_element(n, n, w), 1e-12)
}

/// Value of [`random_walk`]: every pair is caught with the same probability
/// `1 - (1 - 1/n)^tau`.
pub fn random_walk_value(n: usize, tau: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    if tau == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    Ok(1.0 - (1.0 - 1.0 / n as f64).powi(tau as i32))
}

/// How close the uniform walk comes to the universal bound on the complete
/// graph: `(n^tau - (n-1)^tau) / (tau n^(tau-1))`, at least `1 - 1/e` on its
/// whole domain `n >= 3`, `1 <= tau <= n - 1`.
pub fn suboptimality_factor(n: usize, tau: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    if tau == 0 || tau > n - 1 {
        return Err(Error::Domain(format!(
            "window must satisfy 1 <= tau <= n - 1, got tau = {tau} for n = {n}"
        )));
    }
    let nf = n as f64;
    let num = nf.powi(tau as i32) - (nf - 1.0).powi(tau as i32);
    let den = tau as f64 * nf.powi(tau as i32 - 1);
    Ok(num / den)
}
