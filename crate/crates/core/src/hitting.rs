//! First-hitting-time probabilities within a deadline.
//!
//! Four routes to the same quantity, kept deliberately independent:
//!
//! 1. [`hitting_profile`] — the production dense recursion
//!    `F_{k+1} = P (F_k - diag(F_k))`, `F_1 = P`, cost `O(tau n^3)`.
//! 2. [`hitting_profile_vectorized`] — the same profile through an explicit
//!    `n^2 x n^2` linear operator applied to the stacked matrix, cost
//!    `O(n^4)` per step. Exists purely as a verification path.
//! 3. [`enumerate_hitting`] — exhaustive weighted trajectory enumeration,
//!    exponential cost, guarded.
//! 4. [`simulate_hitting`] — seeded Monte Carlo with a binomial error bar.
//!
//! `F_k(i, j)` is the probability that a walk started at `i` reaches `j`
//! for the first time at exactly step `k` (the start position at time 0
//! never counts as a hit). `C(i, j)` sums `F_1..F_tau`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::MarkovChain;
use crate::derived_seed;
use crate::error::{Error, Result};

/// Per-step and cumulative first-hitting probabilities up to a deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingProfile {
    tau: usize,
    f: Vec<DMatrix<f64>>,
    c: DMatrix<f64>,
}

impl HittingProfile {
    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    /// Probability of reaching `j` from `i` within the deadline, 1-based.
    pub fn capture(&self, i: usize, j: usize) -> f64 {
        self.c[(i - 1, j - 1)]
    }

    pub fn capture_matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// First-hit probabilities at exactly step `k`, `1 <= k <= tau`.
    pub fn step(&self, k: usize) -> &DMatrix<f64> {
        &self.f[k - 1]
    }
}

fn check_tau(tau: usize) -> Result<()> {
    if tau == 0 {
        return Err(Error::Domain("deadline must be at least 1".into()));
    }
    Ok(())
}

/// One recursion step: `F_next = P (F - diag(F))`.
fn step_dense(p: &DMatrix<f64>, f: &DMatrix<f64>) -> DMatrix<f64> {
    let mut stripped = f.clone();
    for i in 0..stripped.nrows() {
        stripped[(i, i)] = 0.0;
    }
    p * stripped
}

pub(crate) fn profile_of_matrix(p: &DMatrix<f64>, tau: usize) -> Result<HittingProfile> {
    check_tau(tau)?;
    let mut f = Vec::with_capacity(tau);
    f.push(p.clone());
    for _ in 1..tau {
        let next = step_dense(p, f.last().unwrap());
        f.push(next);
    }
    let mut c = DMatrix::zeros(p.nrows(), p.ncols());
    for fk in &f {
        c += fk;
    }
    Ok(HittingProfile { tau, f, c })
}

/// Cumulative capture matrix only, without retaining the per-step history.
pub(crate) fn capture_matrix_of(p: &DMatrix<f64>, tau: usize) -> DMatrix<f64> {
    let mut f = p.clone();
    let mut c = p.clone();
    for _ in 1..tau {
        f = step_dense(p, &f);
        c += &f;
    }
    c
}

/// Dense-recursion hitting profile for a validated chain.
pub fn hitting_profile(c: &MarkovChain, tau: usize) -> Result<HittingProfile> {
    profile_of_matrix(c.matrix(), tau)
}

/// Verification route through the stacked-column linear operator.
///
/// With matrices stacked column-major, one step is
/// `vec(F_{k+1}) = (I_n (x) P)(I_{n^2} - E) vec(F_k)` where `E` keeps exactly
/// the positions of diagonal entries. The operator is materialized in full,
/// so memory is `O(n^4)`.
pub fn hitting_profile_vectorized(c: &MarkovChain, tau: usize) -> Result<HittingProfile> {
    check_tau(tau)?;
    let p = c.matrix();
    let n = p.nrows();
    let nn = n * n;
    // Block j of the operator maps column j of F through P, with the column
    // of P that would resurrect the diagonal entry (local column j) removed.
    let mut op = DMatrix::zeros(nn, nn);
    for jb in 0..n {
        for r in 0..n {
            for col in 0..n {
                if col != jb {
                    op[(jb * n + r, jb * n + col)] = p[(r, col)];
                }
            }
        }
    }
    let mut v = DVector::from_column_slice(p.as_slice());
    let mut f = Vec::with_capacity(tau);
    f.push(DMatrix::from_column_slice(n, n, v.as_slice()));
    for _ in 1..tau {
        v = &op * &v;
        f.push(DMatrix::from_column_slice(n, n, v.as_slice()));
    }
    let mut cmat = DMatrix::zeros(n, n);
    for fk in &f {
        cmat += fk;
    }
    Ok(HittingProfile { tau, f, c: cmat })
}

/// Guard for exhaustive enumeration: at most this many trajectories.
pub const ENUMERATION_GUARD: f64 = 1e8;

/// Probability of hitting `j` from `i` within `tau` steps by explicit
/// depth-first enumeration of every positive-probability trajectory.
/// Branches whose cumulative weight falls below 1e-300 are pruned.
///
/// This path intentionally shares no machinery with the recursion engine.
pub fn enumerate_hitting(c: &MarkovChain, i: usize, j: usize, tau: usize) -> Result<f64> {
    check_tau(tau)?;
    let n = c.n();
    if i == 0 || i > n || j == 0 || j > n {
        return Err(Error::Domain(format!("pair ({i}, {j}) outside 1..={n}")));
    }
    let states = (n as f64).powi(tau as i32);
    if states > ENUMERATION_GUARD {
        return Err(Error::EnumerationTooLarge { states, limit: ENUMERATION_GUARD });
    }
    let rows = c.rows();
    let target = j - 1;
    fn walk(rows: &[Vec<f64>], u: usize, target: usize, left: usize, weight: f64, acc: &mut f64) {
        for (v, &w) in rows[u].iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let wt = weight * w;
            if wt < 1e-300 {
                continue;
            }
            if v == target {
                *acc += wt;
            } else if left > 1 {
                walk(rows, v, target, left - 1, wt, acc);
            }
        }
    }
    let mut acc = 0.0;
    walk(&rows, i - 1, target, tau, 1.0, &mut acc);
    Ok(acc)
}

/// A Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Samples in this many trajectories per independently seeded block.
const SIM_BLOCK: u64 = 8192;

/// Monte Carlo estimate of the capture probability for pair `(i, j)`.
///
/// Trajectories are drawn in fixed-size blocks, each with a seed derived
/// from (`seed`, block index); blocks may run in parallel and the result is
/// invariant to scheduling because only integer hit counts are combined.
pub fn simulate_hitting(
    c: &MarkovChain,
    i: usize,
    j: usize,
    tau: usize,
    samples: u64,
    seed: u64,
) -> Result<SimEstimate> {
    check_tau(tau)?;
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let n = c.n();
    if i == 0 || i > n || j == 0 || j > n {
        return Err(Error::Domain(format!("pair ({i}, {j}) outside 1..={n}")));
    }
    let rows = c.rows();
    let start = i - 1;
    let target = j - 1;
    let blocks = samples.div_ceil(SIM_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, b));
            let count = SIM_BLOCK.min(samples - b * SIM_BLOCK);
            let mut hits = 0u64;
            for _ in 0..count {
                let mut u = start;
                for _ in 0..tau {
                    let r: f64 = rng.random();
                    u = sample_row(&rows[u], r);
                    if u == target {
                        hits += 1;
                        break;
                    }
                }
            }
            hits
        })
        .sum();
    let estimate = hits as f64 / samples as f64;
    let std_error = (estimate * (1.0 - estimate) / samples as f64).sqrt();
    Ok(SimEstimate { estimate, std_error, hits, samples })
}

/// Inverse-CDF draw from one row; falls back to the last positive entry if
/// rounding pushes the cumulative sum below 1.
fn sample_row(row: &[f64], r: f64) -> usize {
    let mut cum = 0.0;
    let mut last_pos = 0;
    for (v, &w) in row.iter().enumerate() {
        if w > 0.0 {
            last_pos = v;
            cum += w;
            if r < cum {
                return v;
            }
        }
    }
    last_pos
}
