//! Randomized and algebraic verification harnesses: Monte Carlo sweeps for
//! the balanced-line optimality conjecture, the line reflection identity,
//! characteristic-polynomial recurrences, and batch audits of the dominance
//! rules against sampled chains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::random_chain;
use crate::derived_seed;
use crate::error::{Error, Result};
use crate::game::{dominated_pairs, intruder_best_response, value_of_matrix, DominanceReason};
use crate::graph::DiGraph;
use crate::hitting::capture_matrix_of;
use crate::solver::{apply_leaf_dominance, line_objective};
use crate::strategies::LineParams;

/// Violations beyond this tolerance are reported by [`audit_dominance`].
pub const AUDIT_TOL: f64 = 1e-10;

/// Outcome of a Monte Carlo sweep over random line strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub n: usize,
    pub tau: usize,
    /// Number of random parameter vectors evaluated.
    pub samples: usize,
    /// Samples whose objective came within `tol` of, or exceeded, the
    /// balanced reference value.
    pub improvements: usize,
    /// Objective of the balanced strategy the samples are compared against.
    pub reference_value: f64,
    /// Largest symmetric confidence such that `samples` suffices for it;
    /// present only when no improvement was found.
    pub confidence: Option<f64>,
    /// Probability level certified together with `confidence`.
    pub level: Option<f64>,
    /// How the samples were drawn and how the budget was spent.
    pub note: String,
}

impl SweepReport {
    /// Whether this sweep supports the claim: with probability at least
    /// `confidence`, a uniformly random parameter vector fails to reach the
    /// reference with probability at least `level`. Requires a clean sweep
    /// and `samples >= ln(1 - confidence) / ln(level)`.
    pub fn certifies(&self, confidence: f64, level: f64) -> bool {
        if self.improvements != 0 {
            return false;
        }
        if !(confidence > 0.0 && confidence < 1.0 && level > 0.0 && level < 1.0) {
            return false;
        }
        (self.samples as f64) * level.ln() <= (1.0 - confidence).ln()
    }
}

/// Largest c in (0,1) with `samples >= ln(1-c)/ln(c)`, i.e. the strongest
/// symmetric (confidence, level) pair a clean sweep of this size supports.
fn largest_symmetric_confidence(samples: usize) -> f64 {
    let n = samples as f64;
    let ok = |c: f64| n * c.ln() <= (1.0 - c).ln();
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Sweeps `samples` random line strategies on `n` nodes, drawing every
/// interior rightward probability independently and uniformly from (0, 1),
/// and counts how many reach the balanced strategy's objective.
///
/// The objective is the smaller of the two end-to-end capture probabilities
/// within `tau` steps; a sample counts as an improvement when its objective
/// is at least `reference - tol`, so near-ties are surfaced rather than
/// hidden. A clean sweep reports the strongest symmetric confidence pair its
/// size supports. The window must be at least `n - 1` (shorter windows make
/// every strategy's objective zero and the sweep vacuous); windows beyond
/// `2n - 3` are allowed so long horizons can be swept too.
pub fn conjecture_sweep(
    n: usize,
    tau: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SweepReport> {
    if n < 3 {
        return Err(Error::Domain(format!("sweep needs n >= 3, got {n}")));
    }
    if tau < n - 1 {
        return Err(Error::Domain(format!(
            "window {tau} is shorter than the end-to-end trip of {} steps",
            n - 1
        )));
    }
    if samples == 0 {
        return Err(Error::Domain("sweep needs at least one sample".into()));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("tolerance {tol} must be finite and nonnegative")));
    }
    let dims = n - 2;
    let balanced = vec![0.5; dims];
    let (a, b) = line_objective(&balanced, tau);
    let reference_value = a.min(b);
    let improvements: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, i as u64));
            let x: Vec<f64> = (0..dims).map(|_| draw_open_unit(&mut rng)).collect();
            let (a, b) = line_objective(&x, tau);
            u64::from(a.min(b) >= reference_value - tol)
        })
        .sum();
    let (confidence, level) = if improvements == 0 {
        let c = largest_symmetric_confidence(samples);
        (Some(c), Some(c))
    } else {
        (None, None)
    };
    Ok(SweepReport {
        n,
        tau,
        samples,
        improvements: improvements as usize,
        reference_value,
        confidence,
        level,
        note: "interior coordinates drawn independently and uniformly on (0,1), \
               the Dirichlet(1,1) law on each interior row; the full sample \
               budget applies to this single (n, tau) case"
            .into(),
    })
}

fn line_min_objective(x: &LineParams, tau: usize) -> f64 {
    let (a, b) = line_objective(x.x(), tau);
    a.min(b)
}

/// Uniform draw from (0, 1) with the exact endpoint resampled away.
fn draw_open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    }
}

/// Evaluates the line objective at `x` and at its coordinatewise reflection
/// `1 - x`, which must agree: reflecting swaps the two end-to-end capture
/// probabilities, leaving their minimum unchanged.
pub fn symmetry_check(
    n: usize,
    x: &LineParams,
    tau: usize,
    tol: f64,
) -> Result<(f64, f64, bool)> {
    if n < 3 {
        return Err(Error::Domain(format!("line symmetry needs n >= 3, got {n}")));
    }
    if x.len() != n - 2 {
        return Err(Error::Domain(format!(
            "expected {} interior parameters for n = {n}, got {}",
            n - 2,
            x.len()
        )));
    }
    if tau == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    let f_x = line_min_objective(x, tau);
    let f_reflected = line_min_objective(&x.reflected(), tau);
    Ok((f_x, f_reflected, (f_x - f_reflected).abs() <= tol))
}

/// One reflection comparison on a randomly drawn parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrySample {
    pub index: usize,
    pub f_x: f64,
    pub f_reflected: f64,
    pub difference: f64,
}

/// Runs [`symmetry_check`] on `samples` random parameter vectors with
/// derived per-sample seeds; the caller judges the differences against
/// whatever tolerance it cares about.
pub fn symmetry_sweep(
    n: usize,
    tau: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<SymmetrySample>> {
    if n < 3 {
        return Err(Error::Domain(format!("line symmetry needs n >= 3, got {n}")));
    }
    if tau == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    Ok((0..samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, index as u64));
            let x = LineParams::new((0..n - 2).map(|_| draw_open_unit(&mut rng)).collect())
                .expect("open-unit draws are valid parameters");
            let f_x = line_min_objective(&x, tau);
            let f_reflected = line_min_objective(&x.reflected(), tau);
            SymmetrySample { index, f_x, f_reflected, difference: (f_x - f_reflected).abs() }
        })
        .collect())
}

/// The two three-term recurrence sequences attached to a line strategy,
/// evaluated at `lambda` with the boundary convention x_0 = x_{n-1} = 1:
///
/// ```text
/// g_k = lambda * g_{k-1} - x_{k-2} (1 - x_{k-1}) g_{k-2}
/// h_k = lambda * h_{k-1} - x_k     (1 - x_{k-1}) h_{k-2}
/// ```
///
/// both starting from 1, lambda. Index k runs to n - 1 where n is the node
/// count `x.len() + 2`.
pub fn char_poly_sequences(x: &LineParams, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() + 2;
    let mut xb = Vec::with_capacity(n);
    xb.push(1.0);
    xb.extend_from_slice(x.x());
    xb.push(1.0);
    let mut g = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    g.push(1.0);
    g.push(lambda);
    h.push(1.0);
    h.push(lambda);
    for k in 2..n {
        g.push(lambda * g[k - 1] - xb[k - 2] * (1.0 - xb[k - 1]) * g[k - 2]);
        h.push(lambda * h[k - 1] - xb[k] * (1.0 - xb[k - 1]) * h[k - 2]);
    }
    (g, h)
}

/// Final elements of [`char_poly_sequences`]: the two degree-(n-1)
/// polynomials evaluated at `lambda`. They agree identically in exact
/// arithmetic even though the recurrences differ.
pub fn char_poly_pair(x: &LineParams, lambda: f64) -> (f64, f64) {
    let (g, h) = char_poly_sequences(x, lambda);
    (*g.last().unwrap(), *h.last().unwrap())
}

/// One evaluation of the recurrence identities at a random `(x, lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPolySample {
    /// Index of the parameter vector the evaluation belongs to.
    pub index: usize,
    pub lambda: f64,
    pub g: f64,
    pub h: f64,
    /// |g_{n-1} - h_{n-1}|, zero in exact arithmetic.
    pub tail_gap: f64,
    /// Residual of lambda g_{n-1} = x_{n-2} g_{n-2} + (lambda^2 - 1) h_{n-2}.
    pub recurrence_gap: f64,
}

/// Evaluates both recurrence identities on `samples` random parameter
/// vectors, each at `lambdas` arguments drawn uniformly from [-2, 2].
pub fn char_poly_sweep(
    n: usize,
    samples: usize,
    lambdas: usize,
    seed: u64,
) -> Result<Vec<CharPolySample>> {
    if n < 3 {
        return Err(Error::Domain(format!("the recurrences need n >= 3, got {n}")));
    }
    if lambdas == 0 {
        return Err(Error::Domain("need at least one argument per sample".into()));
    }
    let per_sample: Vec<Vec<CharPolySample>> = (0..samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, index as u64));
            let x = LineParams::new((0..n - 2).map(|_| draw_open_unit(&mut rng)).collect())
                .expect("open-unit draws are valid parameters");
            (0..lambdas)
                .map(|_| {
                    let lambda: f64 = rng.random_range(-2.0..2.0);
                    let (g, h) = char_poly_sequences(&x, lambda);
                    let last = n - 1;
                    let lhs = lambda * g[last];
                    let rhs = x.x()[n - 3] * g[last - 1]
                        + (lambda * lambda - 1.0) * h[last - 1];
                    CharPolySample {
                        index,
                        lambda,
                        g: g[last],
                        h: h[last],
                        tail_gap: (g[last] - h[last]).abs(),
                        recurrence_gap: (lhs - rhs).abs(),
                    }
                })
                .collect()
        })
        .collect();
    Ok(per_sample.into_iter().flatten().collect())
}

/// Which capture-probability guarantee a violation broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceCheck {
    /// C(witness, j) <= C(i, j) for a pair cut off in front of the target.
    CutBefore,
    /// C(i, witness) <= C(i, j) for a pair cut off behind the agent.
    CutBehind,
    /// C(k, i) <= C(i, i) for a leaf diagonal and any k off the leaf edge.
    Leaf,
    /// Pinning leaf rows onto their neighbors must not lower the game value.
    LeafTransform,
}

/// A capture-probability inequality that failed beyond [`AUDIT_TOL`] on one
/// sampled chain. An empty audit is the expected outcome; any entry points
/// at an implementation bug, not at a property of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceViolation {
    /// Index of the sampled chain the violation occurred on.
    pub chain_index: usize,
    pub check: DominanceCheck,
    /// The dominated pair under audit (for the transform check, the pair
    /// attaining the original game value).
    pub pair: (usize, usize),
    /// Node substituted into the pair, when the check names one.
    pub witness: Option<usize>,
    /// Bound the audited quantity had to respect.
    pub expected_at_most: f64,
    /// Audited quantity that exceeded it.
    pub observed: f64,
}

/// Samples `chains` random chains on `g` and checks every structurally
/// dominated pair's capture inequality, plus the leaf-pinning transform,
/// returning all violations beyond [`AUDIT_TOL`].
pub fn audit_dominance(
    g: &DiGraph,
    tau: usize,
    chains: usize,
    seed: u64,
) -> Result<Vec<DominanceViolation>> {
    if g.n() < 3 {
        return Err(Error::Domain(format!("audit needs n >= 3, got {}", g.n())));
    }
    if tau == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    let pairs = dominated_pairs(g, tau)?;
    let leaves = g.leaves0();
    let per_chain: Vec<Vec<DominanceViolation>> = (0..chains)
        .into_par_iter()
        .map(|idx| -> Result<Vec<DominanceViolation>> {
            let chain = random_chain(g, derived_seed(seed, idx as u64))?;
            let cm = capture_matrix_of(chain.matrix(), tau);
            let mut found = Vec::new();
            let mut push = |check, pair, witness, expected_at_most: f64, observed: f64| {
                if observed > expected_at_most + AUDIT_TOL {
                    found.push(DominanceViolation {
                        chain_index: idx,
                        check,
                        pair,
                        witness,
                        expected_at_most,
                        observed,
                    });
                }
            };
            for dp in &pairs {
                let (i, j) = dp.pair;
                let bound = cm[(i - 1, j - 1)];
                match dp.reason {
                    DominanceReason::CutBefore { witness } => push(
                        DominanceCheck::CutBefore,
                        dp.pair,
                        Some(witness),
                        bound,
                        cm[(witness - 1, j - 1)],
                    ),
                    DominanceReason::CutBehind { witness } => push(
                        DominanceCheck::CutBehind,
                        dp.pair,
                        Some(witness),
                        bound,
                        cm[(i - 1, witness - 1)],
                    ),
                    DominanceReason::Leaf => {
                        let (leaf0, nb0) = leaves
                            .iter()
                            .copied()
                            .find(|&(l, _)| l == i - 1)
                            .expect("leaf-dominated pair on a non-leaf");
                        for k0 in (0..g.n()).filter(|&k| k != leaf0 && k != nb0) {
                            push(
                                DominanceCheck::Leaf,
                                dp.pair,
                                Some(k0 + 1),
                                bound,
                                cm[(k0, leaf0)],
                            );
                        }
                    }
                }
            }
            if !leaves.is_empty() {
                let br = intruder_best_response(&chain, tau)?;
                let pinned = apply_leaf_dominance(g, &chain)?;
                let pinned_value = value_of_matrix(pinned.matrix(), tau);
                push(DominanceCheck::LeafTransform, br.pair, None, pinned_value, br.value);
            }
            Ok(found)
        })
        .collect::<Result<_>>()?;
    Ok(per_chain.into_iter().flatten().collect())
}
