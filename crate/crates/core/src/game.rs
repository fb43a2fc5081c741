//! The patrolling game: an omniscient intruder versus a Markov strategy.
//!
//! The intruder sees the chain and the agent's current position, then picks
//! an agent position `i` and an attack node `j` (the diagonal `i = j` is
//! allowed) minimizing the probability that the agent reaches `j` within
//! the attack window. The strategy's value is that minimum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::graph::{classify_tau, is_strongly_connected, DiGraph, TauClass};
use crate::hitting::capture_matrix_of;

/// A patrol graph together with an attack window; the fixed data of one game.
#[derive(Debug, Clone)]
pub struct GameInstance {
    graph: DiGraph,
    tau: usize,
}

impl GameInstance {
    /// Requires a strongly connected graph and a positive window.
    pub fn new(graph: DiGraph, tau: usize) -> Result<Self> {
        if tau == 0 {
            return Err(Error::Domain("attack window must be at least 1".into()));
        }
        if !is_strongly_connected(&graph) {
            return Err(Error::NotStronglyConnected);
        }
        Ok(GameInstance { graph, tau })
    }

    pub fn graph(&self) -> &DiGraph {
        &self.graph
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Horizon classification for this instance.
    pub fn classify(&self) -> TauClass {
        classify_tau(&self.graph, self.tau).expect("validated at construction")
    }
}

/// The intruder's optimal attack against a fixed strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    /// (agent position, attacked node), 1-based.
    pub pair: (usize, usize),
    /// Capture probability the intruder accepts by playing that pair.
    pub value: f64,
}

/// Minimum entry of a capture matrix with its 1-based argmin, scanning in
/// lexicographic order so ties resolve to the smallest pair.
fn min_entry(c: &DMatrix<f64>) -> BestResponse {
    let n = c.nrows();
    let mut best = BestResponse { pair: (1, 1), value: c[(0, 0)] };
    for i in 0..n {
        for j in 0..n {
            if c[(i, j)] < best.value {
                best = BestResponse { pair: (i + 1, j + 1), value: c[(i, j)] };
            }
        }
    }
    best
}

/// The intruder's best response over all n^2 ordered pairs.
pub fn intruder_best_response(c: &MarkovChain, tau: usize) -> Result<BestResponse> {
    if tau == 0 {
        return Err(Error::Domain("attack window must be at least 1".into()));
    }
    Ok(min_entry(&capture_matrix_of(c.matrix(), tau)))
}

/// Value of the strategy: the capture probability at the intruder's best
/// response. Exactly 0 whenever some pair is unreachable within the window,
/// which covers reducible chains and windows below the diameter.
pub fn game_value(c: &MarkovChain, tau: usize) -> Result<f64> {
    Ok(intruder_best_response(c, tau)?.value)
}

pub(crate) fn value_of_matrix(p: &DMatrix<f64>, tau: usize) -> f64 {
    min_entry(&capture_matrix_of(p, tau)).value
}

/// Universal cap on the value of any strategy on `inst`: `tau / n`.
/// Meaningful when the window is nontrivial; still returned otherwise.
pub fn upper_bound(inst: &GameInstance) -> f64 {
    inst.tau() as f64 / inst.graph().n() as f64
}

/// Why an attack pair is weakly dominated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DominanceReason {
    /// Every route from `witness` to the attacked node passes through the
    /// agent's position, so watching from `witness` is at least as good for
    /// the intruder: C(witness, j) <= C(i, j).
    CutBefore { witness: usize },
    /// Every route from the agent's position to `witness` passes through the
    /// attacked node, so attacking `witness` instead is at least as good:
    /// C(i, witness) <= C(i, j).
    CutBehind { witness: usize },
    /// The agent sits on a leaf; any watch post other than the leaf and its
    /// neighbor attacks the leaf at least as well: C(k, i) <= C(i, i).
    /// Only applies to windows of at least 2 steps.
    Leaf,
}

/// A weakly dominated (agent position, attack node) pair with its reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatedPair {
    pub pair: (usize, usize),
    pub reason: DominanceReason,
}

impl DominatedPair {
    /// A pair the intruder should weakly prefer, when the reason names one.
    pub fn better_pair(&self) -> Option<(usize, usize)> {
        match self.reason {
            DominanceReason::CutBefore { witness } => Some((witness, self.pair.1)),
            DominanceReason::CutBehind { witness } => Some((self.pair.0, witness)),
            DominanceReason::Leaf => None,
        }
    }
}

/// Structurally dominated attack pairs of a strongly connected graph.
///
/// Off-diagonal pairs are reported when deleting the agent's position
/// disconnects some witness from the target (or deleting the target
/// disconnects the position from some witness); diagonal pairs are reported
/// for leaves when the window allows at least two steps. Results are sorted
/// by pair, witnesses are the smallest that work, and dominance is weak:
/// pruning these pairs never changes the minimum capture probability.
pub fn dominated_pairs(g: &DiGraph, tau: usize) -> Result<Vec<DominatedPair>> {
    if tau == 0 {
        return Err(Error::Domain("attack window must be at least 1".into()));
    }
    if !is_strongly_connected(g) {
        return Err(Error::NotStronglyConnected);
    }
    let n = g.n();
    // reach[skip][src][dst]: dst reachable from src when skip is deleted.
    let reach: Vec<Vec<Vec<bool>>> = (0..n)
        .map(|skip| (0..n).map(|src| g.reachable_without0(src, skip)).collect())
        .collect();
    let mut out = Vec::new();
    #[allow(clippy::needless_range_loop)] // i, j, k are symmetric node roles
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let before = (0..n).find(|&k| k != i && k != j && !reach[i][k][j]);
            if let Some(witness) = before {
                out.push(DominatedPair {
                    pair: (i + 1, j + 1),
                    reason: DominanceReason::CutBefore { witness: witness + 1 },
                });
                continue;
            }
            let behind = (0..n).find(|&k| k != i && k != j && !reach[j][i][k]);
            if let Some(witness) = behind {
                out.push(DominatedPair {
                    pair: (i + 1, j + 1),
                    reason: DominanceReason::CutBehind { witness: witness + 1 },
                });
            }
        }
    }
    // With only two nodes there is no third post to watch the leaf from, and
    // the diagonal can be the strict minimum, so the leaf rule needs n >= 3.
    if tau >= 2 && n >= 3 {
        for (leaf, _) in g.leaves0() {
            out.push(DominatedPair {
                pair: (leaf + 1, leaf + 1),
                reason: DominanceReason::Leaf,
            });
        }
    }
    out.sort_by_key(|d| d.pair);
    Ok(out)
}
