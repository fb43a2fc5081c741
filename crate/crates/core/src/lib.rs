//! Markov-chain patrolling on directed graphs against an omniscient intruder.
//!
//! The crate models a surveillance agent that moves between locations
//! according to a Markov chain while an intruder, who knows the chain and
//! observes the agent's position, picks the best moment and place to attack.
//! An attack at location `j` while the agent sits at `i` takes `tau` steps;
//! it is defeated exactly when the agent reaches `j` within that window.
//!
//! * [`graph`] — patrol graphs, canonical topologies, horizon classification.
//! * [`chain`] — validated row-stochastic matrices, stationary distributions,
//!   seeded random strategies.
//! * [`hitting`] — first-hitting-time probabilities by recursion, by an
//!   independent vectorized route, by exhaustive enumeration, and by
//!   simulation.
//! * [`game`] — the intruder's best response, the game value, the `tau/n`
//!   upper bound, and weakly dominated attack pairs.
//! * [`strategies`] — closed-form optimal or benchmark chains for complete,
//!   star, and line topologies.
//! * [`solver`] — derivative-free maximin search over strategies.
//! * [`evidence`] — randomized sweeps, symmetry checks, and dominance audits
//!   backing the closed forms.
//! * [`io`] — JSON readers and writers for graphs and chains.

pub mod chain;
pub mod error;
pub mod evidence;
pub mod game;
pub mod graph;
pub mod hitting;
pub mod io;
pub mod solver;
pub mod strategies;

pub use chain::{Distribution, MarkovChain};
pub use error::{Error, Result};
pub use game::{BestResponse, GameInstance};
pub use graph::{DiGraph, TauClass, TauClassification};
pub use hitting::HittingProfile;
pub use solver::{SolveConfig, SolveReport};

/// Derives a stream seed for parallel work item `index` under `master`.
/// A fixed finalizer keeps the derived values well spread even for small
/// consecutive indices.
pub fn derived_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    master ^ mix(index)
}
