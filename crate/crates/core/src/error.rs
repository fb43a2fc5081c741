//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building graphs, chains, or reports.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on sizes, horizons, or parameter ranges was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// An edge referenced a node label outside 1..=n.
    #[error("node label {label} outside 1..={n}")]
    LabelOutOfRange { label: usize, n: usize },

    /// A node has no outgoing edge, so no row distribution can exist.
    #[error("node {node} has no outgoing edge")]
    DanglingNode { node: usize },

    /// The graph (or chain support) is not strongly connected.
    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    /// A transition matrix entry was negative.
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    /// A row of a transition matrix does not sum to 1 within tolerance.
    #[error("row {row} sums to {sum}, farther than {tol} from 1")]
    RowNotStochastic { row: usize, sum: f64, tol: f64 },

    /// A positive transition probability sits on a pair that is not an edge.
    #[error("positive entry {value} at ({row}, {col}) is off the edge set")]
    OffSupport { row: usize, col: usize, value: f64 },

    /// An operation that needs an irreducible chain got a reducible one.
    #[error("chain is reducible")]
    Reducible,

    /// A linear solve failed or produced an unacceptable residual.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Exhaustive trajectory enumeration would visit too many states.
    #[error("enumeration of {states:.3e} trajectories exceeds the {limit:.3e} guard")]
    EnumerationTooLarge { states: f64, limit: f64 },

    /// A closed-form construction does not apply to these parameters.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The graph does not have the shape an operation requires.
    #[error("topology error: {0}")]
    Topology(String),

    /// A solver configuration field is out of range.
    #[error("config error: {0}")]
    Config(String),

    /// File I/O failed while reading or writing an artifact.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A JSON artifact could not be parsed or serialized.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A text artifact (edge list, CSV) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}
