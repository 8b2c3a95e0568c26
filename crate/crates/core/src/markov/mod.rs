//! Absorbing Markov chain algebra.
//!
//! A chain is stored either as a tridiagonal birth–death matrix or as a
//! general row-sparse matrix; the constructor picks the representation.
//! Absorption-time moments are obtained from linear solves against `I − Q`
//! (the fundamental matrix `N = (I − Q)⁻¹` is never formed), and absorption
//! probability series are obtained by repeated vector–matrix products.

mod canonical;
mod chain;
mod series;
mod solve;
mod stats;

pub use canonical::{build_canonical, CanonicalForm, SparseMatrix};
pub use chain::{AbsorbingChain, Row, StateLabel};
pub use series::{
    absorption_series, transitions_for_confidence, AbsorptionSeries, StopRule,
    DEFAULT_MAX_TRANSITIONS,
};
pub use solve::BandedLu;
pub use stats::{absorption_stats, AbsorptionStats};

/// Tolerance on row sums of a validated chain.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Largest row deficit a builder may silently renormalize away.
pub const RENORMALIZE_LIMIT: f64 = 1e-9;

/// Errors raised by chain construction and analysis.
#[derive(Debug, thiserror::Error)]
pub enum ChainError {
    #[error("chain has no states")]
    Empty,
    #[error("row {row} references state {col} outside the chain")]
    StateOutOfRange { row: usize, col: usize },
    #[error("row {row} has negative or non-finite probability {value}")]
    BadProbability { row: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("absorbing state {0} does not hold all of its mass")]
    AbsorbingRowNotIdentity(usize),
    #[error("chain has no absorbing state")]
    NoAbsorbingState,
    #[error("no absorbing state is reachable from transient state {0}")]
    Unreachable(usize),
    #[error("chain has no transient states")]
    NoTransientStates,
    #[error("I - Q is singular (pivot {pivot} at row {row})")]
    Singular { row: usize, pivot: f64 },
    #[error("initial distribution must have {expected} entries, got {got}")]
    InitialLength { expected: usize, got: usize },
    #[error("initial distribution sums to {0}, not 1")]
    InitialNotNormalized(f64),
    #[error("confidence {0} must lie strictly between 0 and 1")]
    ConfidenceOutOfRange(f64),
    #[error("confidence {target} not reached within {max_n} transitions (reached {reached})")]
    ConfidenceNotReached {
        target: f64,
        max_n: usize,
        reached: f64,
        partial: Box<AbsorptionSeries>,
    },
    #[error("label count {labels} does not match state count {states}")]
    LabelCount { labels: usize, states: usize },
}

/// Rescales a builder-produced row so it sums to one.
///
/// Deficits up to [`RENORMALIZE_LIMIT`] are absorbed proportionally;
/// anything larger is rejected.
pub fn renormalize_row(row: usize, entries: &mut [(usize, f64)]) -> Result<(), ChainError> {
    let sum: f64 = entries.iter().map(|&(_, p)| p).sum();
    if (sum - 1.0).abs() > RENORMALIZE_LIMIT {
        return Err(ChainError::NotStochastic { row, sum });
    }
    for e in entries.iter_mut() {
        e.1 /= sum;
    }
    Ok(())
}
