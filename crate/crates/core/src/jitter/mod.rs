//! Chain builders for each jitter scenario, in units of the loop phase step.
//!
//! All builders share one phase-detector rule: a data crossing earlier than
//! the sampling clock shifts the clock one step later (right), a crossing
//! later than the clock shifts it one step earlier (left), and a crossing
//! exactly on the clock goes either way with probability one half.

mod biased;
mod combined;
mod gaussian;
mod isi;
mod window;

pub use biased::{biased_chain, BiasedChain, StepRatio};
pub use combined::{combined_chain, CombinedJitterSpec};
pub use gaussian::{gaussian_chain, normal_cdf, wrong_update_probability, GaussianJitterSpec};
pub use isi::{
    isi1_chain, isi2_chain, Isi2Chain, IsiTraceModel, LastEvent, SubWindows, FSM_EDGES, ISI1_TABLE,
};
pub use window::WindowSpec;

use crate::markov::ChainError;

/// Direction of a clock update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Shift implied by a crossing at `crossing` with the clock at `clock`:
/// `Some(+1)` right, `Some(-1)` left, `None` for an exact tie.
pub fn update_direction(crossing: f64, clock: f64) -> Option<i8> {
    if crossing < clock {
        Some(1)
    } else if crossing > clock {
        Some(-1)
    } else {
        None
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("window width must be at least {min} steps, got {got}")]
    WindowTooNarrow { min: usize, got: usize },
    #[error("initial offset {offset} must lie strictly inside a window of {width} steps")]
    OffsetOutsideWindow { offset: usize, width: usize },
    #[error("sub-window widths must all be at least one step: {0:?}")]
    EmptySubWindow([usize; 3]),
    #[error("invalid jitter parameter: {0}")]
    InvalidParameter(String),
    #[error("mismatch {0}% needs a step-ratio denominator above 100")]
    MismatchDenominator(f64),
    #[error("biasing needs a birth-death chain absorbing at both ends")]
    NotBirthDeath,
}
