//! Behavioral Monte Carlo of the retiming loop.

mod bits;
mod eye;
mod monte_carlo;
mod rc;
mod trial;
mod walk;

pub use bits::{generate_bits, BitSource, BitSourceKind, BitStream, TRAINING_PATTERN};
pub use eye::{
    crossing_histogram, eye_diagram, find_crossings, Crossing, EyeDiagram, EyeHistogram, Region,
    DEFAULT_BIN_WIDTH_UI, DEFAULT_MERGE_GAP_UI,
};
pub use monte_carlo::{run_monte_carlo, run_trials, trial_rng, MonteCarloReport, PositionStats};
pub use rc::{
    propagate_levels, propagate_rc, RcLine, RcLineSpec, Waveform, DEFAULT_SECTIONS,
    MIN_SAMPLES_PER_UI,
};
pub use trial::{
    rc_delay_range, run_trial, simulate_coarse_first, ChannelModel, CoarseFirst, InitialPosition,
    Trial, TrialConfig, TrialResult, WindowChoice, CHARACTERIZATION_BITS,
};
pub use walk::{walk_chain, walk_chain_many};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("integration step {dt_ui} UI exceeds a quarter section time constant ({limit_ui} UI)")]
    UnstableTimestep { dt_ui: f64, limit_ui: f64 },
    #[error("no threshold crossings found")]
    NoCrossings,
    #[error("initial offset {offset} steps lies outside the {width}-step window")]
    InitialOutsideWindow { offset: f64, width: f64 },
}
