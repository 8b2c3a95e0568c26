//! Startup-time reduction: step mismatch, training sequences and
//! coarse-first acquisition.

use crate::jitter::{biased_chain, isi1_chain, ModelError, WindowSpec};
use crate::markov::{absorption_stats, transitions_for_confidence, ChainError};
use crate::par::Execution;
use crate::sim::{run_trials, SimError, Trial, TrialConfig};
use crate::stats::{summarize, welch_less, SampleSummary, WelchTest};

/// Reductions are called significant below this one-sided p-value.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;
/// Divided-clock period in ns assumed for coarse-first timing.
pub const DEFAULT_DIVIDED_PERIOD_NS: f64 = 4.0;

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("compared configurations differ: {0}")]
    Mismatched(&'static str),
}

/// `(baseline − treated) / baseline`, undefined unless `baseline > 0`.
pub fn reduction_fraction(baseline: f64, treated: f64) -> Option<f64> {
    (baseline > 0.0).then(|| (baseline - treated) / baseline)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReductionRow {
    /// Steps from the left window edge.
    pub position: f64,
    pub baseline_mean: f64,
    pub treated_mean: f64,
    pub baseline_std: f64,
    pub treated_std: f64,
    pub reduction_mean: Option<f64>,
    pub reduction_std: Option<f64>,
}

impl ReductionRow {
    fn new(position: f64, baseline: (f64, f64), treated: (f64, f64)) -> Self {
        Self {
            position,
            baseline_mean: baseline.0,
            treated_mean: treated.0,
            baseline_std: baseline.1,
            treated_std: treated.1,
            reduction_mean: reduction_fraction(baseline.0, treated.0),
            reduction_std: reduction_fraction(baseline.1, treated.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReductionReport {
    pub rows: Vec<ReductionRow>,
    /// Welch test that the treated mean is below the baseline mean.
    pub significance: Option<WelchTest>,
}

impl ReductionReport {
    pub fn at(&self, position: f64) -> Option<&ReductionRow> {
        self.rows.iter().find(|r| r.position == position)
    }

    pub fn is_significant(&self) -> bool {
        self.significance
            .is_some_and(|w| w.p_value < SIGNIFICANCE_LEVEL)
    }
}

/// Analytic comparison of the 1-bit-ISI chain against the same chain with
/// mismatched update steps, at every interior position. A negative
/// mismatch lengthens the right step instead of the left.
pub fn compare_mismatch(
    window: WindowSpec,
    mismatch_percent: f64,
) -> Result<ReductionReport, ReductionError> {
    let base = isi1_chain(window.width_steps())?;
    let biased = biased_chain(&base, mismatch_percent)?;
    let s0 = absorption_stats(&base)?;
    let s1 = absorption_stats(&biased.chain)?;
    let rows = (1..window.width_steps())
        .map(|k| {
            let b = biased.aligned_state(k);
            ReductionRow::new(
                k as f64,
                (s0.mean_of(k), s0.std_of(k)),
                (s1.mean_of(b), s1.std_of(b)),
            )
        })
        .collect();
    Ok(ReductionReport {
        rows,
        significance: None,
    })
}

/// Monte Carlo comparison of two sources over the same channel, window and
/// start. Trials that never escape are left out of the statistics.
pub fn compare_training(
    baseline: &TrialConfig,
    treated: &TrialConfig,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<ReductionReport, ReductionError> {
    if baseline.channel != treated.channel {
        return Err(ReductionError::Mismatched("channel"));
    }
    if baseline.window != treated.window || baseline.initial_position != treated.initial_position {
        return Err(ReductionError::Mismatched("window or initial position"));
    }
    let (position, b) = escape_sample(baseline, trials, seed, exec)?;
    let (_, t) = escape_sample(treated, trials, seed, exec)?;
    let row = ReductionRow::new(
        position,
        (b.mean, b.variance.sqrt()),
        (t.mean, t.variance.sqrt()),
    );
    Ok(ReductionReport {
        rows: vec![row],
        significance: Some(welch_less(&t, &b)),
    })
}

fn escape_sample(
    cfg: &TrialConfig,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<(f64, SampleSummary), ReductionError> {
    let trial = Trial::new(cfg.clone())?;
    let start = trial.start_ticks(cfg.initial_position)?;
    let position =
        start as f64 / trial.step_ratio().ticks_per_step() as f64 - trial.window_steps().0;
    let times: Vec<f64> = run_trials(&trial, trials, cfg.initial_position, 0, seed, exec)?
        .iter()
        .filter_map(|r| r.escape_cycle.map(|c| c as f64))
        .collect();
    Ok((position, summarize(&times)))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CoarseFirstEstimate {
    pub cycles: usize,
    /// `cycles × divided_period`, in the unit of the period.
    pub absolute_time: f64,
}

/// Divided-clock cycles for the coarse-grid 1-bit-ISI chain, started at
/// its centre, to be absorbed with the given confidence.
pub fn coarse_first_confidence(
    coarse_window_steps: usize,
    confidence: f64,
    divided_period: f64,
) -> Result<CoarseFirstEstimate, ReductionError> {
    let chain = isi1_chain(coarse_window_steps)?;
    let start = WindowSpec::centered(coarse_window_steps)?.initial_offset_steps();
    let cycles = transitions_for_confidence(&chain, &chain.point_mass(start), confidence)?;
    Ok(CoarseFirstEstimate {
        cycles,
        absolute_time: cycles as f64 * divided_period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jitter::IsiTraceModel;
    use crate::sim::BitSourceKind;

    #[test]
    fn zero_mismatch_is_no_reduction() {
        let r = compare_mismatch(WindowSpec::centered(40).unwrap(), 0.0).unwrap();
        assert_eq!(r.rows.len(), 39);
        for row in &r.rows {
            assert!(row.reduction_mean.unwrap().abs() < 1e-12);
            assert!(row.reduction_std.unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn flipped_bias_mirrors_profile() {
        let w = WindowSpec::centered(40).unwrap();
        let pos = compare_mismatch(w, 10.0).unwrap();
        let neg = compare_mismatch(w, -10.0).unwrap();
        for k in 1..40 {
            let a = pos.at(k as f64).unwrap().reduction_mean.unwrap();
            let b = neg.at((40 - k) as f64).unwrap().reduction_mean.unwrap();
            assert!((a - b).abs() < 1e-9, "{k}: {a} vs {b}");
        }
    }

    #[test]
    fn std_reduces_more_than_mean_at_center() {
        let r = compare_mismatch(WindowSpec::centered(40).unwrap(), 10.0).unwrap();
        let c = r.at(20.0).unwrap();
        assert!(c.reduction_std.unwrap() > c.reduction_mean.unwrap());
        assert!(c.reduction_mean.unwrap() > 0.0);
    }

    #[test]
    fn coarse_time_scales_with_period() {
        let e = coarse_first_confidence(5, 0.99, DEFAULT_DIVIDED_PERIOD_NS).unwrap();
        assert_eq!(e.absolute_time, e.cycles as f64 * 4.0);
        let tighter = coarse_first_confidence(5, 0.999, 4.0).unwrap();
        assert!(tighter.cycles > e.cycles);
        assert!(coarse_first_confidence(5, 1.0, 4.0).is_err());
    }

    #[test]
    fn identical_arms_show_no_reduction() {
        let cfg = TrialConfig::discrete(IsiTraceModel::one_bit(0.0, 20.0).unwrap(), 1_000_000);
        let r = compare_training(&cfg, &cfg, 200, 5, Execution::Parallel).unwrap();
        assert_eq!(r.rows[0].reduction_mean, Some(0.0));
        assert!(!r.is_significant());
    }

    #[test]
    fn training_beats_random_data() {
        let base = TrialConfig::discrete(IsiTraceModel::one_bit(0.0, 40.0).unwrap(), 1_000_000);
        let treated = TrialConfig {
            source: BitSourceKind::TrainingBiased,
            ..base.clone()
        };
        let r = compare_training(&base, &treated, 300, 1, Execution::Parallel).unwrap();
        assert!(r.is_significant());
        assert!(r.rows[0].reduction_mean.unwrap() > 0.5);
    }

    #[test]
    fn mismatched_arms_rejected() {
        let a = TrialConfig::discrete(IsiTraceModel::one_bit(0.0, 40.0).unwrap(), 100);
        let b = TrialConfig::discrete(IsiTraceModel::one_bit(0.0, 30.0).unwrap(), 100);
        assert!(matches!(
            compare_training(&a, &b, 10, 0, Execution::Sequential),
            Err(ReductionError::Mismatched(_))
        ));
    }
}
