use std::path::{Path, PathBuf};

use serde::Serialize;
use settle_core::jitter::WindowSpec;
use settle_core::reduction::{
    compare_mismatch, compare_training, ReductionReport, ReductionRow, SIGNIFICANCE_LEVEL,
};
use settle_core::sim::{InitialPosition, Trial, TrialConfig};
use settle_core::stats::WelchTest;

use super::{channel_model, section, source_kind, step_ui, window_choice};
use crate::config::{CompareConfig, ExperimentConfig};
use crate::error::CliError;
use crate::output::{fmt_num, fmt_opt, Csv, OutputDir};
use crate::Overrides;

#[derive(Debug, Serialize)]
struct Summary<'a> {
    kind: &'static str,
    seed: Option<u64>,
    trials_per_arm: Option<u64>,
    headline: &'a ReductionRow,
    std_reduction_exceeds_mean: Option<bool>,
    significance: Option<WelchTest>,
    significance_level: f64,
    significant: Option<bool>,
}

pub fn run(cfg: &ExperimentConfig, ov: &Overrides, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let c = section(&cfg.compare, "compare")?;
    let (report, headline, kind, seed, trials) = match c {
        CompareConfig::Mismatch {
            window_steps,
            mismatch_percent,
            initial_offset_steps,
        } => {
            let w = match initial_offset_steps {
                Some(k) => WindowSpec::new(*window_steps, *k)?,
                None => WindowSpec::centered(*window_steps)?,
            };
            let report = compare_mismatch(w, *mismatch_percent)?;
            let k = w.initial_offset_steps() as f64;
            (report, k, "mismatch", None, None)
        }
        CompareConfig::Training {
            trials,
            max_cycles,
            channel,
            window,
            step_ui: step,
            position_steps,
            position_fraction,
            baseline_source,
            treated_source,
            execution,
        } => {
            let seed = cfg.require_seed()?;
            let trials = ov.trials.unwrap_or(*trials);
            if trials < 2 {
                return Err(CliError::config(
                    "training comparison needs at least 2 trials per arm",
                ));
            }
            let channel = channel_model(channel)?;
            let step = step_ui(&channel, *step)?;
            let initial_position = match (position_steps, position_fraction) {
                (Some(s), None) => InitialPosition::Steps(*s),
                (None, Some(f)) => InitialPosition::WindowFraction(*f),
                (None, None) => InitialPosition::WindowFraction(0.5),
                _ => {
                    return Err(CliError::config(
                        "give position_steps or position_fraction, not both",
                    ))
                }
            };
            let baseline = TrialConfig {
                channel,
                source: source_kind(baseline_source)?,
                window: window_choice(window),
                step_ui: step,
                initial_position,
                max_cycles: *max_cycles,
                mismatch_percent: 0.0,
                coarse_first: None,
                trajectory_capacity: None,
            };
            let treated = TrialConfig {
                source: source_kind(treated_source)?,
                ..baseline.clone()
            };
            Trial::new(baseline.clone())?;
            Trial::new(treated.clone())?;
            let report = compare_training(&baseline, &treated, trials, seed, *execution)?;
            let k = report.rows[0].position;
            (report, k, "training", Some(seed), Some(trials))
        }
    };
    write(out, &report, headline, kind, seed, trials)
}

fn write(
    out: &Path,
    report: &ReductionReport,
    headline: f64,
    kind: &'static str,
    seed: Option<u64>,
    trials: Option<u64>,
) -> Result<Vec<PathBuf>, CliError> {
    let mut csv = Csv::new(&[
        "position",
        "baseline_mean",
        "treated_mean",
        "reduction_fraction",
        "baseline_std",
        "treated_std",
        "std_reduction_fraction",
    ]);
    for r in &report.rows {
        csv.row(&[
            fmt_num(r.position),
            fmt_num(r.baseline_mean),
            fmt_num(r.treated_mean),
            fmt_opt(r.reduction_mean),
            fmt_num(r.baseline_std),
            fmt_num(r.treated_std),
            fmt_opt(r.reduction_std),
        ]);
    }
    let row = report
        .at(headline)
        .ok_or_else(|| CliError::Numeric(format!("no comparison row at position {headline}")))?;
    let summary = Summary {
        kind,
        seed,
        trials_per_arm: trials,
        headline: row,
        std_reduction_exceeds_mean: row
            .reduction_std
            .zip(row.reduction_mean)
            .map(|(s, m)| s > m),
        significance: report.significance,
        significance_level: SIGNIFICANCE_LEVEL,
        significant: report.significance.map(|_| report.is_significant()),
    };
    let mut dir = OutputDir::create(out)?;
    dir.write_csv("reduction.csv", &csv)?;
    dir.write_json("summary.json", &summary)?;
    Ok(dir.written().to_vec())
}
