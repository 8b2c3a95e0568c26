use std::path::{Path, PathBuf};

use serde::Serialize;
use settle_core::loop_model::{deterministic_settling_time, phase_step, steps_to_lock, LoopParams};
use settle_core::markov::{absorption_series, absorption_stats, ChainError, StopRule};

use super::{section, BuiltModel};
use crate::config::{ExperimentConfig, LoopConfig, ModelConfig};
use crate::error::CliError;
use crate::output::{Csv, OutputDir};

#[derive(Debug, Serialize)]
struct Peak {
    position_tau: f64,
    mean_cycles: f64,
}

#[derive(Debug, Serialize)]
struct LoopSummary {
    phase_step_rad: f64,
    steps_to_lock: f64,
    settling_time_ns: f64,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    model: &'a ModelConfig,
    start_position_tau: f64,
    mean_at_start_cycles: f64,
    std_at_start_cycles: f64,
    peak: Peak,
    confidence: f64,
    n_at_confidence: usize,
    #[serde(rename = "loop", skip_serializing_if = "Option::is_none")]
    loop_summary: Option<LoopSummary>,
}

fn loop_params(l: &LoopConfig) -> Result<LoopParams, CliError> {
    // µA·ns = fC and pF: convert both to SI so the step is in radians
    Ok(LoopParams::new(
        l.k_cp_ua_ns * 1e-15,
        l.k_vc_rad_per_v,
        l.cap_pf * 1e-12,
        l.period_ns,
        l.activity,
    )?)
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let a = section(&cfg.analyze, "analyze")?;
    if !(a.confidence > 0.0 && a.confidence < 1.0) {
        return Err(ChainError::ConfidenceOutOfRange(a.confidence).into());
    }
    let model = BuiltModel::build(&a.model)?;
    let start = a
        .start_position_steps
        .unwrap_or_else(|| model.center_position());
    let initial = model.initial(start)?;
    let loop_cfg = a
        .loop_params
        .as_ref()
        .map(|l| {
            let p = loop_params(l)?;
            steps_to_lock(l.delta_phi_rad, phase_step(&p))?;
            Ok::<_, CliError>((p, l.delta_phi_rad))
        })
        .transpose()?;
    let chain = model.chain();

    let stats = absorption_stats(chain)?;
    let rows = model.rows(&stats);
    if let Some(wanted) = &a.positions_steps {
        for p in wanted {
            if !rows.iter().any(|r| (r.0 - p).abs() < 1e-9) {
                return Err(CliError::config(format!(
                    "position {p} is not an interior state of the model"
                )));
            }
        }
    }
    let series = absorption_series(chain, &initial, StopRule::confidence(a.confidence))?;
    let n_at_confidence = series.cdf.len() - 1;

    let mut mean_std = Csv::new(&["position_tau", "mean_cycles", "std_cycles"]);
    for &(p, m, s) in &rows {
        let keep = match &a.positions_steps {
            Some(w) => w.iter().any(|q| (q - p).abs() < 1e-9),
            None => true,
        };
        if keep {
            mean_std.numbers(&[p, m, s]);
        }
    }

    let (peak_pos, peak_mean) = rows.iter().fold((f64::NAN, f64::NEG_INFINITY), |acc, r| {
        if r.1 > acc.1 {
            (r.0, r.1)
        } else {
            acc
        }
    });
    let at_start = rows.iter().find(|r| (r.0 - start).abs() < 1e-9);
    let (mean_at_start, std_at_start) = match at_start {
        Some(r) => (r.1, r.2),
        None => (series.truncated_mean(), f64::NAN),
    };
    let loop_summary = loop_cfg
        .map(|(p, dphi)| {
            Ok::<_, CliError>(LoopSummary {
                phase_step_rad: phase_step(&p),
                steps_to_lock: steps_to_lock(dphi, phase_step(&p))?,
                settling_time_ns: deterministic_settling_time(dphi, &p)?,
            })
        })
        .transpose()?;
    let summary = Summary {
        model: &a.model,
        start_position_tau: start,
        mean_at_start_cycles: mean_at_start,
        std_at_start_cycles: std_at_start,
        peak: Peak {
            position_tau: peak_pos,
            mean_cycles: peak_mean,
        },
        confidence: a.confidence,
        n_at_confidence,
        loop_summary,
    };

    let mut dir = OutputDir::create(out)?;
    dir.write_csv("mean_std.csv", &mean_std)?;
    if a.absorption_cdf {
        let mut cdf = Csv::new(&["n", "cdf", "pmf"]);
        for (n, (c, p)) in series.cdf.iter().zip(&series.pmf).enumerate() {
            cdf.numbers(&[n as f64, *c, *p]);
        }
        dir.write_csv("absorption_cdf.csv", &cdf)?;
    }
    dir.write_json("summary.json", &summary)?;
    Ok(dir.written().to_vec())
}
