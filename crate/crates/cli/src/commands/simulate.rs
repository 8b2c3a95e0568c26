use std::path::{Path, PathBuf};

use serde::Serialize;
use settle_core::jitter::Side;
use settle_core::par::Execution;
use settle_core::sim::{
    run_monte_carlo, run_trials, trial_rng, CoarseFirst, InitialPosition, PositionStats, Trial,
    TrialConfig,
};

use super::{channel_model, section, source_kind, step_ui, window_choice};
use crate::config::{CoarseFirstConfig, ExperimentConfig, SimulateConfig};
use crate::error::CliError;
use crate::output::{fmt_num, Csv, OutputDir};
use crate::Overrides;

pub(crate) fn coarse_first(c: &CoarseFirstConfig) -> Result<CoarseFirst, CliError> {
    let cycles = match (c.duration_cycles, c.duration_ns) {
        (Some(n), None) => n,
        (None, Some(ns)) => {
            if !(c.divided_period_ns > 0.0 && ns >= 0.0 && ns.is_finite()) {
                return Err(CliError::config(
                    "coarse duration and divided period must be positive",
                ));
            }
            (ns / c.divided_period_ns).round() as u64
        }
        _ => {
            return Err(CliError::config(
                "coarse_first needs exactly one of duration_cycles and duration_ns",
            ))
        }
    };
    Ok(CoarseFirst {
        coarse_step: c.coarse_step_steps,
        duration_cycles: cycles,
    })
}

fn positions(s: &SimulateConfig) -> Result<Vec<InitialPosition>, CliError> {
    match (&s.positions_steps, &s.positions_fraction) {
        (Some(p), None) => Ok(p.iter().map(|&x| InitialPosition::Steps(x)).collect()),
        (None, Some(f)) => Ok(f
            .iter()
            .map(|&x| InitialPosition::WindowFraction(x))
            .collect()),
        (None, None) => Ok(vec![InitialPosition::WindowFraction(0.5)]),
        (Some(_), Some(_)) => Err(CliError::config(
            "give positions_steps or positions_fraction, not both",
        )),
    }
}

/// Validated simulation setup.
pub(crate) struct Plan {
    pub trial: Trial,
    pub trials: u64,
    pub positions: Vec<InitialPosition>,
    pub seed: u64,
    pub execution: Execution,
}

pub(crate) fn plan(cfg: &ExperimentConfig, ov: &Overrides) -> Result<Plan, CliError> {
    let s = section(&cfg.simulate, "simulate")?;
    let seed = cfg.require_seed()?;
    let trials = ov.trials.unwrap_or(s.trials);
    if trials == 0 {
        return Err(CliError::config("trials must be at least 1"));
    }
    let channel = channel_model(&s.channel)?;
    let step = step_ui(&channel, s.step_ui)?;
    let tc = TrialConfig {
        channel,
        source: source_kind(&s.source)?,
        window: window_choice(&s.window),
        step_ui: step,
        initial_position: InitialPosition::WindowFraction(0.5),
        max_cycles: s.max_cycles,
        mismatch_percent: s.mismatch_percent,
        coarse_first: s.coarse_first.as_ref().map(coarse_first).transpose()?,
        trajectory_capacity: None,
    };
    let trial = Trial::new(tc)?;
    let positions = positions(s)?;
    for &p in &positions {
        trial.start_ticks(p)?;
    }
    if s.trajectory_capacity == 0 {
        return Err(CliError::config("trajectory_capacity must be positive"));
    }
    if let Some(&t) = s.trajectory_trials.iter().find(|&&t| t >= trials) {
        return Err(CliError::config(format!(
            "trajectory trial {t} is beyond the {trials} trials run"
        )));
    }
    Ok(Plan {
        trial,
        trials,
        positions,
        seed,
        execution: s.execution,
    })
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    seed: u64,
    trials: u64,
    window_left_steps: f64,
    window_right_steps: f64,
    coarse_duration_cycles: Option<u64>,
    positions: &'a [PositionStats],
}

fn side_name(s: Option<Side>) -> &'static str {
    match s {
        Some(Side::Left) => "left",
        Some(Side::Right) => "right",
        None => "",
    }
}

pub fn run(cfg: &ExperimentConfig, ov: &Overrides, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let p = plan(cfg, ov)?;
    let s = section(&cfg.simulate, "simulate")?;
    let report = run_monte_carlo(&p.trial, p.trials, &p.positions, p.seed, p.execution)?;

    let mut stats = Csv::new(&[
        "position",
        "mean",
        "std",
        "stderr",
        "trials",
        "escaped",
        "escape_fraction",
        "left_exits",
        "right_exits",
        "coarse_escapes",
    ]);
    for r in &report.positions {
        stats.numbers(&[
            r.position_steps,
            r.mean,
            r.std,
            r.stderr,
            r.trials as f64,
            r.escaped as f64,
            r.escape_fraction,
            r.left_exits as f64,
            r.right_exits as f64,
            r.coarse_escapes as f64,
        ]);
    }

    let mut dir = OutputDir::create(out)?;
    dir.write_csv("escape_stats.csv", &stats)?;

    let coarse = p.trial.config().coarse_first;
    if coarse.is_some() {
        let mut per_trial = Csv::new(&[
            "position",
            "trial",
            "escaped",
            "escape_cycle",
            "exit_side",
            "escaped_in_coarse",
        ]);
        for (pi, (&pos, st)) in p.positions.iter().zip(&report.positions).enumerate() {
            let results = run_trials(&p.trial, p.trials, pos, pi, p.seed, p.execution)?;
            for (i, r) in results.iter().enumerate() {
                per_trial.row(&[
                    fmt_num(st.position_steps),
                    i.to_string(),
                    (r.escaped as u8).to_string(),
                    r.escape_cycle.map(|c| c.to_string()).unwrap_or_default(),
                    side_name(r.exit_side).to_string(),
                    (r.escaped_in_coarse as u8).to_string(),
                ]);
            }
        }
        dir.write_csv("trials.csv", &per_trial)?;
    }

    if !s.trajectory_trials.is_empty() {
        let recording = Trial::new(TrialConfig {
            trajectory_capacity: Some(s.trajectory_capacity),
            ..p.trial.config().clone()
        })?;
        let start = recording.start_ticks(p.positions[0])?;
        let mut traj = Csv::new(&["trial", "cycle", "position"]);
        for &t in &s.trajectory_trials {
            let r = recording.run_from(start, &mut trial_rng(p.seed, 0, t));
            for (cycle, pos) in r.trajectory.unwrap_or_default() {
                traj.row(&[t.to_string(), cycle.to_string(), fmt_num(pos)]);
            }
        }
        dir.write_csv("trajectory.csv", &traj)?;
    }

    let (left, right) = report.window_steps;
    dir.write_json(
        "summary.json",
        &Summary {
            seed: p.seed,
            trials: p.trials,
            window_left_steps: left,
            window_right_steps: right,
            coarse_duration_cycles: coarse.map(|c| c.duration_cycles),
            positions: &report.positions,
        },
    )?;
    Ok(dir.written().to_vec())
}
