use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::trial::{InitialPosition, Trial, TrialResult};
use super::SimError;
use crate::jitter::Side;
use crate::par::{map_collect, map_reduce, Execution};

/// Per-trial generator: the base seed picks the key, the (position, trial)
/// counter picks the stream.
pub fn trial_rng(base_seed: u64, position_index: usize, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((position_index as u64) << 40) | trial_index);
    rng
}

/// Exact integer sums, so merging is order independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    escaped: u64,
    left: u64,
    right: u64,
    coarse: u64,
    sum: u128,
    sum_sq: u128,
}

impl Tally {
    fn of(r: &TrialResult) -> Self {
        let mut t = Tally {
            trials: 1,
            ..Default::default()
        };
        if let Some(c) = r.escape_cycle.filter(|_| r.escaped) {
            t.escaped = 1;
            t.sum = c as u128;
            t.sum_sq = (c as u128) * (c as u128);
            t.coarse = r.escaped_in_coarse as u64;
            match r.exit_side {
                Some(Side::Left) => t.left = 1,
                Some(Side::Right) => t.right = 1,
                None => {}
            }
        }
        t
    }

    fn merge(self, o: Self) -> Self {
        Tally {
            trials: self.trials + o.trials,
            escaped: self.escaped + o.escaped,
            left: self.left + o.left,
            right: self.right + o.right,
            coarse: self.coarse + o.coarse,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }
}

/// Escape statistics for one initial position, over escaped trials.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PositionStats {
    /// Offset from the left window edge in steps.
    pub position_steps: f64,
    pub trials: u64,
    pub escaped: u64,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub escape_fraction: f64,
    pub left_exits: u64,
    pub right_exits: u64,
    pub coarse_escapes: u64,
}

impl PositionStats {
    fn from_tally(position_steps: f64, t: Tally) -> Self {
        let n = t.escaped;
        let mean = if n > 0 {
            t.sum as f64 / n as f64
        } else {
            f64::NAN
        };
        let variance = if n > 1 {
            let num = (n as u128) * t.sum_sq - t.sum * t.sum;
            num as f64 / (n as f64 * (n - 1) as f64)
        } else {
            0.0
        };
        let std = variance.sqrt();
        PositionStats {
            position_steps,
            trials: t.trials,
            escaped: n,
            mean,
            std,
            stderr: if n > 0 {
                std / (n as f64).sqrt()
            } else {
                f64::NAN
            },
            escape_fraction: n as f64 / t.trials as f64,
            left_exits: t.left,
            right_exits: t.right,
            coarse_escapes: t.coarse,
        }
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MonteCarloReport {
    pub window_steps: (f64, f64),
    pub positions: Vec<PositionStats>,
}

pub fn run_monte_carlo(
    trial: &Trial,
    trials: u64,
    positions: &[InitialPosition],
    base_seed: u64,
    exec: Execution,
) -> Result<MonteCarloReport, SimError> {
    if trials == 0 {
        return Err(SimError::InvalidConfig(
            "trial count must be at least 1".into(),
        ));
    }
    let (left, _) = trial.window_steps();
    let g = trial.step_ratio().ticks_per_step() as f64;
    let mut out = Vec::with_capacity(positions.len());
    for (pi, &p) in positions.iter().enumerate() {
        let start = trial.start_ticks(p)?;
        let tally = map_reduce(
            0..trials,
            exec,
            Tally::default(),
            |i| Tally::of(&trial.run_from(start, &mut trial_rng(base_seed, pi, i))),
            Tally::merge,
        );
        out.push(PositionStats::from_tally(start as f64 / g - left, tally));
    }
    Ok(MonteCarloReport {
        window_steps: trial.window_steps(),
        positions: out,
    })
}

/// Individual results for one position, in trial order.
pub fn run_trials(
    trial: &Trial,
    trials: u64,
    position: InitialPosition,
    position_index: usize,
    base_seed: u64,
    exec: Execution,
) -> Result<Vec<TrialResult>, SimError> {
    let start = trial.start_ticks(position)?;
    Ok(map_collect(0..trials, exec, |i| {
        trial.run_from(start, &mut trial_rng(base_seed, position_index, i))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jitter::IsiTraceModel;
    use crate::sim::trial::TrialConfig;

    fn trial(width: f64) -> Trial {
        Trial::new(TrialConfig::discrete(
            IsiTraceModel::one_bit(0.0, width).unwrap(),
            1_000_000,
        ))
        .unwrap()
    }

    #[test]
    fn single_trial_report_equals_trial() {
        let t = trial(40.0);
        let rep = run_monte_carlo(
            &t,
            1,
            &[InitialPosition::Steps(20.0)],
            42,
            Execution::Sequential,
        )
        .unwrap();
        let r = t.run(42);
        let p = &rep.positions[0];
        assert_eq!(p.mean, r.escape_cycle.unwrap() as f64);
        assert_eq!(p.std, 0.0);
        assert_eq!(p.trials, 1);
        assert_eq!(p.position_steps, 20.0);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let t = trial(20.0);
        let pos = [InitialPosition::Steps(5.0), InitialPosition::Steps(10.0)];
        let a = run_monte_carlo(&t, 500, &pos, 7, Execution::Sequential).unwrap();
        let b = run_monte_carlo(&t, 500, &pos, 7, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exits_are_balanced_at_center() {
        let t = trial(20.0);
        let rep = run_monte_carlo(
            &t,
            4000,
            &[InitialPosition::Steps(10.0)],
            3,
            Execution::Parallel,
        )
        .unwrap();
        let p = &rep.positions[0];
        assert_eq!(p.escaped, 4000);
        let frac = p.left_exits as f64 / 4000.0;
        let sd = (0.25f64 / 4000.0).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * sd, "{frac}");
    }

    #[test]
    fn run_trials_matches_report() {
        let t = trial(20.0);
        let rs = run_trials(
            &t,
            50,
            InitialPosition::Steps(10.0),
            0,
            9,
            Execution::Parallel,
        )
        .unwrap();
        let rep = run_monte_carlo(
            &t,
            50,
            &[InitialPosition::Steps(10.0)],
            9,
            Execution::Sequential,
        )
        .unwrap();
        let mean = rs
            .iter()
            .map(|r| r.escape_cycle.unwrap() as f64)
            .sum::<f64>()
            / 50.0;
        assert!((mean - rep.positions[0].mean).abs() < 1e-9);
    }

    #[test]
    fn rejects_zero_trials() {
        assert!(run_monte_carlo(&trial(20.0), 0, &[], 0, Execution::Sequential).is_err());
    }
}
