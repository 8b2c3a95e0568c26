use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::bits::{BitSourceKind, BitStream};
use super::eye::interpolate;
use super::rc::{RcLine, RcLineSpec};
use super::SimError;
use crate::jitter::{update_direction, GaussianJitterSpec, IsiTraceModel, Side, StepRatio};

/// Bits of random history used to locate the extreme crossing delays of
/// an RC channel.
pub const CHARACTERIZATION_BITS: usize = 4096;
const CHARACTERIZATION_SEED: u64 = 0x5eed;

/// Source of data-crossing times.
///
/// Discrete traces give crossings in loop steps. The optional Gaussian
/// jitter is added to each crossing with standard deviation `sigma_steps`;
/// this matches `combined_chain` directly, while `gaussian_chain(σ)`
/// corresponds to a draw with standard deviation `σ/2`.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    DiscreteTrace {
        trace: IsiTraceModel,
        jitter: Option<GaussianJitterSpec>,
    },
    RcLine(RcLineSpec),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowChoice {
    /// Discrete traces: first to last crossing, widened by the jitter
    /// truncation. RC lines: the measured crossing-delay range.
    Derived,
    /// Edges in steps on the crossing axis.
    Explicit { left_steps: f64, right_steps: f64 },
}

/// Starting clock position measured from the left window edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPosition {
    Steps(f64),
    WindowFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseFirst {
    /// Coarse update size in fine steps.
    pub coarse_step: u32,
    pub duration_cycles: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub channel: ChannelModel,
    pub source: BitSourceKind,
    pub window: WindowChoice,
    /// Phase step in UI; converts RC crossing delays to steps.
    pub step_ui: f64,
    pub initial_position: InitialPosition,
    pub max_cycles: u64,
    pub mismatch_percent: f64,
    pub coarse_first: Option<CoarseFirst>,
    /// Ring-buffer capacity for the recorded trajectory; off when `None`.
    pub trajectory_capacity: Option<usize>,
}

impl TrialConfig {
    /// Random data over a discrete trace, derived window, centre start.
    pub fn discrete(trace: IsiTraceModel, max_cycles: u64) -> Self {
        Self {
            channel: ChannelModel::DiscreteTrace {
                trace,
                jitter: None,
            },
            source: BitSourceKind::Bernoulli { p: 0.5 },
            window: WindowChoice::Derived,
            step_ui: 1.0,
            initial_position: InitialPosition::WindowFraction(0.5),
            max_cycles,
            mismatch_percent: 0.0,
            coarse_first: None,
            trajectory_capacity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub escaped: bool,
    pub escape_cycle: Option<u64>,
    pub exit_side: Option<Side>,
    pub escaped_in_coarse: bool,
    pub final_position_steps: f64,
    /// `(cycle, position in steps from the left edge)` at each move.
    pub trajectory: Option<Vec<(u64, f64)>>,
}

/// A validated configuration with its window resolved, ready to run many
/// trials.
#[derive(Debug, Clone)]
pub struct Trial {
    cfg: TrialConfig,
    left: f64,
    right: f64,
    ratio: StepRatio,
    rc_warmup: u64,
}

impl Trial {
    pub fn new(cfg: TrialConfig) -> Result<Self, SimError> {
        if !(cfg.step_ui > 0.0 && cfg.step_ui.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "step must be positive, got {}",
                cfg.step_ui
            )));
        }
        if cfg.max_cycles == 0 {
            return Err(SimError::InvalidConfig(
                "max_cycles must be positive".into(),
            ));
        }
        if let Some(cf) = cfg.coarse_first {
            if cf.coarse_step == 0 {
                return Err(SimError::InvalidConfig(
                    "coarse step must be positive".into(),
                ));
            }
        }
        cfg.source.validate()?;
        let ratio = StepRatio::from_mismatch_percent(cfg.mismatch_percent)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        let mut rc_warmup = 0;
        if let ChannelModel::DiscreteTrace {
            jitter: Some(j), ..
        } = &cfg.channel
        {
            j.validate()
                .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        }
        if let ChannelModel::RcLine(spec) = &cfg.channel {
            spec.validate()?;
            rc_warmup = (3.0 * spec.total_rc_ui()).ceil() as u64 + 2;
        }
        let (left, right) = match cfg.window {
            WindowChoice::Explicit {
                left_steps,
                right_steps,
            } => {
                if !(left_steps <= right_steps)
                    || !left_steps.is_finite()
                    || !right_steps.is_finite()
                {
                    return Err(SimError::InvalidConfig(format!(
                        "window edges out of order: [{left_steps}, {right_steps}]"
                    )));
                }
                (left_steps, right_steps)
            }
            WindowChoice::Derived => derived_window(&cfg)?,
        };
        let trial = Self {
            cfg,
            left,
            right,
            ratio,
            rc_warmup,
        };
        trial.start_ticks(trial.cfg.initial_position)?;
        Ok(trial)
    }

    pub fn config(&self) -> &TrialConfig {
        &self.cfg
    }

    /// Window edges in steps on the crossing axis.
    pub fn window_steps(&self) -> (f64, f64) {
        (self.left, self.right)
    }

    pub fn width_steps(&self) -> f64 {
        self.right - self.left
    }

    pub fn step_ratio(&self) -> StepRatio {
        self.ratio
    }

    fn ticks_per_step(&self) -> f64 {
        self.ratio.ticks_per_step() as f64
    }

    /// Initial position on the tick grid, snapped to the nearest tick.
    pub fn start_ticks(&self, at: InitialPosition) -> Result<i64, SimError> {
        let offset = match at {
            InitialPosition::Steps(s) => s,
            InitialPosition::WindowFraction(f) => f * self.width_steps(),
        };
        if !(0.0..=self.width_steps()).contains(&offset) {
            return Err(SimError::InitialOutsideWindow {
                offset,
                width: self.width_steps(),
            });
        }
        Ok(((self.left + offset) * self.ticks_per_step()).round() as i64)
    }

    pub fn run(&self, seed: u64) -> TrialResult {
        let start = self
            .start_ticks(self.cfg.initial_position)
            .expect("validated in Trial::new");
        self.run_from(start, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn run_from(&self, start_ticks: i64, rng: &mut ChaCha8Rng) -> TrialResult {
        let g = self.ticks_per_step();
        let to_steps = |ticks: i64| ticks as f64 / g - self.left;
        let side_of = |ticks: i64| {
            let p = ticks as f64 / g;
            if p <= self.left {
                Some(Side::Left)
            } else if p >= self.right {
                Some(Side::Right)
            } else {
                None
            }
        };

        let mut pos = start_ticks;
        let mut trajectory = self.cfg.trajectory_capacity.map(|cap| {
            let mut t = VecDeque::with_capacity(cap.min(4096));
            push_capped(&mut t, cap, (0, to_steps(pos)));
            t
        });
        let finish = |escape_cycle: Option<u64>,
                      side: Option<Side>,
                      pos: i64,
                      t: Option<VecDeque<(u64, f64)>>| {
            let coarse = self.cfg.coarse_first.map_or(0, |c| c.duration_cycles);
            TrialResult {
                escaped: side.is_some(),
                escape_cycle,
                exit_side: side,
                escaped_in_coarse: matches!(escape_cycle, Some(c) if c <= coarse && side.is_some() && coarse > 0),
                final_position_steps: to_steps(pos),
                trajectory: t.map(Vec::from),
            }
        };
        if let Some(side) = side_of(pos) {
            return finish(Some(0), Some(side), pos, trajectory);
        }

        let mut channel = ChannelState::new(&self.cfg, self.rc_warmup, rng);
        let mut crossings = Vec::with_capacity(2);
        for cycle in 1..=self.cfg.max_cycles {
            let mult = match self.cfg.coarse_first {
                Some(c) if cycle <= c.duration_cycles => c.coarse_step as i64,
                _ => 1,
            };
            crossings.clear();
            channel.next_cycle(&self.cfg, rng, &mut crossings);
            for &c in &crossings {
                let clock = pos as f64 / g;
                let dir = update_direction(c, clock).unwrap_or_else(|| {
                    if rng.random_bool(0.5) {
                        1
                    } else {
                        -1
                    }
                });
                pos += if dir > 0 {
                    self.ratio.right as i64 * mult
                } else {
                    -(self.ratio.left as i64) * mult
                };
                if let (Some(t), Some(cap)) = (trajectory.as_mut(), self.cfg.trajectory_capacity) {
                    push_capped(t, cap, (cycle, to_steps(pos)));
                }
                if let Some(side) = side_of(pos) {
                    return finish(Some(cycle), Some(side), pos, trajectory);
                }
            }
        }
        finish(None, None, pos, trajectory)
    }
}

fn push_capped(t: &mut VecDeque<(u64, f64)>, cap: usize, item: (u64, f64)) {
    if cap == 0 {
        return;
    }
    if t.len() == cap {
        t.pop_front();
    }
    t.push_back(item);
}

pub fn run_trial(cfg: &TrialConfig, seed: u64) -> Result<TrialResult, SimError> {
    Ok(Trial::new(cfg.clone())?.run(seed))
}

/// Runs a trial whose first `duration_cycles` use coarse steps.
pub fn simulate_coarse_first(cfg: &TrialConfig, seed: u64) -> Result<TrialResult, SimError> {
    if cfg.coarse_first.is_none() {
        return Err(SimError::InvalidConfig(
            "coarse-first parameters missing".into(),
        ));
    }
    run_trial(cfg, seed)
}

fn derived_window(cfg: &TrialConfig) -> Result<(f64, f64), SimError> {
    match &cfg.channel {
        ChannelModel::DiscreteTrace { trace, jitter } => {
            let xs = trace.crossings();
            let margin = jitter.map_or(0, |j| j.half_width_steps()) as f64;
            Ok((xs[0] - margin, xs[xs.len() - 1] + margin))
        }
        ChannelModel::RcLine(spec) => {
            let (lo, hi) = rc_delay_range(spec, cfg.step_ui)?;
            Ok((lo, hi))
        }
    }
}

/// Extreme crossing delays (in steps) seen for random data.
pub fn rc_delay_range(spec: &RcLineSpec, step_ui: f64) -> Result<(f64, f64), SimError> {
    let probe = TrialConfig {
        channel: ChannelModel::RcLine(*spec),
        source: BitSourceKind::Bernoulli { p: 0.5 },
        window: WindowChoice::Explicit {
            left_steps: 0.0,
            right_steps: 0.0,
        },
        step_ui,
        initial_position: InitialPosition::Steps(0.0),
        max_cycles: 1,
        mismatch_percent: 0.0,
        coarse_first: None,
        trajectory_capacity: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(CHARACTERIZATION_SEED);
    let mut state = ChannelState::new(&probe, 0, &mut rng);
    let mut buf = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..CHARACTERIZATION_BITS {
        buf.clear();
        state.next_cycle(&probe, &mut rng, &mut buf);
        for &c in &buf {
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    if !lo.is_finite() {
        return Err(SimError::NoCrossings);
    }
    Ok((lo, hi))
}

enum ChannelState {
    Discrete {
        bits: BitStream,
        history: Vec<u8>,
    },
    Rc {
        bits: BitStream,
        line: Box<RcLine>,
        last_bit: u8,
        last_sample: f64,
        cycle: u64,
        /// Launch cycle and direction of transitions not yet seen at the far end.
        pending: VecDeque<(u64, bool)>,
    },
}

impl ChannelState {
    fn new(cfg: &TrialConfig, warmup: u64, rng: &mut ChaCha8Rng) -> Self {
        let mut bits = BitStream::random_phase(cfg.source.clone(), rng).expect("validated source");
        match &cfg.channel {
            ChannelModel::DiscreteTrace { trace, .. } => {
                let history = (0..trace.history_len())
                    .map(|_| bits.next_bit(rng))
                    .collect();
                ChannelState::Discrete { bits, history }
            }
            ChannelModel::RcLine(spec) => {
                let mut line = RcLine::new(*spec).expect("validated line");
                let mut last_bit = 0;
                for _ in 0..warmup {
                    last_bit = bits.next_bit(rng);
                    for _ in 0..spec.samples_per_ui {
                        line.step_sample(last_bit as f64);
                    }
                }
                let last_sample = line.output();
                ChannelState::Rc {
                    bits,
                    line: Box::new(line),
                    last_bit,
                    last_sample,
                    cycle: 0,
                    pending: VecDeque::new(),
                }
            }
        }
    }

    /// Advances one bit and appends the crossing positions (in steps) it
    /// produced.
    fn next_cycle(&mut self, cfg: &TrialConfig, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
        match self {
            ChannelState::Discrete { bits, history } => {
                let ChannelModel::DiscreteTrace { trace, jitter } = &cfg.channel else {
                    unreachable!()
                };
                let next = bits.next_bit(rng);
                if let Some(c) = trace.crossing(history, next) {
                    let noise = match jitter {
                        Some(j) => j.sigma_steps * rng.sample::<f64, _>(StandardNormal),
                        None => 0.0,
                    };
                    out.push(c + noise);
                }
                history.rotate_left(1);
                let n = history.len();
                history[n - 1] = next;
            }
            ChannelState::Rc {
                bits,
                line,
                last_bit,
                last_sample,
                cycle,
                pending,
            } => {
                const THRESHOLD: f64 = 0.5;
                let bit = bits.next_bit(rng);
                if bit != *last_bit {
                    pending.push_back((*cycle, bit == 1));
                }
                *last_bit = bit;
                let spu = line.spec().samples_per_ui;
                for k in 0..spu {
                    let s = line.step_sample(bit as f64);
                    if let Some((frac, rising)) = interpolate(*last_sample, s, THRESHOLD) {
                        let t = *cycle as f64 + (k as f64 + frac) / spu as f64;
                        while let Some((launch, dir)) = pending.pop_front() {
                            if dir == rising {
                                out.push((t - launch as f64) / cfg.step_ui);
                                break;
                            }
                        }
                    }
                    *last_sample = s;
                }
                *cycle += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::bits::TRAINING_PATTERN;

    fn isi1(width: f64) -> TrialConfig {
        TrialConfig::discrete(IsiTraceModel::one_bit(0.0, width).unwrap(), 1_000_000)
    }

    #[test]
    fn derived_window_spans_crossings() {
        let t = Trial::new(isi1(40.0)).unwrap();
        assert_eq!(t.window_steps(), (0.0, 40.0));
        let mut cfg = isi1(40.0);
        cfg.channel = ChannelModel::DiscreteTrace {
            trace: IsiTraceModel::one_bit(0.0, 40.0).unwrap(),
            jitter: Some(GaussianJitterSpec::new(10.0).unwrap()),
        };
        assert_eq!(Trial::new(cfg).unwrap().window_steps(), (-30.0, 70.0));
    }

    #[test]
    fn start_on_edge_escapes_immediately() {
        let mut cfg = isi1(40.0);
        cfg.window = WindowChoice::Explicit {
            left_steps: 5.0,
            right_steps: 5.0,
        };
        cfg.initial_position = InitialPosition::Steps(0.0);
        let r = run_trial(&cfg, 1).unwrap();
        assert_eq!(r.escape_cycle, Some(0));
        assert!(r.escaped);
    }

    #[test]
    fn rejects_start_outside_window() {
        let mut cfg = isi1(40.0);
        cfg.initial_position = InitialPosition::Steps(41.0);
        assert!(matches!(
            run_trial(&cfg, 1),
            Err(SimError::InitialOutsideWindow { .. })
        ));
        cfg.initial_position = InitialPosition::WindowFraction(-0.1);
        assert!(run_trial(&cfg, 1).is_err());
    }

    #[test]
    fn reproducible() {
        let mut cfg = isi1(40.0);
        cfg.trajectory_capacity = Some(100);
        let a = run_trial(&cfg, 99).unwrap();
        let b = run_trial(&cfg, 99).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&cfg, 100).unwrap();
        assert_ne!(a.trajectory, c.trajectory);
    }

    #[test]
    fn moves_one_step_per_transition() {
        let mut cfg = isi1(40.0);
        cfg.trajectory_capacity = Some(usize::MAX);
        let r = run_trial(&cfg, 5).unwrap();
        let t = r.trajectory.unwrap();
        for w in t.windows(2) {
            assert_eq!((w[1].1 - w[0].1).abs(), 1.0);
            assert!(w[1].0 > w[0].0);
        }
        assert!(r.escaped);
        let last = t.last().unwrap();
        assert_eq!(last.0, r.escape_cycle.unwrap());
        assert!(last.1 == 0.0 || last.1 == 40.0);
    }

    #[test]
    fn trajectory_ring_buffer_keeps_latest() {
        let mut cfg = isi1(40.0);
        cfg.trajectory_capacity = Some(8);
        let r = run_trial(&cfg, 3).unwrap();
        let t = r.trajectory.unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(t.last().unwrap().0, r.escape_cycle.unwrap());
    }

    #[test]
    fn mismatch_moves_asymmetrically() {
        let mut cfg = isi1(40.0);
        cfg.mismatch_percent = 10.0;
        cfg.trajectory_capacity = Some(usize::MAX);
        let r = run_trial(&cfg, 8).unwrap();
        let t = r.trajectory.unwrap();
        for w in t.windows(2) {
            let d = w[1].1 - w[0].1;
            assert!((d - 1.0).abs() < 1e-12 || (d + 1.1).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn exact_tie_goes_both_ways() {
        // no ISI: every transition crosses at 10 where the clock sits
        let mut cfg = TrialConfig::discrete(IsiTraceModel::none(10.0), 10);
        cfg.window = WindowChoice::Explicit {
            left_steps: 9.0,
            right_steps: 11.0,
        };
        let sides: Vec<_> = (0..200)
            .map(|s| run_trial(&cfg, s).unwrap().exit_side)
            .collect();
        assert!(sides.contains(&Some(Side::Left)));
        assert!(sides.contains(&Some(Side::Right)));
    }

    #[test]
    fn max_cycles_caps_the_run() {
        let mut cfg = isi1(400.0);
        cfg.max_cycles = 10;
        let r = run_trial(&cfg, 1).unwrap();
        assert!(!r.escaped);
        assert_eq!(r.escape_cycle, None);
        assert_eq!(r.exit_side, None);
    }

    #[test]
    fn training_pattern_drifts_left_under_one_bit_isi() {
        let mut cfg = isi1(40.0);
        cfg.source = BitSourceKind::TrainingBiased;
        for seed in 0..8 {
            let r = run_trial(&cfg, seed).unwrap();
            assert_eq!(r.exit_side, Some(Side::Left));
            assert!(r.escape_cycle.unwrap() < 200);
        }
        assert_eq!(TRAINING_PATTERN.len(), 8);
    }

    #[test]
    fn alternating_source_has_no_isi_spread() {
        // every transition follows a single bit, so each is an A crossing
        let mut cfg = isi1(40.0);
        cfg.source = BitSourceKind::Alternating;
        cfg.trajectory_capacity = Some(usize::MAX);
        let r = run_trial(&cfg, 0).unwrap();
        assert_eq!(r.exit_side, Some(Side::Right));
        assert_eq!(r.escape_cycle, Some(20));
    }

    #[test]
    fn coarse_first_degenerate_matches_plain() {
        let mut cfg = isi1(40.0);
        let plain = run_trial(&cfg, 11).unwrap();
        cfg.coarse_first = Some(CoarseFirst {
            coarse_step: 1,
            duration_cycles: 0,
        });
        assert_eq!(simulate_coarse_first(&cfg, 11).unwrap(), plain);
    }

    #[test]
    fn coarse_phase_uses_coarse_steps() {
        let mut cfg = isi1(50.0);
        cfg.initial_position = InitialPosition::Steps(20.0);
        cfg.coarse_first = Some(CoarseFirst {
            coarse_step: 10,
            duration_cycles: 1_000_000,
        });
        cfg.trajectory_capacity = Some(usize::MAX);
        let r = simulate_coarse_first(&cfg, 4).unwrap();
        assert!(r.escaped_in_coarse);
        for w in r.trajectory.unwrap().windows(2) {
            assert_eq!((w[1].1 - w[0].1).abs(), 10.0);
        }
    }

    #[test]
    fn rc_channel_trial_runs() {
        let spec = RcLineSpec::new(25.0, 100e-15, 1e-9);
        let mut cfg = TrialConfig::discrete(IsiTraceModel::none(0.0), 20_000);
        cfg.channel = ChannelModel::RcLine(spec);
        cfg.step_ui = 0.002;
        let t = Trial::new(cfg).unwrap();
        let (lo, hi) = t.window_steps();
        assert!(hi > lo && lo > 0.0);
        let r = t.run(1);
        assert!(r.escaped);
        assert_eq!(r, t.run(1));
    }
}
