//! Experiment documents (TOML).
//!
//! Every key that carries a physical quantity names its unit in a suffix:
//! `_steps` (loop phase steps τ), `_ui` (unit intervals), `_ns`, `_ohm`,
//! `_ff` (femtofarads), `_pf`, `_ua_ns` (charge, µA·ns), `_rad`,
//! `_rad_per_v`, `_percent`, `_cycles`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use settle_core::par::Execution;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub analyze: Option<AnalyzeConfig>,
    pub simulate: Option<SimulateConfig>,
    pub eye: Option<EyeConfig>,
    pub compare: Option<CompareConfig>,
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::config("`seed` is required for simulation commands"))
    }
}

fn default_confidence() -> f64 {
    0.99
}
fn default_true() -> bool {
    true
}
fn default_truncation() -> f64 {
    3.0
}
fn default_half() -> f64 {
    0.5
}
fn default_quarter() -> f64 {
    0.25
}
fn default_max_cycles() -> u64 {
    10_000_000
}
fn default_sections() -> usize {
    20
}
fn default_ui_ns() -> f64 {
    1.0
}
fn default_samples_per_ui() -> usize {
    32
}
fn default_trajectory_capacity() -> usize {
    100_000
}
fn default_divided_period_ns() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Isi1 {
        window_steps: usize,
    },
    Isi2 {
        /// Either explicit widths in steps or UI fractions with a step size.
        sub_windows_steps: Option<[usize; 3]>,
        sub_windows_ui: Option<[f64; 3]>,
        tau_ui: Option<f64>,
        step_tau: Option<f64>,
    },
    Gaussian {
        sigma_steps: f64,
        #[serde(default = "default_truncation")]
        truncation_sigmas: f64,
        #[serde(default = "default_half")]
        transition_probability: f64,
    },
    Combined {
        sigma_steps: f64,
        w_ab_steps: usize,
        #[serde(default = "default_quarter")]
        p_a: f64,
        #[serde(default = "default_quarter")]
        p_b: f64,
        #[serde(default = "default_half")]
        p_no_transition: f64,
        #[serde(default = "default_truncation")]
        truncation_sigmas: f64,
    },
    Biased {
        window_steps: usize,
        mismatch_percent: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub k_cp_ua_ns: f64,
    pub k_vc_rad_per_v: f64,
    pub cap_pf: f64,
    pub period_ns: f64,
    #[serde(default = "default_half")]
    pub activity: f64,
    pub delta_phi_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub model: ModelConfig,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Rows to emit, by position; all transient positions when absent.
    pub positions_steps: Option<Vec<f64>>,
    /// Start for the absorption series; the window centre when absent.
    pub start_position_steps: Option<f64>,
    #[serde(default = "default_true")]
    pub absorption_cdf: bool,
    #[serde(rename = "loop")]
    pub loop_params: Option<LoopConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcLineConfig {
    #[serde(default = "default_sections")]
    pub sections: usize,
    pub r_per_section_ohm: f64,
    pub c_per_section_ff: f64,
    #[serde(default = "default_ui_ns")]
    pub ui_ns: f64,
    #[serde(default = "default_samples_per_ui")]
    pub samples_per_ui: usize,
    pub substeps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    /// One crossing (no ISI), two (`A`, `B`) or four (`A`..`D`).
    Discrete {
        crossings_steps: Vec<f64>,
        jitter_sigma_steps: Option<f64>,
        #[serde(default = "default_truncation")]
        truncation_sigmas: f64,
    },
    RcLine {
        #[serde(default = "default_sections")]
        sections: usize,
        r_per_section_ohm: f64,
        c_per_section_ff: f64,
        #[serde(default = "default_ui_ns")]
        ui_ns: f64,
        #[serde(default = "default_samples_per_ui")]
        samples_per_ui: usize,
        substeps: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Bernoulli {
        #[serde(default = "default_half")]
        p: f64,
    },
    TrainingBiased,
    Alternating,
    Explicit {
        bits: Vec<u8>,
    },
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig::Bernoulli { p: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub left_steps: f64,
    pub right_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseFirstConfig {
    pub coarse_step_steps: u32,
    pub duration_cycles: Option<u64>,
    pub duration_ns: Option<f64>,
    #[serde(default = "default_divided_period_ns")]
    pub divided_period_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub trials: u64,
    #[serde(default = "default_max_cycles")]
    pub max_cycles: u64,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub source: SourceConfig,
    pub window: Option<WindowConfig>,
    /// Phase step in UI; needed to place RC crossings on the step grid.
    pub step_ui: Option<f64>,
    /// Starts measured from the left window edge; give one of the two.
    pub positions_steps: Option<Vec<f64>>,
    pub positions_fraction: Option<Vec<f64>>,
    #[serde(default)]
    pub mismatch_percent: f64,
    pub coarse_first: Option<CoarseFirstConfig>,
    /// Trial indices, at the first position, whose trajectories are written.
    #[serde(default)]
    pub trajectory_trials: Vec<u64>,
    #[serde(default = "default_trajectory_capacity")]
    pub trajectory_capacity: usize,
    #[serde(default)]
    pub execution: Execution,
}

fn default_bits() -> usize {
    4000
}
fn default_warmup_ui() -> usize {
    20
}
fn default_bin_width_ui() -> f64 {
    settle_core::sim::DEFAULT_BIN_WIDTH_UI
}
fn default_merge_gap_ui() -> f64 {
    settle_core::sim::DEFAULT_MERGE_GAP_UI
}
fn default_span_ui() -> usize {
    2
}
fn default_max_traces() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EyeChannelConfig {
    RcLine {
        #[serde(default = "default_sections")]
        sections: usize,
        r_per_section_ohm: f64,
        c_per_section_ff: f64,
        #[serde(default = "default_ui_ns")]
        ui_ns: f64,
        #[serde(default = "default_samples_per_ui")]
        samples_per_ui: usize,
        substeps: Option<usize>,
    },
    /// The ideal drive itself, no channel.
    Square {
        #[serde(default = "default_samples_per_ui")]
        samples_per_ui: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EyeConfig {
    pub channel: EyeChannelConfig,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default = "default_bits")]
    pub bits: usize,
    /// Leading bits dropped so the line starts from a random-data state.
    #[serde(default = "default_warmup_ui")]
    pub warmup_ui: usize,
    #[serde(default = "default_half")]
    pub threshold: f64,
    #[serde(default = "default_bin_width_ui")]
    pub bin_width_ui: f64,
    #[serde(default = "default_merge_gap_ui")]
    pub merge_gap_ui: f64,
    #[serde(default = "default_span_ui")]
    pub span_ui: usize,
    #[serde(default = "default_max_traces")]
    pub max_traces: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompareConfig {
    /// Analytic: 1-bit-ISI chain with and without step mismatch.
    Mismatch {
        window_steps: usize,
        mismatch_percent: f64,
        initial_offset_steps: Option<usize>,
    },
    /// Monte Carlo: two bit sources over one channel.
    Training {
        trials: u64,
        #[serde(default = "default_max_cycles")]
        max_cycles: u64,
        channel: ChannelConfig,
        window: Option<WindowConfig>,
        step_ui: Option<f64>,
        position_steps: Option<f64>,
        position_fraction: Option<f64>,
        #[serde(default)]
        baseline_source: SourceConfig,
        treated_source: SourceConfig,
        #[serde(default)]
        execution: Execution,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub window_steps: Vec<usize>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}
