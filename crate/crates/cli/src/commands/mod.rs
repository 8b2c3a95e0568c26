//! Command implementations and the translation from config sections to
//! core types. Every builder here validates; commands call them all before
//! computing anything.

pub mod analyze;
pub mod compare;
pub mod eye;
pub mod simulate;
pub mod sweep;

use settle_core::jitter::{
    biased_chain, combined_chain, gaussian_chain, isi1_chain, isi2_chain, BiasedChain,
    CombinedJitterSpec, GaussianJitterSpec, Isi2Chain, IsiTraceModel, SubWindows,
};
use settle_core::markov::{AbsorbingChain, AbsorptionStats};
use settle_core::sim::{BitSourceKind, ChannelModel, RcLineSpec, WindowChoice};

use crate::config::{ChannelConfig, ModelConfig, SourceConfig, WindowConfig};
use crate::error::CliError;

const POSITION_TOLERANCE: f64 = 1e-9;

pub(crate) fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref()
        .ok_or_else(|| CliError::config(format!("missing [{name}] section")))
}

pub(crate) fn source_kind(s: &SourceConfig) -> Result<BitSourceKind, CliError> {
    let kind = match s {
        SourceConfig::Bernoulli { p } => BitSourceKind::Bernoulli { p: *p },
        SourceConfig::TrainingBiased => BitSourceKind::TrainingBiased,
        SourceConfig::Alternating => BitSourceKind::Alternating,
        SourceConfig::Explicit { bits } => BitSourceKind::Explicit { bits: bits.clone() },
    };
    kind.validate()?;
    Ok(kind)
}

pub(crate) fn rc_spec(
    sections: usize,
    r_ohm: f64,
    c_ff: f64,
    ui_ns: f64,
    samples_per_ui: usize,
    substeps: Option<usize>,
) -> Result<RcLineSpec, CliError> {
    let spec = RcLineSpec {
        sections,
        r_per_section: r_ohm,
        c_per_section: c_ff * 1e-15,
        ui_seconds: ui_ns * 1e-9,
        samples_per_ui,
        substeps,
    };
    spec.validate()?;
    Ok(spec)
}

pub(crate) fn channel_model(c: &ChannelConfig) -> Result<ChannelModel, CliError> {
    match c {
        ChannelConfig::Discrete {
            crossings_steps,
            jitter_sigma_steps,
            truncation_sigmas,
        } => {
            let trace = match crossings_steps.as_slice() {
                [a] => IsiTraceModel::none(*a),
                [a, b] => IsiTraceModel::one_bit(*a, *b)?,
                [a, b, c, d] => IsiTraceModel::two_bit(*a, *b, *c, *d)?,
                other => {
                    return Err(CliError::config(format!(
                        "crossings_steps needs 1, 2 or 4 values, got {}",
                        other.len()
                    )))
                }
            };
            let jitter = jitter_sigma_steps
                .map(|sigma| {
                    let spec = GaussianJitterSpec {
                        sigma_steps: sigma,
                        truncation_sigmas: *truncation_sigmas,
                        transition_probability: 0.5,
                    };
                    spec.validate().map(|_| spec)
                })
                .transpose()?;
            Ok(ChannelModel::DiscreteTrace { trace, jitter })
        }
        ChannelConfig::RcLine {
            sections,
            r_per_section_ohm,
            c_per_section_ff,
            ui_ns,
            samples_per_ui,
            substeps,
        } => Ok(ChannelModel::RcLine(rc_spec(
            *sections,
            *r_per_section_ohm,
            *c_per_section_ff,
            *ui_ns,
            *samples_per_ui,
            *substeps,
        )?)),
    }
}

/// Discrete traces work directly in steps; RC lines need the step size.
pub(crate) fn step_ui(channel: &ChannelModel, step_ui: Option<f64>) -> Result<f64, CliError> {
    match (channel, step_ui) {
        (_, Some(s)) => Ok(s),
        (ChannelModel::DiscreteTrace { .. }, None) => Ok(1.0),
        (ChannelModel::RcLine(_), None) => Err(CliError::config("rc_line channels need `step_ui`")),
    }
}

pub(crate) fn window_choice(w: &Option<WindowConfig>) -> WindowChoice {
    match w {
        Some(w) => WindowChoice::Explicit {
            left_steps: w.left_steps,
            right_steps: w.right_steps,
        },
        None => WindowChoice::Derived,
    }
}

/// A chain ready for analysis, with its clock-position axis.
///
/// Positions are measured in steps from the left absorbing edge.
pub(crate) enum BuiltModel {
    Plain(AbsorbingChain),
    Biased { chain: BiasedChain, width: usize },
    Isi2(Isi2Chain),
}

impl BuiltModel {
    pub fn build(m: &ModelConfig) -> Result<Self, CliError> {
        Ok(match m {
            ModelConfig::Isi1 { window_steps } => BuiltModel::Plain(isi1_chain(*window_steps)?),
            ModelConfig::Isi2 {
                sub_windows_steps,
                sub_windows_ui,
                tau_ui,
                step_tau,
            } => {
                let widths = match (sub_windows_steps, sub_windows_ui, tau_ui, step_tau) {
                    (Some([ab, bc, cd]), None, None, None) => SubWindows::new(*ab, *bc, *cd)?,
                    (None, Some(f), Some(tau), Some(step)) => {
                        if !(*tau > 0.0 && *step > 0.0) {
                            return Err(CliError::config("tau_ui and step_tau must be positive"));
                        }
                        SubWindows::from_ui_fractions(*f, *tau, *step)?
                    }
                    _ => {
                        return Err(CliError::config(
                            "isi2 needs either sub_windows_steps or sub_windows_ui with tau_ui and step_tau",
                        ))
                    }
                };
                BuiltModel::Isi2(isi2_chain(widths)?)
            }
            ModelConfig::Gaussian {
                sigma_steps,
                truncation_sigmas,
                transition_probability,
            } => BuiltModel::Plain(gaussian_chain(&GaussianJitterSpec {
                sigma_steps: *sigma_steps,
                truncation_sigmas: *truncation_sigmas,
                transition_probability: *transition_probability,
            })?),
            ModelConfig::Combined {
                sigma_steps,
                w_ab_steps,
                p_a,
                p_b,
                p_no_transition,
                truncation_sigmas,
            } => BuiltModel::Plain(combined_chain(&CombinedJitterSpec {
                sigma_steps: *sigma_steps,
                w_ab_steps: *w_ab_steps,
                p_a: *p_a,
                p_b: *p_b,
                p_no_transition: *p_no_transition,
                truncation_sigmas: *truncation_sigmas,
            })?),
            ModelConfig::Biased {
                window_steps,
                mismatch_percent,
            } => BuiltModel::Biased {
                chain: biased_chain(&isi1_chain(*window_steps)?, *mismatch_percent)?,
                width: *window_steps,
            },
        })
    }

    pub fn chain(&self) -> &AbsorbingChain {
        match self {
            BuiltModel::Plain(c) => c,
            BuiltModel::Biased { chain, .. } => &chain.chain,
            BuiltModel::Isi2(c) => &c.chain,
        }
    }

    /// `(position, mean, std)` for every interior clock position.
    pub fn rows(&self, stats: &AbsorptionStats) -> Vec<(f64, f64, f64)> {
        match self {
            BuiltModel::Plain(c) => {
                let origin = c.label(0).position;
                c.transient_states()
                    .into_iter()
                    .map(|s| {
                        (
                            c.label(s).position - origin,
                            stats.mean_of(s),
                            stats.std_of(s),
                        )
                    })
                    .collect()
            }
            BuiltModel::Biased { chain, width } => (1..*width)
                .map(|k| {
                    let s = chain.aligned_state(k);
                    (k as f64, stats.mean_of(s), stats.std_of(s))
                })
                .collect(),
            BuiltModel::Isi2(c) => c
                .position_means(stats)
                .into_iter()
                .zip(c.position_stds(stats))
                .map(|((p, m), (_, s))| (p as f64, m, s))
                .collect(),
        }
    }

    pub fn center_position(&self) -> f64 {
        match self {
            BuiltModel::Plain(c) => c.label(c.center_state()).position - c.label(0).position,
            BuiltModel::Biased { width, .. } => (width / 2) as f64,
            BuiltModel::Isi2(c) => (c.widths.total() / 2) as f64,
        }
    }

    /// Starting distribution at an interior position; ISI-2 starts spread
    /// evenly over the memory states.
    pub fn initial(&self, position: f64) -> Result<Vec<f64>, CliError> {
        let bad = || {
            CliError::config(format!(
                "position {position} is not an interior state of the model"
            ))
        };
        match self {
            BuiltModel::Plain(c) => {
                let origin = c.label(0).position;
                let s = c
                    .transient_states()
                    .into_iter()
                    .find(|&s| (c.label(s).position - origin - position).abs() < POSITION_TOLERANCE)
                    .ok_or_else(bad)?;
                Ok(c.point_mass(s))
            }
            BuiltModel::Biased { chain, width } => {
                let k = whole_position(position, *width).ok_or_else(bad)?;
                Ok(chain.chain.point_mass(chain.aligned_state(k)))
            }
            BuiltModel::Isi2(c) => {
                let k = whole_position(position, c.widths.total()).ok_or_else(bad)?;
                Ok(c.uniform_initial(k))
            }
        }
    }
}

fn whole_position(position: f64, width: usize) -> Option<usize> {
    let k = position.round();
    ((position - k).abs() < POSITION_TOLERANCE && k >= 1.0 && k < width as f64)
        .then_some(k as usize)
}
