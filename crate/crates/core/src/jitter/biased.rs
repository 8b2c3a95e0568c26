use super::ModelError;
use crate::markov::{renormalize_row, AbsorbingChain, StateLabel};

/// Right and left update sizes in sub-grid ticks.
///
/// A positive mismatch makes the left step `1 + mismatch/100` times the
/// right step; a negative mismatch mirrors that. The nominal (shorter) step
/// spans [`StepRatio::ticks_per_step`] ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRatio {
    pub right: u32,
    pub left: u32,
}

impl StepRatio {
    pub const SYMMETRIC: StepRatio = StepRatio { right: 1, left: 1 };

    /// Smallest denominator `d ≤ 100` with `d·(1 + |p|/100)` integral.
    pub fn from_mismatch_percent(percent: f64) -> Result<Self, ModelError> {
        if !percent.is_finite() || percent.abs() >= 1000.0 {
            return Err(ModelError::MismatchDenominator(percent));
        }
        let ratio = 1.0 + percent.abs() / 100.0;
        let d = (1..=100u32)
            .find(|&d| {
                let x = d as f64 * ratio;
                (x - x.round()).abs() < 1e-9
            })
            .ok_or(ModelError::MismatchDenominator(percent))?;
        let long = (d as f64 * ratio).round() as u32;
        Ok(if percent >= 0.0 {
            StepRatio {
                right: d,
                left: long,
            }
        } else {
            StepRatio {
                right: long,
                left: d,
            }
        })
    }

    pub fn ticks_per_step(&self) -> u32 {
        self.right.min(self.left)
    }

    pub fn is_symmetric(&self) -> bool {
        self.right == self.left
    }
}

/// A birth–death chain re-expressed on a sub-grid with unequal left and
/// right step sizes.
#[derive(Debug, Clone)]
pub struct BiasedChain {
    pub chain: AbsorbingChain,
    pub ratio: StepRatio,
}

impl BiasedChain {
    /// Sub-grid state aligned with state `base_state` of the base chain.
    pub fn aligned_state(&self, base_state: usize) -> usize {
        base_state * self.ratio.ticks_per_step() as usize
    }
}

/// Refines `base` so that a right move advances `ratio.right` ticks and a
/// left move `ratio.left` ticks. A move that reaches or overshoots an edge
/// is absorbed there.
///
/// The per-tick move probabilities are those of the nearest base state.
pub fn biased_chain(
    base: &AbsorbingChain,
    mismatch_percent: f64,
) -> Result<BiasedChain, ModelError> {
    let n = base.n_states();
    if !base.is_tridiagonal() || n < 3 || base.absorbing_states() != [0, n - 1] {
        return Err(ModelError::NotBirthDeath);
    }
    let ratio = StepRatio::from_mismatch_percent(mismatch_percent)?;
    let g = ratio.ticks_per_step() as usize;
    let last = (n - 1) * g;
    let origin = base.label(0).position;
    let spacing = base.label(1).position - origin;

    let mut rows = Vec::with_capacity(last + 1);
    let mut labels = Vec::with_capacity(last + 1);
    for x in 0..=last {
        labels.push(StateLabel::at(origin + spacing * x as f64 / g as f64));
        if x == 0 || x == last {
            rows.push(vec![(x, 1.0)]);
            continue;
        }
        let b = ((x as f64 / g as f64).round() as usize).clamp(1, n - 2);
        let left = base.probability(b, b - 1);
        let stay = base.probability(b, b);
        let right = base.probability(b, b + 1);
        let mut row = vec![
            (x.saturating_sub(ratio.left as usize), left),
            (x, stay),
            ((x + ratio.right as usize).min(last), right),
        ];
        renormalize_row(x, &mut row)?;
        rows.push(row);
    }
    let chain = AbsorbingChain::new(rows, &[0, last])?.with_labels(labels)?;
    Ok(BiasedChain { chain, ratio })
}
