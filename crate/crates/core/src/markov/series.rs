use super::{AbsorbingChain, ChainError};

/// Iteration cap for absorption series.
pub const DEFAULT_MAX_TRANSITIONS: usize = 10_000_000;

/// When to stop iterating the state distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Compute exactly `cdf[0..=n]`.
    Transitions(usize),
    /// Stop at the first `n` with `cdf[n] >= target`, failing after `max_n`.
    Confidence { target: f64, max_n: usize },
}

impl StopRule {
    pub fn confidence(target: f64) -> Self {
        StopRule::Confidence {
            target,
            max_n: DEFAULT_MAX_TRANSITIONS,
        }
    }
}

/// Absorption probability after `n` transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionSeries {
    pub cdf: Vec<f64>,
    pub pmf: Vec<f64>,
    pub initial: Vec<f64>,
}

impl AbsorptionSeries {
    /// `Σ n · pmf[n]` over the computed range.
    pub fn truncated_mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(n, &p)| n as f64 * p)
            .sum()
    }

    pub fn final_cdf(&self) -> f64 {
        *self.cdf.last().expect("series has at least one entry")
    }

    /// Smallest `n` with `cdf[n] >= confidence`, if reached.
    pub fn first_reaching(&self, confidence: f64) -> Option<usize> {
        self.cdf.iter().position(|&c| c >= confidence)
    }
}

/// Iterates `P(n) = P(n-1) · P` and records the probability mass entering
/// the absorbing set at each step.
///
/// Only the transient part of the distribution is propagated: absorbed mass
/// never leaves, so `cdf[n] = cdf[n-1] + pmf[n]`, which keeps the series
/// monotone regardless of rounding.
pub fn absorption_series(
    chain: &AbsorbingChain,
    initial: &[f64],
    stop: StopRule,
) -> Result<AbsorptionSeries, ChainError> {
    let n_states = chain.n_states();
    if initial.len() != n_states {
        return Err(ChainError::InitialLength {
            expected: n_states,
            got: initial.len(),
        });
    }
    let sum: f64 = initial.iter().sum();
    if initial.iter().any(|&p| !p.is_finite() || p < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(ChainError::InitialNotNormalized(sum));
    }
    let (target, max_n) = match stop {
        StopRule::Transitions(n) => (f64::INFINITY, n),
        StopRule::Confidence { target, max_n } => {
            if !(target > 0.0 && target <= 1.0) {
                return Err(ChainError::ConfidenceOutOfRange(target));
            }
            (target, max_n)
        }
    };

    let absorbed0: f64 = (0..n_states)
        .filter(|&i| chain.is_absorbing(i))
        .map(|i| initial[i])
        .sum();
    let mut cdf = vec![absorbed0];
    let mut pmf = vec![absorbed0];

    let mut dist: Vec<f64> = (0..n_states)
        .map(|i| {
            if chain.is_absorbing(i) {
                0.0
            } else {
                initial[i]
            }
        })
        .collect();
    let mut next = vec![0.0; n_states];
    let transient = chain.transient_states();

    let mut n = 0;
    while cdf[n] < target && n < max_n {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut inflow = 0.0;
        for &i in &transient {
            let mass = dist[i];
            if mass == 0.0 {
                continue;
            }
            for (j, p) in chain.row(i) {
                if chain.is_absorbing(j) {
                    inflow += mass * p;
                } else {
                    next[j] += mass * p;
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
        n += 1;
        pmf.push(inflow);
        cdf.push((cdf[n - 1] + inflow).min(1.0));
    }

    let series = AbsorptionSeries {
        cdf,
        pmf,
        initial: initial.to_vec(),
    };
    if target.is_finite() && series.final_cdf() < target {
        return Err(ChainError::ConfidenceNotReached {
            target,
            max_n,
            reached: series.final_cdf(),
            partial: Box::new(series),
        });
    }
    Ok(series)
}

/// Smallest number of transitions `n` with `cdf[n] >= confidence`.
pub fn transitions_for_confidence(
    chain: &AbsorbingChain,
    initial: &[f64],
    confidence: f64,
) -> Result<usize, ChainError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(ChainError::ConfidenceOutOfRange(confidence));
    }
    let series = absorption_series(chain, initial, StopRule::confidence(confidence))?;
    Ok(series.cdf.len() - 1)
}
