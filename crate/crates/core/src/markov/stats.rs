use super::{build_canonical, AbsorbingChain, BandedLu, ChainError};

/// Mean and variance of the number of transitions to absorption, per
/// transient state.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionStats {
    /// Original indices of the transient states, in the order of the
    /// vectors below.
    pub transient_states: Vec<usize>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub std: Vec<f64>,
}

impl AbsorptionStats {
    fn slot(&self, state: usize) -> Option<usize> {
        self.transient_states.binary_search(&state).ok()
    }

    /// Mean absorption time from `state`; zero for absorbing states.
    pub fn mean_of(&self, state: usize) -> f64 {
        self.slot(state).map_or(0.0, |k| self.mean[k])
    }

    pub fn std_of(&self, state: usize) -> f64 {
        self.slot(state).map_or(0.0, |k| self.std[k])
    }

    pub fn variance_of(&self, state: usize) -> f64 {
        self.slot(state).map_or(0.0, |k| self.variance[k])
    }

    /// Index (original numbering) of the transient state with the largest mean.
    pub fn peak(&self) -> (usize, f64) {
        let (k, &m) = self
            .mean
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least one transient state");
        (self.transient_states[k], m)
    }
}

/// Solves `(I − Q) t = 1` for the mean and `(I − Q) y = t` for `N t`, then
/// `var = (2N − I) t − t² = 2y − t − t²`.
pub fn absorption_stats(chain: &AbsorbingChain) -> Result<AbsorptionStats, ChainError> {
    let cf = build_canonical(chain)?;
    let lu = BandedLu::identity_minus(&cf.q)?;
    let n = cf.n_transient();

    let mean = lu.solve(&vec![1.0; n]);
    let n_mean = lu.solve(&mean);
    let variance: Vec<f64> = mean
        .iter()
        .zip(&n_mean)
        .map(|(&t, &y)| {
            let v = 2.0 * y - t - t * t;
            // cancellation can leave a tiny negative residue
            if v < 0.0 && v > -1e-9 * (1.0 + t * t) {
                0.0
            } else {
                v
            }
        })
        .collect();
    let std = variance.iter().map(|v| v.max(0.0).sqrt()).collect();

    Ok(AbsorptionStats {
        transient_states: cf.transient_order,
        mean,
        variance,
        std,
    })
}
