use super::{normal_cdf, ModelError};
use crate::markov::{renormalize_row, AbsorbingChain, StateLabel};

/// One bit of ISI (crossings `A` at 0 and `B` at `w_ab_steps`) plus Gaussian
/// random jitter around each crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedJitterSpec {
    pub sigma_steps: f64,
    pub w_ab_steps: usize,
    pub p_a: f64,
    pub p_b: f64,
    pub p_no_transition: f64,
    pub truncation_sigmas: f64,
}

impl CombinedJitterSpec {
    /// Equiprobable source bits: `P(A) = P(B) = ¼`, `P(NT) = ½`.
    pub fn new(sigma_steps: f64, w_ab_steps: usize) -> Result<Self, ModelError> {
        let spec = Self {
            sigma_steps,
            w_ab_steps,
            p_a: 0.25,
            p_b: 0.25,
            p_no_transition: 0.5,
            truncation_sigmas: 3.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.sigma_steps > 0.0 && self.sigma_steps.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma_steps
            )));
        }
        if !(self.truncation_sigmas >= 1.0) {
            return Err(ModelError::InvalidParameter(
                "truncation must be at least one sigma".into(),
            ));
        }
        let probs = [self.p_a, self.p_b, self.p_no_transition];
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p))
            || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(ModelError::InvalidParameter(format!(
                "trace probabilities must be a distribution, got {probs:?}"
            )));
        }
        Ok(())
    }

    pub fn margin_steps(&self) -> usize {
        (self.truncation_sigmas * self.sigma_steps).ceil() as usize
    }

    /// Probability that a crossing lands before a clock at `t` (which then
    /// moves right).
    pub fn crossing_before(&self, t: f64) -> f64 {
        self.p_a * normal_cdf(t / self.sigma_steps)
            + self.p_b * normal_cdf((t - self.w_ab_steps as f64) / self.sigma_steps)
    }
}

/// Birth–death chain on clock positions `t ∈ [−M, W + M]` with
/// `M = ⌈truncation·σ⌉`; outermost positions absorbing.
pub fn combined_chain(spec: &CombinedJitterSpec) -> Result<AbsorbingChain, ModelError> {
    spec.validate()?;
    let margin = spec.margin_steps();
    let n = spec.w_ab_steps + 2 * margin + 1;
    if n < 3 {
        return Err(ModelError::WindowTooNarrow { min: 2, got: n - 1 });
    }
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 - margin as f64;
        labels.push(StateLabel::at(t));
        if i == 0 || i == n - 1 {
            rows.push(vec![(i, 1.0)]);
            continue;
        }
        let right = spec.crossing_before(t);
        let left = 1.0 - spec.p_no_transition - right;
        let mut row = vec![
            (i - 1, left.max(0.0)),
            (i, spec.p_no_transition),
            (i + 1, right),
        ];
        renormalize_row(i, &mut row)?;
        rows.push(row);
    }
    Ok(AbsorbingChain::new(rows, &[0, n - 1])?.with_labels(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jitter::isi1_chain;
    use crate::markov::absorption_stats;

    #[test]
    fn midpoint_is_balanced() {
        let spec = CombinedJitterSpec::new(10.0, 40).unwrap();
        let c = combined_chain(&spec).unwrap();
        let mid = 30 + 20;
        assert_eq!(c.label(mid).position, 20.0);
        assert!((c.probability(mid, mid - 1) - c.probability(mid, mid + 1)).abs() < 1e-15);
    }

    #[test]
    fn vanishing_sigma_recovers_one_bit_isi() {
        let w = 40;
        let spec = CombinedJitterSpec::new(1e-6 * w as f64, w).unwrap();
        let c = combined_chain(&spec).unwrap();
        let base = isi1_chain(w).unwrap();
        let margin = spec.margin_steps();
        assert_eq!(margin, 1);
        for p in 1..w {
            let i = p + margin;
            for d in [-1i64, 0, 1] {
                let got = c.probability(i, (i as i64 + d) as usize);
                let want = base.probability(p, (p as i64 + d) as usize);
                assert!((got - want).abs() < 1e-12, "p={p} d={d}");
            }
        }
    }

    #[test]
    fn stay_probability_is_no_transition_everywhere() {
        let spec = CombinedJitterSpec::new(10.0, 40).unwrap();
        let c = combined_chain(&spec).unwrap();
        for i in 1..c.n_states() - 1 {
            assert!((c.probability(i, i) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn widened_window_profile_is_symmetric() {
        let spec = CombinedJitterSpec::new(10.0, 40).unwrap();
        let c = combined_chain(&spec).unwrap();
        let s = absorption_stats(&c).unwrap();
        let n = c.n_states() - 1;
        for k in 1..n {
            let (a, b) = (s.mean_of(k), s.mean_of(n - k));
            assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
        assert_eq!(s.peak().0, n / 2);
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut spec = CombinedJitterSpec::new(10.0, 40).unwrap();
        spec.p_a = 0.5;
        assert!(combined_chain(&spec).is_err());
    }
}
