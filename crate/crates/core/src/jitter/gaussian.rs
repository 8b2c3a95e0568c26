use statrs::function::erf::erf;

use super::ModelError;
use crate::markov::{renormalize_row, AbsorbingChain, StateLabel};

/// Gaussian random jitter on the data crossings, in loop steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianJitterSpec {
    pub sigma_steps: f64,
    pub truncation_sigmas: f64,
    /// Probability of a data transition in a cycle.
    pub transition_probability: f64,
}

impl GaussianJitterSpec {
    pub fn new(sigma_steps: f64) -> Result<Self, ModelError> {
        let spec = Self {
            sigma_steps,
            truncation_sigmas: 3.0,
            transition_probability: 0.5,
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
        if !(self.truncation_sigmas >= 1.0 && self.truncation_sigmas.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "truncation must be at least one sigma, got {}",
                self.truncation_sigmas
            )));
        }
        if !(self.transition_probability > 0.0 && self.transition_probability <= 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "transition probability must be in (0, 1], got {}",
                self.transition_probability
            )));
        }
        Ok(())
    }

    /// Half-width of the truncated window in whole steps.
    pub fn half_width_steps(&self) -> usize {
        (self.truncation_sigmas * self.sigma_steps).ceil() as usize
    }
}

/// Probability that a transition lands on the far side of the clock from
/// the mean crossing, with the clock `m` steps right of that mean:
/// `½ − ½·erf(2m / (√2·σ))`.
///
/// Odd symmetry of `erf` gives `f(m) + f(−m) = 1`, so for `m < 0` this is
/// the probability of a left shift, which is then the correct direction.
pub fn wrong_update_probability(m: f64, spec: &GaussianJitterSpec) -> f64 {
    0.5 - 0.5 * erf(2.0 * m / (std::f64::consts::SQRT_2 * spec.sigma_steps))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Birth–death chain on `m ∈ [−M, M]`, `M = ⌈truncation·σ⌉`, edges absorbing.
///
/// Each cycle a transition occurs with the configured probability; given a
/// transition the clock moves left with probability
/// [`wrong_update_probability`] and right otherwise.
pub fn gaussian_chain(spec: &GaussianJitterSpec) -> Result<AbsorbingChain, ModelError> {
    spec.validate()?;
    let half = spec.half_width_steps();
    if 2 * half + 1 < 3 {
        return Err(ModelError::WindowTooNarrow {
            min: 2,
            got: 2 * half,
        });
    }
    let n = 2 * half + 1;
    let a = spec.transition_probability;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let m = i as f64 - half as f64;
        labels.push(StateLabel::at(m));
        if i == 0 || i == n - 1 {
            rows.push(vec![(i, 1.0)]);
            continue;
        }
        let left = a * wrong_update_probability(m, spec);
        let right = a - left;
        let mut row = vec![(i - 1, left), (i, 1.0 - a), (i + 1, right)];
        renormalize_row(i, &mut row)?;
        rows.push(row);
    }
    Ok(AbsorbingChain::new(rows, &[0, n - 1])?.with_labels(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::absorption_stats;
    use proptest::prelude::*;

    #[test]
    fn wrong_update_reference_values() {
        let spec = GaussianJitterSpec::new(20.0).unwrap();
        assert_eq!(wrong_update_probability(0.0, &spec), 0.5);
        assert!(wrong_update_probability(1e6, &spec) < 1e-300 + 1e-16);
        // 2m/(√2σ) = 1  =>  ½ − ½ erf(1)
        let m = spec.sigma_steps / 2.0 * std::f64::consts::SQRT_2;
        let got = wrong_update_probability(m, &spec);
        assert!((got - 0.078_649_603_525_142_55).abs() < 1e-10, "{got}");
    }

    proptest! {
        #[test]
        fn wrong_update_is_decreasing_and_complementary(m in -200.0f64..200.0, dm in 0.01f64..10.0, sigma in 0.5f64..50.0) {
            let spec = GaussianJitterSpec::new(sigma).unwrap();
            let f = |x| wrong_update_probability(x, &spec);
            prop_assert!(f(m + dm) <= f(m));
            prop_assert!((f(m) + f(-m) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn center_is_locally_symmetric() {
        let spec = GaussianJitterSpec::new(20.0).unwrap();
        let c = gaussian_chain(&spec).unwrap();
        assert_eq!(c.n_states(), 121);
        let center = 60;
        assert_eq!(c.label(center).position, 0.0);
        assert_eq!(c.probability(center, center - 1), 0.25);
        assert_eq!(c.probability(center, center + 1), 0.25);
        for i in 1..120 {
            assert_eq!(c.probability(i, i), 0.5);
        }
    }

    #[test]
    fn mean_profile_peaks_at_center() {
        let spec = GaussianJitterSpec::new(20.0).unwrap();
        let s = absorption_stats(&gaussian_chain(&spec).unwrap()).unwrap();
        assert_eq!(s.peak().0, 60);
        for k in 1..60 {
            assert!(s.mean_of(k) < s.mean_of(k + 1));
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GaussianJitterSpec::new(0.0).is_err());
        let mut s = GaussianJitterSpec::new(1.0).unwrap();
        s.truncation_sigmas = 0.5;
        assert!(gaussian_chain(&s).is_err());
    }
}
