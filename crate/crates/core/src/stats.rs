//! Sample statistics used to compare simulation against the chain models.

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
}

pub fn summarize(xs: &[f64]) -> SampleSummary {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    SampleSummary { n, mean, variance }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// One-sided p-value for `mean(a) < mean(b)`.
    pub p_value: f64,
}

/// Welch's unequal-variance t-test of `mean(a) < mean(b)`.
pub fn welch_less(a: &SampleSummary, b: &SampleSummary) -> WelchTest {
    let va = a.variance / a.n as f64;
    let vb = b.variance / b.n as f64;
    let se2 = va + vb;
    let diff = a.mean - b.mean;
    if se2 == 0.0 {
        let p = if diff < 0.0 { 0.0 } else { 1.0 };
        return WelchTest {
            t: if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            },
            df: f64::INFINITY,
            p_value: p,
        };
    }
    let t = diff / se2.sqrt();
    let df =
        se2 * se2 / (va * va / (a.n as f64 - 1.0).max(1.0) + vb * vb / (b.n as f64 - 1.0).max(1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    WelchTest {
        t,
        df,
        p_value: dist.cdf(t),
    }
}

/// Kolmogorov–Smirnov distance between integer samples and a reference
/// CDF on the integers.
pub fn ks_statistic(samples: &[u64], cdf: impl Fn(u64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable();
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        while i < xs.len() && xs[i] == x {
            i += 1;
        }
        let f = cdf(x);
        let below = if x == 0 { 0.0 } else { cdf(x - 1) };
        let emp_before = (xs.partition_point(|&y| y < x)) as f64 / n;
        d = d
            .max((i as f64 / n - f).abs())
            .max((emp_before - below).abs());
    }
    d
}

/// Asymptotic one-sample critical value, `sqrt(-ln(α/2)/2)/sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
