use super::SimError;

/// Uniform RC ladder driven by an ideal NRZ source, open at the far end.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RcLineSpec {
    pub sections: usize,
    /// Ohms.
    pub r_per_section: f64,
    /// Farads.
    pub c_per_section: f64,
    /// Bit period in seconds.
    pub ui_seconds: f64,
    pub samples_per_ui: usize,
    /// Integration steps per output sample; chosen automatically when absent.
    pub substeps: Option<usize>,
}

pub const DEFAULT_SECTIONS: usize = 20;
pub const MIN_SAMPLES_PER_UI: usize = 16;

impl RcLineSpec {
    pub fn new(r_per_section: f64, c_per_section: f64, ui_seconds: f64) -> Self {
        Self {
            sections: DEFAULT_SECTIONS,
            r_per_section,
            c_per_section,
            ui_seconds,
            samples_per_ui: 32,
            substeps: None,
        }
    }

    /// Per-section time constant in UI.
    pub fn section_tau_ui(&self) -> f64 {
        self.r_per_section * self.c_per_section / self.ui_seconds
    }

    /// Lumped `N²·r·c` in UI.
    pub fn total_rc_ui(&self) -> f64 {
        (self.sections * self.sections) as f64 * self.section_tau_ui()
    }

    fn auto_substeps(&self) -> usize {
        let dt = 1.0 / self.samples_per_ui as f64;
        ((4.0 * dt / self.section_tau_ui()) * (1.0 + 1e-12))
            .ceil()
            .max(1.0) as usize
    }

    pub fn resolved_substeps(&self) -> Result<usize, SimError> {
        self.validate()?;
        Ok(self.substeps.unwrap_or_else(|| self.auto_substeps()))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.sections == 0 {
            return Err(SimError::InvalidConfig(
                "RC line needs at least one section".into(),
            ));
        }
        for (name, v) in [
            ("r_per_section", self.r_per_section),
            ("c_per_section", self.c_per_section),
            ("ui_seconds", self.ui_seconds),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.samples_per_ui < MIN_SAMPLES_PER_UI {
            return Err(SimError::InvalidConfig(format!(
                "samples_per_ui must be at least {MIN_SAMPLES_PER_UI}, got {}",
                self.samples_per_ui
            )));
        }
        if let Some(sub) = self.substeps {
            let dt = 1.0 / (self.samples_per_ui * sub.max(1)) as f64;
            let limit = self.section_tau_ui() / 4.0;
            if sub == 0 || dt > limit * (1.0 + 1e-12) {
                return Err(SimError::UnstableTimestep {
                    dt_ui: dt,
                    limit_ui: limit,
                });
            }
        }
        Ok(())
    }
}

/// Sampled channel output; sample `k` is at `k / samples_per_ui` UI.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples_per_ui: usize,
    pub samples: Vec<f64>,
}

impl Waveform {
    pub fn duration_ui(&self) -> f64 {
        self.samples.len().saturating_sub(1) as f64 / self.samples_per_ui as f64
    }

    /// Ideal NRZ drive with no channel, `levels` held for one UI each.
    pub fn square(levels: &[f64], samples_per_ui: usize) -> Self {
        let mut samples = Vec::with_capacity(levels.len() * samples_per_ui + 1);
        samples.push(levels.first().copied().unwrap_or(0.0));
        for &l in levels {
            samples.extend(std::iter::repeat_n(l, samples_per_ui));
        }
        Self {
            samples_per_ui,
            samples,
        }
    }
}

/// Ladder state advanced by backward Euler with a constant tridiagonal
/// system, factored once.
#[derive(Debug, Clone)]
pub struct RcLine {
    spec: RcLineSpec,
    substeps: usize,
    alpha: f64,
    v: Vec<f64>,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
    scratch: Vec<f64>,
}

impl RcLine {
    pub fn new(spec: RcLineSpec) -> Result<Self, SimError> {
        let substeps = spec.resolved_substeps()?;
        let n = spec.sections;
        let dt = 1.0 / (spec.samples_per_ui * substeps) as f64;
        let alpha = dt / spec.section_tau_ui();

        let diag = |i: usize| {
            if i + 1 == n {
                1.0 + alpha
            } else {
                1.0 + 2.0 * alpha
            }
        };
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        for i in 0..n {
            let carried = if i == 0 { 0.0 } else { alpha * c_prime[i - 1] };
            inv_denom[i] = 1.0 / (diag(i) + carried);
            c_prime[i] = -alpha * inv_denom[i];
        }
        Ok(Self {
            spec,
            substeps,
            alpha,
            v: vec![0.0; n],
            c_prime,
            inv_denom,
            scratch: vec![0.0; n],
        })
    }

    pub fn spec(&self) -> &RcLineSpec {
        &self.spec
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn reset(&mut self) {
        self.v.iter_mut().for_each(|x| *x = 0.0);
    }

    pub fn output(&self) -> f64 {
        self.v[self.v.len() - 1]
    }

    /// Holds the drive at `input` for one sample period and returns the
    /// far-end voltage.
    pub fn step_sample(&mut self, input: f64) -> f64 {
        let n = self.v.len();
        let a = self.alpha;
        for _ in 0..self.substeps {
            // forward sweep with sub-diagonal -a
            let d = &mut self.scratch;
            for i in 0..n {
                let rhs = self.v[i] + if i == 0 { a * input } else { 0.0 };
                let carried = if i == 0 { 0.0 } else { a * d[i - 1] };
                d[i] = (rhs + carried) * self.inv_denom[i];
            }
            self.v[n - 1] = d[n - 1];
            for i in (0..n - 1).rev() {
                self.v[i] = d[i] - self.c_prime[i] * self.v[i + 1];
            }
        }
        self.output()
    }
}

/// Far-end response to analog drive `levels`, one level per UI, from rest.
pub fn propagate_levels(levels: &[f64], spec: &RcLineSpec) -> Result<Waveform, SimError> {
    let mut line = RcLine::new(*spec)?;
    let spu = spec.samples_per_ui;
    let mut samples = Vec::with_capacity(levels.len() * spu + 1);
    samples.push(line.output());
    for &l in levels {
        for _ in 0..spu {
            samples.push(line.step_sample(l));
        }
    }
    Ok(Waveform {
        samples_per_ui: spu,
        samples,
    })
}

/// Far-end response to NRZ bits driven between 0 and 1.
pub fn propagate_rc(bits: &[u8], spec: &RcLineSpec) -> Result<Waveform, SimError> {
    let levels: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
    propagate_levels(&levels, spec)
}
