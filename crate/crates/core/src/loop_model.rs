//! Jitter-free settling of the first-order retiming loop.
//!
//! Units are abstract but must be consistent: with `k_cp` in charge per
//! update, `k_vc` in radians per volt and `cap` in farads, the phase step
//! comes out in radians and the settling time in the unit of `period`.

use std::f64::consts::{PI, TAU};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LoopError {
    #[error("loop parameter `{name}` must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("activity factor must lie in (0, 1], got {0}")]
    Activity(f64),
    #[error("phase error must lie in [0, 2π), got {0}")]
    PhaseOutOfRange(f64),
    #[error("phase step must be positive and finite, got {0}")]
    Step(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    k_cp: f64,
    k_vc: f64,
    cap: f64,
    period: f64,
    activity: f64,
}

impl LoopParams {
    pub fn new(
        k_cp: f64,
        k_vc: f64,
        cap: f64,
        period: f64,
        activity: f64,
    ) -> Result<Self, LoopError> {
        for (name, value) in [
            ("k_cp", k_cp),
            ("k_vc", k_vc),
            ("cap", cap),
            ("period", period),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(LoopError::NonPositive { name, value });
            }
        }
        if !(activity > 0.0 && activity <= 1.0) {
            return Err(LoopError::Activity(activity));
        }
        Ok(Self {
            k_cp,
            k_vc,
            cap,
            period,
            activity,
        })
    }

    pub fn k_cp(&self) -> f64 {
        self.k_cp
    }

    pub fn k_vc(&self) -> f64 {
        self.k_vc
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn activity(&self) -> f64 {
        self.activity
    }

    /// Control-voltage change per update, `K_CP / C`.
    pub fn voltage_step(&self) -> f64 {
        self.k_cp / self.cap
    }
}

/// Phase correction per update, `K_CP·K_VC / C`.
pub fn phase_step(p: &LoopParams) -> f64 {
    p.voltage_step() * p.k_vc
}

/// Updates needed to remove a phase error `delta_phi`, turning whichever
/// way round the circle is shorter.
pub fn steps_to_lock(delta_phi: f64, step: f64) -> Result<f64, LoopError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(LoopError::Step(step));
    }
    if !(0.0..TAU).contains(&delta_phi) {
        return Err(LoopError::PhaseOutOfRange(delta_phi));
    }
    let distance = if delta_phi <= PI {
        delta_phi
    } else {
        TAU - delta_phi
    };
    Ok(distance / step)
}

/// Settling time `M·T/α`.
pub fn deterministic_settling_time(delta_phi: f64, p: &LoopParams) -> Result<f64, LoopError> {
    let m = steps_to_lock(delta_phi, phase_step(p))?;
    Ok(m * p.period / p.activity)
}
