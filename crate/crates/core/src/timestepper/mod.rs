//! Variable-step, variable-order NDF integration of `M y' = f(t, y)` with
//! a singular mass matrix.

mod ndf;
mod newton;

pub use ndf::{Ndf, StepInfo};
pub use newton::{newton_solve, NewtonOutcome};

use thiserror::Error;

use crate::fem1d::banded::BandMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tau0: f64,
    pub tau_max: f64,
    /// Steps below this size abort the integration.
    pub tau_min: f64,
    pub max_order: usize,
    /// Update norm below which Newton stops regardless of the rate.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Bound on the estimated remaining Newton error, in tolerance units.
    pub newton_rate_tol: f64,
    pub safety: f64,
    pub min_factor: f64,
    pub max_factor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-5,
            abs_tol: 1e-8,
            tau0: 1e-6,
            tau_max: 1e-2,
            tau_min: 1e-14,
            max_order: 2,
            newton_tol: 1e-10,
            newton_max_iter: 12,
            newton_rate_tol: 0.05,
            safety: 0.8,
            min_factor: 0.2,
            max_factor: 2.5,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("integrator: need 0 < tau0 <= tau_max, got tau0 = {tau0}, tau_max = {tau_max}")]
    StepBounds { tau0: f64, tau_max: f64 },
    #[error("integrator: max_order {0} outside 1..=5")]
    Order(usize),
    #[error("integrator: tolerances must be positive")]
    Tolerance,
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tau0 > 0.0 && self.tau0 <= self.tau_max) {
            return Err(ConfigError::StepBounds { tau0: self.tau0, tau_max: self.tau_max });
        }
        if !(1..=5).contains(&self.max_order) {
            return Err(ConfigError::Order(self.max_order));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.newton_tol > 0.0) {
            return Err(ConfigError::Tolerance);
        }
        Ok(())
    }
}

/// Why a trial evaluation of the system failed. Leads to a smaller step.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct EvalFailure(pub String);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step size {tau:e} fell below the minimum at t = {t}; last failure: {reason}")]
    StepUnderflow { t: f64, tau: f64, reason: String },
}

/// A semi-explicit DAE `M y' = f(t, y)`.
pub trait DaeSystem {
    fn mass(&self) -> &BandMatrix;

    /// `f(t, y)` and `df/dy`. `tau` is the current step length, needed by
    /// rate-dependent material updates.
    fn residual_and_jacobian(
        &mut self,
        t: f64,
        y: &[f64],
        tau: f64,
    ) -> Result<(Vec<f64>, BandMatrix), EvalFailure>;

    /// `f(t, y)` alone. Override when it is much cheaper than the pair.
    fn residual(&mut self, t: f64, y: &[f64], tau: f64) -> Result<Vec<f64>, EvalFailure> {
        self.residual_and_jacobian(t, y, tau).map(|(f, _)| f)
    }

    /// Rejects converged states outside the physical domain.
    fn admissible(&self, _y: &[f64]) -> Result<(), EvalFailure> {
        Ok(())
    }
}

/// Outcome of comparing a local error estimate against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    pub accept: bool,
    pub tau_next: f64,
}

/// Power-rule step-size update for an error estimate in tolerance units.
pub fn error_control(estimate: f64, order: usize, tau: f64, cfg: &IntegratorConfig) -> StepDecision {
    let raw = if estimate == 0.0 {
        f64::INFINITY
    } else {
        cfg.safety * estimate.powf(-1.0 / (order as f64 + 1.0))
    };
    let factor = raw.clamp(cfg.min_factor, cfg.max_factor);
    StepDecision { accept: estimate <= 1.0, tau_next: (tau * factor).min(cfg.tau_max) }
}

/// Weighted root-mean-square norm.
pub fn wrms(x: &[f64], scale: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let s: f64 = x.iter().zip(scale).map(|(v, w)| (v / w) * (v / w)).sum();
    (s / x.len() as f64).sqrt()
}
