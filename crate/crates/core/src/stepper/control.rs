//! Coarse/fine error estimate, extrapolation and the step-size update.

use serde::{Deserialize, Serialize};

use crate::error::NumericsError;

/// Largest step ratio for which variable-step BDF2 stays zero-stable.
pub const ZERO_STABILITY_RATIO: f64 = 1.0 + std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptiveConfig {
    /// Target local truncation error.
    pub tol: f64,
    /// Accepted errors lie in `(tol - range, tol + range)`.
    pub range: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    /// Attempts per step before giving up on the error band.
    pub i_max: usize,
    /// Order of the local error of the two-step scheme. The one-step
    /// start always uses 2.
    pub order: u32,
    /// Cap on `dt_now / dt_old` for accepted steps.
    pub omega_max: f64,
    /// Step size guess for the very first step.
    pub dt_init: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            tol: 1e-6,
            range: 1e-6 / 3.0,
            dt_min: 1e-9,
            dt_max: 1.0,
            eta_min: 0.8,
            eta_max: 1.2,
            i_max: 10,
            order: 3,
            omega_max: 2.4,
            dt_init: 1e-6,
        }
    }
}

impl AdaptiveConfig {
    /// Default settings with `tol` and `range = tol/3`.
    pub fn with_tol(tol: f64) -> Self {
        AdaptiveConfig {
            tol,
            range: tol / 3.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let bad = |msg: &str| Err(NumericsError::InvalidArgument(msg.to_string()));
        if !(self.range > 0.0 && self.range < self.tol) {
            return bad("need 0 < range < tol");
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max) {
            return bad("need 0 < dt_min < dt_max");
        }
        if !(self.eta_min > 0.0 && self.eta_min < 1.0 && self.eta_max > 1.0) {
            return bad("need 0 < eta_min < 1 < eta_max");
        }
        if self.i_max < 1 {
            return bad("need i_max >= 1");
        }
        if !(self.order == 2 || self.order == 3) {
            return bad("order must be 2 or 3");
        }
        if !(self.omega_max > 1.0 && self.omega_max < ZERO_STABILITY_RATIO) {
            return bad("need 1 < omega_max < 1 + sqrt(2)");
        }
        if !(self.dt_init > 0.0) {
            return bad("need dt_init > 0");
        }
        Ok(())
    }

    pub fn accepts(&self, lte: f64) -> bool {
        lte > self.tol - self.range && lte < self.tol + self.range
    }
}

/// Scale factor turning `u_c - u_f` into the coarse-step error for the
/// two-step scheme: `8 (dt_old + dt_now) / (7 dt_old + 5 dt_now)`.
pub fn lte_factor(dt_now: f64, dt_old: f64) -> f64 {
    8.0 * (dt_old + dt_now) / (7.0 * dt_old + 5.0 * dt_now)
}

/// Extrapolation weights `(alpha, beta)` applied to `(u_c, u_f)`.
pub fn extrapolation_weights(dt_now: f64, dt_old: f64) -> (f64, f64) {
    let den = 7.0 * dt_old + 5.0 * dt_now;
    (
        -(dt_old + 3.0 * dt_now) / den,
        8.0 * (dt_old + dt_now) / den,
    )
}

/// Coarse-step error vector `eps_c ~ factor * (u_c - u_f)`.
pub fn lte_vector(u_coarse: &[f64], u_fine: &[f64], dt_now: f64, dt_old: f64) -> Vec<f64> {
    let k = lte_factor(dt_now, dt_old);
    u_coarse
        .iter()
        .zip(u_fine)
        .map(|(c, f)| k * (c - f))
        .collect()
}

/// `||eps_c||_2` for the two-step scheme.
pub fn estimate_lte(u_coarse: &[f64], u_fine: &[f64], dt_now: f64, dt_old: f64) -> f64 {
    crate::spatial::l2_norm(&lte_vector(u_coarse, u_fine, dt_now, dt_old))
}

/// `alpha u_c + beta u_f`; one order more accurate than either input.
pub fn extrapolate(u_coarse: &[f64], u_fine: &[f64], dt_now: f64, dt_old: f64) -> Vec<f64> {
    let (a, b) = extrapolation_weights(dt_now, dt_old);
    u_coarse
        .iter()
        .zip(u_fine)
        .map(|(c, f)| a * c + b * f)
        .collect()
}

/// For a first-order one-step scheme the coarse error is `2 (u_c - u_f)`.
pub fn one_step_lte_vector(u_coarse: &[f64], u_fine: &[f64]) -> Vec<f64> {
    u_coarse
        .iter()
        .zip(u_fine)
        .map(|(c, f)| 2.0 * (c - f))
        .collect()
}

/// `2 u_f - u_c`.
pub fn one_step_extrapolate(u_coarse: &[f64], u_fine: &[f64]) -> Vec<f64> {
    u_coarse
        .iter()
        .zip(u_fine)
        .map(|(c, f)| 2.0 * f - c)
        .collect()
}

/// `dt * min(max((tol/lte)^(1/p), eta_min), eta_max)`; a zero error
/// takes the `eta_max` branch.
pub fn propose_dt(dt: f64, lte: f64, tol: f64, order: u32, eta_min: f64, eta_max: f64) -> f64 {
    let factor = if lte > 0.0 {
        (tol / lte)
            .powf(1.0 / order as f64)
            .max(eta_min)
            .min(eta_max)
    } else {
        eta_max
    };
    dt * factor
}
