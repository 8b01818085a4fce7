//! Single-step formulas. Each returns the raw new state; wrapping it in a
//! [`Level`] performs the elliptic update.

use super::system::{ensure_finite, ImexSystem, ImplicitSolve, Level};
use crate::error::StepError;

/// Coefficients of the variable-step BDF2 formula for the step ratio
/// `omega = dt_now / dt_old`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bdf2Coefficients {
    /// Multiplies `u^{n+1}`.
    pub lead: f64,
    /// Multiplies `u^n` on the right-hand side.
    pub now: f64,
    /// Multiplies `u^{n-1}` on the right-hand side (negative).
    pub prev: f64,
    /// Extrapolation weights of `f^n` and `f^{n-1}`.
    pub f_now: f64,
    pub f_prev: f64,
}

impl Bdf2Coefficients {
    pub fn new(omega: f64) -> Self {
        let p = 1.0 + omega;
        Bdf2Coefficients {
            lead: (1.0 + 2.0 * omega) / p,
            now: p,
            prev: -omega * omega / p,
            f_now: p,
            f_prev: -omega,
        }
    }
}

/// `(u^{n+1} - u^n)/dt = f(u^n) + G u^{n+1}`.
pub fn imex_euler_solve(
    sys: &dyn ImexSystem,
    from: &Level,
    dt: f64,
) -> Result<Vec<f64>, StepError> {
    let t_new = from.t + dt;
    let y = sys.solve_implicit(&ImplicitSolve {
        lead: 1.0,
        dt,
        history: &from.y,
        explicit: &from.f,
        t_new,
    })?;
    ensure_finite(&y, t_new)?;
    Ok(y)
}

/// Variable-step semi-implicit BDF2:
/// `(1/dt)[(1+2w)/(1+w) u^{n+1} - (1+w) u^n + w^2/(1+w) u^{n-1}]
///   = (1+w) f^n - w f^{n-1} + G u^{n+1}` with `w = dt_now/dt_old`.
pub fn vssbdf2_solve(
    sys: &dyn ImexSystem,
    prev: &Level,
    now: &Level,
    dt_old: f64,
    dt_now: f64,
) -> Result<Vec<f64>, StepError> {
    let c = Bdf2Coefficients::new(dt_now / dt_old);
    let history: Vec<f64> = now
        .y
        .iter()
        .zip(&prev.y)
        .map(|(a, b)| c.now * a + c.prev * b)
        .collect();
    let explicit: Vec<f64> = now
        .f
        .iter()
        .zip(&prev.f)
        .map(|(a, b)| c.f_now * a + c.f_prev * b)
        .collect();
    let t_new = now.t + dt_now;
    let y = sys.solve_implicit(&ImplicitSolve {
        lead: c.lead,
        dt: dt_now,
        history: &history,
        explicit: &explicit,
        t_new,
    })?;
    ensure_finite(&y, t_new)?;
    Ok(y)
}

/// `u^{n+1} = u^n + dt (f(u^n) + G u^n)`.
pub fn forward_euler_solve(
    sys: &dyn ImexSystem,
    from: &Level,
    dt: f64,
) -> Result<Vec<f64>, StepError> {
    let g = sys.apply_implicit(&from.y, from.t)?;
    let y: Vec<f64> = from
        .y
        .iter()
        .zip(&from.f)
        .zip(&g)
        .map(|((u, f), g)| u + dt * (f + g))
        .collect();
    ensure_finite(&y, from.t + dt)?;
    Ok(y)
}

pub fn imex_euler_step(sys: &dyn ImexSystem, from: &Level, dt: f64) -> Result<Level, StepError> {
    let y = imex_euler_solve(sys, from, dt)?;
    Level::new(sys, from.t + dt, y)
}

pub fn vssbdf2_step(
    sys: &dyn ImexSystem,
    prev: &Level,
    now: &Level,
    dt_old: f64,
    dt_now: f64,
) -> Result<Level, StepError> {
    let y = vssbdf2_solve(sys, prev, now, dt_old, dt_now)?;
    Level::new(sys, now.t + dt_now, y)
}

pub fn forward_euler_step(sys: &dyn ImexSystem, from: &Level, dt: f64) -> Result<Level, StepError> {
    let y = forward_euler_solve(sys, from, dt)?;
    Level::new(sys, from.t + dt, y)
}
