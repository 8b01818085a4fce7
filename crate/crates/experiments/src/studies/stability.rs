//! Amplification-root diagnostics: closed-form checks plus the roots along
//! an adaptive trajectory of a linearly implicit model.

use num_complex::Complex64;
use pnp_core::stability::{
    forward_euler_bound, large_dt_limits, operator_spectrum, trajectory_root_report, vssbdf2_roots,
    zero_stability_roots, RootReportRow, StepPair,
};
use pnp_core::stepper::StepReport;
use serde::Serialize;

use crate::config::{RunConfig, StepperMode};
use crate::error::ExperimentError;
use crate::simulate::run_config;

#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormChecks {
    /// `lambda dt_old = -1/8`: limits of the two roots as `dt_now` grows.
    pub large_dt_limits: (f64, f64),
    /// Largest `|rho|` over `omega = 1` and `lambda dt` on a grid in
    /// `[-1e4, 0)`.
    pub unit_ratio_max_magnitude: f64,
    /// Spurious root at `lambda = 0` for `omega` in `{1, 1+sqrt2, 3}`.
    pub zero_stability: Vec<(f64, f64)>,
}

pub fn closed_form_checks() -> Result<ClosedFormChecks, ExperimentError> {
    let (p, m) = large_dt_limits(-0.125)?;
    let mut worst: f64 = 0.0;
    for k in 0..=400 {
        let z = -(10f64.powf(-4.0 + 8.0 * k as f64 / 400.0));
        worst = worst.max(vssbdf2_roots(Complex64::from(z), 1.0, 1.0)?.max_magnitude());
    }
    let zero_stability = [1.0, 1.0 + 2f64.sqrt(), 3.0]
        .iter()
        .map(|&w| (w, zero_stability_roots(w).1))
        .collect();
    Ok(ClosedFormChecks {
        large_dt_limits: (p.re, m.re),
        unit_ratio_max_magnitude: worst,
        zero_stability,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub steps: usize,
    pub operator_size: usize,
    pub max_eigenvalue_real: f64,
    pub zero_eigenvalues: usize,
    /// Largest root magnitude over the trajectory.
    pub max_magnitude: f64,
    /// Steps whose count of roots with `|rho| > 1 - unit_tol` is exactly
    /// one.
    pub steps_with_single_unit_root: usize,
    pub unit_tol: f64,
    pub forward_euler_bound: Option<(f64, f64)>,
}

/// Turns accepted two-step reports into `(dt_old, dt_now)` pairs; the
/// one-step start has no pair.
pub fn step_pairs(reports: &[StepReport]) -> Vec<StepPair> {
    reports
        .windows(2)
        .map(|w| StepPair {
            t: w[1].t,
            dt_old: w[0].dt,
            dt_now: w[1].dt,
        })
        .collect()
}

/// Runs `cfg` adaptively and evaluates the `k` largest root magnitudes at
/// every step, using the frozen implicit operator of the model.
pub fn run_trajectory_report(
    cfg: &RunConfig,
    k: usize,
    unit_tol: f64,
) -> Result<(Vec<RootReportRow>, TrajectorySummary), ExperimentError> {
    if cfg.stepper != StepperMode::Adaptive {
        return Err(ExperimentError::Config(
            "stability report needs adaptive stepping".into(),
        ));
    }
    let (model, out) = run_config(cfg)?;
    let op = model.system().implicit_matrix().ok_or_else(|| {
        ExperimentError::Config("model does not expose a linear implicit operator".into())
    })?;
    let spectrum = operator_spectrum(&op)?;
    let rows = trajectory_root_report(&op, &step_pairs(&out.reports), k)?;
    let max_magnitude = rows
        .iter()
        .flat_map(|r| r.magnitudes.iter().copied())
        .fold(0.0, f64::max);
    let single = rows
        .iter()
        .filter(|r| r.magnitudes.iter().filter(|&&m| m > 1.0 - unit_tol).count() == 1)
        .count();
    let fe = model.mesh().map(|m| forward_euler_bound(m.min_spacing()));
    let summary = TrajectorySummary {
        steps: rows.len(),
        operator_size: op.size(),
        max_eigenvalue_real: spectrum
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max),
        zero_eigenvalues: spectrum.iter().filter(|l| l.norm() == 0.0).count(),
        max_magnitude,
        steps_with_single_unit_root: single,
        unit_tol,
        forward_euler_bound: fe,
    };
    Ok((rows, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let c = closed_form_checks().unwrap();
        let r2 = 2.0 * 2f64.sqrt();
        assert!((c.large_dt_limits.0 - (4.0 + r2)).abs() < 1e-10);
        assert!((c.large_dt_limits.1 - (4.0 - r2)).abs() < 1e-10);
        assert!(c.unit_ratio_max_magnitude <= 1.0);
        assert!((c.zero_stability[1].1.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairs_follow_the_reports() {
        let mk = |t: f64, dt: f64| StepReport {
            step: 0,
            t,
            dt,
            lte: 0.0,
            attempts: 1,
            clamp: pnp_core::stepper::Clamp::None,
            ut_norm: 0.0,
        };
        let p = step_pairs(&[mk(0.1, 0.1), mk(0.3, 0.2), mk(0.6, 0.3)]);
        assert_eq!(p.len(), 2);
        assert_eq!((p[1].dt_old, p[1].dt_now, p[1].t), (0.2, 0.3, 0.6));
    }
}
