//! Adaptive runs, threshold detection and the piecewise-constant-dt
//! blow-up experiment.

use pnp_core::stepper::{Clamp, StepReport};
use serde::Serialize;

use crate::config::{RunConfig, StepperMode};
use crate::error::ExperimentError;
use crate::simulate::{run_config, RunOutcome};

/// Late-time average step size, with a least-squares trend of `ln dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub dt_inf: f64,
    /// `d ln dt / d t'` over the window, with `t' = t / time_scale`.
    pub slope: f64,
    pub window_start: f64,
    pub window_end: f64,
    pub steps: usize,
    /// Whether `|slope|` is below the settling limit.
    pub settled: bool,
}

pub const SETTLED_SLOPE: f64 = 1e-3;

/// Averages `dt` over the accepted steps in the trailing `fraction` of the
/// simulated interval. Returns `None` if fewer than three steps fall in
/// the window.
///
/// `time_scale` stretches time before the slope is taken, so that runs
/// shortened by a known factor are judged on the same footing.
pub fn estimate_threshold(
    reports: &[StepReport],
    fraction: f64,
    time_scale: f64,
) -> Option<Threshold> {
    let last = reports.last()?;
    let t0 = reports.first()?.t - reports.first()?.dt;
    let start = last.t - fraction.clamp(0.0, 1.0) * (last.t - t0);
    let window: Vec<&StepReport> = reports.iter().filter(|r| r.t >= start).collect();
    let n = window.len();
    if n < 3 {
        return None;
    }
    let dt_inf = window.iter().map(|r| r.dt).sum::<f64>() / n as f64;
    let ts: Vec<f64> = window.iter().map(|r| r.t / time_scale).collect();
    let ls: Vec<f64> = window.iter().map(|r| r.dt.ln()).collect();
    let tm = ts.iter().sum::<f64>() / n as f64;
    let lm = ls.iter().sum::<f64>() / n as f64;
    let sxx: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
    let sxy: f64 = ts.iter().zip(&ls).map(|(t, l)| (t - tm) * (l - lm)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Some(Threshold {
        dt_inf,
        slope,
        window_start: start,
        window_end: last.t,
        steps: n,
        settled: slope.abs() < SETTLED_SLOPE,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptiveSummary {
    pub steps: usize,
    pub t_final: f64,
    pub blow_up: Option<f64>,
    pub failure: Option<String>,
    pub threshold: Option<Threshold>,
    pub max_dt: f64,
    pub reached_dt_max: bool,
    pub forced_min_steps: usize,
    /// Largest `lte` over the second half of the run.
    pub late_max_lte: Option<f64>,
}

impl AdaptiveSummary {
    pub fn from_outcome(cfg: &RunConfig, out: &RunOutcome, window_fraction: f64) -> Self {
        let r = &out.reports;
        let max_dt = r.iter().map(|r| r.dt).fold(0.0, f64::max);
        let half = out.final_level.t / 2.0;
        let late_max_lte = r
            .iter()
            .filter(|r| r.t > half)
            .map(|r| r.lte)
            .reduce(f64::max);
        AdaptiveSummary {
            steps: r.len(),
            t_final: out.final_level.t,
            blow_up: out.blow_up,
            failure: out.failure.clone(),
            threshold: estimate_threshold(r, window_fraction, 1.0),
            max_dt,
            reached_dt_max: r
                .iter()
                .any(|r| r.dt >= cfg.adaptive.dt_max * (1.0 - 1e-12)),
            forced_min_steps: r.iter().filter(|r| r.clamp == Clamp::ForcedMin).count(),
            late_max_lte,
        }
    }
}

pub fn run_adaptive(
    cfg: &RunConfig,
    window_fraction: f64,
) -> Result<(RunOutcome, AdaptiveSummary), ExperimentError> {
    if cfg.stepper != StepperMode::Adaptive {
        return Err(ExperimentError::Config(
            "adaptive study needs stepper.mode = adaptive".into(),
        ));
    }
    let (_, out) = run_config(cfg)?;
    let s = AdaptiveSummary::from_outcome(cfg, &out, window_fraction);
    Ok((out, s))
}

#[derive(Debug, Clone, Serialize)]
pub struct PiecewiseSummary {
    pub dt_small: f64,
    pub dt_large: f64,
    pub t_switch: f64,
    pub steps: usize,
    pub t_final: f64,
    pub blow_up: Option<f64>,
    pub failure: Option<String>,
    /// `lte` of the last step before the switch.
    pub lte_before: f64,
    /// Largest finite `lte` after the switch.
    pub lte_after: f64,
    /// `lte_after / lte_before`.
    pub lte_growth: f64,
}

pub fn run_piecewise(cfg: &RunConfig) -> Result<(RunOutcome, PiecewiseSummary), ExperimentError> {
    let StepperMode::Piecewise {
        dt_small,
        dt_large,
        t_switch,
    } = cfg.stepper
    else {
        return Err(ExperimentError::Config(
            "piecewise study needs stepper.mode = piecewise".into(),
        ));
    };
    let (_, out) = run_config(cfg)?;
    let finite_max = |it: &mut dyn Iterator<Item = &StepReport>| {
        it.map(|r| r.lte)
            .filter(|l| l.is_finite())
            .fold(0.0, f64::max)
    };
    let lte_before = out
        .reports
        .iter()
        .rev()
        .find(|r| r.dt == dt_small)
        .map_or(f64::NAN, |r| r.lte);
    let lte_after = finite_max(&mut out.reports.iter().filter(|r| r.dt == dt_large));
    let s = PiecewiseSummary {
        dt_small,
        dt_large,
        t_switch,
        steps: out.reports.len(),
        t_final: out.final_level.t,
        blow_up: out.blow_up,
        failure: out.failure.clone(),
        lte_before,
        lte_after,
        lte_growth: lte_after / lte_before,
    };
    Ok((out, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(t: f64, dt: f64) -> StepReport {
        StepReport {
            step: 0,
            t,
            dt,
            lte: 0.0,
            attempts: 1,
            clamp: Clamp::None,
            ut_norm: 0.0,
        }
    }

    fn series(dts: impl Fn(f64) -> f64) -> Vec<StepReport> {
        let mut t = 0.0;
        let mut out = Vec::new();
        while t < 10.0 {
            let dt = dts(t);
            t += dt;
            out.push(report(t, dt));
        }
        out
    }

    #[test]
    fn constant_tail_is_settled() {
        let r = series(|t| if t < 5.0 { 0.01 } else { 0.2 });
        let th = estimate_threshold(&r, 0.2, 1.0).unwrap();
        assert!((th.dt_inf - 0.2).abs() < 1e-12);
        assert!(th.settled);
    }

    #[test]
    fn growing_tail_is_flagged() {
        let r = series(|t| 0.01 * (0.3 * t).exp());
        let th = estimate_threshold(&r, 0.3, 1.0).unwrap();
        assert!((th.slope - 0.3).abs() < 0.02, "{}", th.slope);
        assert!(!th.settled);
        // The same trend in a run shortened a hundredfold.
        let short: Vec<StepReport> = r
            .iter()
            .map(|x| report(x.t / 100.0, x.dt / 100.0))
            .collect();
        let th = estimate_threshold(&short, 0.3, 0.01).unwrap();
        assert!((th.slope - 0.3).abs() < 0.02);
    }

    #[test]
    fn tiny_windows_give_nothing() {
        assert!(estimate_threshold(&[report(1.0, 1.0)], 0.2, 1.0).is_none());
        assert!(estimate_threshold(&[], 0.2, 1.0).is_none());
    }
}
