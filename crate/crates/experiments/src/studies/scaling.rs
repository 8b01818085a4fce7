//! Dependence of the threshold step size on the Debye ratio.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ModelConfig, RunConfig, StepperMode};
use crate::error::ExperimentError;
use crate::simulate::run_config;
use crate::studies::adaptive::{estimate_threshold, Threshold};

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub t_end: f64,
    /// `t_end` of this run relative to the reference run.
    pub time_scale: f64,
    pub steps: usize,
    pub blow_up: Option<f64>,
    pub failure: Option<String>,
    pub threshold: Option<Threshold>,
    /// `dt_inf / epsilon^2`.
    pub ratio: Option<f64>,
}

/// Runs `base` (a voltage-driven PNP configuration) once per `epsilon`.
///
/// The run for `reference_eps` uses `base.t_end`; smaller values use
/// `t_end * (eps / reference_eps)^2` so that every run takes a comparable
/// number of steps at threshold. Larger values keep `base.t_end`.
pub fn run_epsilon_scaling(
    base: &RunConfig,
    epsilons: &[f64],
    reference_eps: f64,
    window_fraction: f64,
) -> Result<Vec<ScalingRow>, ExperimentError> {
    if base.stepper != StepperMode::Adaptive {
        return Err(ExperimentError::Config(
            "epsilon scaling needs adaptive stepping".into(),
        ));
    }
    let configs: Vec<(f64, f64, RunConfig)> = epsilons
        .iter()
        .map(|&eps| {
            let mut c = base.clone();
            let ModelConfig::Pnp { params, .. } = &mut c.model else {
                return Err(ExperimentError::Config(
                    "epsilon scaling needs the PNP model".into(),
                ));
            };
            params.epsilon = eps;
            let scale = (eps / reference_eps).powi(2).min(1.0);
            c.t_end = base.t_end * scale;
            c.name = format!("{}-eps{eps:e}", base.name);
            c.validate()?;
            Ok((eps, scale, c))
        })
        .collect::<Result<_, _>>()?;

    configs
        .par_iter()
        .map(|(eps, scale, c)| {
            let (_, out) = run_config(c)?;
            let threshold = estimate_threshold(&out.reports, window_fraction, *scale);
            Ok(ScalingRow {
                epsilon: *eps,
                t_end: c.t_end,
                time_scale: *scale,
                steps: out.reports.len(),
                blow_up: out.blow_up,
                failure: out.failure.clone(),
                ratio: threshold.map(|t| t.dt_inf / (eps * eps)),
                threshold,
            })
        })
        .collect()
}
