//! Response of the adaptive stepper to a staircase of voltage steps.

use pnp_core::pnp::{Drive, VoltageProtocol};
use pnp_core::stepper::{Clamp, StepReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ModelConfig, RunConfig};
use crate::error::ExperimentError;
use crate::model::Model;
use crate::simulate::{simulate, RunOutcome};

/// A stretch of accepted steps with `dt` below the dip level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dip {
    pub t_start: f64,
    pub t_end: f64,
    pub t_min: f64,
    pub min_dt: f64,
    pub steps: usize,
}

/// Finds descents of `dt` below `level`. Stretches before `dt` first
/// exceeds `level` (the start-up ramp) are ignored, and a stretch that
/// begins within `merge_gap` of the previous one's end extends it.
pub fn find_dips(reports: &[StepReport], level: f64, merge_gap: f64) -> Vec<Dip> {
    let mut dips: Vec<Dip> = Vec::new();
    let mut armed = false;
    let mut open = false;
    for r in reports {
        if r.dt >= level {
            armed = true;
            open = false;
            continue;
        }
        if !armed {
            continue;
        }
        let start = r.t - r.dt;
        match dips.last_mut() {
            Some(d) if open || start - d.t_end <= merge_gap => {
                d.t_end = r.t;
                d.steps += 1;
                if r.dt < d.min_dt {
                    d.min_dt = r.dt;
                    d.t_min = r.t;
                }
            }
            _ => dips.push(Dip {
                t_start: start,
                t_end: r.t,
                t_min: r.t,
                min_dt: r.dt,
                steps: 1,
            }),
        }
        open = true;
    }
    dips
}

/// Fraction of accepted steps with `dt > level`.
pub fn step_share_above(reports: &[StepReport], level: f64) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().filter(|r| r.dt > level).count() as f64 / reports.len() as f64
}

/// Fraction of the simulated time covered by steps with `dt > level`.
pub fn time_share_above(reports: &[StepReport], level: f64) -> f64 {
    let total: f64 = reports.iter().map(|r| r.dt).sum();
    if total == 0.0 {
        return 0.0;
    }
    reports
        .iter()
        .filter(|r| r.dt > level)
        .map(|r| r.dt)
        .sum::<f64>()
        / total
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DipSettings {
    /// `dt` below this marks a dip.
    pub level: f64,
    pub merge_gap: f64,
    /// Level for the share of large steps.
    pub large_dt: f64,
}

impl Default for DipSettings {
    fn default() -> Self {
        DipSettings {
            level: 1e-3,
            merge_gap: 0.1,
            large_dt: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VoltageSummary {
    pub dt_min: f64,
    pub steps: usize,
    pub t_final: f64,
    pub blow_up: Option<f64>,
    pub failure: Option<String>,
    pub dips: Vec<Dip>,
    pub step_share_large: f64,
    pub time_share_large: f64,
    pub forced_min_steps: usize,
    /// Mean `dt` over the second before the first voltage step.
    pub pre_step_dt: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VoltageReport {
    pub settings: DipSettings,
    pub main: VoltageSummary,
    /// The same run repeated with other `dt_min` values.
    pub sensitivity: Vec<VoltageSummary>,
}

/// One row per level: `(t, v(t))`.
pub type VoltageTrace = Vec<(f64, f64)>;

fn summarize(cfg: &RunConfig, out: &RunOutcome, settings: DipSettings) -> VoltageSummary {
    let first_step = match &cfg.model {
        ModelConfig::Pnp { params, .. } => match &params.drive {
            Drive::Voltage {
                protocol: VoltageProtocol::Steps { times, .. },
            } => times.iter().copied().reduce(f64::min),
            _ => None,
        },
        _ => None,
    };
    let pre_step_dt = first_step.and_then(|t0| {
        let w: Vec<f64> = out
            .reports
            .iter()
            .filter(|r| r.t > t0 - 1.0 && r.t < t0 - 0.05)
            .map(|r| r.dt)
            .collect();
        (!w.is_empty()).then(|| w.iter().sum::<f64>() / w.len() as f64)
    });
    VoltageSummary {
        dt_min: cfg.adaptive.dt_min,
        steps: out.reports.len(),
        t_final: out.final_level.t,
        blow_up: out.blow_up,
        failure: out.failure.clone(),
        dips: find_dips(&out.reports, settings.level, settings.merge_gap),
        step_share_large: step_share_above(&out.reports, settings.large_dt),
        time_share_large: time_share_above(&out.reports, settings.large_dt),
        forced_min_steps: out
            .reports
            .iter()
            .filter(|r| r.clamp == Clamp::ForcedMin)
            .count(),
        pre_step_dt,
    }
}

fn run_traced(cfg: &RunConfig) -> Result<(RunOutcome, VoltageTrace), ExperimentError> {
    let model = Model::build(&cfg.model, cfg.mesh.build()?)?;
    let pnp = model
        .pnp()
        .ok_or_else(|| ExperimentError::Config("voltage steps need the PNP model".into()))?;
    if pnp.params().is_current_driven() {
        return Err(ExperimentError::Config(
            "voltage steps need a voltage drive".into(),
        ));
    }
    let mut trace = Vec::new();
    let out = simulate(&model, cfg, &mut |l| {
        trace.push((l.t, pnp.cathode_voltage(&l.aux)))
    })?;
    Ok((out, trace))
}

/// Runs `cfg` and, in parallel, the same configuration with each of
/// `dt_min_alternatives`.
pub fn run_voltage_steps(
    cfg: &RunConfig,
    settings: DipSettings,
    dt_min_alternatives: &[f64],
) -> Result<(RunOutcome, VoltageTrace, VoltageReport), ExperimentError> {
    let (out, trace) = run_traced(cfg)?;
    let main = summarize(cfg, &out, settings);
    let sensitivity = dt_min_alternatives
        .par_iter()
        .map(|&dt_min| {
            let mut c = cfg.clone();
            c.adaptive.dt_min = dt_min;
            c.validate()?;
            let (o, _) = run_traced(&c)?;
            Ok(summarize(&c, &o, settings))
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok((
        out,
        trace,
        VoltageReport {
            settings,
            main,
            sensitivity,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reports(dts: &[f64]) -> Vec<StepReport> {
        let mut t = 0.0;
        dts.iter()
            .enumerate()
            .map(|(i, &dt)| {
                t += dt;
                StepReport {
                    step: i + 1,
                    t,
                    dt,
                    lte: 0.0,
                    attempts: 1,
                    clamp: Clamp::None,
                    ut_norm: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn start_up_ramp_is_not_a_dip() {
        let r = reports(&[1e-6, 1e-4, 1e-2, 1e-2, 1e-5, 1e-4, 1e-2, 1e-2]);
        let d = find_dips(&r, 1e-3, 0.0);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].steps, 2);
        assert_eq!(d[0].min_dt, 1e-5);
    }

    #[test]
    fn nearby_dips_merge() {
        let dts = [0.1, 0.1, 1e-5, 2e-3, 1e-5, 0.1, 0.1, 0.1, 1e-5, 0.1];
        let r = reports(&dts);
        assert_eq!(find_dips(&r, 1e-3, 0.01).len(), 2);
        assert_eq!(find_dips(&r, 1e-3, 0.0).len(), 3);
    }

    #[test]
    fn shares() {
        let r = reports(&[0.5, 0.001, 0.001, 0.498]);
        assert_eq!(step_share_above(&r, 0.01), 0.5);
        assert!((time_share_above(&r, 0.01) - 0.998).abs() < 1e-12);
    }
}
