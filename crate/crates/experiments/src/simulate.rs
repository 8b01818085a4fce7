//! Drives one configured run to completion.

use pnp_core::stepper::{AdaptiveStepper, Clamp, ConstantStepper, Level, StepReport};
use pnp_core::StepError;

use crate::config::{RunConfig, StepperMode};
use crate::error::ExperimentError;
use crate::model::Model;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// One report per accepted step. Constant-step runs have no error
    /// estimate and report `lte = NaN`.
    pub reports: Vec<StepReport>,
    pub final_level: Level,
    /// Time at which the state first became non-finite.
    pub blow_up: Option<f64>,
    /// Any other failure that stopped the run early.
    pub failure: Option<String>,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.blow_up.is_none() && self.failure.is_none()
    }
}

/// Step count for covering `t_end` with steps of `dt`, tolerating
/// rounding in `t_end / dt`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    (t_end / dt - 1e-9).ceil().max(0.0) as usize
}

/// Runs `cfg` on `model`. `observe` sees the initial level and every
/// accepted level after it.
pub fn simulate(
    model: &Model,
    cfg: &RunConfig,
    observe: &mut dyn FnMut(&Level),
) -> Result<RunOutcome, ExperimentError> {
    let sys = model.system();
    let y0 = model.initial_state();
    let mut reports = Vec::new();
    let mut stop: Option<StepError> = None;

    let final_level = match cfg.stepper {
        StepperMode::Constant { dt } => {
            let mut s = ConstantStepper::new(sys, cfg.scheme, 0.0, y0)?;
            observe(s.current());
            for k in 0..step_count(cfg.t_end, dt) {
                let before = s.current().y.clone();
                match s.step(dt) {
                    Ok(level) => {
                        let diff: Vec<f64> =
                            level.y.iter().zip(&before).map(|(a, b)| a - b).collect();
                        reports.push(StepReport {
                            step: k + 1,
                            t: level.t,
                            dt,
                            lte: f64::NAN,
                            attempts: 1,
                            clamp: Clamp::Fixed,
                            ut_norm: sys.error_norm(&diff) / dt,
                        });
                        observe(level);
                    }
                    Err(e) => {
                        stop = Some(e);
                        break;
                    }
                }
            }
            s.current().clone()
        }
        StepperMode::Adaptive | StepperMode::Piecewise { .. } => {
            let mut s = AdaptiveStepper::new(sys, cfg.adaptive, cfg.scheme, 0.0, y0)?;
            observe(s.current());
            while s.time() < cfg.t_end * (1.0 - 1e-12) {
                let r = match cfg.stepper {
                    StepperMode::Piecewise {
                        dt_small,
                        dt_large,
                        t_switch,
                    } => {
                        let dt = if s.time() < t_switch - 1e-9 * dt_small {
                            dt_small
                        } else {
                            dt_large
                        };
                        s.advance_fixed(dt)
                    }
                    _ => s.advance(),
                };
                match r {
                    Ok(r) => {
                        reports.push(r);
                        observe(s.current());
                    }
                    Err(e) => {
                        stop = Some(e);
                        break;
                    }
                }
            }
            s.current().clone()
        }
    };

    let (blow_up, failure) = match stop {
        None => (None, None),
        Some(StepError::BlowUp { t }) => (Some(t), None),
        Some(e) if e.is_blow_up() => (Some(final_level.t), None),
        Some(e) => (None, Some(e.to_string())),
    };
    Ok(RunOutcome {
        reports,
        final_level,
        blow_up,
        failure,
    })
}

/// Builds the model for `cfg` and runs it without observation.
pub fn run_config(cfg: &RunConfig) -> Result<(Model, RunOutcome), ExperimentError> {
    let model = Model::build(&cfg.model, cfg.mesh.build()?)?;
    let out = simulate(&model, cfg, &mut |_| {})?;
    Ok((model, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use pnp_core::stepper::{AdaptiveConfig, Scheme};
    use pnp_core::MeshSpec;

    fn ode(stepper: StepperMode, t_end: f64) -> RunConfig {
        RunConfig {
            name: "ode".into(),
            model: ModelConfig::LinearOde {
                implicit_rate: -1.0,
                explicit_rate: 0.0,
            },
            mesh: MeshSpec::Uniform { n: 4 },
            stepper,
            scheme: Scheme::Vssbdf2,
            adaptive: AdaptiveConfig::default(),
            t_end,
            output_dir: None,
        }
    }

    #[test]
    fn step_count_tolerates_rounding() {
        assert_eq!(step_count(1.0, 0.1), 10);
        assert_eq!(step_count(1.0, 0.001 / 64.0), 64000);
        assert_eq!(step_count(1.0, 0.3), 4);
    }

    #[test]
    fn constant_run_lands_on_t_end() {
        let (_, out) = run_config(&ode(StepperMode::Constant { dt: 0.01 }, 1.0)).unwrap();
        assert!(out.completed());
        assert_eq!(out.reports.len(), 100);
        assert!((out.final_level.t - 1.0).abs() < 1e-12);
        assert!((out.final_level.y[0] - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn piecewise_switches_step() {
        let mode = StepperMode::Piecewise {
            dt_small: 0.01,
            dt_large: 0.1,
            t_switch: 0.5,
        };
        let (_, out) = run_config(&ode(mode, 1.0)).unwrap();
        let small = out.reports.iter().filter(|r| r.dt == 0.01).count();
        assert_eq!(small, 50);
        assert_eq!(out.reports.len(), 55);
        assert!(out.reports.iter().all(|r| r.lte.is_finite()));
    }

    #[test]
    fn explicit_instability_is_reported_as_blow_up() {
        let mut cfg = ode(StepperMode::Constant { dt: 1.0 }, 2000.0);
        cfg.model = ModelConfig::LinearOde {
            implicit_rate: 0.0,
            explicit_rate: -5.0,
        };
        let (_, out) = run_config(&cfg).unwrap();
        let t = out.blow_up.expect("blow-up");
        assert!(t > 1.0 && t < 2000.0);
    }
}
