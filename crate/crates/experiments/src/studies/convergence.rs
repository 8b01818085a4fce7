//! Constant-step self-convergence: solutions on a halving dt ladder are
//! compared at the final time.

use pnp_core::spatial::l2_norm;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, StepperMode};
use crate::error::ExperimentError;
use crate::simulate::run_config;

#[derive(Debug, Clone, Serialize)]
pub struct Rung {
    pub dt: f64,
    pub steps: usize,
    pub completed: bool,
    pub blow_up: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rungs: Vec<Rung>,
    /// `||u_i - u_{i+1}||` at the final time; `None` where either run
    /// failed.
    pub differences: Vec<Option<f64>>,
    /// `d_i / d_{i+1}`, one per reported row.
    pub ratios: Vec<Option<f64>>,
}

impl ConvergenceReport {
    /// All ratios, or `None` if any is missing.
    pub fn complete_ratios(&self) -> Option<Vec<f64>> {
        self.ratios.iter().copied().collect()
    }
}

/// Runs `base` with constant steps `dt0 / 2^k` for `k = 0..=halvings`.
/// Runs execute in parallel.
pub fn run_convergence(
    base: &RunConfig,
    dt0: f64,
    halvings: usize,
) -> Result<ConvergenceReport, ExperimentError> {
    if halvings < 2 {
        return Err(ExperimentError::Config(
            "a convergence ladder needs at least two halvings".into(),
        ));
    }
    let configs: Vec<RunConfig> = (0..=halvings)
        .map(|k| {
            let mut c = base.clone();
            c.stepper = StepperMode::Constant {
                dt: dt0 / f64::powi(2.0, k as i32),
            };
            c.validate().map(|_| c)
        })
        .collect::<Result<_, _>>()?;

    let results: Vec<_> = configs
        .par_iter()
        .map(|c| run_config(c).map(|(_, out)| out))
        .collect::<Result<_, _>>()?;

    let rungs = configs
        .iter()
        .zip(&results)
        .map(|(c, out)| Rung {
            dt: match c.stepper {
                StepperMode::Constant { dt } => dt,
                _ => unreachable!(),
            },
            steps: out.reports.len(),
            completed: out.completed(),
            blow_up: out.blow_up,
            failure: out.failure.clone(),
        })
        .collect();

    let differences: Vec<Option<f64>> = results
        .windows(2)
        .map(|w| {
            (w[0].completed() && w[1].completed()).then(|| {
                let d: Vec<f64> = w[0]
                    .final_level
                    .y
                    .iter()
                    .zip(&w[1].final_level.y)
                    .map(|(a, b)| a - b)
                    .collect();
                l2_norm(&d)
            })
        })
        .collect();
    let ratios = differences
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        })
        .collect();
    Ok(ConvergenceReport {
        rungs,
        differences,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use pnp_core::stepper::{AdaptiveConfig, Scheme};
    use pnp_core::MeshSpec;

    fn ode(scheme: Scheme) -> RunConfig {
        RunConfig {
            name: "ode".into(),
            model: ModelConfig::LinearOde {
                implicit_rate: -0.5,
                explicit_rate: -0.5,
            },
            mesh: MeshSpec::Uniform { n: 4 },
            stepper: StepperMode::Constant { dt: 0.1 },
            scheme,
            adaptive: AdaptiveConfig::default(),
            t_end: 1.0,
            output_dir: None,
        }
    }

    #[test]
    fn ladder_shape_and_orders() {
        let r = run_convergence(&ode(Scheme::Vssbdf2), 0.02, 4).unwrap();
        assert_eq!(r.rungs.len(), 5);
        assert_eq!(r.differences.len(), 4);
        let ratios = r.complete_ratios().unwrap();
        assert_eq!(ratios.len(), 3);
        assert!(ratios.iter().all(|q| (q - 4.0).abs() < 0.3), "{ratios:?}");
        // An even split would make IMEX Euler the trapezoidal rule.
        let mut c = ode(Scheme::ImexEuler);
        c.model = ModelConfig::LinearOde {
            implicit_rate: -0.7,
            explicit_rate: -0.3,
        };
        let r = run_convergence(&c, 0.02, 3).unwrap();
        let ratios = r.complete_ratios().unwrap();
        assert!(ratios.iter().all(|q| (q - 2.0).abs() < 0.2), "{ratios:?}");
    }

    #[test]
    fn failed_rungs_leave_gaps() {
        let mut c = ode(Scheme::Vssbdf2);
        c.model = ModelConfig::LinearOde {
            implicit_rate: 0.0,
            explicit_rate: -30.0,
        };
        c.t_end = 200.0;
        let r = run_convergence(&c, 0.2, 3).unwrap();
        assert!(!r.rungs[0].completed);
        assert!(r.differences[0].is_none());
        assert!(r.ratios[0].is_none());
        assert!(r.complete_ratios().is_none());
    }

    #[test]
    fn short_ladders_are_rejected() {
        assert!(run_convergence(&ode(Scheme::Vssbdf2), 0.1, 1).is_err());
    }
}
