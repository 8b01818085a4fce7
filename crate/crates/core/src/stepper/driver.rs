//! Time-stepping drivers: the adaptive coarse/fine controller and a plain
//! constant-step integrator.

use serde::{Deserialize, Serialize};

use super::control::{
    extrapolate, lte_vector, one_step_extrapolate, one_step_lte_vector, propose_dt, AdaptiveConfig,
};
use super::schemes::{forward_euler_solve, imex_euler_solve, vssbdf2_solve};
use super::system::{ImexSystem, Level};
use crate::error::{NumericsError, StepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Variable-step semi-implicit BDF2, started with one IMEX Euler step.
    #[default]
    Vssbdf2,
    /// One-step IMEX Euler throughout.
    ImexEuler,
    /// Fully explicit Euler; requires [`ImexSystem::apply_implicit`].
    ForwardEuler,
}

impl Scheme {
    fn is_two_step(self) -> bool {
        matches!(self, Scheme::Vssbdf2)
    }
}

/// How an accepted step size was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clamp {
    /// Error inside the band.
    None,
    /// Proposal exceeded `dt_max`.
    DtMax,
    /// Proposal fell below `dt_min`.
    DtMin,
    /// `i_max` attempts with too large an error; forced to `dt_min`.
    ForcedMin,
    /// `i_max` attempts with too small an error; last attempt kept.
    Exhausted,
    /// Growth capped at `omega_max * dt_old`.
    GrowthCap,
    /// Step size imposed by the caller.
    Fixed,
}

impl Clamp {
    pub fn as_str(self) -> &'static str {
        match self {
            Clamp::None => "none",
            Clamp::DtMax => "dt_max",
            Clamp::DtMin => "dt_min",
            Clamp::ForcedMin => "forced_min",
            Clamp::Exhausted => "exhausted",
            Clamp::GrowthCap => "growth_cap",
            Clamp::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    /// 1-based index of the accepted step.
    pub step: usize,
    /// Time reached by the step.
    pub t: f64,
    pub dt: f64,
    /// Estimated local truncation error of the coarse candidate.
    pub lte: f64,
    pub attempts: usize,
    pub clamp: Clamp,
    /// `||u^{n+1} - u^n|| / dt`.
    pub ut_norm: f64,
}

/// Rolling window needed by the two-step scheme and its estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct StepperHistory {
    /// `u^{n-1}`; absent before the first step.
    pub prev: Option<Level>,
    /// Fine half-step value `u_f^{n-1/2}`; absent before the first step.
    pub half: Option<Level>,
    pub now: Level,
    /// Previous step size (the initial guess before the first step).
    pub dt_old: f64,
}

struct Trial {
    dt: f64,
    coarse: Vec<f64>,
    fine: Vec<f64>,
    half: Level,
    lte: f64,
    two_step: bool,
}

/// Adaptive integrator with coarse/fine error control.
///
/// Each attempt takes one coarse step of size `dt` and two fine steps of
/// size `dt/2`, estimates the coarse error from their difference and, on
/// acceptance, advances with the extrapolated combination. The fine
/// half-step value is kept for the next fine step.
pub struct AdaptiveStepper<'a> {
    sys: &'a dyn ImexSystem,
    cfg: AdaptiveConfig,
    scheme: Scheme,
    hist: StepperHistory,
    steps: usize,
}

impl<'a> AdaptiveStepper<'a> {
    pub fn new(
        sys: &'a dyn ImexSystem,
        cfg: AdaptiveConfig,
        scheme: Scheme,
        t0: f64,
        y0: Vec<f64>,
    ) -> Result<Self, StepError> {
        cfg.validate().map_err(|e| StepError::numerics(t0, e))?;
        if y0.len() != sys.dim() {
            return Err(StepError::numerics(
                t0,
                NumericsError::InvalidArgument(format!(
                    "initial state has {} entries, system has {}",
                    y0.len(),
                    sys.dim()
                )),
            ));
        }
        let now = Level::new(sys, t0, y0)?;
        Ok(AdaptiveStepper {
            sys,
            cfg,
            scheme,
            hist: StepperHistory {
                prev: None,
                half: None,
                now,
                dt_old: cfg.dt_init,
            },
            steps: 0,
        })
    }

    pub fn config(&self) -> &AdaptiveConfig {
        &self.cfg
    }

    pub fn history(&self) -> &StepperHistory {
        &self.hist
    }

    pub fn current(&self) -> &Level {
        &self.hist.now
    }

    pub fn time(&self) -> f64 {
        self.hist.now.t
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    fn solve_one_step(&self, from: &Level, dt: f64) -> Result<Vec<f64>, StepError> {
        match self.scheme {
            Scheme::ForwardEuler => forward_euler_solve(self.sys, from, dt),
            _ => imex_euler_solve(self.sys, from, dt),
        }
    }

    fn trial(&self, dt: f64) -> Result<Trial, StepError> {
        let now = &self.hist.now;
        match (&self.hist.prev, &self.hist.half) {
            (Some(prev), Some(half_prev)) if self.scheme.is_two_step() => {
                let dt_old = self.hist.dt_old;
                let coarse = vssbdf2_solve(self.sys, prev, now, dt_old, dt)?;
                let half_y = vssbdf2_solve(self.sys, half_prev, now, 0.5 * dt_old, 0.5 * dt)?;
                let half = Level::new(self.sys, now.t + 0.5 * dt, half_y)?;
                let fine = vssbdf2_solve(self.sys, now, &half, 0.5 * dt, 0.5 * dt)?;
                let lte = self.sys.error_norm(&lte_vector(&coarse, &fine, dt, dt_old));
                Ok(Trial {
                    dt,
                    coarse,
                    fine,
                    half,
                    lte,
                    two_step: true,
                })
            }
            _ => {
                let coarse = self.solve_one_step(now, dt)?;
                let half_y = self.solve_one_step(now, 0.5 * dt)?;
                let half = Level::new(self.sys, now.t + 0.5 * dt, half_y)?;
                let fine = self.solve_one_step(&half, 0.5 * dt)?;
                let lte = self.sys.error_norm(&one_step_lte_vector(&coarse, &fine));
                Ok(Trial {
                    dt,
                    coarse,
                    fine,
                    half,
                    lte,
                    two_step: false,
                })
            }
        }
    }

    fn order(&self, two_step: bool) -> u32 {
        if two_step {
            self.cfg.order
        } else {
            2
        }
    }

    fn accept(
        &mut self,
        trial: Trial,
        attempts: usize,
        clamp: Clamp,
    ) -> Result<StepReport, StepError> {
        let y = if trial.two_step {
            extrapolate(&trial.coarse, &trial.fine, trial.dt, self.hist.dt_old)
        } else {
            one_step_extrapolate(&trial.coarse, &trial.fine)
        };
        let t_new = self.hist.now.t + trial.dt;
        let next = Level::new(self.sys, t_new, y)?;
        let diff: Vec<f64> = next
            .y
            .iter()
            .zip(&self.hist.now.y)
            .map(|(a, b)| a - b)
            .collect();
        let ut_norm = self.sys.error_norm(&diff) / trial.dt;
        let half = if trial.two_step || !self.scheme.is_two_step() {
            trial.half
        } else {
            self.corrected_start_half(&trial)?
        };
        let prev = std::mem::replace(&mut self.hist.now, next);
        self.hist.prev = Some(prev);
        self.hist.half = Some(half);
        self.hist.dt_old = trial.dt;
        self.steps += 1;
        Ok(StepReport {
            step: self.steps,
            t: t_new,
            dt: trial.dt,
            lte: trial.lte,
            attempts,
            clamp,
            ut_norm,
        })
    }

    /// The half-step value left by a one-step start is only first-order
    /// accurate, and feeding it into the next fine step costs the
    /// extrapolated solution an order for the whole run. Two quarter steps
    /// give a Richardson-corrected value instead.
    fn corrected_start_half(&self, trial: &Trial) -> Result<Level, StepError> {
        let now = &self.hist.now;
        let q = 0.25 * trial.dt;
        let first = self.solve_one_step(now, q)?;
        let first = Level::new(self.sys, now.t + q, first)?;
        let quarter = self.solve_one_step(&first, q)?;
        let y = one_step_extrapolate(&trial.half.y, &quarter);
        Level::new(self.sys, trial.half.t, y)
    }

    /// Takes one accepted step chosen by the error controller.
    pub fn advance(&mut self) -> Result<StepReport, StepError> {
        let cfg = self.cfg;
        let dt_old = self.hist.dt_old;
        let growth_cap = cfg.omega_max * dt_old;
        let mut dt = dt_old.clamp(cfg.dt_min, cfg.dt_max);
        let mut attempts = 0;
        loop {
            attempts += 1;
            let trial = self.trial(dt)?;
            let lte = trial.lte;
            if cfg.accepts(lte) {
                return self.accept(trial, attempts, Clamp::None);
            }
            if attempts >= cfg.i_max {
                if lte >= cfg.tol + cfg.range {
                    if dt == cfg.dt_min {
                        return self.accept(trial, attempts, Clamp::ForcedMin);
                    }
                    let forced = self.trial(cfg.dt_min)?;
                    return self.accept(forced, attempts + 1, Clamp::ForcedMin);
                }
                return self.accept(trial, attempts, Clamp::Exhausted);
            }
            let proposal = propose_dt(
                dt,
                lte,
                cfg.tol,
                self.order(trial.two_step),
                cfg.eta_min,
                cfg.eta_max,
            );
            let clamped = if proposal > cfg.dt_max {
                Some((cfg.dt_max.min(growth_cap), Clamp::DtMax))
            } else if proposal > growth_cap {
                Some((growth_cap, Clamp::GrowthCap))
            } else if proposal < cfg.dt_min {
                Some((cfg.dt_min, Clamp::DtMin))
            } else {
                None
            };
            match clamped {
                Some((target, kind)) if target == dt => {
                    return self.accept(trial, attempts, kind);
                }
                Some((target, kind)) => {
                    let t = self.trial(target)?;
                    return self.accept(t, attempts + 1, kind);
                }
                None => dt = proposal,
            }
        }
    }

    /// Takes one step of the given size through the same coarse/fine
    /// machinery, without error control.
    pub fn advance_fixed(&mut self, dt: f64) -> Result<StepReport, StepError> {
        let trial = self.trial(dt)?;
        self.accept(trial, 1, Clamp::Fixed)
    }

    /// Steps until `t >= t_end`, collecting reports. The last step is not
    /// shortened to land on `t_end`.
    pub fn run_until(
        &mut self,
        t_end: f64,
    ) -> Result<Vec<StepReport>, (Vec<StepReport>, StepError)> {
        let mut out = Vec::new();
        while self.time() < t_end {
            match self.advance() {
                Ok(r) => out.push(r),
                Err(e) => return Err((out, e)),
            }
        }
        Ok(out)
    }
}

/// Constant-step integrator without error control: IMEX Euler for the
/// first step, then the two-step formula with the actual step ratio.
pub struct ConstantStepper<'a> {
    sys: &'a dyn ImexSystem,
    scheme: Scheme,
    prev: Option<Level>,
    now: Level,
    dt_old: f64,
    lagged_elliptic: bool,
}

impl<'a> ConstantStepper<'a> {
    pub fn new(
        sys: &'a dyn ImexSystem,
        scheme: Scheme,
        t0: f64,
        y0: Vec<f64>,
    ) -> Result<Self, StepError> {
        let now = Level::new(sys, t0, y0)?;
        Ok(ConstantStepper {
            sys,
            scheme,
            prev: None,
            now,
            dt_old: 0.0,
            lagged_elliptic: false,
        })
    }

    /// Evaluates the explicit term of every new level with the previous
    /// level's elliptic field. This deliberately mismatches time levels;
    /// it exists to show the resulting loss of one order of accuracy.
    pub fn with_lagged_elliptic(mut self) -> Self {
        self.lagged_elliptic = true;
        self
    }

    pub fn current(&self) -> &Level {
        &self.now
    }

    pub fn time(&self) -> f64 {
        self.now.t
    }

    pub fn step(&mut self, dt: f64) -> Result<&Level, StepError> {
        let y = match (&self.prev, self.scheme) {
            (Some(prev), Scheme::Vssbdf2) => {
                vssbdf2_solve(self.sys, prev, &self.now, self.dt_old, dt)?
            }
            (_, Scheme::ForwardEuler) => forward_euler_solve(self.sys, &self.now, dt)?,
            _ => imex_euler_solve(self.sys, &self.now, dt)?,
        };
        let t_new = self.now.t + dt;
        let next = if self.lagged_elliptic {
            Level::with_lagged_aux(self.sys, t_new, y, &self.now.aux)?
        } else {
            Level::new(self.sys, t_new, y)?
        };
        self.prev = Some(std::mem::replace(&mut self.now, next));
        self.dt_old = dt;
        Ok(&self.now)
    }

    /// Takes `steps` steps of size `dt`.
    pub fn run(&mut self, dt: f64, steps: usize) -> Result<&Level, StepError> {
        for _ in 0..steps {
            self.step(dt)?;
        }
        Ok(&self.now)
    }
}
