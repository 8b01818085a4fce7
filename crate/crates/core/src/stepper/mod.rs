//! Semi-implicit variable-step BDF2 time stepping with coarse/fine error
//! control.
//!
//! Systems implement [`ImexSystem`]: an explicit nonlinear part that is
//! extrapolated from the two previous levels, a linear stiff part solved
//! implicitly, and an elliptic update that recomputes auxiliary fields
//! (such as a potential) from the evolved state. Every [`Level`] carries
//! the auxiliary fields computed from its own state, so the explicit term
//! at level `n` always sees the level-`n` elliptic solution.

mod control;
mod driver;
mod schemes;
mod system;

pub use control::{
    estimate_lte, extrapolate, extrapolation_weights, lte_factor, lte_vector, one_step_extrapolate,
    one_step_lte_vector, propose_dt, AdaptiveConfig, ZERO_STABILITY_RATIO,
};
pub use driver::{AdaptiveStepper, Clamp, ConstantStepper, Scheme, StepReport, StepperHistory};
pub use schemes::{
    forward_euler_solve, forward_euler_step, imex_euler_solve, imex_euler_step, vssbdf2_solve,
    vssbdf2_step, Bdf2Coefficients,
};
pub use system::{ImexSystem, ImplicitSolve, Level};
