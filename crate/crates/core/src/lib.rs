//! Adaptive semi-implicit BDF2 time stepping for one-dimensional
//! parabolic-elliptic systems.
//!
//! The crate provides nonuniform meshes ([`mesh`]), banded solvers and a
//! small eigenvalue wrapper ([`linalg`]), conservative finite-difference
//! operators ([`spatial`]), the time integrators and error controller
//! ([`stepper`]), two model systems ([`toy`] and [`pnp`]), a heat-equation
//! control problem ([`diffusion`]), a scalar test equation ([`ode`]) and
//! amplification-root diagnostics ([`stability`]).

// Validation is written as `!(x > 0.0)` so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod ode;
pub mod pnp;
pub mod spatial;
pub mod stability;
pub mod stepper;
pub mod toy;

pub use error::{NumericsError, StepError};
pub use mesh::{Mesh, MeshSpec};
