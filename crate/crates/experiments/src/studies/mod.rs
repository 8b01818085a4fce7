//! Parameter studies built on [`crate::simulate`].

pub mod adaptive;
pub mod convergence;
pub mod profiles;
pub mod scaling;
pub mod stability;
pub mod voltage;
