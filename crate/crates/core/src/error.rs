use thiserror::Error;

/// Errors raised by mesh construction and the linear algebra kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular matrix: pivot {pivot:e} at row {row}")]
    SingularMatrix { row: usize, pivot: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// Errors raised while advancing a time-dependent system.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    /// A non-finite value appeared in the state. `t` is the time level
    /// at which it was first observed.
    #[error("blow-up: non-finite state at t = {t}")]
    BlowUp { t: f64 },
    #[error("step failure at t = {t}: {source}")]
    Numerics {
        t: f64,
        #[source]
        source: NumericsError,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl StepError {
    pub fn numerics(t: f64, source: NumericsError) -> Self {
        StepError::Numerics { t, source }
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self, StepError::BlowUp { .. })
    }
}
