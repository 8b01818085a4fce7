use crate::error::StepError;
use crate::linalg::DenseMatrix;
use crate::spatial::l2_norm;

/// One linear solve of an implicit-explicit step.
///
/// On evolution rows the system must solve
/// `lead * y - dt * G y = history + dt * explicit`, where `G` is its
/// linear stiff operator. Rows that are algebraic (boundary constraints)
/// are free to interpret `explicit` as the extrapolated right-hand side
/// of their constraint and to ignore `history`.
#[derive(Debug, Clone, Copy)]
pub struct ImplicitSolve<'a> {
    pub lead: f64,
    pub dt: f64,
    pub history: &'a [f64],
    pub explicit: &'a [f64],
    /// Time level of the unknown.
    pub t_new: f64,
}

/// A semi-discrete system `y' = f(y, aux, t) + G y` whose auxiliary
/// (elliptic) fields are a function of the same-level state.
pub trait ImexSystem {
    /// Number of evolved unknowns.
    fn dim(&self) -> usize;

    /// Recomputes the auxiliary fields for state `y` at time `t`.
    fn elliptic(&self, y: &[f64], t: f64) -> Result<Vec<f64>, StepError>;

    /// Nonlinear part, treated explicitly and extrapolated.
    fn explicit(&self, y: &[f64], aux: &[f64], t: f64) -> Result<Vec<f64>, StepError>;

    fn solve_implicit(&self, req: &ImplicitSolve<'_>) -> Result<Vec<f64>, StepError>;

    /// `G y`, needed only by fully explicit schemes.
    fn apply_implicit(&self, _y: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        Err(StepError::Unsupported(
            "system does not expose its implicit operator".into(),
        ))
    }

    /// Dense copy of `G` for stability diagnostics.
    fn implicit_matrix(&self) -> Option<DenseMatrix> {
        None
    }

    /// Norm used by the error estimator. Auxiliary fields never enter it.
    fn error_norm(&self, d: &[f64]) -> f64 {
        l2_norm(d)
    }
}

/// A state together with its same-level auxiliary fields and explicit
/// term.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub t: f64,
    pub y: Vec<f64>,
    pub aux: Vec<f64>,
    pub f: Vec<f64>,
}

pub(crate) fn ensure_finite(v: &[f64], t: f64) -> Result<(), StepError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(StepError::BlowUp { t })
    }
}

impl Level {
    /// Runs the elliptic update for `y` and evaluates the explicit term
    /// with it.
    pub fn new(sys: &dyn ImexSystem, t: f64, y: Vec<f64>) -> Result<Self, StepError> {
        ensure_finite(&y, t)?;
        let aux = sys.elliptic(&y, t)?;
        ensure_finite(&aux, t)?;
        let f = sys.explicit(&y, &aux, t)?;
        ensure_finite(&f, t)?;
        Ok(Level { t, y, aux, f })
    }

    /// Like [`Level::new`] but evaluates the explicit term with auxiliary
    /// fields from another level. Only used to demonstrate what goes
    /// wrong when the elliptic field is paired with the wrong time level.
    pub fn with_lagged_aux(
        sys: &dyn ImexSystem,
        t: f64,
        y: Vec<f64>,
        lagged_aux: &[f64],
    ) -> Result<Self, StepError> {
        ensure_finite(&y, t)?;
        let aux = sys.elliptic(&y, t)?;
        ensure_finite(&aux, t)?;
        let f = sys.explicit(&y, lagged_aux, t)?;
        ensure_finite(&f, t)?;
        Ok(Level { t, y, aux, f })
    }
}
