//! Componentwise linear test equation `u' = a u + b u`, with `a u`
//! treated implicitly and `b u` explicitly. Useful for checking orders
//! of accuracy against `u(t) = u(0) e^{(a+b)t}`.

use crate::error::StepError;
use crate::linalg::DenseMatrix;
use crate::stepper::{ImexSystem, ImplicitSolve};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOde {
    /// Rate handled implicitly.
    pub implicit_rate: f64,
    /// Rate handled explicitly.
    pub explicit_rate: f64,
    pub dim: usize,
}

impl LinearOde {
    /// `u' = lambda u`, fully implicit.
    pub fn implicit(lambda: f64) -> Self {
        LinearOde {
            implicit_rate: lambda,
            explicit_rate: 0.0,
            dim: 1,
        }
    }

    pub fn exact(&self, u0: f64, t: f64) -> f64 {
        u0 * ((self.implicit_rate + self.explicit_rate) * t).exp()
    }
}

impl ImexSystem for LinearOde {
    fn dim(&self) -> usize {
        self.dim
    }

    fn elliptic(&self, _y: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        Ok(Vec::new())
    }

    fn explicit(&self, y: &[f64], _aux: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        Ok(y.iter().map(|u| self.explicit_rate * u).collect())
    }

    fn solve_implicit(&self, req: &ImplicitSolve<'_>) -> Result<Vec<f64>, StepError> {
        let den = req.lead - req.dt * self.implicit_rate;
        Ok(req
            .history
            .iter()
            .zip(req.explicit)
            .map(|(h, f)| (h + req.dt * f) / den)
            .collect())
    }

    fn apply_implicit(&self, y: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        Ok(y.iter().map(|u| self.implicit_rate * u).collect())
    }

    fn implicit_matrix(&self) -> Option<DenseMatrix> {
        Some(DenseMatrix::from_diagonal(&vec![
            self.implicit_rate;
            self.dim
        ]))
    }
}
