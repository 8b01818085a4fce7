//! The scalar parabolic-elliptic model problem
//!
//! ```text
//! u_t = u_xx + (u v_x)_x,   v_xx = -u,   x in (0, 1)
//! v(0) = v_x(0),   v_x(1) = 0
//! ```
//!
//! with the flux `J = -u_x - u v_x` constrained at each end. Boundary
//! rows are either time stepped on half cells ("ghost point"), imposed
//! as an extrapolated flux equation ("direct"), or replaced by Dirichlet
//! data.

use serde::{Deserialize, Serialize};

use crate::error::{NumericsError, StepError};
use crate::linalg::{BorderedTriDiag, DenseMatrix, TriDiagMatrix};
use crate::mesh::Mesh;
use crate::spatial::{
    assemble_poisson, boundary_derivative_weights, boundary_first_derivative, conservative_rates,
    midpoint_fluxes, zero_flux_laplacian, EllipticBc, PoissonOperator, Side,
};
use crate::stepper::{ImexSystem, ImplicitSolve};

/// Prescribed boundary value of the flux `J = -u_x - u v_x`, as a
/// function of the boundary values of `u` and `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FluxConstraint {
    /// `0`.
    Zero,
    /// `-u e^v + e^{-v}`.
    Injection,
    /// `u - 1`.
    Relaxation,
    /// `v - offset`.
    PotentialOffset { offset: f64 },
    /// `u e^v - e^{-v}`.
    Extraction,
}

impl FluxConstraint {
    pub fn eval(self, u: f64, v: f64) -> f64 {
        match self {
            FluxConstraint::Zero => 0.0,
            FluxConstraint::Injection => -u * v.exp() + (-v).exp(),
            FluxConstraint::Relaxation => u - 1.0,
            FluxConstraint::PotentialOffset { offset } => v - offset,
            FluxConstraint::Extraction => u * v.exp() - (-v).exp(),
        }
    }
}

/// Dirichlet data for `u` at one end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirichletValue {
    Zero,
    /// `e^{-t}`, imposed exactly at the new time level.
    DecayingExp,
    /// `v - offset`, extrapolated like an explicit term.
    PotentialOffset {
        offset: f64,
    },
    /// `cos(u) - 1`, extrapolated like an explicit term.
    CosineFixedPoint,
}

impl DirichletValue {
    fn eval(self, u: f64, v: f64, t: f64) -> f64 {
        match self {
            DirichletValue::Zero => 0.0,
            DirichletValue::DecayingExp => (-t).exp(),
            DirichletValue::PotentialOffset { offset } => v - offset,
            DirichletValue::CosineFixedPoint => u.cos() - 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "treatment", rename_all = "snake_case")]
pub enum BoundaryTreatment {
    /// The PDE is stepped at the boundary node on a half cell, with the
    /// constraint supplying the outer flux.
    GhostPoint {
        constraint: FluxConstraint,
    },
    /// `-u_x^{n+1} = [u v_x + constraint]` extrapolated.
    Direct {
        constraint: FluxConstraint,
    },
    Dirichlet {
        value: DirichletValue,
    },
}

/// Named boundary configurations used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ToyVariant {
    /// Butler-Volmer-like fluxes, ghost-point rows.
    #[default]
    BvGhost,
    /// Butler-Volmer-like fluxes, direct rows.
    BvDirect,
    NoFluxGhost,
    NoFluxDirect,
    /// `u(0) = u(1) = 0`.
    HomogeneousDirichlet,
    /// `u(0) = 0`, `u(1) = v(1) - 1`.
    LinearCoupled,
    /// `u(0) = 0`, `u(1) = cos(u(1)) - 1`.
    NonlinearUncoupled,
    /// `u(0) = 0`, zero flux at `x = 1`.
    DirichletZeroFlux,
    /// `u(0) = 0`, flux `v(1) - 1/10` at `x = 1`.
    DirichletPotentialFlux,
    /// `u(0) = 0`, flux `u e^v - e^{-v}` at `x = 1`.
    DirichletExtractionFlux,
    /// `u(0) = 0`, `u(1) = e^{-t}`.
    TimeDependentDirichlet,
}

impl ToyVariant {
    pub const ALL: [ToyVariant; 11] = [
        ToyVariant::BvGhost,
        ToyVariant::BvDirect,
        ToyVariant::NoFluxGhost,
        ToyVariant::NoFluxDirect,
        ToyVariant::HomogeneousDirichlet,
        ToyVariant::LinearCoupled,
        ToyVariant::NonlinearUncoupled,
        ToyVariant::DirichletZeroFlux,
        ToyVariant::DirichletPotentialFlux,
        ToyVariant::DirichletExtractionFlux,
        ToyVariant::TimeDependentDirichlet,
    ];

    pub fn boundaries(self) -> (BoundaryTreatment, BoundaryTreatment) {
        use BoundaryTreatment::*;
        use FluxConstraint as C;
        let zero = Dirichlet {
            value: DirichletValue::Zero,
        };
        match self {
            ToyVariant::BvGhost => (
                GhostPoint {
                    constraint: C::Injection,
                },
                GhostPoint {
                    constraint: C::Relaxation,
                },
            ),
            ToyVariant::BvDirect => (
                Direct {
                    constraint: C::Injection,
                },
                Direct {
                    constraint: C::Relaxation,
                },
            ),
            ToyVariant::NoFluxGhost => (
                GhostPoint {
                    constraint: C::Zero,
                },
                GhostPoint {
                    constraint: C::Zero,
                },
            ),
            ToyVariant::NoFluxDirect => (
                Direct {
                    constraint: C::Zero,
                },
                Direct {
                    constraint: C::Zero,
                },
            ),
            ToyVariant::HomogeneousDirichlet => (zero, zero),
            ToyVariant::LinearCoupled => (
                zero,
                Dirichlet {
                    value: DirichletValue::PotentialOffset { offset: 1.0 },
                },
            ),
            ToyVariant::NonlinearUncoupled => (
                zero,
                Dirichlet {
                    value: DirichletValue::CosineFixedPoint,
                },
            ),
            ToyVariant::DirichletZeroFlux => (
                zero,
                GhostPoint {
                    constraint: C::Zero,
                },
            ),
            ToyVariant::DirichletPotentialFlux => (
                zero,
                GhostPoint {
                    constraint: C::PotentialOffset { offset: 0.1 },
                },
            ),
            ToyVariant::DirichletExtractionFlux => (
                zero,
                GhostPoint {
                    constraint: C::Extraction,
                },
            ),
            ToyVariant::TimeDependentDirichlet => (
                zero,
                Dirichlet {
                    value: DirichletValue::DecayingExp,
                },
            ),
        }
    }
}

/// The model problem on a fixed mesh. The evolved state is `u`; the
/// auxiliary field is `v`.
#[derive(Debug, Clone)]
pub struct ToyModel {
    mesh: Mesh,
    left: BoundaryTreatment,
    right: BoundaryTreatment,
    laplacian: TriDiagMatrix,
    poisson: PoissonOperator,
}

impl ToyModel {
    pub fn new(
        mesh: Mesh,
        left: BoundaryTreatment,
        right: BoundaryTreatment,
    ) -> Result<Self, NumericsError> {
        let poisson = assemble_poisson(
            &mesh,
            EllipticBc::Robin { a: 1.0, b: -1.0 },
            EllipticBc::Neumann,
        )?;
        let laplacian = zero_flux_laplacian(&mesh);
        Ok(ToyModel {
            mesh,
            left,
            right,
            laplacian,
            poisson,
        })
    }

    pub fn with_variant(mesh: Mesh, variant: ToyVariant) -> Result<Self, NumericsError> {
        let (l, r) = variant.boundaries();
        Self::new(mesh, l, r)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn boundaries(&self) -> (BoundaryTreatment, BoundaryTreatment) {
        (self.left, self.right)
    }

    /// `u(x, 0) = 1`, except that Dirichlet boundary nodes are made to
    /// satisfy their condition at `t = 0`. An inconsistent start would put
    /// an O(1) jump into the extrapolated explicit terms and cost an order.
    pub fn initial_state(&self) -> Vec<f64> {
        let n = self.mesh.len();
        let mut u = vec![1.0; n];
        let sides = [(self.left, 0), (self.right, n - 1)];
        for _ in 0..100 {
            let Ok(v) = self.potential(&u) else { break };
            let mut change: f64 = 0.0;
            for (b, k) in sides {
                if let BoundaryTreatment::Dirichlet { value } = b {
                    let new = value.eval(u[k], v[k], 0.0);
                    change = change.max((new - u[k]).abs());
                    u[k] = new;
                }
            }
            if change <= 1e-15 {
                break;
            }
        }
        u
    }

    /// Solves `v_xx = -u` with `v(0) = v_x(0)` and `v_x(1) = 0`.
    pub fn potential(&self, u: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let rhs: Vec<f64> = u.iter().map(|x| -x).collect();
        self.poisson.solve(&rhs, 0.0, 0.0)
    }

    fn is_evolved(b: BoundaryTreatment) -> bool {
        matches!(b, BoundaryTreatment::GhostPoint { .. })
    }

    /// Matrix of one implicit solve: `lead I - dt G` on evolved rows,
    /// the `-u_x` stencil on direct rows and identity on Dirichlet rows.
    pub fn solve_matrix(&self, lead: f64, dt: f64) -> BorderedTriDiag {
        let n = self.mesh.len();
        let g = &self.laplacian;
        let mut core = TriDiagMatrix::zeros(n);
        for i in 0..n {
            core.diag[i] = lead - dt * g.diag[i];
            if i + 1 < n {
                core.sup[i] = -dt * g.sup[i];
                core.sub[i] = -dt * g.sub[i];
            }
        }
        let mut top_fringe = 0.0;
        let mut bottom_fringe = 0.0;
        match self.left {
            BoundaryTreatment::GhostPoint { .. } => {}
            BoundaryTreatment::Direct { .. } => {
                let w = boundary_derivative_weights(&self.mesh, Side::Left);
                core.diag[0] = -w[0];
                core.sup[0] = -w[1];
                top_fringe = -w[2];
            }
            BoundaryTreatment::Dirichlet { .. } => {
                core.diag[0] = 1.0;
                core.sup[0] = 0.0;
            }
        }
        match self.right {
            BoundaryTreatment::GhostPoint { .. } => {}
            BoundaryTreatment::Direct { .. } => {
                let w = boundary_derivative_weights(&self.mesh, Side::Right);
                core.diag[n - 1] = -w[0];
                core.sub[n - 2] = -w[1];
                bottom_fringe = -w[2];
            }
            BoundaryTreatment::Dirichlet { .. } => {
                core.diag[n - 1] = 1.0;
                core.sub[n - 2] = 0.0;
            }
        }
        BorderedTriDiag {
            core,
            top_fringe,
            bottom_fringe,
        }
    }

    fn boundary_explicit(
        &self,
        b: BoundaryTreatment,
        side: Side,
        u: &[f64],
        v: &[f64],
        t: f64,
        rates: &[f64],
    ) -> f64 {
        let n = self.mesh.len();
        let k = match side {
            Side::Left => 0,
            Side::Right => n - 1,
        };
        match b {
            BoundaryTreatment::GhostPoint { .. } => rates[k],
            BoundaryTreatment::Direct { constraint } => {
                let vx = boundary_first_derivative(&self.mesh, v, side);
                u[k] * vx + constraint.eval(u[k], v[k])
            }
            BoundaryTreatment::Dirichlet { value } => value.eval(u[k], v[k], t),
        }
    }

    fn ghost_flux(b: BoundaryTreatment, u: f64, v: f64) -> f64 {
        match b {
            BoundaryTreatment::GhostPoint { constraint } => constraint.eval(u, v),
            _ => 0.0,
        }
    }
}

impl ImexSystem for ToyModel {
    fn dim(&self) -> usize {
        self.mesh.len()
    }

    fn elliptic(&self, y: &[f64], t: f64) -> Result<Vec<f64>, StepError> {
        self.potential(y).map_err(|e| StepError::numerics(t, e))
    }

    fn explicit(&self, u: &[f64], v: &[f64], t: f64) -> Result<Vec<f64>, StepError> {
        let n = self.mesh.len();
        // Advective part of the flux, -u v_x, at midpoints.
        let faces = midpoint_fluxes(&self.mesh, v, |_, vx, i| -0.5 * (u[i] + u[i + 1]) * vx);
        let jl = Self::ghost_flux(self.left, u[0], v[0]);
        let jr = Self::ghost_flux(self.right, u[n - 1], v[n - 1]);
        let mut rates = conservative_rates(&self.mesh, &faces, jl, jr);
        rates[0] = self.boundary_explicit(self.left, Side::Left, u, v, t, &rates);
        rates[n - 1] = self.boundary_explicit(self.right, Side::Right, u, v, t, &rates);
        Ok(rates)
    }

    fn solve_implicit(&self, req: &ImplicitSolve<'_>) -> Result<Vec<f64>, StepError> {
        let n = self.mesh.len();
        let m = self.solve_matrix(req.lead, req.dt);
        let mut rhs: Vec<f64> = req
            .history
            .iter()
            .zip(req.explicit)
            .map(|(h, f)| h + req.dt * f)
            .collect();
        for (b, k) in [(self.left, 0), (self.right, n - 1)] {
            match b {
                BoundaryTreatment::GhostPoint { .. } => {}
                BoundaryTreatment::Direct { .. } => rhs[k] = req.explicit[k],
                BoundaryTreatment::Dirichlet { value } => {
                    rhs[k] = match value {
                        DirichletValue::DecayingExp => (-req.t_new).exp(),
                        _ => req.explicit[k],
                    }
                }
            }
        }
        m.solve(&rhs).map_err(|e| StepError::numerics(req.t_new, e))
    }

    fn apply_implicit(&self, y: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        if Self::is_evolved(self.left) && Self::is_evolved(self.right) {
            Ok(self.laplacian.matvec(y))
        } else {
            Err(StepError::Unsupported(
                "explicit stepping needs ghost-point rows at both ends".into(),
            ))
        }
    }

    fn implicit_matrix(&self) -> Option<DenseMatrix> {
        if Self::is_evolved(self.left) && Self::is_evolved(self.right) {
            Some(self.laplacian.to_dense())
        } else {
            None
        }
    }
}
