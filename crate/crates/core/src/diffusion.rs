//! The heat equation `u_t = u_xx` with homogeneous Dirichlet data, used as
//! a control problem for the adaptive stepper. Only interior nodes are
//! evolved.

use crate::error::{NumericsError, StepError};
use crate::linalg::{solve_tridiag, DenseMatrix, TriDiagMatrix};
use crate::mesh::Mesh;
use crate::spatial::laplacian_row;
use crate::stepper::{ImexSystem, ImplicitSolve};

#[derive(Debug, Clone)]
pub struct DiffusionModel {
    mesh: Mesh,
    laplacian: TriDiagMatrix,
}

impl DiffusionModel {
    pub fn new(mesh: Mesh) -> Result<Self, NumericsError> {
        let m = mesh.len() - 2;
        let mut lap = TriDiagMatrix::zeros(m);
        for k in 0..m {
            let (lo, c, up) = laplacian_row(&mesh, k + 1);
            lap.diag[k] = c;
            if k > 0 {
                lap.sub[k - 1] = lo;
            }
            if k + 1 < m {
                lap.sup[k] = up;
            }
        }
        Ok(DiffusionModel {
            mesh,
            laplacian: lap,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// `sin(pi x)` at the interior nodes.
    pub fn sine_initial_state(&self) -> Vec<f64> {
        let n = self.mesh.len();
        self.mesh.nodes()[1..n - 1]
            .iter()
            .map(|x| (std::f64::consts::PI * x).sin())
            .collect()
    }
}

impl ImexSystem for DiffusionModel {
    fn dim(&self) -> usize {
        self.laplacian.len()
    }

    fn elliptic(&self, _y: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        Ok(Vec::new())
    }

    fn explicit(&self, y: &[f64], _aux: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        Ok(vec![0.0; y.len()])
    }

    fn solve_implicit(&self, req: &ImplicitSolve<'_>) -> Result<Vec<f64>, StepError> {
        let g = &self.laplacian;
        let m = TriDiagMatrix {
            sub: g.sub.iter().map(|a| -req.dt * a).collect(),
            diag: g.diag.iter().map(|a| req.lead - req.dt * a).collect(),
            sup: g.sup.iter().map(|a| -req.dt * a).collect(),
        };
        let rhs: Vec<f64> = req
            .history
            .iter()
            .zip(req.explicit)
            .map(|(h, f)| h + req.dt * f)
            .collect();
        solve_tridiag(&m, &rhs).map_err(|e| StepError::numerics(req.t_new, e))
    }

    fn apply_implicit(&self, y: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        Ok(self.laplacian.matvec(y))
    }

    fn implicit_matrix(&self) -> Option<DenseMatrix> {
        Some(self.laplacian.to_dense())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;

    #[test]
    fn eigenvalues_match_closed_form() {
        let n = 40;
        let model = DiffusionModel::new(Mesh::uniform(n).unwrap()).unwrap();
        let h = 1.0 / (n as f64 - 1.0);
        let mut ev: Vec<f64> = eigenvalues(&model.implicit_matrix().unwrap())
            .unwrap()
            .iter()
            .map(|z| z.re)
            .collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (k, l) in ev.iter().enumerate() {
            let theta = (k as f64 + 1.0) * std::f64::consts::PI * h;
            let exact = -2.0 * (1.0 - theta.cos()) / (h * h);
            assert!((l - exact).abs() < 1e-8 * exact.abs());
        }
    }
}
