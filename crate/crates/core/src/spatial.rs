//! Finite-difference building blocks on a [`Mesh`]: midpoint fluxes and
//! their conservative divergence, one-sided boundary derivatives, and the
//! elliptic (Poisson) solve with Robin or Neumann data.

use crate::error::NumericsError;
use crate::linalg::{BorderedTriDiag, TriDiagMatrix};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Evaluates a flux `J(u_mid, u_x_mid, i)` at every midpoint
/// `x_{i+1/2}`, using `u_mid = (u_i + u_{i+1})/2` and the two-point
/// derivative `(u_{i+1} - u_i)/dx_i`.
pub fn midpoint_fluxes<F>(mesh: &Mesh, u: &[f64], mut flux: F) -> Vec<f64>
where
    F: FnMut(f64, f64, usize) -> f64,
{
    assert_eq!(u.len(), mesh.len());
    mesh.spacings()
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let mid = 0.5 * (u[i] + u[i + 1]);
            let ux = (u[i + 1] - u[i]) / h;
            flux(mid, ux, i)
        })
        .collect()
}

/// `(J_{i+1/2} - J_{i-1/2}) / (x_{i+1/2} - x_{i-1/2})` at interior nodes
/// `i = 1..N-2`. This approximates `J_x`; a continuity equation
/// `u_t = -J_x` negates it.
pub fn flux_divergence_interior(mesh: &Mesh, fluxes: &[f64]) -> Vec<f64> {
    let n = mesh.len();
    assert_eq!(fluxes.len(), n - 1);
    let mids = mesh.midpoints();
    (1..n - 1)
        .map(|i| (fluxes[i] - fluxes[i - 1]) / (mids[i] - mids[i - 1]))
        .collect()
}

/// Weights `[w0, w1, w2]` of the three-node one-sided first derivative.
///
/// On the left, `u_x(0) ~ w0 u_1 + w1 u_2 + w2 u_3`; on the right,
/// `u_x(1) ~ w0 u_N + w1 u_{N-1} + w2 u_{N-2}`. Both are exact for
/// quadratics.
pub fn boundary_derivative_weights(mesh: &Mesh, side: Side) -> [f64; 3] {
    let n = mesh.len();
    let (h1, h2) = match side {
        Side::Left => (mesh.dx(0), mesh.dx(1)),
        Side::Right => (mesh.dx(n - 2), mesh.dx(n - 3)),
    };
    let w = [
        -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
        (h1 + h2) / (h1 * h2),
        -h1 / (h2 * (h1 + h2)),
    ];
    match side {
        Side::Left => w,
        Side::Right => [-w[0], -w[1], -w[2]],
    }
}

pub fn boundary_first_derivative(mesh: &Mesh, u: &[f64], side: Side) -> f64 {
    let n = mesh.len();
    assert_eq!(u.len(), n);
    let w = boundary_derivative_weights(mesh, side);
    match side {
        Side::Left => w[0] * u[0] + w[1] * u[1] + w[2] * u[2],
        Side::Right => w[0] * u[n - 1] + w[1] * u[n - 2] + w[2] * u[n - 3],
    }
}

/// Rates `-J_x` at every node of a continuity equation `u_t = -J_x`.
///
/// `face_fluxes` holds `J` at the `N-1` midpoints; `left` and `right` are
/// the prescribed fluxes at `x = 0` and `x = 1`. The end nodes own half
/// cells, so the discrete mass `sum(w_i u_i)` with
/// [`Mesh::control_width`] weights changes only through the two boundary
/// fluxes.
pub fn conservative_rates(mesh: &Mesh, face_fluxes: &[f64], left: f64, right: f64) -> Vec<f64> {
    let n = mesh.len();
    assert_eq!(face_fluxes.len(), n - 1);
    (0..n)
        .map(|i| {
            let west = if i == 0 { left } else { face_fluxes[i - 1] };
            let east = if i == n - 1 { right } else { face_fluxes[i] };
            -(east - west) / mesh.control_width(i)
        })
        .collect()
}

/// The operator `u -> u_xx` in the conservative form of
/// [`conservative_rates`] with zero flux at both ends. Interior rows are
/// the standard nonuniform three-point stencil; end rows act on half
/// cells, so the operator has constants in its kernel.
pub fn zero_flux_laplacian(mesh: &Mesh) -> TriDiagMatrix {
    let n = mesh.len();
    let mut m = TriDiagMatrix::zeros(n);
    for i in 1..n - 1 {
        let (lo, c, up) = laplacian_row(mesh, i);
        m.sub[i - 1] = lo;
        m.diag[i] = c;
        m.sup[i] = up;
    }
    let h0 = mesh.dx(0);
    let w0 = mesh.control_width(0);
    m.diag[0] = -1.0 / (h0 * w0);
    m.sup[0] = 1.0 / (h0 * w0);
    let hn = mesh.dx(n - 2);
    let wn = mesh.control_width(n - 1);
    m.diag[n - 1] = -1.0 / (hn * wn);
    m.sub[n - 2] = 1.0 / (hn * wn);
    m
}

/// Coefficients `(lower, centre, upper)` of the nonuniform three-point
/// second difference at interior node `i`.
pub fn laplacian_row(mesh: &Mesh, i: usize) -> (f64, f64, f64) {
    let hm = mesh.dx(i - 1);
    let hp = mesh.dx(i);
    (
        2.0 / (hm * (hp + hm)),
        -2.0 / (hp * hm),
        2.0 / (hp * (hp + hm)),
    )
}

/// Boundary condition `a u + b u_x = datum` on the elliptic problem. The
/// datum is supplied per solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllipticBc {
    Robin { a: f64, b: f64 },
    Neumann,
    Dirichlet,
}

impl EllipticBc {
    fn coefficients(self) -> (f64, f64) {
        match self {
            EllipticBc::Robin { a, b } => (a, b),
            EllipticBc::Neumann => (0.0, 1.0),
            EllipticBc::Dirichlet => (1.0, 0.0),
        }
    }
}

/// Assembled elliptic operator `u_xx` with boundary rows
/// `a u + b u_x = datum`, ready for repeated solves.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonOperator {
    matrix: BorderedTriDiag,
}

/// Assembles the discrete `u_xx` operator with the given boundary rows.
pub fn assemble_poisson(
    mesh: &Mesh,
    left: EllipticBc,
    right: EllipticBc,
) -> Result<PoissonOperator, NumericsError> {
    let n = mesh.len();
    let mut core = TriDiagMatrix::zeros(n);
    for i in 1..n - 1 {
        let (lo, c, up) = laplacian_row(mesh, i);
        core.sub[i - 1] = lo;
        core.diag[i] = c;
        core.sup[i] = up;
    }

    let (al, bl) = left.coefficients();
    let wl = boundary_derivative_weights(mesh, Side::Left);
    core.diag[0] = al + bl * wl[0];
    core.sup[0] = bl * wl[1];
    let top_fringe = bl * wl[2];

    let (ar, br) = right.coefficients();
    let wr = boundary_derivative_weights(mesh, Side::Right);
    core.diag[n - 1] = ar + br * wr[0];
    core.sub[n - 2] = br * wr[1];
    let bottom_fringe = br * wr[2];

    let op = PoissonOperator {
        matrix: BorderedTriDiag {
            core,
            top_fringe,
            bottom_fringe,
        },
    };
    // A pure-Neumann pair leaves constants in the kernel.
    if al == 0.0 && ar == 0.0 {
        return Err(NumericsError::SingularMatrix { row: 0, pivot: 0.0 });
    }
    // Probe once so that a singular assembly is reported here rather than
    // on first use.
    op.matrix.solve(&vec![0.0; n])?;
    Ok(op)
}

impl PoissonOperator {
    pub fn matrix(&self) -> &BorderedTriDiag {
        &self.matrix
    }

    /// Solves `u_xx = f` at interior nodes with the boundary data
    /// `left_datum`, `right_datum`. The end entries of `f` are ignored.
    pub fn solve(
        &self,
        f: &[f64],
        left_datum: f64,
        right_datum: f64,
    ) -> Result<Vec<f64>, NumericsError> {
        let n = self.matrix.len();
        if f.len() != n {
            return Err(NumericsError::InvalidArgument(format!(
                "right-hand side has length {}, mesh has {n} nodes",
                f.len()
            )));
        }
        let mut rhs = f.to_vec();
        rhs[0] = left_datum;
        rhs[n - 1] = right_datum;
        self.matrix.solve(&rhs)
    }
}

/// Free-function form of [`PoissonOperator::solve`].
pub fn solve_poisson(
    op: &PoissonOperator,
    f: &[f64],
    left_datum: f64,
    right_datum: f64,
) -> Result<Vec<f64>, NumericsError> {
    op.solve(f, left_datum, right_datum)
}

/// Discrete l2 norm (unweighted).
pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample(mesh: &Mesh, f: impl Fn(f64) -> f64) -> Vec<f64> {
        mesh.nodes().iter().map(|&x| f(x)).collect()
    }

    fn diffusive_divergence(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
        let j = midpoint_fluxes(mesh, u, |_, ux, _| ux);
        flux_divergence_interior(mesh, &j)
    }

    #[test]
    fn linear_profile_has_zero_divergence() {
        let m = Mesh::uniform(17).unwrap();
        let u = sample(&m, |x| 3.0 * x - 1.0);
        for d in diffusive_divergence(&m, &u) {
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_has_constant_second_difference() {
        for m in [
            Mesh::uniform(17).unwrap(),
            Mesh::piecewise_uniform(&[0.2, 0.7], &[5, 9, 4]).unwrap(),
            Mesh::logistic(6.0, 23).unwrap(),
        ] {
            let u = sample(&m, |x| x * x);
            for d in diffusive_divergence(&m, &u) {
                assert!((d - 2.0).abs() < 1e-9, "{d}");
            }
        }
    }

    #[test]
    fn sine_divergence_is_second_order() {
        let err = |n: usize| {
            let m = Mesh::uniform(n).unwrap();
            let u = sample(&m, |x| (PI * x).sin());
            diffusive_divergence(&m, &u)
                .iter()
                .zip(&m.nodes()[1..n - 1])
                .map(|(d, &x)| (d + PI * PI * (PI * x).sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(161) / err(321);
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn boundary_derivative_exactness() {
        let meshes = [
            Mesh::uniform(9).unwrap(),
            Mesh::piecewise_uniform(&[0.1, 0.9], &[4, 6, 3]).unwrap(),
            Mesh::logistic(7.0, 15).unwrap(),
        ];
        for m in &meshes {
            for side in [Side::Left, Side::Right] {
                let c = sample(m, |_| 2.5);
                assert!(boundary_first_derivative(m, &c, side).abs() < 1e-10);
                let lin = sample(m, |x| x);
                assert!((boundary_first_derivative(m, &lin, side) - 1.0).abs() < 1e-10);
                let quad = sample(m, |x| x * x);
                let want = if side == Side::Left { 0.0 } else { 2.0 };
                assert!((boundary_first_derivative(m, &quad, side) - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn left_weights_on_uniform_mesh() {
        let m = Mesh::uniform(11).unwrap();
        let h = 0.1;
        let w = boundary_derivative_weights(&m, Side::Left);
        let want = [-1.5 / h, 2.0 / h, -0.5 / h];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-10);
        }
        let w = boundary_derivative_weights(&m, Side::Right);
        for (a, b) in w.iter().zip(want) {
            assert!((a + b).abs() < 1e-10);
        }
    }

    #[test]
    fn interior_rows_match_divergence_form() {
        let m = Mesh::logistic(5.0, 12).unwrap();
        let u = sample(&m, |x| (3.0 * x).exp());
        let div = diffusive_divergence(&m, &u);
        for i in 1..m.len() - 1 {
            let (a, b, c) = laplacian_row(&m, i);
            let lap = a * u[i - 1] + b * u[i] + c * u[i + 1];
            assert!((lap - div[i - 1]).abs() < 1e-9 * lap.abs());
        }
    }

    #[test]
    fn homogeneous_problem_has_zero_solution() {
        let m = Mesh::uniform(21).unwrap();
        let op = assemble_poisson(
            &m,
            EllipticBc::Robin { a: 1.0, b: -1.0 },
            EllipticBc::Neumann,
        )
        .unwrap();
        let v = op.solve(&[0.0; 21], 0.0, 0.0).unwrap();
        assert!(max_abs(&v) == 0.0);
    }

    #[test]
    fn constant_source_is_exact() {
        // v_xx = -1, v(0) - v_x(0) = 0, v_x(1) = 0: v = -x^2/2 + x + 1.
        // Check: v(0) = 1, v_x(0) = 1, v_x(1) = 0. Quadratics are
        // reproduced exactly by every stencil involved.
        for m in [
            Mesh::uniform(21).unwrap(),
            Mesh::piecewise_uniform(&[0.1, 0.9], &[6, 10, 6]).unwrap(),
        ] {
            let op = assemble_poisson(
                &m,
                EllipticBc::Robin { a: 1.0, b: -1.0 },
                EllipticBc::Neumann,
            )
            .unwrap();
            let v = op.solve(&vec![-1.0; m.len()], 0.0, 0.0).unwrap();
            for (vi, &x) in v.iter().zip(m.nodes()) {
                assert!((vi - (-0.5 * x * x + x + 1.0)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn manufactured_cosine_converges_second_order() {
        // v = cos(pi x): v_xx = -pi^2 cos(pi x). Left Robin v - v_x = 1,
        // right Robin v + 0.5 v_x = -1.
        let err = |n: usize| {
            let m = Mesh::uniform(n).unwrap();
            let op = assemble_poisson(
                &m,
                EllipticBc::Robin { a: 1.0, b: -1.0 },
                EllipticBc::Robin { a: 1.0, b: 0.5 },
            )
            .unwrap();
            let f = sample(&m, |x| -PI * PI * (PI * x).cos());
            let v = op.solve(&f, 1.0, -1.0).unwrap();
            v.iter()
                .zip(m.nodes())
                .map(|(vi, &x)| (vi - (PI * x).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(161) / err(321);
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn pure_neumann_is_singular() {
        let m = Mesh::uniform(11).unwrap();
        assert!(matches!(
            assemble_poisson(&m, EllipticBc::Neumann, EllipticBc::Neumann),
            Err(NumericsError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn stern_layer_robin_rows() {
        // phi(0) - eps*delta*phi_x(0) = 0 and phi(1) + eps*delta*phi_x(1) = v
        // with a constant source -eps^2 phi_xx = q.
        // phi = -q/(2 eps^2) x^2 + A x + B with
        //   B - ed A = 0,
        //   -q/(2e^2) + A + B + ed(-q/e^2 + A) = v.
        let (eps, delta, q, v) = (0.1, 1.0, 0.02, 0.3);
        let ed = eps * delta;
        let k = q / (eps * eps);
        let a = (v + 0.5 * k + ed * k) / (1.0 + 2.0 * ed);
        let b = ed * a;
        let m = Mesh::uniform(31).unwrap();
        let op = assemble_poisson(
            &m,
            EllipticBc::Robin { a: 1.0, b: -ed },
            EllipticBc::Robin { a: 1.0, b: ed },
        )
        .unwrap();
        let phi = op.solve(&vec![-k; m.len()], 0.0, v).unwrap();
        for (p, &x) in phi.iter().zip(m.nodes()) {
            assert!((p - (-0.5 * k * x * x + a * x + b)).abs() < 1e-10);
        }
    }

    #[test]
    fn conservative_rates_change_mass_only_through_ends() {
        let m = Mesh::piecewise_uniform(&[0.1, 0.9], &[6, 8, 5]).unwrap();
        let u = sample(&m, |x| (3.0 * x).sin() + 2.0);
        let faces = midpoint_fluxes(&m, &u, |mid, ux, _| -ux + 0.7 * mid);
        let (jl, jr) = (0.3, -1.1);
        let rates = conservative_rates(&m, &faces, jl, jr);
        let total: f64 = m.integrate(&rates);
        assert!((total - (jl - jr)).abs() < 1e-12);
    }

    #[test]
    fn zero_flux_laplacian_matches_rates_and_kills_constants() {
        let m = Mesh::logistic(5.0, 19).unwrap();
        let lap = zero_flux_laplacian(&m);
        let ones = vec![1.0; m.len()];
        assert!(max_abs(&lap.matvec(&ones)) < 1e-9);
        let u = sample(&m, |x| x * x * x - x);
        let faces = midpoint_fluxes(&m, &u, |_, ux, _| -ux);
        let rates = conservative_rates(&m, &faces, 0.0, 0.0);
        let lu = lap.matvec(&u);
        for (a, b) in lu.iter().zip(&rates) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
        assert!(m.integrate(&lu).abs() < 1e-10);
    }
}
