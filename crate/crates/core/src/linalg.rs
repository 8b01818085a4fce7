//! Linear algebra kernels: Thomas elimination for (nearly) tridiagonal
//! systems and a dense eigenvalue routine for the stability diagnostics.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::NumericsError;

/// Pivots smaller than this in magnitude are reported as singular.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// Largest matrix accepted by [`eigenvalues`].
pub const EIGEN_SIZE_CAP: usize = 512;

/// Schur iteration cap passed to nalgebra.
pub const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TriDiagMatrix {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TriDiagMatrix {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self, NumericsError> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(NumericsError::InvalidArgument(format!(
                "tridiagonal bands of sizes {}/{}/{} are inconsistent",
                sub.len(),
                n,
                sup.len()
            )));
        }
        Ok(TriDiagMatrix { sub, diag, sup })
    }

    pub fn zeros(n: usize) -> Self {
        TriDiagMatrix {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.diag.iter_mut().for_each(|d| *d = 1.0);
        m
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.len();
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, self.diag[i]);
            if i > 0 {
                m.set(i, i - 1, self.sub[i - 1]);
            }
            if i + 1 < n {
                m.set(i, i + 1, self.sup[i]);
            }
        }
        m
    }
}

/// Solves `A x = b` by Thomas elimination without pivoting.
pub fn solve_tridiag(a: &TriDiagMatrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    let n = a.len();
    if b.len() != n {
        return Err(NumericsError::InvalidArgument(format!(
            "right-hand side has length {}, matrix has {n} rows",
            b.len()
        )));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];

    let mut pivot = a.diag[0];
    // NaN pivots pass through so that blow-up shows up as a non-finite
    // solution instead of a singular-matrix error.
    if pivot.abs() < PIVOT_FLOOR {
        return Err(NumericsError::SingularMatrix { row: 0, pivot });
    }
    if n > 1 {
        c[0] = a.sup[0] / pivot;
    }
    d[0] = b[0] / pivot;
    for i in 1..n {
        pivot = a.diag[i] - a.sub[i - 1] * c[i - 1];
        if pivot.abs() < PIVOT_FLOOR {
            return Err(NumericsError::SingularMatrix { row: i, pivot });
        }
        if i + 1 < n {
            c[i] = a.sup[i] / pivot;
        }
        d[i] = (b[i] - a.sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// A tridiagonal matrix whose first and last rows carry one extra
/// coefficient each, at columns 2 and `N - 3`. This is the shape produced
/// by three-node one-sided boundary stencils.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderedTriDiag {
    pub core: TriDiagMatrix,
    /// Entry `(0, 2)`.
    pub top_fringe: f64,
    /// Entry `(N-1, N-3)`.
    pub bottom_fringe: f64,
}

impl BorderedTriDiag {
    pub fn from_core(core: TriDiagMatrix) -> Self {
        BorderedTriDiag {
            core,
            top_fringe: 0.0,
            bottom_fringe: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.core.len()
    }

    pub fn is_empty(&self) -> bool {
        self.core.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = self.core.matvec(x);
        if n >= 3 {
            y[0] += self.top_fringe * x[2];
            y[n - 1] += self.bottom_fringe * x[n - 3];
        }
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.len();
        let mut m = self.core.to_dense();
        if n >= 3 {
            m.set(0, 2, m.get(0, 2) + self.top_fringe);
            m.set(n - 1, n - 3, m.get(n - 1, n - 3) + self.bottom_fringe);
        }
        m
    }

    /// Eliminates the two fringe entries against rows 1 and `N - 2`, then
    /// runs the Thomas sweep.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = self.len();
        if b.len() != n {
            return Err(NumericsError::InvalidArgument(format!(
                "right-hand side has length {}, matrix has {n} rows",
                b.len()
            )));
        }
        if (self.top_fringe == 0.0 && self.bottom_fringe == 0.0) || n < 3 {
            return solve_tridiag(&self.core, b);
        }
        let mut m = self.core.clone();
        let mut rhs = b.to_vec();
        if self.top_fringe != 0.0 {
            // Row 1 is (sub[0], diag[1], sup[1]) over columns 0..=2.
            let pivot = m.sup[1];
            if pivot.abs() < PIVOT_FLOOR {
                return Err(NumericsError::SingularMatrix { row: 1, pivot });
            }
            let r = self.top_fringe / pivot;
            m.diag[0] -= r * m.sub[0];
            m.sup[0] -= r * m.diag[1];
            rhs[0] -= r * rhs[1];
        }
        if self.bottom_fringe != 0.0 {
            // Row N-2 is (sub[N-3], diag[N-2], sup[N-2]) over columns N-3..=N-1.
            let pivot = m.sub[n - 3];
            if pivot.abs() < PIVOT_FLOOR {
                return Err(NumericsError::SingularMatrix { row: n - 2, pivot });
            }
            let r = self.bottom_fringe / pivot;
            m.sub[n - 2] -= r * m.diag[n - 2];
            m.diag[n - 1] -= r * m.sup[n - 2];
            rhs[n - 1] -= r * rhs[n - 2];
        }
        solve_tridiag(&m, &rhs)
    }
}

/// Square dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(NumericsError::InvalidArgument(
                "dense matrix must be square".into(),
            ));
        }
        Ok(DenseMatrix {
            n,
            data: rows.concat(),
        })
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// All eigenvalues of a dense matrix via a real Schur decomposition.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>, NumericsError> {
    let n = a.size();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n > EIGEN_SIZE_CAP {
        return Err(NumericsError::InvalidArgument(format!(
            "eigenvalue diagnostics are capped at {EIGEN_SIZE_CAP} rows, got {n}"
        )));
    }
    let m = DMatrix::from_row_slice(n, n, &a.data);
    let schur =
        nalgebra::linalg::Schur::try_new(m, f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
            NumericsError::NumericalFailure(format!("Schur iteration did not converge for n = {n}"))
        })?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

/// Residual `||A v - lambda v||_inf / ||v||_inf` for a real eigenpair.
pub fn eigen_residual(a: &DenseMatrix, lambda: f64, v: &[f64]) -> f64 {
    let av = a.matvec(v);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    av.iter()
        .zip(v)
        .map(|(p, q)| (p - lambda * q).abs())
        .fold(0.0, f64::max)
        / scale
}
