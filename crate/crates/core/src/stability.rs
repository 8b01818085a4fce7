//! Linear stability of the variable-step BDF2 scheme on `u' = lambda u`
//! (implicit), plus the forward Euler bound for the heat equation.
//!
//! One step satisfies `a rho^2 - (1+w) rho + w^2/(1+w) = 0` with
//! `a = (1+2w)/(1+w) - lambda dt_now` and `w = dt_now/dt_old`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::NumericsError;
use crate::linalg::{eigenvalues, DenseMatrix};

/// Amplification roots for one eigenvalue and step pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplification {
    /// `essential -> 1` and `spurious -> 0` as `dt_now -> 0`.
    Pair {
        essential: Complex64,
        spurious: Complex64,
    },
    /// The leading coefficient vanishes and one root is at infinity.
    Single(Complex64),
}

impl Amplification {
    pub fn roots(&self) -> Vec<Complex64> {
        match *self {
            Amplification::Pair {
                essential,
                spurious,
            } => vec![essential, spurious],
            Amplification::Single(r) => vec![r],
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.roots().iter().map(|r| r.norm()).fold(0.0, f64::max)
    }
}

struct Quadratic {
    a: Complex64,
    b: Complex64,
    c: Complex64,
}

impl Quadratic {
    fn new(lambda: Complex64, dt_now: f64, dt_old: f64) -> Self {
        let w = dt_now / dt_old;
        Quadratic {
            a: Complex64::from((1.0 + 2.0 * w) / (1.0 + w)) - lambda * dt_now,
            b: Complex64::from(1.0 + w),
            c: Complex64::from(w * w / (1.0 + w)),
        }
    }

    /// Roots of `a r^2 - b r + c`, computed without cancellation. `None`
    /// when `a` vanishes.
    fn roots(&self) -> Option<(Complex64, Complex64)> {
        if self.a.norm() == 0.0 {
            return None;
        }
        let disc = (self.b * self.b - 4.0 * self.a * self.c).sqrt();
        let q = if (self.b.conj() * disc).re >= 0.0 {
            0.5 * (self.b + disc)
        } else {
            0.5 * (self.b - disc)
        };
        if q.norm() == 0.0 {
            return Some((Complex64::from(0.0), Complex64::from(0.0)));
        }
        Some((q / self.a, self.c / q))
    }

    fn residual(&self, r: Complex64) -> f64 {
        let scale = 1.0 + (self.a * r * r).norm() + (self.b * r).norm() + self.c.norm();
        (self.a * r * r - self.b * r + self.c).norm() / scale
    }
}

/// Number of continuation points between `dt_now ~ 0` and `dt_now`.
const CONTINUATION_STEPS: usize = 240;
/// Smallest fraction of `dt_now` visited by the continuation.
const CONTINUATION_START: f64 = 1e-12;

/// Roots for eigenvalue `lambda` and steps `(dt_old, dt_now)`, labelled
/// by continuation in `dt_now` from zero, where the essential root is 1.
pub fn vssbdf2_roots(
    lambda: Complex64,
    dt_now: f64,
    dt_old: f64,
) -> Result<Amplification, NumericsError> {
    if !(dt_now > 0.0 && dt_old > 0.0) {
        return Err(NumericsError::InvalidArgument(
            "step sizes must be positive".into(),
        ));
    }
    let target = Quadratic::new(lambda, dt_now, dt_old);
    let (r1, r2) = match target.roots() {
        Some(r) => r,
        None => return Ok(Amplification::Single(target.c / target.b)),
    };
    if (r1 - r2).norm() < 1e-12 * (1.0 + r1.norm()) {
        return Ok(Amplification::Pair {
            essential: r1,
            spurious: r2,
        });
    }

    // Track the essential root along dt = s dt_now, s from ~0 to 1,
    // geometrically spaced.
    let ratio = (1.0 / CONTINUATION_START).powf(1.0 / CONTINUATION_STEPS as f64);
    let mut essential = Complex64::from(1.0);
    let mut s = CONTINUATION_START;
    for _ in 0..CONTINUATION_STEPS {
        let q = Quadratic::new(lambda, s * dt_now, dt_old);
        if let Some((p1, p2)) = q.roots() {
            essential = if (p1 - essential).norm() <= (p2 - essential).norm() {
                p1
            } else {
                p2
            };
        }
        s = (s * ratio).min(1.0);
    }
    let (e, sp) = if (r1 - essential).norm() <= (r2 - essential).norm() {
        (r1, r2)
    } else {
        (r2, r1)
    };
    Ok(Amplification::Pair {
        essential: e,
        spurious: sp,
    })
}

/// Residual of a root of the characteristic quadratic, relative to the
/// size of its terms.
pub fn root_residual(lambda: Complex64, dt_now: f64, dt_old: f64, rho: Complex64) -> f64 {
    Quadratic::new(lambda, dt_now, dt_old).residual(rho)
}

/// Limits of both roots as `dt_now -> infinity` for real `x = lambda
/// dt_old != 0`: `-(1 +- sqrt(1 + 4x)) / (2x)`.
pub fn large_dt_limits(lambda_dt_old: f64) -> Result<(Complex64, Complex64), NumericsError> {
    if lambda_dt_old == 0.0 {
        return Err(NumericsError::InvalidArgument(
            "lambda * dt_old must be nonzero".into(),
        ));
    }
    let x = lambda_dt_old;
    let s = Complex64::from(1.0 + 4.0 * x).sqrt();
    let k = -1.0 / (2.0 * x);
    Ok((k * (1.0 + s), k * (1.0 - s)))
}

/// Roots for `lambda = 0`: `1` and `w^2/(1+2w)`.
pub fn zero_stability_roots(omega: f64) -> (f64, f64) {
    (1.0, omega * omega / (1.0 + 2.0 * omega))
}

/// `(dx^2 / (1 + cos(pi dx)), dx^2 / 2)`: the forward Euler limit for the
/// three-point Dirichlet Laplacian and its leading-order value.
pub fn forward_euler_bound(dx: f64) -> (f64, f64) {
    let d2 = dx * dx;
    (d2 / (1.0 + (std::f64::consts::PI * dx).cos()), 0.5 * d2)
}

/// One step of a stepping history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepPair {
    pub t: f64,
    pub dt_old: f64,
    pub dt_now: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReportRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// The `k` largest root magnitudes over all eigenvalues, descending.
    pub magnitudes: Vec<f64>,
}

/// Eigenvalues of `operator`, with those below the backward-error level
/// of the eigen solver set to exactly zero.
pub fn operator_spectrum(operator: &DenseMatrix) -> Result<Vec<Complex64>, NumericsError> {
    let n = operator.size();
    let mut norm2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            norm2 += operator.get(i, j).powi(2);
        }
    }
    let floor = 16.0 * n as f64 * f64::EPSILON * norm2.sqrt();
    Ok(eigenvalues(operator)?
        .into_iter()
        .map(|l| {
            if l.norm() <= floor {
                Complex64::from(0.0)
            } else {
                l
            }
        })
        .collect())
}

/// For every step, the `k` largest amplification-root magnitudes over
/// the spectrum of the frozen implicit operator.
pub fn trajectory_root_report(
    operator: &DenseMatrix,
    steps: &[StepPair],
    k: usize,
) -> Result<Vec<RootReportRow>, NumericsError> {
    let spectrum = operator_spectrum(operator)?;
    steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut mags = Vec::with_capacity(2 * spectrum.len());
            for &l in &spectrum {
                for r in vssbdf2_roots(l, s.dt_now, s.dt_old)?.roots() {
                    mags.push(r.norm());
                }
            }
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
            mags.truncate(k);
            Ok(RootReportRow {
                step: i + 1,
                t: s.t,
                dt: s.dt_now,
                magnitudes: mags,
            })
        })
        .collect()
}
