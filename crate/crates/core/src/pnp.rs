//! Poisson-Nernst-Planck transport of a cation/anion pair with
//! Frumkin-Butler-Volmer reactions for the cation at both electrodes.
//!
//! ```text
//! c_t = -J_x,   J = -c_x - z c phi_x,   z = +1 (c+), -1 (c-)
//! -eps^2 phi_xx = (c+ - c-) / 2
//! phi - eps delta phi_x = 0                    at x = 0
//! phi + eps delta phi_x = v(t)                 at x = 1
//! ```
//!
//! The anion has no flux at either end. The cation flux is `-R_a` at the
//! anode and `R_c` at the cathode. Under current control the cathode
//! potential condition is replaced by `phi_x(1) = p(t)`, where `p` obeys
//! the current balance ODE and `v = phi(1) + eps delta p` is recovered
//! afterwards.
//!
//! Evolved state: `[c+ (N), c- (N)]`, plus `p` under current control.
//! Auxiliary fields: `[phi (N), v]`.

use serde::{Deserialize, Serialize};

use crate::error::{NumericsError, StepError};
use crate::linalg::{solve_tridiag, DenseMatrix, TriDiagMatrix};
use crate::mesh::Mesh;
use crate::spatial::{
    assemble_poisson, boundary_first_derivative, conservative_rates, midpoint_fluxes,
    zero_flux_laplacian, EllipticBc, PoissonOperator, Side,
};
use crate::stepper::{ImexSystem, ImplicitSolve, Level};

/// Cathode voltage as a function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VoltageProtocol {
    Constant {
        value: f64,
    },
    /// `sum_k height (tanh(sharpness (t - t_k)) + 1)`.
    Steps {
        times: Vec<f64>,
        height: f64,
        sharpness: f64,
    },
}

impl VoltageProtocol {
    /// Four smoothed steps at `t = 7.5, 8, 8.5, 9` rising by 0.1 each.
    pub fn staircase() -> Self {
        VoltageProtocol::Steps {
            times: vec![7.5, 8.0, 8.5, 9.0],
            height: 0.05,
            sharpness: 1000.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            VoltageProtocol::Constant { value } => *value,
            VoltageProtocol::Steps {
                times,
                height,
                sharpness,
            } => times
                .iter()
                .map(|t0| height * ((sharpness * (t - t0)).tanh() + 1.0))
                .sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Drive {
    Voltage { protocol: VoltageProtocol },
    Current { j_ext: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnpParams {
    pub epsilon: f64,
    pub delta: f64,
    pub k_ca: f64,
    pub k_cc: f64,
    pub j_ra: f64,
    pub j_rc: f64,
    pub drive: Drive,
}

impl Default for PnpParams {
    fn default() -> Self {
        PnpParams {
            epsilon: 0.1,
            delta: 1.0,
            k_ca: 1.0,
            k_cc: 1.0,
            j_ra: 1.0,
            j_rc: 1.0,
            drive: Drive::Voltage {
                protocol: VoltageProtocol::Constant { value: 0.0 },
            },
        }
    }
}

impl PnpParams {
    pub fn validate(&self) -> Result<(), NumericsError> {
        let bad = |m: &str| Err(NumericsError::InvalidArgument(m.to_string()));
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.delta >= 0.0) {
            return bad("delta must be nonnegative");
        }
        if [self.k_ca, self.k_cc, self.j_ra, self.j_rc]
            .iter()
            .any(|k| !(*k >= 0.0))
        {
            return bad("rate parameters must be nonnegative");
        }
        if let Drive::Current { j_ext } = self.drive {
            if !j_ext.is_finite() {
                return bad("j_ext must be finite");
            }
        }
        Ok(())
    }

    pub fn is_current_driven(&self) -> bool {
        matches!(self.drive, Drive::Current { .. })
    }

    /// Anode reaction rate `4 k_ca c+ e^{-dphi/2} - 4 j_ra e^{dphi/2}` with
    /// `dphi = -phi(0)`. The cation flux at `x = 0` is its negative.
    pub fn anode_rate(&self, c_plus: f64, phi0: f64) -> f64 {
        let d = -phi0;
        4.0 * self.k_ca * c_plus * (-0.5 * d).exp() - 4.0 * self.j_ra * (0.5 * d).exp()
    }

    /// Cathode reaction rate `4 k_cc c+ e^{-dphi/2} - 4 j_rc e^{dphi/2}`
    /// with `dphi = v - phi(1)`; equal to the cation flux at `x = 1`.
    pub fn cathode_rate(&self, c_plus: f64, delta_phi: f64) -> f64 {
        4.0 * self.faradaic(c_plus, delta_phi)
    }

    /// `k_cc c+ e^{-dphi/2} - j_rc e^{dphi/2}`, the term balancing the
    /// external current. It carries no factor 4.
    pub fn faradaic(&self, c_plus: f64, delta_phi: f64) -> f64 {
        self.k_cc * c_plus * (-0.5 * delta_phi).exp() - self.j_rc * (0.5 * delta_phi).exp()
    }

    /// `d phi_x(1) / dt = -(2 / eps^2) (j_ext - faradaic)`.
    pub fn current_ode_rhs(&self, j_ext: f64, c_plus: f64, delta_phi: f64) -> f64 {
        -2.0 / (self.epsilon * self.epsilon) * (j_ext - self.faradaic(c_plus, delta_phi))
    }
}

/// Initial concentration profile shared by both species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    #[default]
    Uniform,
    /// `1 + amplitude sin(2 pi x)`.
    Sine { amplitude: f64 },
    /// `1 + amplitude sin^2(pi x)`: flat at both ends and equal to the
    /// equilibrium there, so compatible with the boundary conditions.
    Bump { amplitude: f64 },
}

/// Nernst-Planck flux `J_{i+1/2}` at every midpoint.
pub fn np_flux(mesh: &Mesh, c: &[f64], phi: &[f64], z: f64) -> Vec<f64> {
    let spacings = mesh.spacings();
    (0..mesh.len() - 1)
        .map(|i| {
            let h = spacings[i];
            let cx = (c[i + 1] - c[i]) / h;
            let phix = (phi[i + 1] - phi[i]) / h;
            -cx - z * 0.5 * (c[i] + c[i + 1]) * phix
        })
        .collect()
}

/// One sample of the quantities that enter the current balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentSample {
    pub t: f64,
    /// `phi_x(1)`.
    pub phix: f64,
    /// `c+(1)`.
    pub c_plus: f64,
    /// `v - phi(1)`.
    pub delta_phi: f64,
}

/// Recovers `j_ext(t) = -(eps^2/2) d phi_x(1)/dt + faradaic` from a
/// series of samples on a possibly nonuniform time grid. The derivative
/// uses second-order three-point differences, one-sided at the ends.
pub fn postprocess_current(
    params: &PnpParams,
    samples: &[CurrentSample],
) -> Result<Vec<f64>, NumericsError> {
    let n = samples.len();
    if n < 3 {
        return Err(NumericsError::InvalidArgument(
            "need at least 3 time levels".into(),
        ));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let p: Vec<f64> = samples.iter().map(|s| s.phix).collect();
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(NumericsError::InvalidArgument(
            "sample times must increase".into(),
        ));
    }
    // Derivative at t[j] from the three points (a, b, c) in `idx`.
    let deriv = |j: usize, idx: [usize; 3]| {
        let [a, b, c] = idx;
        let (ta, tb, tc) = (t[a], t[b], t[c]);
        let x = t[j];
        let la = ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc));
        let lb = ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc));
        let lc = ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
        la * p[a] + lb * p[b] + lc * p[c]
    };
    let eps2 = params.epsilon * params.epsilon;
    Ok((0..n)
        .map(|j| {
            let idx = if j == 0 {
                [0, 1, 2]
            } else if j == n - 1 {
                [n - 3, n - 2, n - 1]
            } else {
                [j - 1, j, j + 1]
            };
            let s = samples[j];
            -0.5 * eps2 * deriv(j, idx) + params.faradaic(s.c_plus, s.delta_phi)
        })
        .collect())
}

/// The coupled system on a fixed mesh.
#[derive(Debug, Clone)]
pub struct PnpModel {
    mesh: Mesh,
    params: PnpParams,
    laplacian: TriDiagMatrix,
    poisson: PoissonOperator,
}

impl PnpModel {
    pub fn new(mesh: Mesh, params: PnpParams) -> Result<Self, NumericsError> {
        params.validate()?;
        let ed = params.epsilon * params.delta;
        let left = EllipticBc::Robin { a: 1.0, b: -ed };
        let right = if params.is_current_driven() {
            EllipticBc::Neumann
        } else {
            EllipticBc::Robin { a: 1.0, b: ed }
        };
        let poisson = assemble_poisson(&mesh, left, right)?;
        let laplacian = zero_flux_laplacian(&mesh);
        Ok(PnpModel {
            mesh,
            params,
            laplacian,
            poisson,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn params(&self) -> &PnpParams {
        &self.params
    }

    pub fn nodes(&self) -> usize {
        self.mesh.len()
    }

    pub fn c_plus<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[..self.nodes()]
    }

    pub fn c_minus<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[self.nodes()..2 * self.nodes()]
    }

    pub fn phi<'a>(&self, aux: &'a [f64]) -> &'a [f64] {
        &aux[..self.nodes()]
    }

    /// Cathode potential stored with the auxiliary fields.
    pub fn cathode_voltage(&self, aux: &[f64]) -> f64 {
        aux[self.nodes()]
    }

    /// Discrete mass `sum w_i c_i` of one species.
    pub fn mass(&self, c: &[f64]) -> f64 {
        self.mesh.integrate(c)
    }

    /// Both species set to `profile`; under current control the field
    /// `phi_x(1)` starts at `phix0`.
    pub fn initial_state(&self, profile: InitialProfile, phix0: f64) -> Vec<f64> {
        let c: Vec<f64> = self
            .mesh
            .nodes()
            .iter()
            .map(|&x| match profile {
                InitialProfile::Uniform => 1.0,
                InitialProfile::Sine { amplitude } => {
                    1.0 + amplitude * (2.0 * std::f64::consts::PI * x).sin()
                }
                InitialProfile::Bump { amplitude } => {
                    1.0 + amplitude * (std::f64::consts::PI * x).sin().powi(2)
                }
            })
            .collect();
        let mut y = c.clone();
        y.extend_from_slice(&c);
        if self.params.is_current_driven() {
            y.push(phix0);
        }
        y
    }

    fn voltage_at(&self, t: f64) -> f64 {
        match &self.params.drive {
            Drive::Voltage { protocol } => protocol.eval(t),
            Drive::Current { .. } => 0.0,
        }
    }

    /// Elliptic solve for `phi`; returns `(phi, v)`.
    pub fn solve_potential(&self, y: &[f64], t: f64) -> Result<(Vec<f64>, f64), NumericsError> {
        let n = self.nodes();
        let scale = -0.5 / (self.params.epsilon * self.params.epsilon);
        let rhs: Vec<f64> = (0..n).map(|i| scale * (y[i] - y[n + i])).collect();
        match self.params.drive {
            Drive::Voltage { .. } => {
                let v = self.voltage_at(t);
                Ok((self.poisson.solve(&rhs, 0.0, v)?, v))
            }
            Drive::Current { .. } => {
                let p = y[2 * n];
                let phi = self.poisson.solve(&rhs, 0.0, p)?;
                let v = phi[n - 1] + self.params.epsilon * self.params.delta * p;
                Ok((phi, v))
            }
        }
    }

    /// `phi_x(1)`: the state variable under current control, the
    /// one-sided stencil otherwise.
    pub fn cathode_field(&self, level: &Level) -> f64 {
        let n = self.nodes();
        if self.params.is_current_driven() {
            level.y[2 * n]
        } else {
            boundary_first_derivative(&self.mesh, self.phi(&level.aux), Side::Right)
        }
    }

    pub fn current_sample(&self, level: &Level) -> CurrentSample {
        let n = self.nodes();
        let phi = self.phi(&level.aux);
        CurrentSample {
            t: level.t,
            phix: self.cathode_field(level),
            c_plus: level.y[n - 1],
            delta_phi: self.cathode_voltage(&level.aux) - phi[n - 1],
        }
    }

    /// `(R_a, R_c)` at a level.
    pub fn reaction_rates(&self, level: &Level) -> (f64, f64) {
        let n = self.nodes();
        let phi = self.phi(&level.aux);
        let v = self.cathode_voltage(&level.aux);
        (
            self.params.anode_rate(level.y[0], phi[0]),
            self.params.cathode_rate(level.y[n - 1], v - phi[n - 1]),
        )
    }
}

impl ImexSystem for PnpModel {
    fn dim(&self) -> usize {
        2 * self.nodes() + usize::from(self.params.is_current_driven())
    }

    fn elliptic(&self, y: &[f64], t: f64) -> Result<Vec<f64>, StepError> {
        let (mut phi, v) = self
            .solve_potential(y, t)
            .map_err(|e| StepError::numerics(t, e))?;
        phi.push(v);
        Ok(phi)
    }

    fn explicit(&self, y: &[f64], aux: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        let n = self.nodes();
        let phi = &aux[..n];
        let v = aux[n];
        let (cp, cm) = (&y[..n], &y[n..2 * n]);
        let p = &self.params;
        let ra = p.anode_rate(cp[0], phi[0]);
        let rc = p.cathode_rate(cp[n - 1], v - phi[n - 1]);

        // Migration flux -z c phi_x at midpoints; diffusion is implicit.
        let migration = |c: &[f64], z: f64| {
            midpoint_fluxes(&self.mesh, phi, |_, phix, i| {
                -z * 0.5 * (c[i] + c[i + 1]) * phix
            })
        };
        let mut out = conservative_rates(&self.mesh, &migration(cp, 1.0), -ra, rc);
        out.extend(conservative_rates(
            &self.mesh,
            &migration(cm, -1.0),
            0.0,
            0.0,
        ));
        if let Drive::Current { j_ext } = p.drive {
            out.push(p.current_ode_rhs(j_ext, cp[n - 1], v - phi[n - 1]));
        }
        Ok(out)
    }

    fn solve_implicit(&self, req: &ImplicitSolve<'_>) -> Result<Vec<f64>, StepError> {
        let n = self.nodes();
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
        let err = |e| StepError::numerics(req.t_new, e);
        let mut out = solve_tridiag(&m, &rhs[..n]).map_err(err)?;
        out.extend(solve_tridiag(&m, &rhs[n..2 * n]).map_err(err)?);
        if self.params.is_current_driven() {
            out.push(rhs[2 * n] / req.lead);
        }
        Ok(out)
    }

    fn apply_implicit(&self, y: &[f64], _t: f64) -> Result<Vec<f64>, StepError> {
        let n = self.nodes();
        let mut out = self.laplacian.matvec(&y[..n]);
        out.extend(self.laplacian.matvec(&y[n..2 * n]));
        if self.params.is_current_driven() {
            out.push(0.0);
        }
        Ok(out)
    }

    fn implicit_matrix(&self) -> Option<DenseMatrix> {
        let n = self.nodes();
        let dim = self.dim();
        let mut m = DenseMatrix::zeros(dim);
        let block = self.laplacian.to_dense();
        for off in [0, n] {
            for i in 0..n {
                for j in i.saturating_sub(1)..(i + 2).min(n) {
                    m.set(off + i, off + j, block.get(i, j));
                }
            }
        }
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::max_abs;
    use crate::stepper::{ConstantStepper, Scheme};

    fn voltage_params(v: f64) -> PnpParams {
        PnpParams {
            drive: Drive::Voltage {
                protocol: VoltageProtocol::Constant { value: v },
            },
            ..Default::default()
        }
    }

    fn current_params(j: f64) -> PnpParams {
        PnpParams {
            drive: Drive::Current { j_ext: j },
            ..Default::default()
        }
    }

    #[test]
    fn bump_profile_matches_the_boundary_equilibrium() {
        let m = PnpModel::new(Mesh::uniform(101).unwrap(), current_params(0.0)).unwrap();
        let y = m.initial_state(InitialProfile::Bump { amplitude: 0.1 }, 0.0);
        let c = m.c_plus(&y);
        assert_eq!(c[0], 1.0);
        assert!((c[100] - 1.0).abs() < 1e-15);
        assert!((c[50] - 1.1).abs() < 1e-15);
        // sin^2(pi x) has zero slope at both ends.
        assert!((c[1] - c[0]) / 0.01 < 1e-2);
        assert_eq!(m.c_minus(&y), c);
    }

    #[test]
    fn flux_examples() {
        let m = Mesh::uniform(11).unwrap();
        let x = m.nodes().to_vec();
        let c: Vec<f64> = x.iter().map(|x| x * x).collect();
        let j = np_flux(&m, &c, &[0.4; 11], 1.0);
        for (i, ji) in j.iter().enumerate() {
            assert!((ji + (c[i + 1] - c[i]) / 0.1).abs() < 1e-12);
        }
        let phi: Vec<f64> = x.iter().map(|x| 2.0 * x).collect();
        for z in [1.0, -1.0] {
            for ji in np_flux(&m, &[3.0; 11], &phi, z) {
                assert!((ji + z * 3.0 * 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boltzmann_pair_has_vanishing_flux() {
        // c = e^{-z phi} makes J = 0 exactly; the discrete flux is O(dx^2).
        let err = |n: usize| {
            let m = Mesh::uniform(n).unwrap();
            let phi: Vec<f64> = m.nodes().iter().map(|x| (2.0 * x).sin()).collect();
            let c: Vec<f64> = phi.iter().map(|p| (-p).exp()).collect();
            max_abs(&np_flux(&m, &c, &phi, 1.0))
        };
        let r = err(41) / err(81);
        assert!((r - 4.0).abs() < 0.3, "ratio {r}");
    }

    #[test]
    fn reaction_rate_examples() {
        let p = PnpParams::default();
        assert_eq!(p.anode_rate(1.0, 0.0), 0.0);
        assert_eq!(p.cathode_rate(1.0, 0.0), 0.0);
        assert_eq!(p.current_ode_rhs(0.0, 1.0, 0.0), 0.0);
        let f = p.faradaic(1.3, 0.2);
        assert!(p.current_ode_rhs(f, 1.3, 0.2).abs() < 1e-15);
        assert!((p.cathode_rate(1.3, 0.2) - 4.0 * f).abs() < 1e-15);
    }

    #[test]
    fn staircase_plateaus() {
        let v = VoltageProtocol::staircase();
        for (t, want) in [
            (5.0, 0.0),
            (7.75, 0.1),
            (8.25, 0.2),
            (8.75, 0.3),
            (12.0, 0.4),
        ] {
            assert!((v.eval(t) - want).abs() < 1e-12, "v({t})");
        }
    }

    #[test]
    fn neutral_state_gives_zero_potential() {
        let m = PnpModel::new(Mesh::uniform(21).unwrap(), voltage_params(0.0)).unwrap();
        let y = m.initial_state(InitialProfile::Sine { amplitude: 0.1 }, 0.0);
        let (phi, v) = m.solve_potential(&y, 0.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(max_abs(&phi) < 1e-14);
    }

    #[test]
    fn constant_charge_potential_matches_hand_solution() {
        // -eps^2 phi_xx = q with Robin rows on both ends:
        // phi = -k x^2/2 + A x + B, k = q/eps^2, B = ed A,
        // A (1 + 2 ed) = v + k/2 + ed k.
        let (eps, delta, v) = (0.1, 1.0, 0.25);
        let params = PnpParams {
            epsilon: eps,
            delta,
            ..voltage_params(v)
        };
        let m = PnpModel::new(Mesh::uniform(26).unwrap(), params).unwrap();
        let n = 26;
        let mut y = vec![1.1; n];
        y.extend(vec![1.0; n]);
        let q = 0.5 * 0.1;
        let k = q / (eps * eps);
        let ed = eps * delta;
        let a = (v + 0.5 * k + ed * k) / (1.0 + 2.0 * ed);
        let (phi, _) = m.solve_potential(&y, 0.0).unwrap();
        for (p, &x) in phi.iter().zip(m.mesh().nodes()) {
            assert!((p - (-0.5 * k * x * x + a * x + ed * a)).abs() < 1e-10);
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        for params in [voltage_params(0.0), current_params(0.0)] {
            let m = PnpModel::new(Mesh::uniform(31).unwrap(), params).unwrap();
            let y0 = m.initial_state(InitialProfile::Uniform, 0.0);
            let mut s = ConstantStepper::new(&m, Scheme::Vssbdf2, 0.0, y0.clone()).unwrap();
            let l0 = s.current().clone();
            assert!(max_abs(&l0.f) < 1e-12);
            // The cathode-field ODE is explicit with a 2/eps^2 rate, so
            // keep dt inside its stability limit.
            s.run(0.01, 40).unwrap();
            let d: Vec<f64> = s.current().y.iter().zip(&y0).map(|(a, b)| a - b).collect();
            assert!(max_abs(&d) < 1e-10);
        }
    }

    #[test]
    fn anion_mass_is_conserved() {
        let m = PnpModel::new(
            Mesh::piecewise_uniform(&[0.1, 0.9], &[8, 20, 8]).unwrap(),
            voltage_params(0.3),
        )
        .unwrap();
        let y0 = m.initial_state(InitialProfile::Sine { amplitude: 0.1 }, 0.0);
        let m0 = m.mass(m.c_minus(&y0));
        let mut s = ConstantStepper::new(&m, Scheme::Vssbdf2, 0.0, y0).unwrap();
        s.run(0.002, 200).unwrap();
        let m1 = m.mass(m.c_minus(&s.current().y));
        assert!((m1 - m0).abs() < 1e-12, "drift {}", m1 - m0);
    }

    #[test]
    fn postprocess_recovers_known_current() {
        // phi_x(1) = sin(t) with a zero faradaic term gives
        // j = -(eps^2/2) cos(t); times are deliberately nonuniform.
        let p = PnpParams::default();
        let times: Vec<f64> = (0..40)
            .map(|k| 0.01 * (k as f64) + 0.0004 * (k * k) as f64)
            .collect();
        let samples: Vec<CurrentSample> = times
            .iter()
            .map(|&t| CurrentSample {
                t,
                phix: t.sin(),
                c_plus: 1.0,
                delta_phi: 0.0,
            })
            .collect();
        let j = postprocess_current(&p, &samples).unwrap();
        for (ji, &t) in j.iter().zip(&times) {
            assert!((ji + 0.005 * t.cos()).abs() < 1e-5);
        }
        assert!(postprocess_current(&p, &samples[..2]).is_err());
    }
}
