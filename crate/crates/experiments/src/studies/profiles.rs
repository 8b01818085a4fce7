//! Late-time concentration and potential profiles under a driven
//! current, for a ladder of Debye ratios.

use pnp_core::Mesh;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ModelConfig, RunConfig};
use crate::error::ExperimentError;
use crate::model::Model;
use crate::simulate::simulate;

/// Boundary-layer widths of a profile.
///
/// The bulk is described by a least-squares line through the nodes in
/// `[0.25, 0.75]`. Each width is the distance from an end to the first
/// node where the profile is back within `rel_tol` times the bulk value at
/// `x = 1/2` of that line. Under a driven current the bulk carries a
/// gradient, so comparing against a constant would measure the gradient
/// rather than the layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerWidth {
    pub left: f64,
    pub right: f64,
}

impl LayerWidth {
    pub fn max(&self) -> f64 {
        self.left.max(self.right)
    }
}

pub fn layer_width(mesh: &Mesh, c: &[f64], rel_tol: f64) -> LayerWidth {
    let x = mesh.nodes();
    let n = x.len();
    let bulk: Vec<usize> = (0..n).filter(|&i| (0.25..=0.75).contains(&x[i])).collect();
    let m = bulk.len() as f64;
    let xm = bulk.iter().map(|&i| x[i]).sum::<f64>() / m;
    let cm = bulk.iter().map(|&i| c[i]).sum::<f64>() / m;
    let sxx: f64 = bulk.iter().map(|&i| (x[i] - xm).powi(2)).sum();
    let sxy: f64 = bulk.iter().map(|&i| (x[i] - xm) * (c[i] - cm)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let line = |t: f64| cm + slope * (t - xm);
    let tol = rel_tol * line(0.5).abs();
    let close = |i: usize| (c[i] - line(x[i])).abs() <= tol;
    let left = (0..n).find(|&i| close(i)).map_or(1.0, |i| x[i] - x[0]);
    let right = (0..n)
        .rev()
        .find(|&i| close(i))
        .map_or(1.0, |i| x[n - 1] - x[i]);
    LayerWidth { left, right }
}

#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub epsilon: f64,
    pub t_final: f64,
    pub steps: usize,
    pub blow_up: Option<f64>,
    pub failure: Option<String>,
    pub x: Vec<f64>,
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    pub phi: Vec<f64>,
    pub layer_width: LayerWidth,
    /// Largest `|M(t) - M(0)|` of the anion mass over all levels.
    pub anion_mass_drift: f64,
}

pub const LAYER_TOLERANCE: f64 = 0.05;

/// Runs one PNP configuration and extracts its final profiles.
pub fn run_profile(cfg: &RunConfig) -> Result<Profile, ExperimentError> {
    let model = Model::build(&cfg.model, cfg.mesh.build()?)?;
    let pnp = model
        .pnp()
        .ok_or_else(|| ExperimentError::Config("profiles need the PNP model".into()))?;
    let mut m0 = None;
    let mut drift: f64 = 0.0;
    let out = simulate(&model, cfg, &mut |l| {
        let m = pnp.mass(pnp.c_minus(&l.y));
        let m0 = *m0.get_or_insert(m);
        drift = drift.max((m - m0).abs());
    })?;
    let l = &out.final_level;
    let c_plus = pnp.c_plus(&l.y).to_vec();
    Ok(Profile {
        epsilon: pnp.params().epsilon,
        t_final: l.t,
        steps: out.reports.len(),
        blow_up: out.blow_up,
        failure: out.failure.clone(),
        x: pnp.mesh().nodes().to_vec(),
        layer_width: layer_width(pnp.mesh(), &c_plus, LAYER_TOLERANCE),
        c_plus,
        c_minus: pnp.c_minus(&l.y).to_vec(),
        phi: pnp.phi(&l.aux).to_vec(),
        anion_mass_drift: drift,
    })
}

/// Runs one configuration per entry of `cases`, each an `epsilon` with
/// its mesh. Runs execute in parallel.
pub fn run_steady_profiles(
    base: &RunConfig,
    cases: &[(f64, pnp_core::MeshSpec)],
) -> Result<Vec<Profile>, ExperimentError> {
    let configs: Vec<RunConfig> = cases
        .iter()
        .map(|(eps, mesh)| {
            let mut c = base.clone();
            let ModelConfig::Pnp { params, .. } = &mut c.model else {
                return Err(ExperimentError::Config(
                    "profiles need the PNP model".into(),
                ));
            };
            params.epsilon = *eps;
            c.mesh = mesh.clone();
            c.name = format!("{}-eps{eps:e}", base.name);
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<_, _>>()?;
    configs.par_iter().map(run_profile).collect()
}
