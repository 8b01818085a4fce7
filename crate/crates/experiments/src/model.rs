//! Concrete systems built from a [`ModelConfig`].

use pnp_core::diffusion::DiffusionModel;
use pnp_core::ode::LinearOde;
use pnp_core::pnp::{InitialProfile, PnpModel};
use pnp_core::stepper::ImexSystem;
use pnp_core::toy::ToyModel;
use pnp_core::Mesh;

use crate::config::ModelConfig;
use crate::error::ExperimentError;

pub enum Model {
    Toy(ToyModel),
    Pnp {
        model: PnpModel,
        initial: InitialProfile,
        phix0: f64,
    },
    Diffusion(DiffusionModel),
    Ode(LinearOde),
}

impl Model {
    pub fn build(cfg: &ModelConfig, mesh: Mesh) -> Result<Self, ExperimentError> {
        Ok(match cfg {
            ModelConfig::Toy { variant } => Model::Toy(ToyModel::with_variant(mesh, *variant)?),
            ModelConfig::Pnp {
                params,
                initial,
                phix0,
            } => Model::Pnp {
                model: PnpModel::new(mesh, params.clone())?,
                initial: *initial,
                phix0: *phix0,
            },
            ModelConfig::Diffusion => Model::Diffusion(DiffusionModel::new(mesh)?),
            ModelConfig::LinearOde {
                implicit_rate,
                explicit_rate,
            } => Model::Ode(LinearOde {
                implicit_rate: *implicit_rate,
                explicit_rate: *explicit_rate,
                dim: 1,
            }),
        })
    }

    pub fn system(&self) -> &dyn ImexSystem {
        match self {
            Model::Toy(m) => m,
            Model::Pnp { model, .. } => model,
            Model::Diffusion(m) => m,
            Model::Ode(m) => m,
        }
    }

    pub fn initial_state(&self) -> Vec<f64> {
        match self {
            Model::Toy(m) => m.initial_state(),
            Model::Pnp {
                model,
                initial,
                phix0,
            } => model.initial_state(*initial, *phix0),
            Model::Diffusion(m) => m.sine_initial_state(),
            Model::Ode(_) => vec![1.0],
        }
    }

    pub fn mesh(&self) -> Option<&Mesh> {
        match self {
            Model::Toy(m) => Some(m.mesh()),
            Model::Pnp { model, .. } => Some(model.mesh()),
            Model::Diffusion(m) => Some(m.mesh()),
            Model::Ode(_) => None,
        }
    }

    pub fn pnp(&self) -> Option<&PnpModel> {
        match self {
            Model::Pnp { model, .. } => Some(model),
            _ => None,
        }
    }
}
