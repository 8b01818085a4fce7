//! Run configuration: model, mesh, stepping mode and output location.
//!
//! Configurations are JSON documents. Any key can be overridden from the
//! command line with `key.path=value`, where `value` is parsed as JSON and
//! falls back to a plain string.

use std::path::{Path, PathBuf};

use pnp_core::pnp::{InitialProfile, PnpParams};
use pnp_core::stepper::{AdaptiveConfig, Scheme};
use pnp_core::toy::ToyVariant;
use pnp_core::MeshSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ExperimentError;

/// Which system to integrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Toy {
        #[serde(default)]
        variant: ToyVariant,
    },
    Pnp {
        #[serde(default)]
        params: PnpParams,
        #[serde(default)]
        initial: InitialProfile,
        /// Initial cathode field, current-driven runs only.
        #[serde(default)]
        phix0: f64,
    },
    /// `u_t = u_xx` with zero Dirichlet data and `sin(pi x)` initial data.
    Diffusion,
    /// Scalar `u' = a u + b u` with `u(0) = 1`.
    LinearOde {
        implicit_rate: f64,
        explicit_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StepperMode {
    /// Error-controlled steps; see [`RunConfig::adaptive`].
    Adaptive,
    /// Plain constant steps without the coarse/fine machinery.
    Constant { dt: f64 },
    /// Coarse/fine steps of fixed size: `dt_small` until `t_switch`, then
    /// `dt_large`.
    Piecewise {
        dt_small: f64,
        dt_large: f64,
        t_switch: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: ModelConfig,
    pub mesh: MeshSpec,
    pub stepper: StepperMode,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub adaptive: AdaptiveConfig,
    pub t_end: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_name() -> String {
    "run".to_string()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        self.mesh.build()?;
        if let ModelConfig::Pnp { params, .. } = &self.model {
            params.validate()?;
        }
        match self.stepper {
            StepperMode::Adaptive => self.adaptive.validate()?,
            StepperMode::Constant { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return bad(format!("dt must be positive, got {dt}"));
            }
            StepperMode::Piecewise {
                dt_small,
                dt_large,
                t_switch,
            } if !(dt_small > 0.0 && dt_large > 0.0 && t_switch >= 0.0) => {
                return bad("piecewise schedule needs positive steps and t_switch >= 0".into());
            }
            _ => {}
        }
        if self.scheme == Scheme::ForwardEuler && matches!(self.model, ModelConfig::Pnp { .. }) {
            return bad("forward Euler is not available for the PNP model".into());
        }
        Ok(())
    }

    /// Applies `key.path=value` overrides and revalidates.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, ExperimentError> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut doc = serde_json::to_value(self)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Sets `path` (dot separated) in `doc` to `value`. Intermediate objects
/// are created as needed.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ExperimentError> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        ExperimentError::Config(format!("override `{assignment}` is not key=value"))
    })?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(ExperimentError::Config(format!("empty key in `{path}`")));
        }
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        let map = node.as_object_mut().unwrap();
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig {
            name: "t".into(),
            model: ModelConfig::Toy {
                variant: ToyVariant::BvGhost,
            },
            mesh: MeshSpec::Uniform { n: 21 },
            stepper: StepperMode::Adaptive,
            scheme: Scheme::Vssbdf2,
            adaptive: AdaptiveConfig::default(),
            t_end: 1.0,
            output_dir: None,
        }
    }

    #[test]
    fn round_trips_through_json() {
        let c = base();
        assert_eq!(RunConfig::from_json(&c.to_pretty_json()).unwrap(), c);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let c = base()
            .with_overrides(&[
                "adaptive.tol=1e-5".into(),
                "mesh.n=41".into(),
                "model.variant=bv_direct".into(),
            ])
            .unwrap();
        assert_eq!(c.adaptive.tol, 1e-5);
        assert_eq!(c.mesh, MeshSpec::Uniform { n: 41 });
        assert_eq!(
            c.model,
            ModelConfig::Toy {
                variant: ToyVariant::BvDirect
            }
        );
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(base().with_overrides(&["t_end=-1".into()]).is_err());
        assert!(base().with_overrides(&["mesh.n=2".into()]).is_err());
        assert!(base().with_overrides(&["nonsense".into()]).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"kind": "diffusion"}}"#).is_err());
    }

    #[test]
    fn minimal_document_uses_defaults() {
        let c = RunConfig::from_json(
            r#"{"model": {"kind": "pnp"}, "mesh": {"kind": "uniform", "n": 31},
                "stepper": {"mode": "adaptive"}, "t_end": 0.5}"#,
        )
        .unwrap();
        assert_eq!(c.adaptive, AdaptiveConfig::default());
        assert_eq!(c.scheme, Scheme::Vssbdf2);
    }
}
