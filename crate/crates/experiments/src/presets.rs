//! Ready-made configurations for the standard studies.

use pnp_core::pnp::{Drive, InitialProfile, PnpParams, VoltageProtocol};
use pnp_core::stepper::{AdaptiveConfig, Scheme};
use pnp_core::toy::ToyVariant;
use pnp_core::MeshSpec;

use crate::config::{ModelConfig, RunConfig, StepperMode};

fn base(
    name: &str,
    model: ModelConfig,
    mesh: MeshSpec,
    stepper: StepperMode,
    t_end: f64,
) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        model,
        mesh,
        stepper,
        scheme: Scheme::Vssbdf2,
        adaptive: AdaptiveConfig::default(),
        t_end,
        output_dir: None,
    }
}

fn uniform_dx(inverse_dx: usize) -> MeshSpec {
    MeshSpec::Uniform { n: inverse_dx + 1 }
}

pub const TOY_DT0: f64 = 0.001;
pub const PNP_DT0: f64 = 0.005;
pub const LADDER_HALVINGS: usize = 6;

/// Toy model on `dx = 1/20` to `t = 1` with constant steps; the step size
/// is set by the convergence ladder.
pub fn toy_convergence(variant: ToyVariant) -> RunConfig {
    base(
        &format!(
            "convergence-{}",
            serde_json::to_value(variant).unwrap().as_str().unwrap()
        ),
        ModelConfig::Toy { variant },
        uniform_dx(20),
        StepperMode::Constant { dt: TOY_DT0 },
        1.0,
    )
}

/// Wavy but neutral initial concentrations; a uniform state with zero
/// field is already at rest.
pub fn sine_profile() -> InitialProfile {
    InitialProfile::Sine { amplitude: 0.1 }
}

pub fn current_params(j_ext: f64) -> PnpParams {
    PnpParams {
        drive: Drive::Current { j_ext },
        ..PnpParams::default()
    }
}

pub fn voltage_params(protocol: VoltageProtocol) -> PnpParams {
    PnpParams {
        drive: Drive::Voltage { protocol },
        ..PnpParams::default()
    }
}

/// Perturbation that already satisfies the boundary conditions. The sine
/// profile does not, and the resulting initial layer costs about half an
/// order in a constant-step ladder.
pub fn bump_profile() -> InitialProfile {
    InitialProfile::Bump { amplitude: 0.1 }
}

/// Current-driven PNP with `j_ext = 0` on `dx = 1/300` to `t = 0.1`.
pub fn pnp_convergence() -> RunConfig {
    base(
        "convergence-pnp",
        ModelConfig::Pnp {
            params: current_params(0.0),
            initial: bump_profile(),
            phix0: 0.0,
        },
        uniform_dx(300),
        StepperMode::Constant { dt: PNP_DT0 },
        0.1,
    )
}

/// Adaptive toy run with Butler-Volmer-like ghost-point boundaries.
pub fn toy_adaptive(n: usize, tol: f64) -> RunConfig {
    RunConfig {
        adaptive: AdaptiveConfig::with_tol(tol),
        ..base(
            "adaptive-toy",
            ModelConfig::Toy {
                variant: ToyVariant::BvGhost,
            },
            MeshSpec::Uniform { n },
            StepperMode::Adaptive,
            50.0,
        )
    }
}

/// Heat equation with `sin(pi x)` data.
pub fn diffusion_adaptive(n: usize, scheme: Scheme) -> RunConfig {
    RunConfig {
        scheme,
        ..base(
            "adaptive-diffusion",
            ModelConfig::Diffusion,
            MeshSpec::Uniform { n },
            StepperMode::Adaptive,
            if scheme == Scheme::ForwardEuler {
                2.0
            } else {
                20.0
            },
        )
    }
}

/// Toy run with `dt = 0.01` up to `t = 10`, then `dt_large`.
pub fn toy_piecewise(dt_large: f64) -> RunConfig {
    base(
        "piecewise-dt",
        ModelConfig::Toy {
            variant: ToyVariant::BvGhost,
        },
        MeshSpec::Uniform { n: 40 },
        StepperMode::Piecewise {
            dt_small: 0.01,
            dt_large,
            t_switch: 10.0,
        },
        50.0,
    )
}

pub const SCALING_REFERENCE_EPS: f64 = 0.1;

/// Voltage-driven PNP at `v = 0`; `t_end` is for the reference epsilon.
pub fn epsilon_scaling() -> RunConfig {
    base(
        "eps-scaling",
        ModelConfig::Pnp {
            params: voltage_params(VoltageProtocol::Constant { value: 0.0 }),
            initial: sine_profile(),
            phix0: 0.0,
        },
        MeshSpec::Uniform { n: 41 },
        StepperMode::Adaptive,
        20.0,
    )
}

/// Four voltage steps of 0.1 between `t = 7.5` and `t = 9`, on 90 nodes.
pub fn voltage_steps() -> RunConfig {
    base(
        "voltage-steps",
        ModelConfig::Pnp {
            params: voltage_params(VoltageProtocol::staircase()),
            initial: sine_profile(),
            phix0: 0.0,
        },
        MeshSpec::Uniform { n: 90 },
        StepperMode::Adaptive,
        10.0,
    )
}

/// Current-driven PNP with `j_ext = 0.5` run to `t = 5`.
pub fn steady_profiles() -> RunConfig {
    base(
        "steady-profiles",
        ModelConfig::Pnp {
            params: current_params(0.5),
            initial: InitialProfile::Uniform,
            phix0: 0.0,
        },
        uniform_dx(90),
        StepperMode::Adaptive,
        5.0,
    )
}

/// Mesh per epsilon for the steady-profile ladder: `dx = 1/90` down to
/// `epsilon = 0.01`, refined boundary zones below.
pub fn profile_mesh(epsilon: f64) -> MeshSpec {
    if epsilon >= 0.01 {
        uniform_dx(90)
    } else {
        MeshSpec::Piecewise {
            breakpoints: vec![0.1, 0.9],
            counts: vec![60, 60, 60],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        let mut all = vec![
            pnp_convergence(),
            toy_adaptive(40, 1e-6),
            diffusion_adaptive(20, Scheme::ForwardEuler),
            toy_piecewise(1.5),
            epsilon_scaling(),
            voltage_steps(),
            steady_profiles(),
        ];
        all.extend(ToyVariant::ALL.iter().map(|&v| toy_convergence(v)));
        for c in all {
            c.validate().unwrap();
        }
    }

    #[test]
    fn meshes_have_the_stated_spacing() {
        let m = toy_convergence(ToyVariant::BvGhost).mesh.build().unwrap();
        assert!((m.dx(0) - 0.05).abs() < 1e-15);
        let m = profile_mesh(1e-3).build().unwrap();
        assert!((m.dx(0) - 1.0 / 600.0).abs() < 1e-12);
        assert!((m.dx(90) - 1.0 / 75.0).abs() < 1e-12);
        assert_eq!(pnp_convergence().mesh.build().unwrap().len(), 301);
    }
}
