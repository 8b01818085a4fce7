use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pnp_core::stepper::Scheme;
use pnp_core::toy::ToyVariant;
use pnp_experiments::output::OutputDir;
use pnp_experiments::studies::{adaptive, convergence, profiles, scaling, stability, voltage};
use pnp_experiments::{presets, ExperimentError, RunConfig, StepperMode};
use serde_json::json;

/// Exit status when a run blows up and `--expect-blowup` was not given.
const BLOW_UP_EXIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pnpsim",
    version,
    about = "Adaptive IMEX BDF2 experiments for PNP-type systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Base configuration file (JSON); replaces the built-in preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set adaptive.tol=1e-7`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Error tolerance; also sets `range = tol/3`.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    dt_min: Option<f64>,
    #[arg(long)]
    dt_max: Option<f64>,
    /// Uniform mesh with this many nodes.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Exit successfully even if a run blows up.
    #[arg(long)]
    expect_blowup: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Vssbdf2,
    ImexEuler,
    ForwardEuler,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Vssbdf2 => Scheme::Vssbdf2,
            SchemeArg::ImexEuler => Scheme::ImexEuler,
            SchemeArg::ForwardEuler => Scheme::ForwardEuler,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvergenceCase {
    BvGhost,
    BvDirect,
    HomogeneousDirichlet,
    LinearCoupled,
    NonlinearUncoupled,
    Pnp,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdaptiveCase {
    Toy,
    Diffusion,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration file.
    Run {
        config_file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Constant-step convergence ladder.
    Convergence {
        #[arg(long, value_enum, default_value = "bv-ghost")]
        case: ConvergenceCase,
        /// Largest step; defaults to the case's standard value.
        #[arg(long)]
        dt0: Option<f64>,
        #[arg(long, default_value_t = presets::LADDER_HALVINGS)]
        halvings: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Adaptive run with threshold detection.
    Adaptive {
        #[arg(long, value_enum, default_value = "toy")]
        case: AdaptiveCase,
        /// Trailing fraction of the run used to average dt.
        #[arg(long, default_value_t = 0.2)]
        window: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Fixed small steps, then fixed large steps.
    PiecewiseDt {
        #[arg(long)]
        dt_small: Option<f64>,
        #[arg(long)]
        dt_large: Option<f64>,
        #[arg(long)]
        t_switch: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Threshold step size against the Debye ratio.
    EpsScaling {
        #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3, 1e-4])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = presets::SCALING_REFERENCE_EPS)]
        reference_eps: f64,
        #[arg(long, default_value_t = 0.2)]
        window: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Staircase voltage protocol and the dt response.
    VoltageSteps {
        #[arg(long, default_value_t = 1e-3)]
        dip_level: f64,
        #[arg(long, default_value_t = 0.1)]
        merge_gap: f64,
        /// Extra runs with these dt_min values.
        #[arg(long, value_delimiter = ',', default_values_t = [1e-10, 1e-8])]
        sensitivity: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Profiles under a driven current for several Debye ratios.
    SteadyProfiles {
        #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3])]
        eps: Vec<f64>,
        #[arg(long)]
        j_ext: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Amplification roots: closed-form checks and an adaptive trajectory.
    StabilityReport {
        /// Largest root magnitudes kept per step.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut o = Vec::new();
        if let Some(t) = self.t_end {
            o.push(format!("t_end={t}"));
        }
        if let Some(t) = self.tol {
            o.push(format!("adaptive.tol={t}"));
            o.push(format!("adaptive.range={}", t / 3.0));
        }
        if let Some(d) = self.dt_min {
            o.push(format!("adaptive.dt_min={d}"));
        }
        if let Some(d) = self.dt_max {
            o.push(format!("adaptive.dt_max={d}"));
        }
        if let Some(n) = self.nodes {
            o.push(format!(r#"mesh={{"kind":"uniform","n":{n}}}"#));
        }
        if let Some(s) = self.scheme {
            o.push(format!(
                "scheme={}",
                serde_json::to_string(&Scheme::from(s)).unwrap()
            ));
        }
        o.extend(self.overrides.iter().cloned());
        o
    }

    /// The preset (or `--config` file) with all flags applied.
    fn resolve(&self, preset: RunConfig, extra: &[String]) -> Result<RunConfig, ExperimentError> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => preset,
        };
        let mut all = extra.to_vec();
        all.extend(self.overrides());
        base.with_overrides(&all)
    }

    fn out_dir(&self, cfg: &RunConfig, default: &str) -> Result<OutputDir, ExperimentError> {
        let dir = self
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(default));
        OutputDir::create(dir)
    }
}

struct Finished {
    blew_up: bool,
    expect_blowup: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(f) if f.blew_up && !f.expect_blowup => {
            eprintln!("blow-up detected (pass --expect-blowup if this is intended)");
            ExitCode::from(BLOW_UP_EXIT)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).unwrap());
}

fn execute(command: Command) -> Result<Finished, ExperimentError> {
    match command {
        Command::Run {
            config_file,
            common,
        } => {
            let common = Common {
                config: Some(config_file),
                ..common
            };
            let cfg = common.resolve(presets::toy_adaptive(40, 1e-6), &[])?;
            let out = common.out_dir(&cfg, &cfg.name)?;
            out.config(&cfg)?;
            let (_, run) = pnp_experiments::run_config(&cfg)?;
            let summary = adaptive::AdaptiveSummary::from_outcome(&cfg, &run, 0.2);
            out.series("series.csv", &run.reports)?;
            out.state("state.csv", &run.final_level.y)?;
            out.json("summary.json", &summary)?;
            print_json(&summary);
            Ok(Finished {
                blew_up: run.blow_up.is_some(),
                expect_blowup: common.expect_blowup,
            })
        }
        Command::Convergence {
            case,
            dt0,
            halvings,
            common,
        } => {
            let (preset, default_dt0) = match case {
                ConvergenceCase::Pnp => (presets::pnp_convergence(), presets::PNP_DT0),
                c => {
                    let v = match c {
                        ConvergenceCase::BvGhost => ToyVariant::BvGhost,
                        ConvergenceCase::BvDirect => ToyVariant::BvDirect,
                        ConvergenceCase::HomogeneousDirichlet => ToyVariant::HomogeneousDirichlet,
                        ConvergenceCase::LinearCoupled => ToyVariant::LinearCoupled,
                        _ => ToyVariant::NonlinearUncoupled,
                    };
                    (presets::toy_convergence(v), presets::TOY_DT0)
                }
            };
            let dt0 = dt0.unwrap_or(default_dt0);
            let cfg = common.resolve(preset, &[])?;
            let out = common.out_dir(&cfg, &cfg.name)?;
            out.config(&cfg)?;
            let report = convergence::run_convergence(&cfg, dt0, halvings)?;
            let doc = json!({ "dt0": dt0, "halvings": halvings, "report": report });
            out.json("convergence.json", &doc)?;
            for (i, r) in report.ratios.iter().enumerate() {
                match r {
                    Some(r) => println!("dt = {:<12.6e} ratio {r:.3}", report.rungs[i].dt),
                    None => println!(
                        "dt = {:<12.6e} ratio unavailable (failed run)",
                        report.rungs[i].dt
                    ),
                }
            }
            Ok(Finished {
                blew_up: report.rungs.iter().any(|r| r.blow_up.is_some()),
                expect_blowup: common.expect_blowup,
            })
        }
        Command::Adaptive {
            case,
            window,
            common,
        } => {
            let preset = match case {
                AdaptiveCase::Toy => presets::toy_adaptive(40, 1e-6),
                AdaptiveCase::Diffusion => presets::diffusion_adaptive(40, Scheme::Vssbdf2),
            };
            let cfg = common.resolve(preset, &[])?;
            let out = common.out_dir(&cfg, "adaptive")?;
            out.config(&cfg)?;
            let (run, summary) = adaptive::run_adaptive(&cfg, window)?;
            out.series("series.csv", &run.reports)?;
            out.json("summary.json", &summary)?;
            print_json(&summary);
            Ok(Finished {
                blew_up: run.blow_up.is_some(),
                expect_blowup: common.expect_blowup,
            })
        }
        Command::PiecewiseDt {
            dt_small,
            dt_large,
            t_switch,
            common,
        } => {
            let mut extra = Vec::new();
            for (k, v) in [
                ("dt_small", dt_small),
                ("dt_large", dt_large),
                ("t_switch", t_switch),
            ] {
                if let Some(v) = v {
                    extra.push(format!("stepper.{k}={v}"));
                }
            }
            let cfg = common.resolve(presets::toy_piecewise(1.5), &extra)?;
            let out = common.out_dir(&cfg, "piecewise-dt")?;
            out.config(&cfg)?;
            let (run, summary) = adaptive::run_piecewise(&cfg)?;
            out.series("series.csv", &run.reports)?;
            out.json("summary.json", &summary)?;
            print_json(&summary);
            Ok(Finished {
                blew_up: run.blow_up.is_some(),
                expect_blowup: common.expect_blowup,
            })
        }
        Command::EpsScaling {
            eps,
            reference_eps,
            window,
            common,
        } => {
            let cfg = common.resolve(presets::epsilon_scaling(), &[])?;
            let out = common.out_dir(&cfg, "eps-scaling")?;
            out.config(&cfg)?;
            let rows = scaling::run_epsilon_scaling(&cfg, &eps, reference_eps, window)?;
            #[derive(serde::Serialize)]
            struct Flat {
                epsilon: f64,
                t_end: f64,
                time_scale: f64,
                steps: usize,
                dt_inf: Option<f64>,
                ratio: Option<f64>,
                slope: Option<f64>,
                settled: Option<bool>,
                blow_up: Option<f64>,
            }
            let flat: Vec<Flat> = rows
                .iter()
                .map(|r| Flat {
                    epsilon: r.epsilon,
                    t_end: r.t_end,
                    time_scale: r.time_scale,
                    steps: r.steps,
                    dt_inf: r.threshold.map(|t| t.dt_inf),
                    ratio: r.ratio,
                    slope: r.threshold.map(|t| t.slope),
                    settled: r.threshold.map(|t| t.settled),
                    blow_up: r.blow_up,
                })
                .collect();
            out.rows("scaling.csv", &flat)?;
            out.json(
                "summary.json",
                &json!({ "reference_eps": reference_eps, "window": window, "rows": rows }),
            )?;
            for r in &flat {
                println!(
                    "eps {:<8.1e} dt_inf {:<12} dt_inf/eps^2 {:<8} settled {:?}{}",
                    r.epsilon,
                    r.dt_inf.map_or("-".into(), |d| format!("{d:.3e}")),
                    r.ratio.map_or("-".into(), |q| format!("{q:.3}")),
                    r.settled,
                    if r.time_scale < 1.0 {
                        format!(" (t_end shortened to {:.3e})", r.t_end)
                    } else {
                        String::new()
                    }
                );
            }
            Ok(Finished {
                blew_up: rows.iter().any(|r| r.blow_up.is_some()),
                expect_blowup: common.expect_blowup,
            })
        }
        Command::VoltageSteps {
            dip_level,
            merge_gap,
            sensitivity,
            common,
        } => {
            let cfg = common.resolve(presets::voltage_steps(), &[])?;
            let out = common.out_dir(&cfg, "voltage-steps")?;
            out.config(&cfg)?;
            let settings = voltage::DipSettings {
                level: dip_level,
                merge_gap,
                ..Default::default()
            };
            let (run, trace, report) = voltage::run_voltage_steps(&cfg, settings, &sensitivity)?;
            out.series("series.csv", &run.reports)?;
            out.pairs("voltage.csv", ["t", "v"], &trace)?;
            out.json("summary.json", &report)?;
            for s in std::iter::once(&report.main).chain(&report.sensitivity) {
                println!(
                    "dt_min {:.0e}: {} steps, {} dips, share of steps with dt > {:.0e}: {:.3}, share of time: {:.3}",
                    s.dt_min,
                    s.steps,
                    s.dips.len(),
                    settings.large_dt,
                    s.step_share_large,
                    s.time_share_large
                );
            }
            Ok(Finished {
                blew_up: std::iter::once(&report.main)
                    .chain(&report.sensitivity)
                    .any(|s| s.blow_up.is_some()),
                expect_blowup: common.expect_blowup,
            })
        }
        Command::SteadyProfiles { eps, j_ext, common } => {
            let extra: Vec<String> = j_ext
                .map(|j| format!(r#"model.params.drive={{"mode":"current","j_ext":{j}}}"#))
                .into_iter()
                .collect();
            let cfg = common.resolve(presets::steady_profiles(), &extra)?;
            let out = common.out_dir(&cfg, "steady-profiles")?;
            out.config(&cfg)?;
            let cases: Vec<_> = if common.nodes.is_some() {
                eps.iter().map(|&e| (e, cfg.mesh.clone())).collect()
            } else {
                eps.iter().map(|&e| (e, presets::profile_mesh(e))).collect()
            };
            let runs = profiles::run_steady_profiles(&cfg, &cases)?;
            let mut summary = Vec::new();
            for p in &runs {
                out.profile(&format!("profile-eps{:e}.csv", p.epsilon), p)?;
                println!(
                    "eps {:<8.1e} layer width left {:.4} right {:.4}, anion mass drift {:.2e}",
                    p.epsilon, p.layer_width.left, p.layer_width.right, p.anion_mass_drift
                );
                summary.push(json!({
                    "epsilon": p.epsilon,
                    "t_final": p.t_final,
                    "steps": p.steps,
                    "blow_up": p.blow_up,
                    "failure": p.failure,
                    "layer_width": p.layer_width,
                    "anion_mass_drift": p.anion_mass_drift,
                    "mesh": cases.iter().find(|c| c.0 == p.epsilon).map(|c| &c.1),
                }));
            }
            out.json("summary.json", &summary)?;
            Ok(Finished {
                blew_up: runs.iter().any(|p| p.blow_up.is_some()),
                expect_blowup: common.expect_blowup,
            })
        }
        Command::StabilityReport { k, common } => {
            let cfg = common.resolve(presets::toy_adaptive(40, 1e-6), &[])?;
            if cfg.stepper != StepperMode::Adaptive {
                return Err(ExperimentError::Config(
                    "stability report needs adaptive stepping".into(),
                ));
            }
            let out = common.out_dir(&cfg, "stability-report")?;
            out.config(&cfg)?;
            let closed = stability::closed_form_checks()?;
            let (rows, traj) = stability::run_trajectory_report(&cfg, k, 1e-12)?;
            out.roots("roots.csv", &rows)?;
            let doc = json!({ "closed_form": closed, "trajectory": traj });
            out.json("summary.json", &doc)?;
            print_json(&doc);
            Ok(Finished {
                blew_up: false,
                expect_blowup: common.expect_blowup,
            })
        }
    }
}
