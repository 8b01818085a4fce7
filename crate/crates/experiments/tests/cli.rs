use std::path::Path;
use std::process::{Command, Output};

fn pnpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pnpsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn run_writes_config_and_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("toy.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"kind": "toy", "variant": "bv_ghost"},
            "mesh": {"kind": "uniform", "n": 21},
            "stepper": {"mode": "adaptive"},
            "t_end": 2.0}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = pnpsim(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        out_arg(&out),
        "--tol",
        "1e-5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.json", "series.csv", "state.csv", "summary.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let c = json(&out.join("config.json"));
    assert_eq!(c["adaptive"]["tol"], 1e-5);
    assert!((c["adaptive"]["range"].as_f64().unwrap() - 1e-5 / 3.0).abs() < 1e-20);
    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(series.starts_with("step,t,dt,lte,attempts,clamp,ut_norm\n"));
    assert!(json(&out.join("summary.json"))["t_final"].as_f64().unwrap() >= 2.0);
}

#[test]
fn flags_override_the_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pnpsim(&[
        "adaptive",
        "--out",
        out_arg(tmp.path()),
        "--t-end",
        "3",
        "--nodes",
        "20",
        "--set",
        "adaptive.dt_max=0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = json(&tmp.path().join("config.json"));
    assert_eq!(c["t_end"], 3.0);
    assert_eq!(c["mesh"]["n"], 20);
    assert_eq!(c["adaptive"]["dt_max"], 0.5);
}

#[test]
fn blow_up_sets_the_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "piecewise-dt",
        "--out",
        out_arg(tmp.path()),
        "--t-end",
        "30",
    ];
    let o = pnpsim(&args);
    assert_eq!(o.status.code(), Some(3));
    let s = json(&tmp.path().join("summary.json"));
    assert!(s["blow_up"].as_f64().unwrap() > 10.0);

    let mut expect = args.to_vec();
    expect.push("--expect-blowup");
    assert!(pnpsim(&expect).status.success());
}

#[test]
fn convergence_reports_every_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pnpsim(&[
        "convergence",
        "--case",
        "bv-direct",
        "--halvings",
        "3",
        "--out",
        out_arg(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&tmp.path().join("convergence.json"));
    let ratios = r["report"]["ratios"].as_array().unwrap();
    assert_eq!(ratios.len(), 2);
    for q in ratios {
        assert!((1.5..3.0).contains(&q.as_f64().unwrap()));
    }
}

#[test]
fn stability_report_writes_roots() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pnpsim(&[
        "stability-report",
        "--t-end",
        "5",
        "--k",
        "3",
        "--out",
        out_arg(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let roots = std::fs::read_to_string(tmp.path().join("roots.csv")).unwrap();
    assert!(roots.starts_with("step,t,dt,rho_1,rho_2,rho_3\n"));
    let s = json(&tmp.path().join("summary.json"));
    assert_eq!(s["trajectory"]["zero_eigenvalues"], 1);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"kind": "diffusion"}, "mesh": {"kind": "uniform", "n": 11},
            "stepper": {"mode": "adaptive"}, "t_end": 1.0, "tolerance": 1e-6}"#,
    )
    .unwrap();
    let o = pnpsim(&["run", cfg.to_str().unwrap(), "--out", out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerance"));
}

#[test]
fn profiles_are_written_per_epsilon() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pnpsim(&[
        "steady-profiles",
        "--eps",
        "0.1",
        "--t-end",
        "1",
        "--out",
        out_arg(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = std::fs::read_to_string(tmp.path().join("profile-eps1e-1.csv")).unwrap();
    assert!(p.starts_with("x,c_plus,c_minus,phi\n"));
    assert_eq!(p.lines().count(), 92);
}
