use pnp_experiments::presets;
use pnp_experiments::studies::{adaptive, profiles, voltage};

#[test]
fn blow_up_is_later_for_smaller_large_steps() {
    let times: Vec<f64> = [1.0, 0.6, 0.3]
        .iter()
        .map(|&dt| {
            let mut cfg = presets::toy_piecewise(dt);
            cfg.t_end = 400.0;
            adaptive::run_piecewise(&cfg)
                .unwrap()
                .1
                .blow_up
                .expect("blow-up")
        })
        .collect();
    assert!(times.windows(2).all(|w| w[0] < w[1]), "{times:?}");
}

#[test]
fn layers_thin_with_the_debye_ratio() {
    let cases: Vec<_> = [0.1, 0.01]
        .iter()
        .map(|&e| (e, presets::profile_mesh(e)))
        .collect();
    let runs = profiles::run_steady_profiles(&presets::steady_profiles(), &cases).unwrap();
    let w: Vec<f64> = runs.iter().map(|p| p.layer_width.max()).collect();
    assert!(w[1] < 0.5 * w[0], "{w:?}");
    for p in &runs {
        assert!(p.blow_up.is_none() && p.failure.is_none());
        assert!(p.c_plus.iter().chain(&p.c_minus).all(|c| *c > 0.0));
    }
}

#[test]
fn voltage_dips_sit_at_the_steps() {
    let (_, trace, report) = voltage::run_voltage_steps(
        &presets::voltage_steps(),
        voltage::DipSettings::default(),
        &[],
    )
    .unwrap();
    let dips = &report.main.dips;
    assert_eq!(dips.len(), 4);
    for (d, t) in dips.iter().zip([7.5, 8.0, 8.5, 9.0]) {
        assert!((d.t_start - t).abs() < 0.05, "{d:?}");
    }
    let v_end = trace.last().unwrap().1;
    assert!((v_end - 0.4).abs() < 1e-3, "{v_end}");
}
