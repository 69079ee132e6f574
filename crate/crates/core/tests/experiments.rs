use telewm_core::experiments::{
    blp_series, find_zero_deviation, grid_sweep, linspace, mc_teleportation_fidelity, presets,
    time_sweep, Scenario,
};
use telewm_core::metrics::DEFAULT_BLP_STEP;
use telewm_core::states::bell_type;
use telewm_core::{BellTypeParams, Error, NoiseModel, WeakMeasConfig};

fn mean_fidelity(model: NoiseModel) -> f64 {
    let s = Scenario::new(
        presets::THETA_WEAK,
        presets::one_sided_wm(),
        model,
        linspace(0.0, 10.0, 501),
        None,
    )
    .unwrap();
    let series = time_sweep(&s).unwrap();
    series.records.iter().map(|r| r.fidelity).sum::<f64>() / series.records.len() as f64
}

#[test]
fn smaller_angle_gives_smaller_deviation_under_weak_measurement() {
    let cells = grid_sweep(
        &[0.1, 0.7],
        &[1.0],
        &presets::one_sided_wm(),
        &presets::adc_non_markovian(),
    )
    .unwrap();
    assert!(cells[0].fidelity_deviation < cells[1].fidelity_deviation);
    assert!(cells[0].fidelity > cells[1].fidelity);
    assert!((cells[0].fidelity - 0.999289).abs() < 1e-6);
    assert!((cells[1].fidelity_deviation - 0.11183).abs() < 1e-5);
}

#[test]
fn initial_row_reproduces_bell_type_closed_forms() {
    let thetas = linspace(0.05, 1.5, 30);
    let cells = grid_sweep(
        &thetas,
        &[0.0],
        &WeakMeasConfig::one_sided(0.0, 0.0).unwrap(),
        &presets::adc_markovian(),
    )
    .unwrap();
    for c in cells {
        let s2 = (2.0 * c.theta).sin();
        assert!((c.fidelity - (2.0 / 3.0) * (1.0 + s2 / 2.0)).abs() < 1e-12);
        assert!((c.fidelity_deviation - (1.0 - s2) / (3.0 * 5f64.sqrt())).abs() < 1e-12);
    }
}

#[test]
fn leaving_the_memory_regime_lowers_mean_fidelity() {
    let pln_nm = mean_fidelity(presets::pln_non_markovian());
    let pln_m = mean_fidelity(presets::pln_markovian());
    assert!(pln_m < pln_nm, "{pln_m} vs {pln_nm}");
    assert!((pln_m - 0.92821).abs() < 1e-5 && (pln_nm - 0.97322).abs() < 1e-5);
    let oun_nm = mean_fidelity(presets::oun_non_markovian());
    let oun_m = mean_fidelity(presets::oun_markovian());
    assert!(oun_m < oun_nm, "{oun_m} vs {oun_nm}");
    assert!((oun_m - 0.79495).abs() < 1e-5 && (oun_nm - 0.98768).abs() < 1e-5);
}

#[test]
fn strong_memory_allows_zero_deviation() {
    let model = presets::cadc(0.99);
    let strengths = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9];
    let reversals = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99];
    let mut hit = None;
    'search: for &w in &strengths {
        for &wr in &reversals {
            let cfg = WeakMeasConfig::two_sided(w, wr).unwrap();
            let r = find_zero_deviation(presets::THETA_WEAK, &cfg, &model, (0.0, 10.0)).unwrap();
            if let (Some(t), Some(d)) = (r.t_star, r.deviation_at_root) {
                if t > 0.0 && d < 1e-6 {
                    hit = Some((w, wr, t));
                    break 'search;
                }
            }
        }
    }
    assert!(hit.is_some());
}

#[test]
fn reversal_strength_shifts_the_zero_deviation_time() {
    let model = presets::adc_markovian();
    let mut times = Vec::new();
    for wr in [0.993, 0.995, 0.997] {
        let cfg = WeakMeasConfig::one_sided(0.1, wr).unwrap();
        let r = find_zero_deviation(0.1, &cfg, &model, (0.0, 10.0)).unwrap();
        times.push(r.t_star.expect("root in bracket"));
    }
    assert!(times.windows(2).all(|w| w[1] > w[0]), "{times:?}");
}

#[test]
fn weak_measurement_amplifies_backflow() {
    let model = presets::adc_non_markovian();
    let grid = linspace(0.0, 40.0, 801);
    let max_sigma = |wr: f64| {
        let cfg = WeakMeasConfig::one_sided(0.1, wr).unwrap();
        blp_series(&model, &cfg, &grid, DEFAULT_BLP_STEP)
            .unwrap()
            .iter()
            .map(|p| p.sigma)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(max_sigma(0.99) > max_sigma(0.0));
}

#[test]
fn sweeps_are_deterministic() {
    let s = Scenario::new(
        0.3,
        presets::two_sided_wm(),
        presets::cadc(0.8),
        linspace(0.0, 10.0, 201),
        Some(1),
    )
    .unwrap();
    assert_eq!(time_sweep(&s).unwrap(), time_sweep(&s).unwrap());
    let state = bell_type(BellTypeParams::new(0.3).unwrap());
    assert_eq!(
        mc_teleportation_fidelity(&state, 5000, 17).unwrap(),
        mc_teleportation_fidelity(&state, 5000, 17).unwrap()
    );
}

#[test]
fn sweep_reports_failing_time() {
    let s = Scenario::new(
        0.1,
        WeakMeasConfig::one_sided(1.0 - 1e-15, 1.0 - 1e-15).unwrap(),
        NoiseModel::adc(0.2).unwrap(),
        vec![0.0, 1.0],
        None,
    )
    .unwrap();
    match time_sweep(&s) {
        Err(Error::SuccessProbTooSmall { t, .. }) => assert_eq!(t, Some(0.0)),
        other => panic!("expected failure, got {other:?}"),
    }
}
