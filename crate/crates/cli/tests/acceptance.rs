//! End-to-end acceptance gate: one test per numbered criterion, each
//! asserting the published anchor values or the statistically expected
//! simulation outcome. All runs are fixed-seed and deterministic.

use qfcsim_cli::scenarios::{converted_plan, custom_plan, unconverted_plan};
use qfcsim_cli::Config;
use qfcsim_core::analysis::{
    estimate_snr, expected_g2, g2_at_zero, micromotion_spectrum, normalize_g2, NoiseDecomposition,
};
use qfcsim_core::budget::{optimal_pump, pump_snr};
use qfcsim_core::emitter::{EmitterParams, CALIBRATION_BIN_WIDTH};
use qfcsim_core::pipeline::simulate;
use qfcsim_core::qfc::{
    efficiency, noise_rate, solve_double_resonance, ConversionModel, NoiseModel, TuningModel,
};
use qfcsim_core::tcspc::{full_correlation, DetectorModel, HistogramConfig};

fn g2_zero_of_run(plan: &qfcsim_core::SimulationPlan) -> (f64, f64) {
    let result = simulate(plan).expect("simulation runs");
    let curve = normalize_g2(&result.histogram).expect("normalizable");
    g2_at_zero(&curve).expect("central bin present")
}

#[test]
fn criterion_1_expected_g2_arithmetic() {
    let g_unconverted = expected_g2(15.8, 0.035).unwrap();
    assert!(
        (g_unconverted - 0.146).abs() <= 0.001,
        "expected_g2(15.8, 0.035) = {g_unconverted}"
    );
    let g_converted = expected_g2(1.80, 0.035).unwrap();
    assert!(
        (g_converted - 0.602).abs() <= 0.001,
        "expected_g2(1.80, 0.035) = {g_converted}"
    );
}

#[test]
fn criterion_2_snr_decompositions() {
    let unconverted = NoiseDecomposition::new(276.0, 359.0, 6.0, 10_800.0).unwrap();
    let snr = estimate_snr(&unconverted);
    assert!((snr - 15.8).abs() <= 0.1, "unconverted snr = {snr}");
    let converted = NoiseDecomposition::new(200.0, 20.0, 0.0, 615.0).unwrap();
    let snr = estimate_snr(&converted);
    assert!((snr - 1.80).abs() <= 0.02, "converted snr = {snr}");
}

#[test]
fn criterion_3_unconverted_scenario_over_20_seeds() {
    let cfg = Config::default();
    let duration = cfg.get("scenario.unconverted_duration_s");
    let mut values = Vec::new();
    let mut prediction = 0.0;
    for seed in 1..=20u64 {
        let (plan, design) = unconverted_plan(&cfg, seed, duration).unwrap();
        let (g2, err) = g2_zero_of_run(&plan);
        let a = plan.emitter.bin_averaged_min(plan.histogram.bin_width).unwrap();
        prediction = expected_g2(design.snr().unwrap(), a).unwrap();
        let sigma = (0.022f64 * 0.022 + err * err).sqrt();
        assert!(
            (g2 - 0.167).abs() < 3.0 * sigma,
            "seed {seed}: g2(0) = {g2:.4} ± {err:.4}, outside 0.167 ± {:.4}",
            3.0 * sigma
        );
        values.push(g2);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!(
        (mean - prediction).abs() < 0.03,
        "20-seed mean {mean:.4} vs prediction {prediction:.4}"
    );
}

#[test]
fn criterion_4_converted_scenario() {
    let cfg = Config::default();
    let full = cfg.get("scenario.converted_duration_s");

    // Matched (1/10) statistics against the published value, with the error
    // band widened by sqrt(10) on top of the published 0.055.
    let (plan, _) = converted_plan(&cfg, 7, full / 10.0).unwrap();
    let (g2, err) = g2_zero_of_run(&plan);
    let sigma = (0.055f64 * 0.055 * 10.0 + err * err).sqrt();
    assert!(
        (g2 - 0.645).abs() < 3.0 * sigma,
        "reduced stats: g2(0) = {g2:.3} ± {err:.3} vs 0.645 ± {:.3}",
        3.0 * sigma
    );

    // Full statistics: below the classical bound by at least 5 sigma.
    let (plan, _) = converted_plan(&cfg, 8, full).unwrap();
    let (g2, err) = g2_zero_of_run(&plan);
    let significance = (1.0 - g2) / err;
    assert!(
        significance >= 5.0,
        "full stats: g2(0) = {g2:.4} ± {err:.4}, only {significance:.1} sigma below 1"
    );
}

#[test]
fn criterion_5_finite_bin_floor() {
    let emitter = EmitterParams::calibrated_default(1.0).unwrap();
    let a = emitter.bin_averaged_min(CALIBRATION_BIN_WIDTH).unwrap();
    assert!((a - 0.035).abs() <= 0.005, "a = {a}");

    // Noiseless high-statistics run converges to the floor.
    let cfg = Config::default();
    let mut config = cfg.clone();
    config.set("scenario.custom_rate_cps", 200_000.0).unwrap();
    let plan = custom_plan(&config, 5, 500.0).unwrap();
    let (g2, err) = g2_zero_of_run(&plan);
    assert!(
        (g2 - a).abs() < 3.0 * err.max(1e-6),
        "noiseless g2(0) = {g2:.4} ± {err:.4} vs floor {a:.4}"
    );
}

#[test]
fn criterion_6_qfc_curves_and_pump_optimum() {
    let conv = ConversionModel::new(0.19, 0.210).unwrap();
    let noise = NoiseModel::new(100.0, 5000.0).unwrap();
    assert!((efficiency(0.210, &conv).unwrap() - 0.19).abs() < 1e-12);
    assert!((noise_rate(0.0, &noise).unwrap() - 100.0).abs() < 1e-12);
    assert!((noise_rate(0.040, &noise).unwrap() - 300.0).abs() < 1e-12);

    let (p_star, _) = optimal_pump(&conv, &noise, 26_100.0, 0.6).unwrap();

    // Grid agreement: within one 1 mW step of the brute-force argmax.
    let mut grid_best = (0.0, f64::NEG_INFINITY);
    for mw in 1..=420 {
        let p = mw as f64 * 1e-3;
        let s = pump_snr(p, &conv, &noise, 26_100.0, 0.6).unwrap();
        if s > grid_best.1 {
            grid_best = (p, s);
        }
    }
    assert!(
        (p_star - grid_best.0).abs() <= 1e-3 + 1e-4,
        "optimizer {p_star} vs grid {}",
        grid_best.0
    );

    // The sin²/affine models pinned above place the true optimum at
    // 60.43 mW (the grid argmax is 60 mW), which falls outside the
    // 25-60 mW window this criterion requires.
    assert!(
        (0.025..=0.060).contains(&p_star),
        "p* = {:.2} mW is outside the required 25-60 mW band",
        p_star * 1e3
    );
}

#[test]
fn criterion_7_double_resonance() {
    let tuning = TuningModel::new(1336.0, 35.5, 0.956).unwrap();
    let (pump_nm, temp_c) = solve_double_resonance(607.425690, 384.227982, &tuning).unwrap();
    assert!((pump_nm - 1343.17).abs() <= 0.01, "pump = {pump_nm}");
    assert!((temp_c - 43.0).abs() <= 0.5, "temperature = {temp_c}");
}

#[test]
fn criterion_8_micromotion_spectral_peak() {
    let cfg = Config::default();
    let (plan, _) = unconverted_plan(&cfg, 1, cfg.get("scenario.unconverted_duration_s")).unwrap();
    let result = simulate(&plan).unwrap();
    let curve = normalize_g2(&result.histogram).unwrap();
    let (peak, contrast) = micromotion_spectrum(&curve, 50e-9).unwrap();
    // One DFT bin at this window: 1/(2 * tau_max).
    let tau_max = curve.tau.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let df = 1.0 / (2.0 * tau_max);
    assert!(
        (peak - 38.4e6).abs() <= df,
        "peak at {:.2} MHz (bin {:.2} MHz), contrast {contrast:.3}",
        peak / 1e6,
        df / 1e6
    );
}

#[test]
fn criterion_9_property_suite() {
    // Poisson-stream flatness: mean 1, reduced chi^2 in [0.8, 1.2].
    let t = 200.0;
    let dark = DetectorModel::new(1.0, 20_000.0, 0.0, 0.0).unwrap();
    let empty = |seed| qfcsim_core::PhotonStream {
        timestamps_ps: vec![],
        duration_s: t,
        seed,
    };
    let a = qfcsim_core::tcspc::detect(&empty(1), &dark, 901).unwrap();
    let b = qfcsim_core::tcspc::detect(&empty(2), &dark, 902).unwrap();
    let hcfg = HistogramConfig {
        bin_width: 512e-12,
        window: 600e-9,
        start_channel_delay: 0.0,
    };
    let hist = full_correlation(&a, &b, &hcfg).unwrap();
    let curve = normalize_g2(&hist).unwrap();
    let n = curve.g2.len() as f64;
    let mean = curve.g2.iter().sum::<f64>() / n;
    assert!((mean - 1.0).abs() < 0.02, "flatness mean = {mean}");
    let lambda = a.rate() * b.rate() * 512e-12 * t;
    let chi2 = hist
        .counts
        .iter()
        .map(|&c| {
            let d = c as f64 - lambda;
            d * d / lambda
        })
        .sum::<f64>()
        / n;
    assert!((0.8..1.2).contains(&chi2), "reduced chi2 = {chi2}");

    // Thinning preserves antibunching within shot noise.
    let cfg = Config::default();
    let mut hi = cfg.clone();
    hi.set("scenario.custom_rate_cps", 100_000.0).unwrap();
    let plan = custom_plan(&hi, 11, 200.0).unwrap();
    let (g_full, e_full) = g2_zero_of_run(&plan);
    let mut thinned_plan = plan.clone();
    thinned_plan.start.detector = DetectorModel::new(0.5, 0.0, 0.0, 0.0).unwrap();
    thinned_plan.stop.detector = DetectorModel::new(0.5, 0.0, 0.0, 0.0).unwrap();
    thinned_plan.duration = 400.0;
    let (g_thin, e_thin) = g2_zero_of_run(&thinned_plan);
    let sigma = (e_full * e_full + e_thin * e_thin).sqrt();
    assert!(
        (g_full - g_thin).abs() < 4.0 * sigma,
        "thinning moved g2(0): {g_full} ± {e_full} -> {g_thin} ± {e_thin}"
    );

    // Seed determinism, byte-for-byte.
    let small = custom_plan(&cfg, 13, 20.0).unwrap();
    assert_eq!(simulate(&small).unwrap(), simulate(&small).unwrap());

    // Channel-swap tau-reversal symmetry (exact).
    let mut tagged = custom_plan(&cfg, 17, 30.0).unwrap();
    tagged.keep_tags = true;
    let r = simulate(&tagged).unwrap();
    let (s1, s2) = (r.start_tags.unwrap(), r.stop_tags.unwrap());
    let sym_cfg = HistogramConfig {
        start_channel_delay: 0.0,
        ..HistogramConfig::default()
    };
    let ab = full_correlation(&s1, &s2, &sym_cfg).unwrap();
    let ba = full_correlation(&s2, &s1, &sym_cfg).unwrap();
    let mut rev = ba.counts;
    rev.reverse();
    assert_eq!(ab.counts, rev, "channel swap is not an exact mirror");

    // Eq. 1 scale cancellation: doubling counts and time leaves g2 fixed.
    let base = qfcsim_core::CoincidenceHistogram {
        counts: vec![10, 40, 90],
        bin_width_ps: 512,
        tau_start_ps: -768,
        total_time: 5.0,
        start_rate: 1_000.0,
        stop_rate: 2_000.0,
    };
    let doubled = qfcsim_core::CoincidenceHistogram {
        counts: vec![20, 80, 180],
        total_time: 10.0,
        ..base.clone()
    };
    let ga = normalize_g2(&base).unwrap();
    let gb = normalize_g2(&doubled).unwrap();
    for (x, y) in ga.g2.iter().zip(&gb.g2) {
        assert!((x - y).abs() < 1e-12);
    }
}
