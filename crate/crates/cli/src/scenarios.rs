//! Named scenarios: each writes its CSV/JSON artifacts plus a manifest, and
//! reruns with identical inputs are byte-identical.

use crate::config::Config;
use crate::error::{CliError, CliResult};
use qfcsim_core::analysis::{
    effective_snr, expected_g2, g2_at_zero, micromotion_spectrum, normalize_g2,
};
use qfcsim_core::budget::{optimal_pump, pump_snr, LinkBudget};
use qfcsim_core::io::{write_events_csv, write_g2_csv, write_histogram_csv, write_tags_binary};
use qfcsim_core::pipeline::{simulate, ChannelPlan, ConversionStage, SimulationPlan};
use qfcsim_core::qfc::{dfg_frequency, efficiency, noise_rate, solve_double_resonance, C_NM_THZ};
use serde_json::json;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const SCENARIOS: &[&str] = &[
    "fig2-efficiency",
    "fig3-tuning",
    "fig4-unconverted",
    "fig4-converted",
    "budget-range",
    "pump-optimize",
    "custom",
];

/// Designed per-channel signal/noise rates of a coincidence scenario; the
/// summary SNR is computed from these, independently of the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignRates {
    pub start_signal: f64,
    pub start_noise: f64,
    pub stop_signal: f64,
    pub stop_noise: f64,
}

impl DesignRates {
    pub fn snr(&self) -> CliResult<f64> {
        Ok(effective_snr(
            self.start_signal,
            self.start_noise,
            self.stop_signal,
            self.stop_noise,
        )?)
    }
}

/// Direct-detection measurement: PMT starts, APD stops, no conversion.
/// Channel noise is split so each arm carries the same signal fraction,
/// making the target SNR exact by construction.
pub fn unconverted_plan(
    cfg: &Config,
    seed: u64,
    duration: f64,
) -> CliResult<(SimulationPlan, DesignRates)> {
    let snr = cfg.get("scenario.unconverted_snr");
    let ra = cfg.get("scenario.unconverted_start_cps");
    let rb = cfg.get("scenario.unconverted_stop_cps");
    let x = snr / (1.0 + snr);
    let design = DesignRates {
        start_signal: x * ra,
        start_noise: (1.0 - x) * ra,
        stop_signal: x * rb,
        stop_noise: (1.0 - x) * rb,
    };
    let plan = SimulationPlan {
        emitter: cfg.emitter(design.start_signal + design.stop_signal)?,
        split_to_start: design.start_signal / (design.start_signal + design.stop_signal),
        start: ChannelPlan::bare(cfg.detector(1.0, design.start_noise)?),
        stop: ChannelPlan::bare(cfg.detector(1.0, design.stop_noise)?),
        histogram: cfg.histogram(),
        duration,
        segment_duration: cfg.get("pipeline.segment_s"),
        seed,
        keep_tags: false,
    };
    Ok((plan, design))
}

/// Converted measurement: the stop arm passes through the DFG stage. The
/// waveguide noise enters before the stop detector; residual uncorrelated
/// counts are injected as detector dark rate so the channel totals match the
/// design.
pub fn converted_plan(
    cfg: &Config,
    seed: u64,
    duration: f64,
) -> CliResult<(SimulationPlan, DesignRates)> {
    let snr = cfg.get("scenario.converted_snr");
    let ra = cfg.get("scenario.converted_start_cps");
    let rb = cfg.get("scenario.converted_stop_cps");
    let input_b = cfg.get("scenario.converted_input_cps");
    let x = snr / (1.0 + snr);
    let design = DesignRates {
        start_signal: x * ra,
        start_noise: (1.0 - x) * ra,
        stop_signal: x * rb,
        stop_noise: (1.0 - x) * rb,
    };
    let conversion = cfg.conversion()?;
    let noise = cfg.noise()?;
    let pump = cfg.pump_power_w();
    let eta = efficiency(pump, &conversion)?;
    let converted_rate = input_b * eta;
    if converted_rate < design.stop_signal {
        return Err(CliError::Config(format!(
            "`scenario.converted_stop_cps`: needs {:.0} c/s signal but conversion \
             delivers only {converted_rate:.0} c/s",
            design.stop_signal
        )));
    }
    let qe_b = design.stop_signal / converted_rate;
    let stage_noise_detected = noise_rate(pump, &noise)? * qe_b;
    if stage_noise_detected > design.stop_noise {
        return Err(CliError::Config(format!(
            "`qfc.dark_rate_cps`: waveguide noise alone exceeds the designed \
             stop-channel noise ({stage_noise_detected:.0} > {:.0} c/s)",
            design.stop_noise
        )));
    }
    let dark_b = design.stop_noise - stage_noise_detected;
    let plan = SimulationPlan {
        emitter: cfg.emitter(design.start_signal + input_b)?,
        split_to_start: design.start_signal / (design.start_signal + input_b),
        start: ChannelPlan::bare(cfg.detector(1.0, design.start_noise)?),
        stop: ChannelPlan {
            conversion: Some(ConversionStage {
                pump_power: pump,
                conversion,
                noise,
            }),
            detector: cfg.detector(qe_b, dark_b)?,
        },
        histogram: cfg.histogram(),
        duration,
        segment_duration: cfg.get("pipeline.segment_s"),
        seed,
        keep_tags: false,
    };
    Ok((plan, design))
}

/// Lossless 50/50 measurement of the configured emitter; used by `custom`.
pub fn custom_plan(cfg: &Config, seed: u64, duration: f64) -> CliResult<SimulationPlan> {
    Ok(SimulationPlan {
        emitter: cfg.emitter(cfg.get("scenario.custom_rate_cps"))?,
        split_to_start: 0.5,
        start: ChannelPlan::bare(cfg.detector(1.0, 0.0)?),
        stop: ChannelPlan::bare(cfg.detector(1.0, 0.0)?),
        histogram: cfg.histogram(),
        duration,
        segment_duration: cfg.get("pipeline.segment_s"),
        seed,
        keep_tags: duration <= 60.0,
    })
}

/// Default photon budget assembled from the config.
pub fn budget_from_config(cfg: &Config, detector_qe: f64) -> CliResult<LinkBudget> {
    let mut stages = BTreeMap::new();
    stages.insert(
        "collection".to_string(),
        cfg.get("budget.collection") * cfg.get("budget.collection_split"),
    );
    stages.insert("fiber_coupling".to_string(), cfg.get("budget.fiber_coupling"));
    stages.insert("patch".to_string(), cfg.get("budget.patch"));
    stages.insert("polarization".to_string(), cfg.get("budget.polarization"));
    stages.insert("calibration".to_string(), cfg.get("budget.calibration"));
    let mut atten = BTreeMap::new();
    atten.insert(369, cfg.get("budget.atten_369_db_km"));
    atten.insert(493, cfg.get("budget.atten_493_db_km"));
    atten.insert(780, cfg.get("budget.atten_780_db_km"));
    Ok(LinkBudget::new(
        cfg.get("budget.source_rate_cps"),
        stages,
        atten,
        cfg.detector(detector_qe, 0.0)?,
    )?)
}

struct ScenarioOutput {
    files: Vec<String>,
    duration: Option<f64>,
}

/// Run a named scenario, writing its artifacts plus `manifest.json`.
pub fn run_scenario(
    name: &str,
    cfg: &Config,
    seed: u64,
    duration_override: Option<f64>,
    out_dir: &Path,
) -> CliResult<()> {
    if !SCENARIOS.contains(&name) {
        return Err(CliError::Usage(format!(
            "unknown scenario `{name}`; expected one of: {}",
            SCENARIOS.join(", ")
        )));
    }
    if let Some(d) = duration_override {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::Config(format!(
                "`duration` = {d}: must be > 0"
            )));
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let out = match name {
        "fig2-efficiency" => efficiency_sweep(cfg, out_dir)?,
        "fig3-tuning" => tuning_solution(cfg, out_dir)?,
        "fig4-unconverted" => {
            let d = duration_override.unwrap_or(cfg.get("scenario.unconverted_duration_s"));
            let (plan, design) = unconverted_plan(cfg, seed, d)?;
            coincidence_run(&plan, &design, out_dir)?
        }
        "fig4-converted" => {
            let d = duration_override.unwrap_or(cfg.get("scenario.converted_duration_s"));
            let (plan, design) = converted_plan(cfg, seed, d)?;
            coincidence_run(&plan, &design, out_dir)?
        }
        "budget-range" => budget_range(cfg, out_dir)?,
        "pump-optimize" => pump_optimize(cfg, out_dir)?,
        "custom" => {
            let d = duration_override.unwrap_or(cfg.get("scenario.custom_duration_s"));
            custom_run(cfg, seed, d, out_dir)?
        }
        _ => unreachable!(),
    };
    let mut manifest = serde_json::Map::new();
    manifest.insert("scenario".into(), json!(name));
    manifest.insert("seed".into(), json!(seed));
    if let Some(d) = out.duration {
        manifest.insert("duration_s".into(), json!(d));
    }
    manifest.insert("config_sha256".into(), json!(cfg.sha256()));
    manifest.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    manifest.insert("outputs".into(), json!(out.files));
    write_json(out_dir.join("manifest.json"), &serde_json::Value::Object(manifest))?;
    Ok(())
}

fn write_json<P: AsRef<Path>>(path: P, value: &serde_json::Value) -> CliResult<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(serde_json::to_string_pretty(value).expect("serializable").as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// 25-point pump sweep of conversion efficiency and in-band noise.
fn efficiency_sweep(cfg: &Config, out_dir: &Path) -> CliResult<ScenarioOutput> {
    let conv = cfg.conversion()?;
    let noise = cfg.noise()?;
    let step_mw = 2.0 * cfg.get("qfc.p_max_mw") / 24.0;
    let mut csv = String::from("pump_mw,eta,noise_cps\n");
    for k in 0..25 {
        let p_mw = k as f64 * step_mw;
        let p = p_mw * 1e-3;
        csv.push_str(&format!(
            "{:.2},{:.6},{:.1}\n",
            p_mw,
            efficiency(p, &conv)?,
            noise_rate(p, &noise)?
        ));
    }
    std::fs::write(out_dir.join("efficiency.csv"), csv)?;
    Ok(ScenarioOutput {
        files: vec!["efficiency.csv".into()],
        duration: None,
    })
}

/// Double-resonance operating point plus the temperature tuning curve.
fn tuning_solution(cfg: &Config, out_dir: &Path) -> CliResult<ScenarioOutput> {
    let tuning = cfg.tuning()?;
    let input = cfg.get("qfc.input_freq_thz");
    let target = cfg.get("qfc.target_freq_thz");
    let (pump_nm, temp_c) = solve_double_resonance(input, target, &tuning)?;
    let mut csv = String::from("temperature_c,pump_nm,output_nm\n");
    for t in 20..=80 {
        let lp = tuning.ref_pump_wavelength + (t as f64 - tuning.ref_temperature) * tuning.temp_coeff;
        let out_freq = dfg_frequency(input, C_NM_THZ / lp)?;
        csv.push_str(&format!("{t},{lp:.4},{:.4}\n", C_NM_THZ / out_freq));
    }
    std::fs::write(out_dir.join("tuning.csv"), csv)?;
    write_json(
        out_dir.join("summary.json"),
        &json!({
            "pump_wavelength_nm": pump_nm,
            "oven_temperature_c": temp_c,
            "output_wavelength_nm": C_NM_THZ / target,
        }),
    )?;
    Ok(ScenarioOutput {
        files: vec!["summary.json".into(), "tuning.csv".into()],
        duration: None,
    })
}

/// Shared body of the two coincidence scenarios.
fn coincidence_run(
    plan: &SimulationPlan,
    design: &DesignRates,
    out_dir: &Path,
) -> CliResult<ScenarioOutput> {
    let result = simulate(plan)?;
    let curve = normalize_g2(&result.histogram)?;
    let (g2_zero, g2_zero_err) = g2_at_zero(&curve)?;
    let snr = design.snr()?;
    let a = plan.emitter.bin_averaged_min(curve.bin_width)?;
    let mm_peak = micromotion_spectrum(&curve, 50e-9).ok().map(|(f, _)| f);
    write_histogram_csv(out_dir.join("histogram.csv"), &result.histogram)?;
    write_g2_csv(out_dir.join("g2.csv"), &curve)?;
    write_json(
        out_dir.join("summary.json"),
        &json!({
            "a": a,
            "expected_g2": expected_g2(snr, a)?,
            "g2_zero": g2_zero,
            "g2_zero_err": g2_zero_err,
            "micromotion_peak_hz": mm_peak,
            "snr": snr,
        }),
    )?;
    Ok(ScenarioOutput {
        files: vec!["g2.csv".into(), "histogram.csv".into(), "summary.json".into()],
        duration: Some(plan.duration),
    })
}

/// Fiber-range table per wavelength plus the end-to-end chain rates.
fn budget_range(cfg: &Config, out_dir: &Path) -> CliResult<ScenarioOutput> {
    let min_rate = cfg.get("budget.min_rate_cps");
    let eta = efficiency(cfg.pump_power_w(), &cfg.conversion()?)?;
    let mut csv = String::from("wavelength_nm,alpha_db_km,max_range_km\n");
    for &nm in &[369u32, 493, 780] {
        let mut budget = budget_from_config(
            cfg,
            if nm == 780 {
                cfg.get("budget.apd_qe_780")
            } else {
                cfg.get("budget.apd_qe_493")
            },
        )?;
        if nm == 780 {
            // Converted path: photons cross the patch/polarization optics and
            // the waveguide before the long fiber.
            budget.stages.insert("conversion".to_string(), eta);
        } else {
            budget.stages.remove("patch");
            budget.stages.remove("polarization");
        }
        let alpha = budget.attenuation(nm)?;
        let range = budget.max_range(nm, min_rate)?;
        csv.push_str(&format!("{nm},{alpha},{range:.3}\n"));
    }
    std::fs::write(out_dir.join("range.csv"), csv)?;

    let blue = budget_from_config(cfg, cfg.get("budget.apd_qe_493"))?;
    let apd_direct =
        blue.rate_through_chain(&["collection", "fiber_coupling", "calibration"])?
            * cfg.get("budget.apd_qe_493");
    let pmt = blue.rate_through_chain(&["collection", "calibration"])? * cfg.get("budget.pmt_qe");
    write_json(
        out_dir.join("summary.json"),
        &json!({
            "apd_direct_rate_cps": apd_direct,
            "calibration_factor": cfg.get("budget.calibration"),
            "pmt_rate_cps": pmt,
        }),
    )?;
    Ok(ScenarioOutput {
        files: vec!["range.csv".into(), "summary.json".into()],
        duration: None,
    })
}

/// SNR-vs-pump sweep and the golden-section optimum.
fn pump_optimize(cfg: &Config, out_dir: &Path) -> CliResult<ScenarioOutput> {
    let conv = cfg.conversion()?;
    let noise = cfg.noise()?;
    let input_rate = cfg.get("scenario.converted_input_cps");
    let qe = cfg.get("budget.apd_qe_780");
    let p_max_mw = cfg.get("qfc.p_max_mw");
    let mut csv = String::from("pump_mw,snr\n");
    let steps = (2.0 * p_max_mw).round() as u64;
    for mw in 1..=steps {
        let snr = pump_snr(mw as f64 * 1e-3, &conv, &noise, input_rate, qe)?;
        csv.push_str(&format!("{mw},{snr:.4}\n"));
    }
    std::fs::write(out_dir.join("pump_snr.csv"), csv)?;
    let (p_star, snr_star) = optimal_pump(&conv, &noise, input_rate, qe)?;
    write_json(
        out_dir.join("summary.json"),
        &json!({
            "p_star_mw": p_star * 1e3,
            "snr_star": snr_star,
        }),
    )?;
    Ok(ScenarioOutput {
        files: vec!["pump_snr.csv".into(), "summary.json".into()],
        duration: None,
    })
}

/// Direct measurement of the configured emitter; exports raw events on
/// short runs.
fn custom_run(cfg: &Config, seed: u64, duration: f64, out_dir: &Path) -> CliResult<ScenarioOutput> {
    let plan = custom_plan(cfg, seed, duration)?;
    let result = simulate(&plan)?;
    let curve = normalize_g2(&result.histogram)?;
    let (g2_zero, g2_zero_err) = g2_at_zero(&curve)?;
    let a = plan.emitter.bin_averaged_min(curve.bin_width)?;
    let mm_peak = micromotion_spectrum(&curve, 50e-9).ok().map(|(f, _)| f);
    write_histogram_csv(out_dir.join("histogram.csv"), &result.histogram)?;
    write_g2_csv(out_dir.join("g2.csv"), &curve)?;
    write_json(
        out_dir.join("summary.json"),
        &json!({
            "a": a,
            "expected_g2": a, // noiseless: infinite SNR
            "g2_zero": g2_zero,
            "g2_zero_err": g2_zero_err,
            "micromotion_peak_hz": mm_peak,
            "snr": serde_json::Value::Null,
        }),
    )?;
    let mut files = vec!["g2.csv".into(), "histogram.csv".into(), "summary.json".into()];
    if let (Some(starts), Some(stops)) = (&result.start_tags, &result.stop_tags) {
        write_events_csv(
            out_dir.join("events.csv"),
            &[
                ("start", starts.timestamps_ps.as_slice()),
                ("stop", stops.timestamps_ps.as_slice()),
            ],
        )?;
        write_tags_binary(out_dir.join("start_tags.bin"), &starts.timestamps_ps)?;
        write_tags_binary(out_dir.join("stop_tags.bin"), &stops.timestamps_ps)?;
        files.extend([
            "events.csv".into(),
            "start_tags.bin".into(),
            "stop_tags.bin".into(),
        ]);
    }
    Ok(ScenarioOutput {
        files,
        duration: Some(duration),
    })
}

/// Generic parameter sweep: for each value of `param` over the linear grid,
/// re-derives the cheap model quantities and writes one CSV row.
pub fn run_sweep(
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    base: &Config,
    out_dir: &Path,
) -> CliResult<()> {
    if steps < 2 {
        return Err(CliError::Usage("sweep needs at least 2 steps".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut csv = format!("{param},a,eta,noise_cps,snr,expected_g2\n");
    for k in 0..steps {
        let v = from + (to - from) * k as f64 / (steps - 1) as f64;
        let mut cfg = base.clone();
        cfg.set(param, v)?;
        cfg.validate_relations()?;
        let emitter = cfg.emitter(1.0)?;
        let a = emitter.bin_averaged_min(cfg.histogram().bin_width)?;
        let conv = cfg.conversion()?;
        let noise = cfg.noise()?;
        let pump = cfg.pump_power_w();
        let eta = efficiency(pump, &conv)?;
        let noise_cps = noise_rate(pump, &noise)?;
        let snr = pump_snr(
            pump,
            &conv,
            &noise,
            cfg.get("scenario.converted_input_cps"),
            cfg.get("budget.apd_qe_780"),
        )?;
        csv.push_str(&format!(
            "{v},{a:.6},{eta:.6},{noise_cps:.2},{snr:.4},{:.4}\n",
            expected_g2(snr, a)?
        ));
    }
    std::fs::write(out_dir.join("sweep.csv"), csv)?;
    Ok(())
}
