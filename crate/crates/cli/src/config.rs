//! Flat dotted-key JSON configuration: every model parameter has a default,
//! unknown keys are rejected, and values are range-checked with the offending
//! key named. Keys starting with `#` are comments and ignored.

use crate::error::{CliError, CliResult};
use qfcsim_core::emitter::{calibrated_rabi, EmitterParams};
use qfcsim_core::qfc::{ConversionModel, FilterChain, NoiseModel, TuningModel};
use qfcsim_core::tcspc::{DetectorModel, HistogramConfig};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// `(key, default)` for every recognized parameter except `emitter.rabi_mhz`,
/// which is calibrated at first use.
const DEFAULTS: &[(&str, f64)] = &[
    ("emitter.linewidth_mhz", 20.1),
    ("emitter.mm_freq_mhz", 38.4),
    ("emitter.mm_depth", 0.5),
    ("tcspc.bin_width_ps", 512.0),
    ("tcspc.window_ns", 400.0),
    ("tcspc.start_delay_ns", 199.936),
    ("tcspc.jitter_ps", 0.0),
    ("tcspc.dead_time_ns", 0.0),
    ("qfc.eta_max", 0.19),
    ("qfc.p_max_mw", 210.0),
    ("qfc.dark_rate_cps", 100.0),
    ("qfc.anti_stokes_cps_per_w", 5000.0),
    ("qfc.pump_mw", 40.0),
    ("qfc.input_freq_thz", 607.425690),
    ("qfc.target_freq_thz", 384.227982),
    ("qfc.ref_pump_nm", 1336.0),
    ("qfc.ref_temp_c", 35.5),
    ("qfc.temp_coeff_nm_per_c", 0.956),
    ("filter.pump_suppression_db", 70.0),
    ("filter.input_leak_suppression_db", 59.0),
    ("filter.passband_center_nm", 780.0),
    ("filter.passband_fwhm_nm", 10.0),
    ("budget.source_rate_cps", 8.7e6),
    ("budget.collection", 0.08),
    ("budget.collection_split", 0.5),
    ("budget.fiber_coupling", 0.17),
    ("budget.patch", 0.5),
    ("budget.polarization", 0.5),
    ("budget.calibration", 1.0),
    ("budget.pmt_qe", 0.06),
    ("budget.apd_qe_493", 0.45),
    ("budget.apd_qe_780", 0.60),
    ("budget.atten_369_db_km", 70.0),
    ("budget.atten_493_db_km", 50.0),
    ("budget.atten_780_db_km", 3.5),
    ("budget.min_rate_cps", 10.0),
    ("scenario.unconverted_start_cps", 19_700.0),
    ("scenario.unconverted_stop_cps", 26_600.0),
    ("scenario.unconverted_snr", 15.8),
    ("scenario.unconverted_duration_s", 1200.0),
    ("scenario.converted_start_cps", 20_500.0),
    ("scenario.converted_stop_cps", 930.0),
    ("scenario.converted_snr", 1.8),
    ("scenario.converted_duration_s", 22_068.0),
    ("scenario.converted_input_cps", 26_100.0),
    ("scenario.custom_rate_cps", 20_000.0),
    ("scenario.custom_duration_s", 10.0),
    ("pipeline.segment_s", 60.0),
];

/// Range check one key, returning the accepted range on failure.
fn check_range(key: &str, v: f64) -> Result<(), String> {
    if !v.is_finite() {
        return Err("must be finite".into());
    }
    let in_unit_closed = (0.0..=1.0).contains(&v);
    let positive = v > 0.0;
    let non_negative = v >= 0.0;
    match key {
        "emitter.mm_depth" => {
            if !(0.0..1.0).contains(&v) {
                return Err("must be in [0, 1)".into());
            }
        }
        "budget.pmt_qe" | "budget.apd_qe_493" | "budget.apd_qe_780" => {
            if !in_unit_closed {
                return Err("must be in [0, 1]".into());
            }
        }
        "qfc.eta_max"
        | "budget.collection"
        | "budget.collection_split"
        | "budget.fiber_coupling"
        | "budget.patch"
        | "budget.polarization"
        | "budget.calibration" => {
            if !(v > 0.0 && v <= 1.0) {
                return Err("must be in (0, 1]".into());
            }
        }
        "emitter.linewidth_mhz"
        | "tcspc.bin_width_ps"
        | "tcspc.window_ns"
        | "qfc.p_max_mw"
        | "qfc.input_freq_thz"
        | "qfc.target_freq_thz"
        | "qfc.ref_pump_nm"
        | "filter.passband_center_nm"
        | "filter.passband_fwhm_nm"
        | "budget.min_rate_cps"
        | "scenario.unconverted_duration_s"
        | "scenario.converted_duration_s"
        | "scenario.custom_duration_s"
        | "pipeline.segment_s" => {
            if !positive {
                return Err("must be > 0".into());
            }
        }
        "qfc.temp_coeff_nm_per_c" => {
            if v == 0.0 {
                return Err("must be non-zero".into());
            }
        }
        "qfc.ref_temp_c" => {
            if !(20.0..=80.0).contains(&v) {
                return Err("must be in [20, 80]".into());
            }
        }
        _ => {
            if !non_negative {
                return Err("must be >= 0".into());
            }
        }
    }
    Ok(())
}

/// Fully resolved parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, f64>,
}

impl Default for Config {
    fn default() -> Self {
        let mut values: BTreeMap<String, f64> =
            DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        values.insert("emitter.rabi_mhz".to_string(), calibrated_rabi() / TAU / 1e6);
        Config { values }
    }
}

impl Config {
    /// Load a config file: flat JSON object of numbers keyed by dotted names.
    /// Missing keys take defaults; unknown keys are errors.
    pub fn from_file<P: AsRef<Path>>(path: P) -> CliResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::Io(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> CliResult<Self> {
        let mut cfg = Config::default();
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(cfg);
        }
        let parsed: serde_json::Value = serde_json::from_str(trimmed)
            .map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
        let obj = parsed
            .as_object()
            .ok_or_else(|| CliError::Config("top level must be a JSON object".into()))?;
        for (key, value) in obj {
            if key.starts_with('#') {
                continue;
            }
            let v = value.as_f64().ok_or_else(|| {
                CliError::Config(format!("`{key}`: expected a number, got {value}"))
            })?;
            cfg.set(key, v)?;
        }
        cfg.validate_relations()?;
        Ok(cfg)
    }

    /// Set one parameter, rejecting unknown keys and out-of-range values.
    pub fn set(&mut self, key: &str, value: f64) -> CliResult<()> {
        if !self.values.contains_key(key) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        check_range(key, value)
            .map_err(|range| CliError::Config(format!("`{key}` = {value}: {range}")))?;
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    /// Cross-key constraints that cannot be checked one value at a time.
    pub fn validate_relations(&self) -> CliResult<()> {
        if self.get("tcspc.window_ns") * 1000.0 < self.get("tcspc.bin_width_ps") {
            return Err(CliError::Config(
                "`tcspc.window_ns`: window must be at least one bin wide".into(),
            ));
        }
        if self.get("qfc.target_freq_thz") >= self.get("qfc.input_freq_thz") {
            return Err(CliError::Config(
                "`qfc.target_freq_thz`: must be below qfc.input_freq_thz".into(),
            ));
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> f64 {
        *self
            .values
            .get(key)
            .unwrap_or_else(|| panic!("unregistered config key `{key}`"))
    }

    /// Normalized echo of the full parameter set, keys sorted, as JSON.
    pub fn echo_json(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> = self
            .values
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("numeric map")
    }

    /// SHA-256 of the normalized echo; identifies the effective parameters.
    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.echo_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    // ---- typed builders -------------------------------------------------

    pub fn emitter(&self, mean_rate: f64) -> CliResult<EmitterParams> {
        Ok(EmitterParams::new(
            TAU * self.get("emitter.linewidth_mhz") * 1e6,
            TAU * self.get("emitter.rabi_mhz") * 1e6,
            mean_rate,
            TAU * self.get("emitter.mm_freq_mhz") * 1e6,
            self.get("emitter.mm_depth"),
        )?)
    }

    pub fn histogram(&self) -> HistogramConfig {
        HistogramConfig {
            bin_width: self.get("tcspc.bin_width_ps") * 1e-12,
            window: self.get("tcspc.window_ns") * 1e-9,
            start_channel_delay: self.get("tcspc.start_delay_ns") * 1e-9,
        }
    }

    /// Detector with the configured jitter/dead-time and the given QE and
    /// dark rate.
    pub fn detector(&self, quantum_efficiency: f64, dark_rate: f64) -> CliResult<DetectorModel> {
        Ok(DetectorModel::new(
            quantum_efficiency,
            dark_rate,
            self.get("tcspc.jitter_ps") * 1e-12,
            self.get("tcspc.dead_time_ns") * 1e-9,
        )?)
    }

    pub fn conversion(&self) -> CliResult<ConversionModel> {
        Ok(ConversionModel::new(
            self.get("qfc.eta_max"),
            self.get("qfc.p_max_mw") * 1e-3,
        )?)
    }

    pub fn noise(&self) -> CliResult<NoiseModel> {
        Ok(NoiseModel::new(
            self.get("qfc.dark_rate_cps"),
            self.get("qfc.anti_stokes_cps_per_w"),
        )?)
    }

    pub fn tuning(&self) -> CliResult<TuningModel> {
        Ok(TuningModel::new(
            self.get("qfc.ref_pump_nm"),
            self.get("qfc.ref_temp_c"),
            self.get("qfc.temp_coeff_nm_per_c"),
        )?)
    }

    pub fn filter(&self) -> CliResult<FilterChain> {
        Ok(FilterChain::new(
            self.get("filter.pump_suppression_db"),
            self.get("filter.input_leak_suppression_db"),
            self.get("filter.passband_center_nm"),
            self.get("filter.passband_fwhm_nm"),
        )?)
    }

    pub fn pump_power_w(&self) -> f64 {
        self.get("qfc.pump_mw") * 1e-3
    }
}
