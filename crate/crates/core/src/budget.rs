//! Photon link-budget accounting from the ion to the detector, fiber-range
//! estimation, and SNR-optimal pump power selection.

use crate::error::{Error, Result};
use crate::numeric::golden_section_max;
use crate::qfc::{efficiency, noise_rate, ConversionModel, NoiseModel};
use crate::tcspc::DetectorModel;
use std::collections::BTreeMap;

/// Multiplicative efficiency budget across the collection/fiber/QFC/detector
/// chain, plus a fiber attenuation table for range estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// Fluorescence rate at the ion (counts/s).
    pub source_rate: f64,
    /// Named per-stage efficiencies in (0, 1].
    pub stages: BTreeMap<String, f64>,
    /// Fiber attenuation per wavelength: nm → dB/km.
    pub fiber_attenuation: BTreeMap<u32, f64>,
    /// Terminal detector.
    pub detector: DetectorModel,
}

impl LinkBudget {
    pub fn new(
        source_rate: f64,
        stages: BTreeMap<String, f64>,
        fiber_attenuation: BTreeMap<u32, f64>,
        detector: DetectorModel,
    ) -> Result<Self> {
        if !(source_rate >= 0.0 && source_rate.is_finite()) {
            return Err(Error::invalid("budget.source_rate", "must be >= 0"));
        }
        for (name, eff) in &stages {
            if !(*eff > 0.0 && *eff <= 1.0) {
                return Err(Error::invalid(
                    "budget.stage",
                    format!("stage `{name}` efficiency must be in (0, 1]"),
                ));
            }
        }
        for (nm, alpha) in &fiber_attenuation {
            if *alpha < 0.0 {
                return Err(Error::invalid(
                    "budget.fiber_attenuation",
                    format!("attenuation at {nm} nm must be >= 0"),
                ));
            }
        }
        Ok(LinkBudget {
            source_rate,
            stages,
            fiber_attenuation,
            detector,
        })
    }

    /// Rate after applying the named stages in order (product; order-free).
    pub fn rate_through_chain(&self, chain: &[&str]) -> Result<f64> {
        let mut rate = self.source_rate;
        for name in chain {
            let eff = self
                .stages
                .get(*name)
                .ok_or_else(|| Error::UnknownStage((*name).to_string()))?;
            rate *= eff;
        }
        Ok(rate)
    }

    /// Rate through every defined stage plus the detector QE.
    pub fn delivered_rate(&self) -> f64 {
        self.stages.values().product::<f64>() * self.source_rate * self.detector.quantum_efficiency
    }

    /// Attenuation (dB/km) at a tabulated wavelength.
    pub fn attenuation(&self, wavelength_nm: u32) -> Result<f64> {
        self.fiber_attenuation
            .get(&wavelength_nm)
            .copied()
            .ok_or_else(|| {
                Error::Domain(format!("no attenuation tabulated for {wavelength_nm} nm"))
            })
    }

    /// Longest fiber length (km) that still delivers `min_rate`, closed form
    /// from exponential attenuation applied to the full-chain rate.
    pub fn max_range(&self, wavelength_nm: u32, min_rate: f64) -> Result<f64> {
        let alpha = self.attenuation(wavelength_nm)?;
        let rate0 = self.delivered_rate();
        if !(min_rate > 0.0) {
            return Err(Error::Domain("min_rate must be > 0".into()));
        }
        if min_rate > rate0 {
            return Err(Error::Domain(format!(
                "min_rate {min_rate} exceeds the zero-length rate {rate0}"
            )));
        }
        if alpha == 0.0 {
            return Err(Error::Domain(
                "zero attenuation gives unbounded range".into(),
            ));
        }
        Ok(10.0 / alpha * (rate0 / min_rate).log10())
    }
}

/// Fiber power transmission over `length_km` at `attenuation_db_per_km`.
pub fn fiber_transmission(attenuation_db_per_km: f64, length_km: f64) -> Result<f64> {
    if attenuation_db_per_km < 0.0 || length_km < 0.0 {
        return Err(Error::Domain("attenuation and length must be >= 0".into()));
    }
    Ok(10f64.powf(-attenuation_db_per_km * length_km / 10.0))
}

/// Detected signal-to-noise ratio at a given pump power.
pub fn pump_snr(
    pump_power: f64,
    conv: &ConversionModel,
    noise: &NoiseModel,
    input_rate: f64,
    detector_qe: f64,
) -> Result<f64> {
    let signal = input_rate * efficiency(pump_power, conv)? * detector_qe;
    let n = noise_rate(pump_power, noise)?;
    if n == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(signal / n)
}

/// SNR-optimal pump power over (0, 2·p_max], found by golden-section search
/// to 0.1 mW. Returns `(p_star_w, snr_star)`.
pub fn optimal_pump(
    conv: &ConversionModel,
    noise: &NoiseModel,
    input_rate: f64,
    detector_qe: f64,
) -> Result<(f64, f64)> {
    if !(input_rate > 0.0) {
        return Err(Error::Domain("input rate must be > 0".into()));
    }
    if !(detector_qe > 0.0) {
        return Err(Error::Domain("detector QE must be > 0".into()));
    }
    if noise.dark_rate == 0.0 && noise.anti_stokes_coeff == 0.0 {
        // Noiseless limit: signal alone decides, peak efficiency wins.
        let snr = f64::INFINITY;
        return Ok((conv.p_max, snr));
    }
    let f = |p: f64| {
        pump_snr(p, conv, noise, input_rate, detector_qe).unwrap_or(f64::NEG_INFINITY)
    };
    let (p_star, snr_star) = golden_section_max(f, 1e-9, 2.0 * conv.p_max, 1e-4);
    if snr_star <= 0.0 {
        return Err(Error::Domain("signal is zero everywhere".into()));
    }
    Ok((p_star, snr_star))
}

/// Default experiment budget: 8% two-lens collection split evenly, 17% fiber
/// coupling, factor-of-two patch and polarization losses, APD detection.
pub fn default_budget() -> LinkBudget {
    let mut stages = BTreeMap::new();
    stages.insert("collection".to_string(), 0.04); // one of two 0.4 NA lenses
    stages.insert("fiber_coupling".to_string(), 0.17);
    stages.insert("patch".to_string(), 0.5);
    stages.insert("polarization".to_string(), 0.5);
    stages.insert("calibration".to_string(), 1.0);
    let mut atten = BTreeMap::new();
    atten.insert(369, 70.0);
    atten.insert(493, 50.0);
    atten.insert(780, 3.5);
    LinkBudget {
        source_rate: 8.7e6,
        stages,
        fiber_attenuation: atten,
        detector: DetectorModel {
            quantum_efficiency: 0.45,
            dark_rate: 0.0,
            timing_jitter_sigma: 0.0,
            dead_time: 0.0,
        },
    }
}
