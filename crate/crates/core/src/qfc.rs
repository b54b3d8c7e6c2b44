//! Phenomenological model of the PPLN difference-frequency-generation stage:
//! pump-dependent conversion efficiency, anti-Stokes noise, frequency
//! arithmetic, double-resonance tuning, and stochastic stream conversion.

use crate::emitter::{PhotonStream, PS_PER_S};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Speed of light in nm·THz (equivalently, µm·GHz·1e3).
pub const C_NM_THZ: f64 = 299_792.458;

/// sin²-law conversion efficiency of a quasi-phase-matched waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionModel {
    /// Peak end-to-end efficiency.
    pub eta_max: f64,
    /// Coupled pump power at peak efficiency (W).
    pub p_max: f64,
}

impl ConversionModel {
    pub fn new(eta_max: f64, p_max: f64) -> Result<Self> {
        if !(eta_max > 0.0 && eta_max <= 1.0) {
            return Err(Error::invalid("qfc.eta_max", "must be in (0, 1]"));
        }
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::invalid("qfc.p_max", "must be > 0"));
        }
        Ok(ConversionModel { eta_max, p_max })
    }
}

/// Pump-linear noise inside the filter passband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Pump-independent noise floor (counts/s).
    pub dark_rate: f64,
    /// Anti-Stokes noise rate per unit coupled pump power (counts/s/W).
    pub anti_stokes_coeff: f64,
}

impl NoiseModel {
    pub fn new(dark_rate: f64, anti_stokes_coeff: f64) -> Result<Self> {
        if !(dark_rate >= 0.0 && dark_rate.is_finite()) {
            return Err(Error::invalid("qfc.dark_rate", "must be >= 0"));
        }
        if !(anti_stokes_coeff >= 0.0 && anti_stokes_coeff.is_finite()) {
            return Err(Error::invalid("qfc.anti_stokes_coeff", "must be >= 0"));
        }
        Ok(NoiseModel {
            dark_rate,
            anti_stokes_coeff,
        })
    }

    pub fn silent() -> Self {
        NoiseModel {
            dark_rate: 0.0,
            anti_stokes_coeff: 0.0,
        }
    }
}

/// Linearized phase-matching temperature tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningModel {
    /// Pump wavelength at the reference operating point (nm).
    pub ref_pump_wavelength: f64,
    /// Oven temperature at the reference operating point (°C).
    pub ref_temperature: f64,
    /// Phase-matched pump wavelength shift per degree (nm/°C).
    pub temp_coeff: f64,
}

/// Oven temperature range the device supports (°C).
pub const OVEN_RANGE_C: (f64, f64) = (20.0, 80.0);

impl TuningModel {
    pub fn new(ref_pump_wavelength: f64, ref_temperature: f64, temp_coeff: f64) -> Result<Self> {
        if !temp_coeff.is_finite() || temp_coeff == 0.0 {
            return Err(Error::invalid("qfc.temp_coeff", "must be finite and non-zero"));
        }
        if !(OVEN_RANGE_C.0..=OVEN_RANGE_C.1).contains(&ref_temperature) {
            return Err(Error::invalid(
                "qfc.ref_temperature",
                format!("must be within [{}, {}] C", OVEN_RANGE_C.0, OVEN_RANGE_C.1),
            ));
        }
        if !(ref_pump_wavelength > 0.0) {
            return Err(Error::invalid("qfc.ref_pump_wavelength", "must be > 0"));
        }
        Ok(TuningModel {
            ref_pump_wavelength,
            ref_temperature,
            temp_coeff,
        })
    }
}

/// Pass/block filter chain after the waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterChain {
    pub pump_suppression_db: f64,
    pub input_leak_suppression_db: f64,
    pub passband_center: f64,
    pub passband_fwhm: f64,
}

impl FilterChain {
    pub fn new(
        pump_suppression_db: f64,
        input_leak_suppression_db: f64,
        passband_center: f64,
        passband_fwhm: f64,
    ) -> Result<Self> {
        if pump_suppression_db < 0.0 || input_leak_suppression_db < 0.0 {
            return Err(Error::invalid("filter.suppression_db", "must be >= 0"));
        }
        if !(passband_fwhm > 0.0) {
            return Err(Error::invalid("filter.passband_fwhm", "must be > 0"));
        }
        Ok(FilterChain {
            pump_suppression_db,
            input_leak_suppression_db,
            passband_center,
            passband_fwhm,
        })
    }

    /// Linear rate multiplier applied to pump light.
    pub fn pump_leak_factor(&self) -> f64 {
        10f64.powf(-self.pump_suppression_db / 10.0)
    }

    /// Linear rate multiplier applied to unconverted input light.
    pub fn input_leak_factor(&self) -> f64 {
        10f64.powf(-self.input_leak_suppression_db / 10.0)
    }

    /// Whether a wavelength lies inside the passband.
    pub fn passes(&self, wavelength_nm: f64) -> bool {
        (wavelength_nm - self.passband_center).abs() <= 0.5 * self.passband_fwhm
    }
}

/// End-to-end conversion efficiency at a given coupled pump power.
pub fn efficiency(pump_power: f64, model: &ConversionModel) -> Result<f64> {
    if !(pump_power >= 0.0 && pump_power.is_finite()) {
        return Err(Error::invalid("pump_power", "must be >= 0"));
    }
    let theta = std::f64::consts::FRAC_PI_2 * (pump_power / model.p_max).sqrt();
    Ok(model.eta_max * theta.sin().powi(2))
}

/// In-band noise rate at a given coupled pump power (counts/s).
pub fn noise_rate(pump_power: f64, model: &NoiseModel) -> Result<f64> {
    if !(pump_power >= 0.0 && pump_power.is_finite()) {
        return Err(Error::invalid("pump_power", "must be >= 0"));
    }
    Ok(model.dark_rate + model.anti_stokes_coeff * pump_power)
}

/// Difference-frequency output: input minus pump (THz).
pub fn dfg_frequency(input_freq: f64, pump_freq: f64) -> Result<f64> {
    if !(pump_freq > 0.0) {
        return Err(Error::Domain("pump frequency must be > 0".into()));
    }
    if pump_freq >= input_freq {
        return Err(Error::Domain(
            "difference frequency generation needs pump frequency below the input".into(),
        ));
    }
    Ok(input_freq - pump_freq)
}

/// Solve the double-resonance condition: pump wavelength from energy
/// conservation, oven temperature from the linearized tuning model.
///
/// Returns `(pump_wavelength_nm, oven_temperature_c)`.
pub fn solve_double_resonance(
    input_freq: f64,
    target_freq: f64,
    tuning: &TuningModel,
) -> Result<(f64, f64)> {
    let pump_freq = input_freq - target_freq;
    if pump_freq <= 0.0 {
        return Err(Error::Domain(
            "target frequency must be below the input frequency".into(),
        ));
    }
    let pump_wavelength = C_NM_THZ / pump_freq;
    let temperature =
        tuning.ref_temperature + (pump_wavelength - tuning.ref_pump_wavelength) / tuning.temp_coeff;
    if !(OVEN_RANGE_C.0..=OVEN_RANGE_C.1).contains(&temperature) {
        return Err(Error::OutOfRange(format!(
            "oven temperature {temperature:.2} C outside [{}, {}] C",
            OVEN_RANGE_C.0, OVEN_RANGE_C.1
        )));
    }
    Ok((pump_wavelength, temperature))
}

/// Convert a photon stream: Bernoulli thinning at the pump-dependent
/// efficiency plus homogeneous in-band noise, merged and sorted.
///
/// Deterministic per seed.
pub fn convert_stream(
    stream: &PhotonStream,
    pump_power: f64,
    conv: &ConversionModel,
    noise: &NoiseModel,
    duration: f64,
    seed: u64,
) -> Result<PhotonStream> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", "must be >= 0"));
    }
    let eta = efficiency(pump_power, conv)?;
    let noise_cps = noise_rate(pump_power, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "qfc-thin", 0));
    let mut kept: Vec<u64> = stream
        .timestamps_ps
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < eta)
        .collect();
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "qfc-noise", 0));
    let noise_events = homogeneous_events(noise_cps, 0.0, duration, &mut noise_rng);
    kept.extend(noise_events);
    kept.sort_unstable();
    resolve_collisions(&mut kept);
    Ok(PhotonStream {
        timestamps_ps: kept,
        duration_s: duration,
        seed,
    })
}

/// Sample a homogeneous point process over the absolute window `[t0, t1)` s,
/// returning sorted integer-picosecond timestamps.
pub(crate) fn homogeneous_events(
    rate_cps: f64,
    t0: f64,
    t1: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<u64> {
    let span = t1 - t0;
    if rate_cps <= 0.0 || span <= 0.0 {
        return Vec::new();
    }
    let expected = rate_cps * span;
    let n = Poisson::new(expected)
        .map(|d| d.sample(rng) as u64)
        .unwrap_or(0);
    let span_ps = span * PS_PER_S;
    let t0_ps = (t0 * PS_PER_S).round() as u64;
    let mut out: Vec<u64> = (0..n)
        .map(|_| t0_ps + (rng.random::<f64>() * span_ps) as u64)
        .collect();
    out.sort_unstable();
    out
}

/// Keep duplicate timestamps, offsetting each later one by +1 ps.
pub(crate) fn resolve_collisions(sorted: &mut [u64]) {
    for i in 1..sorted.len() {
        if sorted[i] <= sorted[i - 1] {
            sorted[i] = sorted[i - 1] + 1;
        }
    }
}
