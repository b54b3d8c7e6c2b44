//! Histogram analysis: normalized g²(τ), the noise/finite-bin prediction for
//! g²(0), SNR estimation from a noise decomposition, and extraction of the
//! micromotion spectral signature.

use crate::error::{Error, Result};
use crate::tcspc::CoincidenceHistogram;

/// Normalized second-order correlation curve with shot-noise errors.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Curve {
    /// Physical delay at each bin center (s).
    pub tau: Vec<f64>,
    /// Normalized correlation per bin.
    pub g2: Vec<f64>,
    /// Shot-noise standard error per bin.
    pub g2_err: Vec<f64>,
    /// Bin width (s).
    pub bin_width: f64,
}

/// Histogram count rates broken down by signal/noise origin on each channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDecomposition {
    /// Start-signal × stop-noise correlations (histogram counts/s).
    pub start_sig_stop_noise: f64,
    /// Start-noise × stop-signal correlations (histogram counts/s).
    pub start_noise_stop_sig: f64,
    /// Start-noise × stop-noise correlations (histogram counts/s).
    pub noise_noise: f64,
    /// Total histogram count rate (counts/s).
    pub total_rate: f64,
}

impl NoiseDecomposition {
    pub fn new(
        start_sig_stop_noise: f64,
        start_noise_stop_sig: f64,
        noise_noise: f64,
        total_rate: f64,
    ) -> Result<Self> {
        let d = NoiseDecomposition {
            start_sig_stop_noise,
            start_noise_stop_sig,
            noise_noise,
            total_rate,
        };
        if [
            start_sig_stop_noise,
            start_noise_stop_sig,
            noise_noise,
            total_rate,
        ]
        .iter()
        .any(|v| *v < 0.0 || !v.is_finite())
        {
            return Err(Error::invalid("noise_decomposition", "rates must be >= 0"));
        }
        if d.noise_sum() > total_rate {
            return Err(Error::invalid(
                "noise_decomposition",
                "noise terms exceed the total rate",
            ));
        }
        Ok(d)
    }

    pub fn noise_sum(&self) -> f64 {
        self.start_sig_stop_noise + self.start_noise_stop_sig + self.noise_noise
    }
}

/// Normalize raw coincidence counts: g²(τ) = N(τ) / (N_start · N_stop · δt · T).
pub fn normalize_g2(hist: &CoincidenceHistogram) -> Result<G2Curve> {
    if hist.total_time <= 0.0 {
        return Err(Error::Normalization("total time must be > 0".into()));
    }
    if hist.start_rate <= 0.0 || hist.stop_rate <= 0.0 {
        return Err(Error::Normalization("channel rates must be > 0".into()));
    }
    let bin_width = hist.bin_width_ps as f64 / 1e12;
    let norm = hist.start_rate * hist.stop_rate * bin_width * hist.total_time;
    let mut tau = Vec::with_capacity(hist.n_bins());
    let mut g2 = Vec::with_capacity(hist.n_bins());
    let mut g2_err = Vec::with_capacity(hist.n_bins());
    for (i, &n) in hist.counts.iter().enumerate() {
        tau.push(hist.bin_center_s(i));
        g2.push(n as f64 / norm);
        g2_err.push((n as f64).sqrt() / norm);
    }
    Ok(G2Curve {
        tau,
        g2,
        g2_err,
        bin_width,
    })
}

/// Predicted g²(0) under noise and finite bin width:
/// 1 + (SNR/(1+SNR))² · (a − 1).
pub fn expected_g2(snr: f64, a: f64) -> Result<f64> {
    if snr < 0.0 || snr.is_nan() {
        return Err(Error::invalid("snr", "must be >= 0"));
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::invalid("a", "must be in [0, 1]"));
    }
    if snr.is_infinite() {
        return Ok(a);
    }
    let f = snr / (1.0 + snr);
    Ok(1.0 + f * f * (a - 1.0))
}

/// Signal-to-noise ratio of a histogram decomposition:
/// (total − noise) / noise. Zero noise reports infinite SNR.
pub fn estimate_snr(decomp: &NoiseDecomposition) -> f64 {
    let noise = decomp.noise_sum();
    if noise == 0.0 {
        return f64::INFINITY;
    }
    (decomp.total_rate - noise) / noise
}

/// Effective SNR of a two-channel measurement with the given per-channel
/// signal and noise count rates.
///
/// Defined so that `expected_g2(snr, a)` equals the depth of the correlation
/// dip that uncorrelated channel noise actually produces:
/// SNR/(1+SNR) = sqrt(signal-rate product / total-rate product).
pub fn effective_snr(
    start_signal: f64,
    start_noise: f64,
    stop_signal: f64,
    stop_noise: f64,
) -> Result<f64> {
    if [start_signal, start_noise, stop_signal, stop_noise]
        .iter()
        .any(|v| *v < 0.0 || !v.is_finite())
    {
        return Err(Error::invalid("channel rates", "must be >= 0 and finite"));
    }
    let total = (start_signal + start_noise) * (stop_signal + stop_noise);
    if total == 0.0 {
        return Err(Error::Domain("all channel rates are zero".into()));
    }
    let x = (start_signal * stop_signal / total).sqrt();
    if x >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(x / (1.0 - x))
}

/// Locate the largest non-DC spectral peak of the g² tail (|τ| > tau_min).
///
/// Returns `(peak_frequency_hz, contrast)` where contrast is the oscillation
/// amplitude relative to the mean tail level.
pub fn micromotion_spectrum(curve: &G2Curve, tau_min: f64) -> Result<(f64, f64)> {
    let samples: Vec<(f64, f64)> = curve
        .tau
        .iter()
        .zip(&curve.g2)
        .filter(|(t, _)| t.abs() > tau_min)
        .map(|(t, g)| (*t, *g))
        .collect();
    if samples.len() < 16 {
        return Err(Error::AnalysisWindow(format!(
            "only {} bins beyond tau_min",
            samples.len()
        )));
    }
    let tau_max = samples
        .iter()
        .map(|(t, _)| t.abs())
        .fold(0.0_f64, f64::max);
    let span = 2.0 * tau_max;
    let mean = samples.iter().map(|(_, g)| g).sum::<f64>() / samples.len() as f64;
    if mean <= 0.0 {
        return Err(Error::AnalysisWindow("tail mean is not positive".into()));
    }
    // Direct DFT on the (possibly gapped) tail grid. Frequency resolution is
    // set by the full recorded span; Nyquist by the bin width.
    let df = 1.0 / span;
    let f_nyquist = 0.5 / curve.bin_width;
    let n_freq = (f_nyquist / df).floor() as usize;
    let norm = 2.0 / samples.len() as f64;
    let mut best = (0.0_f64, 0.0_f64);
    for k in 1..=n_freq {
        let f = k as f64 * df;
        let (mut re, mut im) = (0.0_f64, 0.0_f64);
        for (t, g) in &samples {
            let phase = 2.0 * std::f64::consts::PI * f * t;
            let d = g - mean;
            re += d * phase.cos();
            im -= d * phase.sin();
        }
        let amp = norm * (re * re + im * im).sqrt();
        if amp > best.1 {
            best = (f, amp);
        }
    }
    Ok((best.0, best.1 / mean))
}

/// Delay-compensated central-bin value and shot-noise error.
pub fn g2_at_zero(curve: &G2Curve) -> Result<(f64, f64)> {
    let half = 0.5 * curve.bin_width;
    for (i, &t) in curve.tau.iter().enumerate() {
        if (t - half..t + half).contains(&0.0) {
            return Ok((curve.g2[i], curve.g2_err[i]));
        }
    }
    Err(Error::Domain("no bin covers tau = 0".into()))
}
