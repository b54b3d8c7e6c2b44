//! Detector models and the time-correlated single-photon-counting engine:
//! detection with efficiency/jitter/dead-time/dark counts, start-stop
//! histogramming, and a full pair correlator used as an unbiased reference.

use crate::emitter::{PhotonStream, PS_PER_S};
use crate::error::{Error, Result};
use crate::qfc::{homogeneous_events, resolve_collisions};
use crate::seed::derive_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Single-photon detector response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub quantum_efficiency: f64,
    pub dark_rate: f64,
    /// Gaussian timing jitter sigma (s).
    pub timing_jitter_sigma: f64,
    /// Dead time after an accepted event (s).
    pub dead_time: f64,
}

impl DetectorModel {
    pub fn new(
        quantum_efficiency: f64,
        dark_rate: f64,
        timing_jitter_sigma: f64,
        dead_time: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&quantum_efficiency) {
            return Err(Error::invalid("detector.quantum_efficiency", "must be in [0, 1]"));
        }
        if dark_rate < 0.0 || timing_jitter_sigma < 0.0 || dead_time < 0.0 {
            return Err(Error::invalid("detector", "rates and times must be >= 0"));
        }
        Ok(DetectorModel {
            quantum_efficiency,
            dark_rate,
            timing_jitter_sigma,
            dead_time,
        })
    }

    /// Unit-efficiency, noiseless, instantaneous detector.
    pub fn ideal() -> Self {
        DetectorModel {
            quantum_efficiency: 1.0,
            dark_rate: 0.0,
            timing_jitter_sigma: 0.0,
            dead_time: 0.0,
        }
    }
}

/// Detected time tags on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagRecord {
    /// Sorted detection times, integer picoseconds.
    pub timestamps_ps: Vec<u64>,
    /// Observation time (s).
    pub duration_s: f64,
}

impl TimeTagRecord {
    pub fn len(&self) -> usize {
        self.timestamps_ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_ps.is_empty()
    }

    pub fn rate(&self) -> f64 {
        if self.duration_s > 0.0 {
            self.timestamps_ps.len() as f64 / self.duration_s
        } else {
            0.0
        }
    }

    fn check_sorted(&self) -> Result<()> {
        if self.timestamps_ps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Contract("time tags must be sorted".into()));
        }
        Ok(())
    }
}

/// Apply a detector model to a photon stream.
///
/// Photons are kept with probability QE, jittered, thinned by dead time, and
/// merged with homogeneous dark counts. Deterministic per seed.
pub fn detect(stream: &PhotonStream, det: &DetectorModel, seed: u64) -> Result<TimeTagRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "detect", 0));
    let tags = detect_segment(
        &stream.timestamps_ps,
        0.0,
        stream.duration_s,
        det,
        &mut rng,
    )?;
    Ok(TimeTagRecord {
        timestamps_ps: tags,
        duration_s: stream.duration_s,
    })
}

/// Detector response over the absolute window `[t0, t1)` s.
pub(crate) fn detect_segment(
    events_ps: &[u64],
    t0: f64,
    t1: f64,
    det: &DetectorModel,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u64>> {
    let mut kept: Vec<u64>;
    if det.quantum_efficiency >= 1.0 {
        kept = events_ps.to_vec();
    } else {
        kept = events_ps
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() < det.quantum_efficiency)
            .collect();
    }
    if det.timing_jitter_sigma > 0.0 {
        let normal = Normal::new(0.0, det.timing_jitter_sigma * PS_PER_S)
            .map_err(|e| Error::invalid("detector.timing_jitter_sigma", e.to_string()))?;
        let floor = (t0 * PS_PER_S).round() as i64;
        for t in kept.iter_mut() {
            let jittered = *t as i64 + normal.sample(rng).round() as i64;
            *t = jittered.max(floor) as u64;
        }
        kept.sort_unstable();
    }
    if det.dead_time > 0.0 {
        let dead_ps = (det.dead_time * PS_PER_S).round() as u64;
        let mut filtered = Vec::with_capacity(kept.len());
        let mut last_accept: Option<u64> = None;
        for t in kept {
            match last_accept {
                Some(prev) if t < prev.saturating_add(dead_ps) => {}
                _ => {
                    filtered.push(t);
                    last_accept = Some(t);
                }
            }
        }
        kept = filtered;
    }
    if det.dark_rate > 0.0 {
        let darks = homogeneous_events(det.dark_rate, t0, t1, rng);
        kept.extend(darks);
        kept.sort_unstable();
    }
    resolve_collisions(&mut kept);
    Ok(kept)
}

/// Histogrammer configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramConfig {
    /// Bin width (s); 512 ps by default.
    pub bin_width: f64,
    /// Total recorded delay span (s).
    pub window: f64,
    /// Electrical delay inserted on the start line (s). Positive delay maps
    /// physical negative delays onto positive recorded delays.
    pub start_channel_delay: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            bin_width: 512e-12,
            window: 400e-9,
            // 390.5 bins, placing tau = 0 at a bin center.
            start_channel_delay: 199.936e-9,
        }
    }
}

impl HistogramConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::invalid("tcspc.bin_width", "must be > 0"));
        }
        if self.window < self.bin_width {
            return Err(Error::invalid("tcspc.window", "must be >= bin_width"));
        }
        if !self.start_channel_delay.is_finite() || self.start_channel_delay < 0.0 {
            return Err(Error::invalid("tcspc.start_channel_delay", "must be >= 0"));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        (self.window / self.bin_width).round() as usize
    }

    pub fn bin_width_ps(&self) -> u64 {
        (self.bin_width * PS_PER_S).round() as u64
    }

    pub fn delay_ps(&self) -> i64 {
        (self.start_channel_delay * PS_PER_S).round() as i64
    }
}

/// Binned start-stop delay counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    /// Counts per bin.
    pub counts: Vec<u64>,
    /// Bin width, integer picoseconds.
    pub bin_width_ps: u64,
    /// Physical (delay-compensated) time of the left edge of bin 0, ps.
    pub tau_start_ps: i64,
    /// Total integration time (s).
    pub total_time: f64,
    /// Start-channel count rate (counts/s).
    pub start_rate: f64,
    /// Stop-channel count rate (counts/s).
    pub stop_rate: f64,
}

impl CoincidenceHistogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Physical delay at the center of bin `i` (s).
    pub fn bin_center_s(&self, i: usize) -> f64 {
        (self.tau_start_ps as f64 + (i as f64 + 0.5) * self.bin_width_ps as f64) / PS_PER_S
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Merge another histogram with the same binning into this one.
    pub fn merge(&mut self, other: &CoincidenceHistogram) -> Result<()> {
        if self.counts.len() != other.counts.len()
            || self.bin_width_ps != other.bin_width_ps
            || self.tau_start_ps != other.tau_start_ps
        {
            return Err(Error::Contract("histogram binning mismatch on merge".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

/// Classic TCSPC histogram mode: each (delayed) start is paired with the
/// first subsequent stop, and the delay is binned if inside the window.
///
/// Known pile-up bias at high rates; bounded by `full_correlation`.
pub fn start_stop_histogram(
    starts: &TimeTagRecord,
    stops: &TimeTagRecord,
    config: &HistogramConfig,
) -> Result<CoincidenceHistogram> {
    config.validate()?;
    starts.check_sorted()?;
    stops.check_sorted()?;
    let bin_ps = config.bin_width_ps();
    let n_bins = config.n_bins();
    let window_ps = bin_ps * n_bins as u64;
    let delay_ps = config.delay_ps();
    let mut counts = vec![0u64; n_bins];
    let stop_tags = &stops.timestamps_ps;
    let mut j = 0usize;
    for &s in &starts.timestamps_ps {
        // Delaying the start channel by `delay` shifts physical tau = -delay
        // to recorded zero, so earlier stops land inside the window.
        let s_delayed = s as i64 - delay_ps;
        while j < stop_tags.len() && (stop_tags[j] as i64) < s_delayed {
            j += 1;
        }
        if j == stop_tags.len() {
            break;
        }
        let tau = stop_tags[j] as i64 - s_delayed;
        debug_assert!(tau >= 0);
        if (tau as u64) < window_ps {
            counts[(tau as u64 / bin_ps) as usize] += 1;
        }
    }
    let total_time = starts.duration_s.max(stops.duration_s);
    Ok(CoincidenceHistogram {
        counts,
        bin_width_ps: bin_ps,
        tau_start_ps: -delay_ps,
        total_time,
        start_rate: starts.rate(),
        stop_rate: stops.rate(),
    })
}

/// Reference correlator: counts every start-stop pair with delay inside
/// `[-window/2, +window/2]`, symmetric under channel exchange with τ → −τ.
///
/// Bins are centered on integer multiples of the bin width so that the
/// channel-swap mirror symmetry is exact.
pub fn full_correlation(
    starts: &TimeTagRecord,
    stops: &TimeTagRecord,
    config: &HistogramConfig,
) -> Result<CoincidenceHistogram> {
    config.validate()?;
    starts.check_sorted()?;
    stops.check_sorted()?;
    let bin_ps = config.bin_width_ps() as i64;
    let k_max = (config.n_bins() / 2) as i64;
    let n_bins = (2 * k_max + 1) as usize;
    let half_ps = k_max * bin_ps + bin_ps / 2;
    let delay_ps = config.delay_ps();
    let mut counts = vec![0u64; n_bins];
    let stop_tags = &stops.timestamps_ps;
    let mut lo = 0usize;
    for &s in &starts.timestamps_ps {
        let s_delayed = s as i64 - delay_ps;
        while lo < stop_tags.len() && (stop_tags[lo] as i64) < s_delayed - half_ps {
            lo += 1;
        }
        let mut j = lo;
        while j < stop_tags.len() {
            let tau = stop_tags[j] as i64 - s_delayed;
            if tau >= half_ps {
                break;
            }
            if tau > -half_ps {
                // Round to the nearest bin center; ties go away from zero,
                // mirroring exactly under tau -> -tau.
                let k = if tau >= 0 {
                    (tau + bin_ps / 2) / bin_ps
                } else {
                    -((-tau + bin_ps / 2) / bin_ps)
                };
                counts[(k + k_max) as usize] += 1;
            }
            j += 1;
        }
    }
    let total_time = starts.duration_s.max(stops.duration_s);
    Ok(CoincidenceHistogram {
        counts,
        bin_width_ps: bin_ps as u64,
        tau_start_ps: -delay_ps - half_ps,
        total_time,
        start_rate: starts.rate(),
        stop_rate: stops.rate(),
    })
}
