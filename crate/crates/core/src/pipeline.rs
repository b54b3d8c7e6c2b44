//! End-to-end two-detector experiment: emitter → beamsplitter → optional
//! frequency conversion → detectors → coincidence histogram.
//!
//! The run is cut into fixed time segments, each driven by RNGs derived from
//! the master seed and the segment index, so results are bit-identical
//! whether segments execute sequentially or on a rayon pool.

use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::qfc::{efficiency, homogeneous_events, noise_rate, ConversionModel, NoiseModel};
use crate::seed::derive_seed;
use crate::tcspc::{
    detect_segment, start_stop_histogram, CoincidenceHistogram, DetectorModel, HistogramConfig,
    TimeTagRecord,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Frequency-conversion stage placed in front of a detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionStage {
    /// Coupled pump power (W).
    pub pump_power: f64,
    pub conversion: ConversionModel,
    pub noise: NoiseModel,
}

/// One arm of the coincidence setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPlan {
    pub conversion: Option<ConversionStage>,
    pub detector: DetectorModel,
}

impl ChannelPlan {
    pub fn bare(detector: DetectorModel) -> Self {
        ChannelPlan {
            conversion: None,
            detector,
        }
    }
}

/// Complete description of a simulated measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub emitter: EmitterParams,
    /// Probability a photon is routed to the start channel.
    pub split_to_start: f64,
    pub start: ChannelPlan,
    pub stop: ChannelPlan,
    pub histogram: HistogramConfig,
    /// Total measurement time (s).
    pub duration: f64,
    /// Segment length (s); segments are the unit of parallelism.
    pub segment_duration: f64,
    pub seed: u64,
    /// Keep the detected time tags in the result (memory-heavy on long runs).
    pub keep_tags: bool,
}

impl SimulationPlan {
    /// Default segment length: long enough to amortize per-segment setup,
    /// short enough to parallelize an hours-long run.
    pub const DEFAULT_SEGMENT_S: f64 = 60.0;

    pub fn validate(&self) -> Result<()> {
        self.emitter.validate()?;
        self.histogram.validate()?;
        if !(0.0..=1.0).contains(&self.split_to_start) {
            return Err(Error::invalid("split_to_start", "must be in [0, 1]"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration", "must be > 0"));
        }
        if !(self.segment_duration > 0.0 && self.segment_duration.is_finite()) {
            return Err(Error::invalid("segment_duration", "must be > 0"));
        }
        Ok(())
    }

    fn segments(&self) -> Vec<(u64, f64, f64)> {
        let n = (self.duration / self.segment_duration).ceil() as u64;
        (0..n.max(1))
            .map(|i| {
                let t0 = i as f64 * self.segment_duration;
                let t1 = (t0 + self.segment_duration).min(self.duration);
                (i, t0, t1)
            })
            .collect()
    }
}

/// Execution strategy for the segment loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "parallel")]
    Rayon,
}

impl Default for Parallelism {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        Parallelism::Rayon
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        Parallelism::Sequential
    }
}

/// Simulation output: merged histogram and, optionally, the time tags.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub histogram: CoincidenceHistogram,
    pub start_tags: Option<TimeTagRecord>,
    pub stop_tags: Option<TimeTagRecord>,
}

struct SegmentOutput {
    counts: Vec<u64>,
    n_start: u64,
    n_stop: u64,
    start_tags: Vec<u64>,
    stop_tags: Vec<u64>,
}

/// Run one segment of the plan over the absolute window `[t0, t1)`.
fn run_segment(plan: &SimulationPlan, index: u64, t0: f64, t1: f64) -> Result<SegmentOutput> {
    let seed = plan.seed;
    let mut emitter_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "emitter", index));
    let emitted = plan.emitter.generate_segment(t0, t1, &mut emitter_rng);

    // Beamsplitter: each photon reaches exactly one detector.
    let mut split_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "split", index));
    let mut to_start = Vec::with_capacity(emitted.len() / 2 + 8);
    let mut to_stop = Vec::with_capacity(emitted.len() / 2 + 8);
    for t in emitted {
        if split_rng.random::<f64>() < plan.split_to_start {
            to_start.push(t);
        } else {
            to_stop.push(t);
        }
    }

    let process = |events: Vec<u64>, channel: &ChannelPlan, label: &str| -> Result<Vec<u64>> {
        let mut events = events;
        if let Some(stage) = &channel.conversion {
            let eta = efficiency(stage.pump_power, &stage.conversion)?;
            let noise_cps = noise_rate(stage.pump_power, &stage.noise)?;
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("qfc-{label}"), index));
            events.retain(|_| rng.random::<f64>() < eta);
            if noise_cps > 0.0 {
                let noise = homogeneous_events(noise_cps, t0, t1, &mut rng);
                events.extend(noise);
                events.sort_unstable();
            }
        }
        let mut det_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("det-{label}"), index));
        detect_segment(&events, t0, t1, &channel.detector, &mut det_rng)
    };

    let start_tags = process(to_start, &plan.start, "start")?;
    let stop_tags = process(to_stop, &plan.stop, "stop")?;

    let span = t1 - t0;
    let starts = TimeTagRecord {
        timestamps_ps: start_tags,
        duration_s: span,
    };
    let stops = TimeTagRecord {
        timestamps_ps: stop_tags,
        duration_s: span,
    };
    let hist = start_stop_histogram(&starts, &stops, &plan.histogram)?;

    let (n_start, n_stop) = (starts.len() as u64, stops.len() as u64);
    let (start_tags, stop_tags) = if plan.keep_tags {
        (starts.timestamps_ps, stops.timestamps_ps)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(SegmentOutput {
        counts: hist.counts,
        n_start,
        n_stop,
        start_tags,
        stop_tags,
    })
}

/// Run the plan with the default execution strategy.
pub fn simulate(plan: &SimulationPlan) -> Result<SimulationResult> {
    simulate_with(plan, Parallelism::default())
}

/// Run the plan with an explicit execution strategy. Both strategies produce
/// bit-identical results for the same plan and seed.
pub fn simulate_with(plan: &SimulationPlan, parallelism: Parallelism) -> Result<SimulationResult> {
    plan.validate()?;
    let segments = plan.segments();

    let outputs: Vec<SegmentOutput> = match parallelism {
        Parallelism::Sequential => segments
            .iter()
            .map(|&(i, t0, t1)| run_segment(plan, i, t0, t1))
            .collect::<Result<_>>()?,
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => segments
            .par_iter()
            .map(|&(i, t0, t1)| run_segment(plan, i, t0, t1))
            .collect::<Result<_>>()?,
    };

    let cfg = &plan.histogram;
    let mut counts = vec![0u64; cfg.n_bins()];
    let (mut n_start, mut n_stop) = (0u64, 0u64);
    let mut start_tags = Vec::new();
    let mut stop_tags = Vec::new();
    for out in outputs {
        for (a, b) in counts.iter_mut().zip(&out.counts) {
            *a += b;
        }
        n_start += out.n_start;
        n_stop += out.n_stop;
        start_tags.extend(out.start_tags);
        stop_tags.extend(out.stop_tags);
    }
    // Detector jitter can push a tag just past its segment boundary; restore
    // global order for the exported streams.
    start_tags.sort_unstable();
    stop_tags.sort_unstable();

    let histogram = CoincidenceHistogram {
        counts,
        bin_width_ps: cfg.bin_width_ps(),
        tau_start_ps: -cfg.delay_ps(),
        total_time: plan.duration,
        start_rate: n_start as f64 / plan.duration,
        stop_rate: n_stop as f64 / plan.duration,
    };
    let (start_tags, stop_tags) = if plan.keep_tags {
        (
            Some(TimeTagRecord {
                timestamps_ps: start_tags,
                duration_s: plan.duration,
            }),
            Some(TimeTagRecord {
                timestamps_ps: stop_tags,
                duration_s: plan.duration,
            }),
        )
    } else {
        (None, None)
    };
    Ok(SimulationResult {
        histogram,
        start_tags,
        stop_tags,
    })
}

/// Uncorrelated-background rate that yields a given per-channel SNR for a
/// given signal rate: noise = signal / SNR.
pub fn balanced_noise_rate(signal_rate: f64, snr: f64) -> Result<f64> {
    if !(signal_rate >= 0.0 && signal_rate.is_finite()) {
        return Err(Error::invalid("signal_rate", "must be >= 0"));
    }
    if !(snr > 0.0) {
        return Err(Error::invalid("snr", "must be > 0"));
    }
    if snr.is_infinite() {
        return Ok(0.0);
    }
    Ok(signal_rate / snr)
}
