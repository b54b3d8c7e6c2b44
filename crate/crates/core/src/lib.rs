//! Event-level simulator of a trapped-ion single-photon source with quantum
//! frequency conversion: antibunched photon streams, a pump-driven
//! difference-frequency conversion stage, two-detector coincidence counting,
//! correlation analysis, and photon link budgeting.
//!
//! Everything stochastic is keyed to a single master seed; runs are
//! reproducible bit-for-bit regardless of how many threads execute them
//! (see [`pipeline`]).

pub mod analysis;
pub mod budget;
pub mod emitter;
pub mod error;
pub mod io;
pub mod numeric;
pub mod pipeline;
pub mod qfc;
pub mod seed;
pub mod tcspc;

pub use analysis::{
    effective_snr, estimate_snr, expected_g2, g2_at_zero, micromotion_spectrum, normalize_g2,
    G2Curve, NoiseDecomposition,
};
pub use budget::{fiber_transmission, optimal_pump, pump_snr, LinkBudget};
pub use emitter::{EmitterParams, PhotonStream};
pub use error::{Error, Result};
pub use pipeline::{
    balanced_noise_rate, simulate, simulate_with, ChannelPlan, ConversionStage, Parallelism,
    SimulationPlan, SimulationResult,
};
pub use qfc::{
    convert_stream, dfg_frequency, efficiency, noise_rate, solve_double_resonance,
    ConversionModel, FilterChain, NoiseModel, TuningModel,
};
pub use tcspc::{
    detect, full_correlation, start_stop_histogram, CoincidenceHistogram, DetectorModel,
    HistogramConfig, TimeTagRecord,
};
