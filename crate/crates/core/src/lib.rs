//! Link-level Monte Carlo simulator for transmitter-side beam training in
//! sub-connected hybrid mmWave MIMO.
//!
//! The transmitter drives N subarrays of M antennas each through phase
//! shifters, one RF chain per subarray. Training runs N trials, cyclically
//! rotating an orthonormal constant-modulus codebook across the subarrays
//! while the receiver listens omni-directionally. Two selectors then compete
//! on the same observations: an energy-weighted combination estimator that
//! blends the codewords each subarray transmitted, and the classic 802.11ad
//! max-energy selector that keeps the single best rotation. Both are scored
//! by effective channel capacity over a geometric Saleh-Valenzuela channel,
//! swept across SNR with paired, seeded Monte Carlo iterations.

pub mod channel;
pub mod codebook;
pub mod config;
pub mod error;
pub mod metrics;
pub mod numeric;
pub mod report;
pub mod selftest;
pub mod sweep;
pub mod training;
pub mod transceiver;

pub use channel::{
    assemble_channel, sample_paths, ula_response, AngleRange, ArrayGeometry, ChannelMatrix,
    PathParams, PathSet,
};
pub use codebook::{
    assemble_precoder, make_codebook, rotate, AnalogPrecoder, Codebook, RotationAssignment,
};
pub use config::{load_config, snr_grid, ConfigOverrides, SimConfig};
pub use error::{Error, Result};
pub use metrics::{capacity, evaluate_method, CapacityInput, CapacityResult};
pub use report::{csv_string, emit_csv, emit_plot, svg_string};
pub use sweep::{run_sweep, run_sweep_detailed, SnrPoint, SweepResult};
pub use training::{
    baseline_select, com_estimate, compute_weights, trn_schedule, BaselineSelection,
    EstimatedAwvs, NormalizationMode, TrialWeights, TrnSchedule,
};
pub use transceiver::{
    run_training_trials, synthesize_rx, Combiner, ObservationSet, SignalMode, TrialObservation,
    TxSignal,
};
