//! Seeded Monte Carlo SNR sweep comparing the energy-weighted estimator with
//! the max-energy baseline on paired observations.
//!
//! Every (grid point, iteration) cell owns a private random stream derived
//! from the master seed, so results are bit-identical for any worker count:
//! cells are computed independently, collected in index order, and reduced
//! sequentially.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{assemble_channel, sample_paths, ArrayGeometry};
use crate::codebook::{make_codebook, Codebook};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::metrics::evaluate_method;
use crate::training::{baseline_select, com_estimate};
use crate::transceiver::{run_training_trials, Combiner};

/// Average received power is pinned to one; the SNR grid moves the noise.
const RHO: f64 = 1.0;

/// Paired capacities of one Monte Carlo iteration, in bit/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOutcome {
    pub com: f64,
    pub baseline: f64,
}

/// Aggregates for one SNR grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub mean_com: f64,
    pub std_com: f64,
    pub mean_baseline: f64,
    pub std_baseline: f64,
    pub mean_gain: f64,
    pub iterations: usize,
}

/// Full sweep output, rows ordered by SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SnrPoint>,
    pub seed: u64,
    pub config_fingerprint: String,
}

/// Sweep output together with the retained per-iteration capacities, in
/// iteration order per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDetail {
    pub result: SweepResult,
    pub per_iteration: Vec<Vec<IterationOutcome>>,
}

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone, Default)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation (n−1 denominator); zero below two samples.
    pub fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }
}

/// The private random stream of one (grid point, iteration) cell.
fn cell_rng(master_seed: u64, snr_index: usize, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((snr_index as u64) << 40) | iteration as u64);
    rng
}

/// Immutable per-sweep state shared by every iteration.
struct SweepContext<'a> {
    config: &'a SimConfig,
    codebook: Codebook,
    combiner: Combiner,
    rx_geometry: ArrayGeometry,
    tx_geometry: ArrayGeometry,
}

/// One paired iteration: sample a channel, run the rotation trials once, and
/// score both selectors on the same observations.
fn run_iteration(
    ctx: &SweepContext<'_>,
    sigma2: f64,
    snr_index: usize,
    iteration: usize,
) -> Result<IterationOutcome> {
    let mut rng = cell_rng(ctx.config.master_seed, snr_index, iteration);
    let paths = sample_paths(
        &mut rng,
        ctx.config.l,
        &ctx.config.aod_range,
        &ctx.config.aoa_range,
    )?;
    let h = assemble_channel(&paths, &ctx.rx_geometry, &ctx.tx_geometry);
    let observations = run_training_trials(
        &h,
        &ctx.codebook,
        &ctx.combiner,
        RHO,
        sigma2,
        ctx.config.signal_mode,
        &mut rng,
    )?;
    let com_precoder =
        com_estimate(&observations, &ctx.codebook, ctx.config.normalization)?.to_precoder()?;
    let baseline = baseline_select(&observations, &ctx.codebook)?;
    let com = evaluate_method(&h, &com_precoder, &ctx.combiner, RHO, sigma2)?;
    let base = evaluate_method(&h, &baseline.precoder, &ctx.combiner, RHO, sigma2)?;
    Ok(IterationOutcome {
        com: com.bits_per_s_per_hz,
        baseline: base.bits_per_s_per_hz,
    })
}

/// Run the sweep, retaining per-iteration capacities.
pub fn run_sweep_detailed(config: &SimConfig) -> Result<SweepDetail> {
    config.validate()?;
    let ctx = SweepContext {
        config,
        codebook: make_codebook(config.n, config.m)?,
        combiner: Combiner::omni(config.n_r, config.k)?,
        rx_geometry: ArrayGeometry::new(config.n_r, config.d_over_lambda)?,
        tx_geometry: ArrayGeometry::new(config.n_t(), config.d_over_lambda)?,
    };

    let mut points = Vec::with_capacity(config.snr_grid_db.len());
    let mut per_iteration = Vec::with_capacity(config.snr_grid_db.len());
    for (snr_index, &snr_db) in config.snr_grid_db.iter().enumerate() {
        let sigma2 = RHO / 10f64.powf(snr_db / 10.0);
        let outcomes: Vec<IterationOutcome> = (0..config.mc_iterations)
            .into_par_iter()
            .map(|iteration| {
                run_iteration(&ctx, sigma2, snr_index, iteration).map_err(|source| {
                    Error::Sweep {
                        snr_db,
                        iteration,
                        source: Box::new(source),
                    }
                })
            })
            .collect::<Result<_>>()?;

        let mut com = RunningStats::default();
        let mut baseline = RunningStats::default();
        let mut gain = RunningStats::default();
        for outcome in &outcomes {
            com.push(outcome.com);
            baseline.push(outcome.baseline);
            gain.push(outcome.com - outcome.baseline);
        }
        points.push(SnrPoint {
            snr_db,
            mean_com: com.mean(),
            std_com: com.std(),
            mean_baseline: baseline.mean(),
            std_baseline: baseline.std(),
            mean_gain: gain.mean(),
            iterations: outcomes.len(),
        });
        per_iteration.push(outcomes);
    }
    Ok(SweepDetail {
        result: SweepResult {
            points,
            seed: config.master_seed,
            config_fingerprint: config.fingerprint(),
        },
        per_iteration,
    })
}

/// Run the sweep, keeping only the per-point aggregates.
pub fn run_sweep(config: &SimConfig) -> Result<SweepResult> {
    run_sweep_detailed(config).map(|detail| detail.result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> SimConfig {
        SimConfig {
            n: 4,
            m: 4,
            n_r: 8,
            k: 2,
            l: 2,
            snr_grid_db: vec![0.0, 10.0],
            mc_iterations: 4,
            master_seed: 7,
            ..SimConfig::default()
        }
    }

    #[test]
    fn sweep_is_bit_identical_per_seed() {
        let config = tiny_config();
        let a = run_sweep(&config).unwrap();
        let b = run_sweep(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_is_independent_of_worker_count() {
        let config = tiny_config();
        let pool_1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool_4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool_1.install(|| run_sweep(&config)).unwrap();
        let b = pool_4.install(|| run_sweep(&config)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_has_one_row_per_grid_point() {
        let result = run_sweep(&tiny_config()).unwrap();
        assert_eq!(result.points.len(), 2);
        for point in &result.points {
            assert_eq!(point.iterations, 4);
            assert!(point.mean_com.is_finite());
            assert!(point.std_com >= 0.0);
            assert!(point.mean_baseline.is_finite());
            assert!(point.std_baseline >= 0.0);
        }
        assert_eq!(result.seed, 7);
    }

    #[test]
    fn distinct_cells_use_distinct_streams() {
        let detail = run_sweep_detailed(&tiny_config()).unwrap();
        let flat: Vec<f64> = detail
            .per_iteration
            .iter()
            .flatten()
            .map(|o| o.com)
            .collect();
        for i in 0..flat.len() {
            for j in (i + 1)..flat.len() {
                assert_ne!(flat[i], flat[j], "cells {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn streaming_aggregates_match_two_pass_recomputation() {
        let detail = run_sweep_detailed(&tiny_config()).unwrap();
        for (point, outcomes) in detail.result.points.iter().zip(&detail.per_iteration) {
            let n = outcomes.len() as f64;
            let mean: f64 = outcomes.iter().map(|o| o.com).sum::<f64>() / n;
            let var: f64 = outcomes
                .iter()
                .map(|o| (o.com - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            assert!((point.mean_com - mean).abs() < 1e-12);
            assert!((point.std_com - var.sqrt()).abs() < 1e-12);
            let gain: f64 = outcomes.iter().map(|o| o.com - o.baseline).sum::<f64>() / n;
            assert!((point.mean_gain - gain).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_config_is_rejected_before_work() {
        let mut config = tiny_config();
        config.k = 3;
        assert!(matches!(run_sweep(&config), Err(Error::Config(_))));
    }

    #[test]
    fn running_stats_handles_short_inputs() {
        let mut stats = RunningStats::default();
        assert_eq!(stats.std(), 0.0);
        stats.push(2.0);
        assert_eq!(stats.mean(), 2.0);
        assert_eq!(stats.std(), 0.0);
        stats.push(4.0);
        assert!((stats.mean() - 3.0).abs() < 1e-15);
        assert!((stats.std() - 2.0_f64.sqrt()).abs() < 1e-12);
    }
}
