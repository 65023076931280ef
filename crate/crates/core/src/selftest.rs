//! Built-in invariant checks, runnable from the CLI without the test harness.
//!
//! Each check is small enough to finish in seconds and validates one contract
//! the simulator depends on. The capacity check deliberately recomputes the
//! log-det through an eigenvalue route instead of the Cholesky path used by
//! the implementation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{assemble_channel, sample_paths, ula_response, ArrayGeometry};
use crate::codebook::{assemble_precoder, make_codebook, rotate};
use crate::config::SimConfig;
use crate::metrics::{capacity, CapacityInput};
use crate::numeric::{complex_gaussian, hermitian_part};
use crate::sweep::run_sweep;
use crate::training::{baseline_select, com_estimate, compute_weights, NormalizationMode};
use crate::transceiver::{Combiner, ObservationSet};

/// Outcome of one invariant check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_extremum(name: &'static str, worst: f64, bound: f64) -> Self {
        Check {
            name,
            passed: worst <= bound,
            detail: format!("worst deviation {worst:.3e}, bound {bound:.1e}"),
        }
    }
}

fn max_deviation_from_identity(m: &DMatrix<Complex64>) -> f64 {
    let identity = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
    (m - identity).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn codebook_orthonormal() -> Check {
    let mut worst = 0.0_f64;
    for (n, m) in [(2, 2), (4, 8), (8, 8)] {
        let cb = make_codebook(n, m).unwrap();
        let stacked = cb.as_matrix();
        worst = worst.max(max_deviation_from_identity(&(stacked.adjoint() * &stacked)));
        let amplitude = 1.0 / (m as f64).sqrt();
        for cw in cb.codewords() {
            for z in cw.iter() {
                worst = worst.max((z.norm() - amplitude).abs());
            }
        }
    }
    Check::from_extremum("codebook orthonormal constant-modulus", worst, 1e-12)
}

fn rotations_cover_latin_square() -> Check {
    let n = 8;
    let mut seen = vec![vec![false; n]; n];
    for k in 0..n {
        let assignment = rotate(n, k).unwrap();
        for sub in 0..n {
            seen[sub][assignment.codeword_for(sub)] = true;
        }
    }
    let complete = seen.iter().flatten().all(|&v| v);
    Check {
        name: "rotation schedule covers a Latin square",
        passed: complete,
        detail: format!("all {n}x{n} subarray/codeword pairs used once: {complete}"),
    }
}

fn ula_responses_unit_norm() -> Check {
    let mut worst = 0.0_f64;
    for u in [1, 2, 8, 64] {
        let geometry = ArrayGeometry::half_wavelength(u).unwrap();
        for phi in [-1.2, -0.3, 0.0, 0.7, 1.5] {
            worst = worst.max((ula_response(phi, &geometry).norm() - 1.0).abs());
        }
    }
    Check::from_extremum("ula response unit norm", worst, 1e-12)
}

fn omni_combiner_orthonormal_rows() -> Check {
    let w = Combiner::omni(16, 4).unwrap();
    let gram = w.matrix() * w.matrix().adjoint();
    Check::from_extremum(
        "omni combiner rows orthonormal",
        max_deviation_from_identity(&gram),
        1e-12,
    )
}

fn precoder_columns_orthonormal() -> Check {
    let cb = make_codebook(8, 8).unwrap();
    let mut worst = 0.0_f64;
    for k in 0..8 {
        let a = assemble_precoder(&cb, &rotate(8, k).unwrap()).unwrap();
        worst = worst.max(max_deviation_from_identity(&(a.matrix().adjoint() * a.matrix())));
    }
    Check::from_extremum("precoder columns orthonormal", worst, 1e-12)
}

fn random_observations(rng: &mut ChaCha8Rng, n: usize, k: usize) -> ObservationSet {
    let columns = (0..n)
        .map(|_| DVector::from_fn(k, |_, _| complex_gaussian(rng, 1.0)))
        .collect();
    ObservationSet::from_columns(columns).unwrap()
}

fn weights_normalized() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let obs = random_observations(&mut rng, 8, 4);
        let weights = compute_weights(&obs).unwrap();
        worst = worst.max((weights.weights().iter().sum::<f64>() - 1.0).abs());
    }
    Check::from_extremum("trial weights sum to one", worst, 1e-12)
}

fn one_hot_recovery_exact() -> Check {
    let n = 8;
    let cb = make_codebook(n, n).unwrap();
    let mut worst = 0.0_f64;
    for hot in 0..n {
        let columns = (0..n)
            .map(|i| {
                let value = if i == hot { 3.0 } else { 0.0 };
                DVector::from_element(4, Complex64::new(value, 0.0))
            })
            .collect();
        let obs = ObservationSet::from_columns(columns).unwrap();
        let est = com_estimate(&obs, &cb, NormalizationMode::Raw).unwrap();
        let sel = baseline_select(&obs, &cb).unwrap();
        for sub in 0..n {
            let expected = cb.codeword((sub + n - hot) % n);
            worst = worst.max((est.vector(sub) - expected).norm());
        }
        if sel.rotation != hot {
            return Check {
                name: "one-hot energy recovers its trial",
                passed: false,
                detail: format!("baseline picked rotation {} for hot trial {hot}", sel.rotation),
            };
        }
    }
    Check::from_extremum("one-hot energy recovers its trial", worst, 1e-12)
}

/// Eigenvalue route for the capacity: whiten with R^{-1/2} from a Hermitian
/// eigendecomposition, then sum log2(1 + λ).
fn capacity_by_eigenvalues(input: &CapacityInput) -> f64 {
    let w = input.combiner.matrix();
    let r = hermitian_part(&(w * w.adjoint()));
    let eig_r = r.symmetric_eigen();
    let mut inv_sqrt = DMatrix::<Complex64>::zeros(w.nrows(), w.nrows());
    for (i, value) in eig_r.eigenvalues.iter().enumerate() {
        inv_sqrt[(i, i)] = Complex64::new(1.0 / value.sqrt(), 0.0);
    }
    let r_inv_sqrt = &eig_r.eigenvectors * inv_sqrt * eig_r.eigenvectors.adjoint();
    let whp = w * input.channel.entries() * input.precoder;
    let whitened = &r_inv_sqrt * whp;
    let scale = input.rho / (input.streams as f64 * input.sigma2);
    let gram = hermitian_part(&(&whitened * whitened.adjoint()).scale(scale));
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|lambda| (1.0 + lambda.max(0.0)).log2())
        .sum()
}

fn random_capacity_input_parts(
    rng: &mut ChaCha8Rng,
) -> (Combiner, crate::channel::ChannelMatrix, DMatrix<Complex64>, f64, f64, usize) {
    let k = rng.gen_range(1..=4usize);
    let block = rng.gen_range(1..=4usize);
    let n_r = k * block;
    let n_t = rng.gen_range(1..=8usize);
    let streams = rng.gen_range(1..=n_t);
    let blocks: Vec<DVector<Complex64>> = (0..k)
        .map(|_| DVector::from_fn(block, |_, _| complex_gaussian(rng, 1.0)))
        .collect();
    let digital = DVector::from_fn(k, |_, _| {
        Complex64::new(rng.gen_range(0.2..2.0), rng.gen_range(-0.5..0.5))
    });
    let combiner = Combiner::from_parts(&blocks, &digital).unwrap();
    let channel = crate::channel::ChannelMatrix::from_matrix(DMatrix::from_fn(n_r, n_t, |_, _| {
        complex_gaussian(rng, 1.0)
    }));
    let precoder = DMatrix::from_fn(n_t, streams, |_, _| complex_gaussian(rng, 1.0));
    let rho = rng.gen_range(0.1..50.0);
    let sigma2 = rng.gen_range(0.05..2.0);
    (combiner, channel, precoder, rho, sigma2, streams)
}

fn capacity_routes_agree() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let (combiner, channel, precoder, rho, sigma2, streams) =
            random_capacity_input_parts(&mut rng);
        let input = CapacityInput {
            combiner: &combiner,
            channel: &channel,
            precoder: &precoder,
            rho,
            sigma2,
            streams,
        };
        let direct = capacity(&input).unwrap().bits_per_s_per_hz;
        let by_eigen = capacity_by_eigenvalues(&input);
        worst = worst.max((direct - by_eigen).abs());
    }
    Check::from_extremum("capacity log-det matches eigenvalue route", worst, 1e-9)
}

fn capacity_monotone_in_power() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..20 {
        let (combiner, channel, precoder, rho, sigma2, streams) =
            random_capacity_input_parts(&mut rng);
        let at = |rho| {
            capacity(&CapacityInput {
                combiner: &combiner,
                channel: &channel,
                precoder: &precoder,
                rho,
                sigma2,
                streams,
            })
            .unwrap()
            .bits_per_s_per_hz
        };
        if at(2.0 * rho) < at(rho) - 1e-12 {
            return Check {
                name: "capacity nondecreasing in power",
                passed: false,
                detail: format!("capacity dropped when doubling rho={rho}"),
            };
        }
    }
    Check {
        name: "capacity nondecreasing in power",
        passed: true,
        detail: "20 random instances".into(),
    }
}

fn channel_rank_bounded() -> Check {
    let config = SimConfig::default();
    let rx = ArrayGeometry::new(config.n_r, config.d_over_lambda).unwrap();
    let tx = ArrayGeometry::new(config.n_t(), config.d_over_lambda).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let mut worst = 0usize;
    for _ in 0..20 {
        let paths = sample_paths(&mut rng, config.l, &config.aod_range, &config.aoa_range).unwrap();
        let h = assemble_channel(&paths, &rx, &tx);
        worst = worst.max(h.numerical_rank(1e-9));
    }
    Check {
        name: "channel numerical rank bounded by path count",
        passed: worst <= config.l,
        detail: format!("max rank {worst}, paths {}", config.l),
    }
}

fn channel_power_normalized() -> Check {
    let config = SimConfig::default();
    let rx = ArrayGeometry::new(config.n_r, config.d_over_lambda).unwrap();
    let tx = ArrayGeometry::new(config.n_t(), config.d_over_lambda).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let draws = 2000;
    let mean: f64 = (0..draws)
        .map(|_| {
            let paths =
                sample_paths(&mut rng, config.l, &config.aod_range, &config.aoa_range).unwrap();
            assemble_channel(&paths, &rx, &tx).frobenius_sq()
        })
        .sum::<f64>()
        / draws as f64;
    let expected = (config.n_t() * config.n_r) as f64;
    let relative = (mean - expected).abs() / expected;
    Check {
        name: "channel power normalization",
        passed: relative < 0.05,
        detail: format!("mean ||H||_F^2 = {mean:.1} over {draws} draws, expected {expected}"),
    }
}

fn sweep_deterministic() -> Check {
    let config = SimConfig {
        n: 4,
        m: 4,
        n_r: 8,
        k: 2,
        l: 2,
        snr_grid_db: vec![0.0, 10.0],
        mc_iterations: 3,
        master_seed: 2024,
        ..SimConfig::default()
    };
    let a = run_sweep(&config);
    let b = run_sweep(&config);
    match (a, b) {
        (Ok(a), Ok(b)) => Check {
            name: "sweep bit-identical per seed",
            passed: a == b,
            detail: "two runs of a 2-point, 3-iteration sweep".into(),
        },
        (Err(e), _) | (_, Err(e)) => Check {
            name: "sweep bit-identical per seed",
            passed: false,
            detail: format!("sweep failed: {e}"),
        },
    }
}

/// Run every invariant check.
pub fn run_selftest() -> Vec<Check> {
    vec![
        codebook_orthonormal(),
        rotations_cover_latin_square(),
        ula_responses_unit_norm(),
        omni_combiner_orthonormal_rows(),
        precoder_columns_orthonormal(),
        weights_normalized(),
        one_hot_recovery_exact(),
        capacity_routes_agree(),
        capacity_monotone_in_power(),
        channel_rank_bounded(),
        channel_power_normalized(),
        sweep_deterministic(),
    ]
}
