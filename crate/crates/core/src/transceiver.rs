//! Received-signal synthesis and the fixed omni receive combiner used while
//! the transmitter trains.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::channel::ChannelMatrix;
use crate::codebook::{assemble_precoder, rotate, AnalogPrecoder, Codebook};
use crate::error::{Error, Result};
use crate::numeric::complex_gaussian;

/// Receive combiner W = D̄·Ā: a block-diagonal analog stage Ā of shape
/// K × N_r and a diagonal digital stage D̄ of shape K × K.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    analog: DMatrix<Complex64>,
    digital: DMatrix<Complex64>,
    combined: DMatrix<Complex64>,
}

impl Combiner {
    /// The omni-directional default: D̄ = I_K and each analog block is
    /// (1/√(N_r/K))·[1, …, 1], giving W with orthonormal rows.
    pub fn omni(n_r: usize, k: usize) -> Result<Self> {
        if k == 0 || n_r == 0 || !n_r.is_multiple_of(k) {
            return Err(Error::Config(format!(
                "receive chains K={k} must divide receive antennas N_r={n_r}"
            )));
        }
        let block = n_r / k;
        let weight = Complex64::new(1.0 / (block as f64).sqrt(), 0.0);
        let mut analog = DMatrix::zeros(k, n_r);
        for row in 0..k {
            for j in 0..block {
                analog[(row, row * block + j)] = weight;
            }
        }
        let digital = DMatrix::identity(k, k);
        let combined = &digital * &analog;
        Ok(Self {
            analog,
            digital,
            combined,
        })
    }

    /// Build a combiner from one analog row block per receive chain and the
    /// diagonal of the digital stage. Block k occupies columns
    /// k·(N_r/K)..(k+1)·(N_r/K) of row k; everything off-block stays zero.
    pub fn from_parts(
        analog_blocks: &[DVector<Complex64>],
        digital_diag: &DVector<Complex64>,
    ) -> Result<Self> {
        let k = analog_blocks.len();
        if k == 0 {
            return Err(Error::Config("combiner needs at least one chain".into()));
        }
        if digital_diag.len() != k {
            return Err(Error::DimensionMismatch {
                context: "combiner digital stage",
                expected: format!("diagonal of length {k}"),
                got: format!("diagonal of length {}", digital_diag.len()),
            });
        }
        let block = analog_blocks[0].len();
        if block == 0 || analog_blocks.iter().any(|b| b.len() != block) {
            return Err(Error::DimensionMismatch {
                context: "combiner analog blocks",
                expected: format!("{k} blocks of equal nonzero length"),
                got: format!(
                    "{:?}",
                    analog_blocks.iter().map(DVector::len).collect::<Vec<_>>()
                ),
            });
        }
        let n_r = k * block;
        let mut analog = DMatrix::zeros(k, n_r);
        for (row, b) in analog_blocks.iter().enumerate() {
            for (j, value) in b.iter().enumerate() {
                analog[(row, row * block + j)] = *value;
            }
        }
        let digital = DMatrix::from_diagonal(digital_diag);
        let combined = &digital * &analog;
        Ok(Self {
            analog,
            digital,
            combined,
        })
    }

    /// The combined matrix W.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.combined
    }

    pub fn analog(&self) -> &DMatrix<Complex64> {
        &self.analog
    }

    pub fn digital(&self) -> &DMatrix<Complex64> {
        &self.digital
    }

    /// Receive chains K.
    pub fn k(&self) -> usize {
        self.combined.nrows()
    }

    /// Receive antennas N_r.
    pub fn n_r(&self) -> usize {
        self.combined.ncols()
    }
}

/// How training symbols are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalMode {
    /// i.i.d. complex Gaussian entries with per-entry variance 1/N.
    Gaussian,
    /// Deterministic (1/√N)·[1, …, 1], for reproducible checks.
    Pilot,
}

impl std::str::FromStr for SignalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SignalMode::Gaussian),
            "pilot" => Ok(SignalMode::Pilot),
            other => Err(Error::Config(format!(
                "unknown signal mode '{other}' (expected gaussian or pilot)"
            ))),
        }
    }
}

impl std::fmt::Display for SignalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SignalMode::Gaussian => write!(f, "gaussian"),
            SignalMode::Pilot => write!(f, "pilot"),
        }
    }
}

/// Baseband transmit vector with the power convention E[s s^H] = (1/N)·I_N.
#[derive(Debug, Clone, PartialEq)]
pub struct TxSignal {
    pub symbols: DVector<Complex64>,
}

impl TxSignal {
    pub fn draw<R: Rng + ?Sized>(mode: SignalMode, n: usize, rng: &mut R) -> Self {
        match mode {
            SignalMode::Gaussian => Self::gaussian(n, rng),
            SignalMode::Pilot => Self::pilot(n),
        }
    }

    pub fn gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let variance = 1.0 / n as f64;
        Self {
            symbols: DVector::from_fn(n, |_, _| complex_gaussian(rng, variance)),
        }
    }

    pub fn pilot(n: usize) -> Self {
        let value = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Self {
            symbols: DVector::from_element(n, value),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// One trial's received vector together with the rotation that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialObservation {
    pub rotation: usize,
    pub received: DVector<Complex64>,
}

/// The received vectors of one cyclic-rotation training pass; column i was
/// produced under rotation i.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    trials: Vec<TrialObservation>,
}

impl ObservationSet {
    /// Wrap raw received columns, assigning rotation i to column i.
    pub fn from_columns(columns: Vec<DVector<Complex64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Config(
                "an observation set needs at least one trial".into(),
            ));
        }
        let trials = columns
            .into_iter()
            .enumerate()
            .map(|(rotation, received)| TrialObservation { rotation, received })
            .collect();
        Ok(Self { trials })
    }

    pub fn n_trials(&self) -> usize {
        self.trials.len()
    }

    pub fn trial(&self, i: usize) -> &TrialObservation {
        &self.trials[i]
    }

    pub fn trials(&self) -> &[TrialObservation] {
        &self.trials
    }

    /// Received energy ‖y_i‖² per trial.
    pub fn energies(&self) -> Vec<f64> {
        self.trials
            .iter()
            .map(|t| t.received.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }
}

/// Synthesize y = √ρ·W·H·A·D·s + W·noise.
pub fn synthesize_rx(
    h: &ChannelMatrix,
    a: &AnalogPrecoder,
    d: &DMatrix<Complex64>,
    w: &Combiner,
    s: &TxSignal,
    noise: &DVector<Complex64>,
    rho: f64,
) -> Result<DVector<Complex64>> {
    let n = a.n_streams();
    if h.n_tx() != a.matrix().nrows() {
        return Err(Error::DimensionMismatch {
            context: "channel × precoder",
            expected: format!("H with {} columns", a.matrix().nrows()),
            got: format!("H with {} columns", h.n_tx()),
        });
    }
    if d.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            context: "digital precoder",
            expected: format!("({n}, {n})"),
            got: format!("{:?}", d.shape()),
        });
    }
    if w.n_r() != h.n_rx() {
        return Err(Error::DimensionMismatch {
            context: "combiner × channel",
            expected: format!("W with {} columns", h.n_rx()),
            got: format!("W with {} columns", w.n_r()),
        });
    }
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            context: "transmit signal",
            expected: format!("length {n}"),
            got: format!("length {}", s.len()),
        });
    }
    if noise.len() != h.n_rx() {
        return Err(Error::DimensionMismatch {
            context: "noise vector",
            expected: format!("length {}", h.n_rx()),
            got: format!("length {}", noise.len()),
        });
    }
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::Config(format!(
            "average received power rho must be nonnegative, got {rho}"
        )));
    }
    let precoded = a.matrix() * (d * &s.symbols);
    let through_channel = h.entries() * precoded;
    let signal_part = (w.matrix() * through_channel).scale(rho.sqrt());
    let noise_part = w.matrix() * noise;
    Ok(signal_part + noise_part)
}

/// Run one cyclic-rotation training pass: trial i transmits through the
/// rotation-i precoder with identity digital precoding, a fresh signal draw,
/// and fresh i.i.d. complex Gaussian noise of per-entry variance `sigma2`.
pub fn run_training_trials<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    codebook: &Codebook,
    w: &Combiner,
    rho: f64,
    sigma2: f64,
    mode: SignalMode,
    rng: &mut R,
) -> Result<ObservationSet> {
    if sigma2.is_nan() || sigma2 < 0.0 {
        return Err(Error::Config(format!(
            "noise variance sigma2 must be nonnegative, got {sigma2}"
        )));
    }
    let n = codebook.n();
    let identity = DMatrix::identity(n, n);
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let precoder = assemble_precoder(codebook, &rotate(n, k)?)?;
        let signal = TxSignal::draw(mode, n, rng);
        let noise = DVector::from_fn(h.n_rx(), |_, _| complex_gaussian(rng, sigma2));
        columns.push(synthesize_rx(
            h, &precoder, &identity, w, &signal, &noise, rho,
        )?);
    }
    ObservationSet::from_columns(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{assemble_channel, sample_paths, AngleRange, ArrayGeometry};
    use crate::codebook::make_codebook;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_channel(value: f64) -> ChannelMatrix {
        ChannelMatrix::from_matrix(DMatrix::from_element(1, 1, Complex64::new(value, 0.0)))
    }

    #[test]
    fn omni_blocks_are_uniform_quarters() {
        let w = Combiner::omni(16, 4).unwrap();
        assert_eq!(w.matrix().shape(), (4, 16));
        for row in 0..4 {
            for col in 0..16 {
                let expected = if col / 4 == row { 0.5 } else { 0.0 };
                assert!((w.matrix()[(row, col)].re - expected).abs() < 1e-12);
                assert_eq!(w.matrix()[(row, col)].im, 0.0);
            }
        }
    }

    #[test]
    fn omni_degenerates_to_identity_when_k_equals_nr() {
        let w = Combiner::omni(4, 4).unwrap();
        assert_eq!(*w.matrix(), DMatrix::identity(4, 4));
    }

    #[test]
    fn omni_rows_are_orthonormal() {
        let w = Combiner::omni(4, 2).unwrap();
        let gram = w.matrix() * w.matrix().adjoint();
        let identity = DMatrix::<Complex64>::identity(2, 2);
        assert!((gram - identity).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-12);
    }

    #[test]
    fn omni_rejects_nondividing_chain_count() {
        assert!(Combiner::omni(16, 3).is_err());
        assert!(Combiner::omni(16, 0).is_err());
    }

    #[test]
    fn zero_signal_zero_noise_yields_zero() {
        let cb = make_codebook(1, 1).unwrap();
        let a = assemble_precoder(&cb, &rotate(1, 0).unwrap()).unwrap();
        let h = scalar_channel(2.0);
        let w = Combiner::omni(1, 1).unwrap();
        let s = TxSignal {
            symbols: DVector::zeros(1),
        };
        let noise = DVector::zeros(1);
        let y = synthesize_rx(&h, &a, &DMatrix::identity(1, 1), &w, &s, &noise, 1.0).unwrap();
        assert_eq!(y[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_power_passes_noise_through_combiner() {
        let cb = make_codebook(1, 1).unwrap();
        let a = assemble_precoder(&cb, &rotate(1, 0).unwrap()).unwrap();
        let h = scalar_channel(3.0);
        let w = Combiner::omni(1, 1).unwrap();
        let s = TxSignal::pilot(1);
        let noise = DVector::from_element(1, Complex64::new(0.25, -0.5));
        let y = synthesize_rx(&h, &a, &DMatrix::identity(1, 1), &w, &s, &noise, 0.0).unwrap();
        assert!((y[0] - Complex64::new(0.25, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn scalar_link_evaluates_exactly() {
        // √4 · 1 · 2 · 1 · 1 · 1 + 1 · 0.5 = 4.5
        let h = scalar_channel(2.0);
        let a = AnalogPrecoder::from_blocks(&[DVector::from_element(1, Complex64::new(1.0, 0.0))])
            .unwrap();
        let w = Combiner::omni(1, 1).unwrap();
        let s = TxSignal {
            symbols: DVector::from_element(1, Complex64::new(1.0, 0.0)),
        };
        let noise = DVector::from_element(1, Complex64::new(0.5, 0.0));
        let y = synthesize_rx(&h, &a, &DMatrix::identity(1, 1), &w, &s, &noise, 4.0).unwrap();
        assert!((y[0] - Complex64::new(4.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gaussian_signal_power_is_normalized() {
        // E[s s^H] = (1/N)·I, so E[||s||^2] = 1 for any N.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let draws = 20_000;
        let mean: f64 = (0..draws)
            .map(|_| TxSignal::gaussian(8, &mut rng).symbols.norm_squared())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 1.0).abs() < 0.02, "E[||s||^2] = {mean}");
    }

    #[test]
    fn pilot_signal_is_uniform() {
        let s = TxSignal::pilot(4);
        assert_eq!(s.len(), 4);
        for z in s.symbols.iter() {
            assert_eq!(*z, Complex64::new(0.5, 0.0));
        }
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let h = scalar_channel(1.0);
        let cb = make_codebook(2, 2).unwrap();
        let a = assemble_precoder(&cb, &rotate(2, 0).unwrap()).unwrap();
        let w = Combiner::omni(1, 1).unwrap();
        let s = TxSignal::pilot(2);
        let noise = DVector::zeros(1);
        let err = synthesize_rx(&h, &a, &DMatrix::identity(2, 2), &w, &s, &noise, 1.0);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn default_dimensions_produce_eight_trials_of_length_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let aod = AngleRange::new(-0.5, 0.5).unwrap();
        let aoa = AngleRange::new(-3.0, 3.0).unwrap();
        let h = assemble_channel(
            &sample_paths(&mut rng, 3, &aod, &aoa).unwrap(),
            &ArrayGeometry::half_wavelength(16).unwrap(),
            &ArrayGeometry::half_wavelength(64).unwrap(),
        );
        let cb = make_codebook(8, 8).unwrap();
        let w = Combiner::omni(16, 4).unwrap();
        let obs =
            run_training_trials(&h, &cb, &w, 1.0, 0.1, SignalMode::Gaussian, &mut rng).unwrap();
        assert_eq!(obs.n_trials(), 8);
        for (i, trial) in obs.trials().iter().enumerate() {
            assert_eq!(trial.rotation, i);
            assert_eq!(trial.received.len(), 4);
        }
    }

    #[test]
    fn zero_channel_zero_noise_yields_all_zero_observations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = ChannelMatrix::from_matrix(DMatrix::zeros(4, 4));
        let cb = make_codebook(2, 2).unwrap();
        let w = Combiner::omni(4, 2).unwrap();
        let obs = run_training_trials(&h, &cb, &w, 1.0, 0.0, SignalMode::Pilot, &mut rng).unwrap();
        for e in obs.energies() {
            assert_eq!(e, 0.0);
        }
    }

    #[test]
    fn trials_are_deterministic_per_seed() {
        let aod = AngleRange::new(-0.5, 0.5).unwrap();
        let aoa = AngleRange::new(-3.0, 3.0).unwrap();
        let cb = make_codebook(4, 4).unwrap();
        let w = Combiner::omni(8, 2).unwrap();
        let make = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let h = assemble_channel(
                &sample_paths(&mut rng, 2, &aod, &aoa).unwrap(),
                &ArrayGeometry::half_wavelength(8).unwrap(),
                &ArrayGeometry::half_wavelength(16).unwrap(),
            );
            run_training_trials(&h, &cb, &w, 1.0, 0.05, SignalMode::Gaussian, &mut rng).unwrap()
        };
        assert_eq!(make(), make());
    }

    proptest! {
        #[test]
        fn receive_is_linear_in_signal(re1 in -2.0f64..2.0, im1 in -2.0f64..2.0,
                                       re2 in -2.0f64..2.0, im2 in -2.0f64..2.0) {
            let h = scalar_channel(1.5);
            let a = AnalogPrecoder::from_blocks(&[DVector::from_element(
                1,
                Complex64::new(0.6, -0.8),
            )])
            .unwrap();
            let w = Combiner::omni(1, 1).unwrap();
            let d = DMatrix::identity(1, 1);
            let zero = DVector::zeros(1);
            let s1 = TxSignal { symbols: DVector::from_element(1, Complex64::new(re1, im1)) };
            let s2 = TxSignal { symbols: DVector::from_element(1, Complex64::new(re2, im2)) };
            let s12 = TxSignal { symbols: &s1.symbols + &s2.symbols };
            let y1 = synthesize_rx(&h, &a, &d, &w, &s1, &zero, 2.0).unwrap();
            let y2 = synthesize_rx(&h, &a, &d, &w, &s2, &zero, 2.0).unwrap();
            let y12 = synthesize_rx(&h, &a, &d, &w, &s12, &zero, 2.0).unwrap();
            prop_assert!((y12[0] - (y1[0] + y2[0])).norm() < 1e-12);
        }
    }
}
