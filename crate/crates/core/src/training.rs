//! Transmitter-side beam training from the cyclic-rotation observations.
//!
//! Two selectors are implemented over the same observation set: the
//! energy-weighted combination estimator, which forms each subarray's AWV as
//! the trial-energy-weighted sum of the codewords that subarray actually
//! transmitted, and the classic max-energy baseline, which keeps the single
//! best rotation. A small schedule generator maps trials onto TRN-unit
//! subfields.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::codebook::{assemble_precoder, rotate, AnalogPrecoder, Codebook};
use crate::error::{Error, Result};
use crate::transceiver::ObservationSet;

/// Normalized per-trial energies w_i = ‖y_i‖² / Σ_m ‖y_m‖².
#[derive(Debug, Clone, PartialEq)]
pub struct TrialWeights {
    weights: Vec<f64>,
}

impl TrialWeights {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Normalize the trial energies to sum to one.
pub fn compute_weights(obs: &ObservationSet) -> Result<TrialWeights> {
    let energies = obs.energies();
    let total: f64 = energies.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateObservations);
    }
    Ok(TrialWeights {
        weights: energies.iter().map(|e| e / total).collect(),
    })
}

/// How estimated AWVs are post-processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMode {
    /// Keep the convex combination as-is (norm at most 1).
    Raw,
    /// Scale each vector to unit l2 norm.
    UnitNorm,
    /// Project each entry onto modulus 1/√M, keeping its phase.
    UnitModulus,
}

impl std::str::FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(NormalizationMode::Raw),
            "unit-norm" => Ok(NormalizationMode::UnitNorm),
            "unit-modulus" => Ok(NormalizationMode::UnitModulus),
            other => Err(Error::Config(format!(
                "unknown normalization mode '{other}' (expected raw, unit-norm or unit-modulus)"
            ))),
        }
    }
}

impl std::fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormalizationMode::Raw => write!(f, "raw"),
            NormalizationMode::UnitNorm => write!(f, "unit-norm"),
            NormalizationMode::UnitModulus => write!(f, "unit-modulus"),
        }
    }
}

/// The N estimated per-subarray AWVs.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedAwvs {
    vectors: Vec<DVector<Complex64>>,
    mode: NormalizationMode,
}

impl EstimatedAwvs {
    pub fn vectors(&self) -> &[DVector<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &DVector<Complex64> {
        &self.vectors[k]
    }

    pub fn mode(&self) -> NormalizationMode {
        self.mode
    }

    /// Assemble the block-diagonal analog precoder carrying these estimates.
    pub fn to_precoder(&self) -> Result<AnalogPrecoder> {
        AnalogPrecoder::from_blocks(&self.vectors)
    }
}

/// Energy-weighted combination estimate.
///
/// Subarray k's estimate is Σ_i w_i · a_{(k−i) mod N}: codeword (k−i) mod N
/// is exactly the one subarray k transmitted in trial i, so a one-hot weight
/// vector recovers the codeword of that trial. The result is normalized per
/// `mode`.
pub fn com_estimate(
    obs: &ObservationSet,
    codebook: &Codebook,
    mode: NormalizationMode,
) -> Result<EstimatedAwvs> {
    let n = codebook.n();
    if obs.n_trials() != n {
        return Err(Error::DimensionMismatch {
            context: "com estimate",
            expected: format!("{n} trials for {n} codewords"),
            got: format!("{} trials", obs.n_trials()),
        });
    }
    let weights = compute_weights(obs)?;
    let m = codebook.m();
    let vectors = (0..n)
        .map(|k| {
            let mut est = DVector::<Complex64>::zeros(m);
            for i in 0..n {
                let codeword_index = (k + n - i) % n;
                est += codebook.codeword(codeword_index).scale(weights.get(i));
            }
            normalize(est, mode, m)
        })
        .collect();
    Ok(EstimatedAwvs { vectors, mode })
}

fn normalize(vector: DVector<Complex64>, mode: NormalizationMode, m: usize) -> DVector<Complex64> {
    match mode {
        NormalizationMode::Raw => vector,
        NormalizationMode::UnitNorm => {
            let norm = vector.norm();
            vector.unscale(norm)
        }
        NormalizationMode::UnitModulus => {
            let amplitude = 1.0 / (m as f64).sqrt();
            vector.map(|z| Complex64::from_polar(amplitude, z.arg()))
        }
    }
}

/// The baseline's pick: the rotation whose trial carried the most energy.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSelection {
    pub rotation: usize,
    pub precoder: AnalogPrecoder,
}

/// Max-energy selection, ties broken toward the smallest trial index.
/// All-zero observations fall back to rotation 0.
pub fn baseline_select(obs: &ObservationSet, codebook: &Codebook) -> Result<BaselineSelection> {
    let n = codebook.n();
    if obs.n_trials() != n {
        return Err(Error::DimensionMismatch {
            context: "baseline selection",
            expected: format!("{n} trials for {n} codewords"),
            got: format!("{} trials", obs.n_trials()),
        });
    }
    let energies = obs.energies();
    let mut best = 0usize;
    for (i, e) in energies.iter().enumerate() {
        if *e > energies[best] {
            best = i;
        }
    }
    let rotation = obs.trial(best).rotation;
    let precoder = assemble_precoder(codebook, &rotate(n, rotation)?)?;
    Ok(BaselineSelection { rotation, precoder })
}

/// Mapping of training trials onto TRN-unit switching subfields.
///
/// Each unit leads with `t_p` subfields that reuse the data AWV (kept only as
/// placeholders; no synchronization is modeled) followed by `t_m` subfields in
/// which the AWV switches once per subfield. Repeats per AWV are fixed at
/// T_N = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrnSchedule {
    t_p: usize,
    t_m: usize,
    t_n: usize,
    mapping: Vec<(usize, usize)>,
}

impl TrnSchedule {
    pub fn t_p(&self) -> usize {
        self.t_p
    }

    pub fn t_m(&self) -> usize {
        self.t_m
    }

    pub fn t_n(&self) -> usize {
        self.t_n
    }

    /// (unit, switching-subfield) per trial, both 0-based.
    pub fn mapping(&self) -> &[(usize, usize)] {
        &self.mapping
    }

    /// Number of TRN units used.
    pub fn units(&self) -> usize {
        self.mapping.last().map_or(0, |(unit, _)| unit + 1)
    }
}

/// Lay `n_trials` AWV switches into consecutive TRN units of `t_m` switching
/// subfields each.
pub fn trn_schedule(n_trials: usize, t_p: usize, t_m: usize) -> Result<TrnSchedule> {
    if t_m == 0 {
        return Err(Error::Config(
            "a TRN unit needs at least one switching subfield (t_m >= 1)".into(),
        ));
    }
    let mapping = (0..n_trials).map(|j| (j / t_m, j % t_m)).collect();
    Ok(TrnSchedule {
        t_p,
        t_m,
        t_n: 1,
        mapping,
    })
}
