//! Effective channel capacity of a precoder/combiner pair.
//!
//! C = log₂ det(I_K + (ρ/N)·R_n⁻¹·(WHP)(WHP)^H) with R_n = σ²·W·W^H.
//!
//! The determinant is evaluated on the whitened form: with R = W W^H = L L^H,
//! the matrix I + (ρ/(Nσ²))·(L⁻¹WHP)(L⁻¹WHP)^H is Hermitian positive definite
//! and shares the determinant, so a Cholesky factorization stays stable at
//! high SNR.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::codebook::AnalogPrecoder;
use crate::error::{Error, Result};
use crate::numeric::hermitian_part;
use crate::transceiver::Combiner;

/// Inputs to one capacity evaluation.
#[derive(Debug, Clone)]
pub struct CapacityInput<'a> {
    pub combiner: &'a Combiner,
    pub channel: &'a ChannelMatrix,
    /// Hybrid precoding matrix P = A·D of shape N_t × N.
    pub precoder: &'a DMatrix<Complex64>,
    /// Average received power ρ.
    pub rho: f64,
    /// Per-entry noise variance σ².
    pub sigma2: f64,
    /// Stream count N; must equal the precoder's column count.
    pub streams: usize,
}

/// Capacity in bit/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub bits_per_s_per_hz: f64,
}

/// Evaluate the log-det capacity.
pub fn capacity(input: &CapacityInput) -> Result<CapacityResult> {
    let w = input.combiner.matrix();
    let h = input.channel.entries();
    let p = input.precoder;
    if h.nrows() != w.ncols() {
        return Err(Error::DimensionMismatch {
            context: "capacity combiner × channel",
            expected: format!("H with {} rows", w.ncols()),
            got: format!("H with {} rows", h.nrows()),
        });
    }
    if p.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            context: "capacity channel × precoder",
            expected: format!("P with {} rows", h.ncols()),
            got: format!("P with {} rows", p.nrows()),
        });
    }
    if p.ncols() != input.streams {
        return Err(Error::DimensionMismatch {
            context: "capacity stream count",
            expected: format!("P with {} columns", input.streams),
            got: format!("P with {} columns", p.ncols()),
        });
    }
    if !input.rho.is_finite() || input.rho < 0.0 {
        return Err(Error::Config(format!(
            "rho must be finite and nonnegative, got {}",
            input.rho
        )));
    }
    if !input.sigma2.is_finite() || input.sigma2 <= 0.0 {
        return Err(Error::Config(format!(
            "sigma2 must be finite and positive, got {}",
            input.sigma2
        )));
    }

    let k = w.nrows();
    let r = hermitian_part(&(w * w.adjoint()));
    let chol_r = Cholesky::new(r).ok_or(Error::CombinerRank)?;
    let whp = w * h * p;
    let whitened = chol_r
        .l()
        .solve_lower_triangular(&whp)
        .ok_or(Error::CombinerRank)?;
    let scale = input.rho / (input.streams as f64 * input.sigma2);
    let gram = (&whitened * whitened.adjoint()).scale(scale);
    let arg = hermitian_part(&(DMatrix::identity(k, k) + gram));
    let chol = Cholesky::new(arg).ok_or_else(|| {
        Error::Numerical("capacity matrix lost positive definiteness".into())
    })?;
    let log_det: f64 = chol
        .l()
        .diagonal()
        .iter()
        .map(|d| 2.0 * d.re.log2())
        .sum();
    Ok(CapacityResult {
        bits_per_s_per_hz: log_det.max(0.0),
    })
}

/// Capacity of a trained analog precoder under identity digital precoding.
pub fn evaluate_method(
    h: &ChannelMatrix,
    a: &AnalogPrecoder,
    w: &Combiner,
    rho: f64,
    sigma2: f64,
) -> Result<CapacityResult> {
    capacity(&CapacityInput {
        combiner: w,
        channel: h,
        precoder: a.matrix(),
        rho,
        sigma2,
        streams: a.n_streams(),
    })
}
