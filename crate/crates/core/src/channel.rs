//! Geometric Saleh-Valenzuela multipath channel.
//!
//! A channel realization is the sum of a small number of rank-one path
//! contributions. Each path couples the transmit and receive uniform linear
//! arrays through their array response vectors, weighted by a complex gain.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::numeric::complex_gaussian;

/// Uniform linear array described by its element count and the spacing-to-
/// wavelength ratio d/λ. Only the ratio enters the array response, so the
/// carrier frequency is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    element_count: usize,
    spacing_over_wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(element_count: usize, spacing_over_wavelength: f64) -> Result<Self> {
        if element_count == 0 {
            return Err(Error::Config(
                "array element_count must be at least 1".into(),
            ));
        }
        if !spacing_over_wavelength.is_finite() || spacing_over_wavelength <= 0.0 {
            return Err(Error::Config(format!(
                "array spacing_over_wavelength must be a positive finite number, got {spacing_over_wavelength}"
            )));
        }
        Ok(Self {
            element_count,
            spacing_over_wavelength,
        })
    }

    /// The common d = λ/2 layout.
    pub fn half_wavelength(element_count: usize) -> Result<Self> {
        Self::new(element_count, 0.5)
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn spacing_over_wavelength(&self) -> f64 {
        self.spacing_over_wavelength
    }
}

/// Closed angle interval used for sampling departure/arrival angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRange {
    min: f64,
    max: f64,
}

impl AngleRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::Config(format!(
                "angle range bounds must be finite, got [{min}, {max}]"
            )));
        }
        if min > max {
            return Err(Error::Config(format!(
                "angle range lower bound {min} exceeds upper bound {max}"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Uniform draw from the interval; a point interval always returns its bound.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            return self.min;
        }
        rng.gen_range(self.min..=self.max)
    }
}

/// Parameters of a single propagation path.
///
/// Elevation angles are carried so a planar-array extension needs no type
/// change, but a ULA response depends on azimuth only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    /// Complex path gain.
    pub gain: Complex64,
    /// Azimuth angle of departure (radians).
    pub aod_azimuth: f64,
    /// Azimuth angle of arrival (radians).
    pub aoa_azimuth: f64,
    /// Elevation angle of departure (radians).
    pub aod_elevation: f64,
    /// Elevation angle of arrival (radians).
    pub aoa_elevation: f64,
}

/// An ordered multipath realization of at least one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    paths: Vec<PathParams>,
}

impl PathSet {
    pub fn new(paths: Vec<PathParams>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::Config("a PathSet needs at least one path".into()));
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[PathParams] {
        &self.paths
    }

    /// Number of paths; at least 1 by construction.
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Complex channel matrix of shape N_r × N_t.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex64>,
}

impl ChannelMatrix {
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn n_rx(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.entries.ncols()
    }

    /// Squared Frobenius norm ‖H‖_F².
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Count of singular values above `rel_tol` times the largest one.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let svals = self.entries.clone().singular_values();
        let largest = svals.iter().cloned().fold(0.0_f64, f64::max);
        if largest == 0.0 {
            return 0;
        }
        svals.iter().filter(|s| **s > rel_tol * largest).count()
    }
}

/// ULA array response at azimuth `phi`: element u is
/// (1/√U)·exp(j·2π·(d/λ)·u·sin φ), so the vector has unit l2 norm.
pub fn ula_response(phi: f64, geometry: &ArrayGeometry) -> DVector<Complex64> {
    let u = geometry.element_count();
    let amplitude = 1.0 / (u as f64).sqrt();
    let phase_step = TAU * geometry.spacing_over_wavelength() * phi.sin();
    DVector::from_fn(u, |i, _| {
        Complex64::from_polar(amplitude, phase_step * i as f64)
    })
}

/// Draw `count` paths: azimuths uniform on their ranges, elevations uniform on
/// the same ranges, gains i.i.d. circularly-symmetric complex Gaussian with
/// unit variance.
pub fn sample_paths<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    aod_range: &AngleRange,
    aoa_range: &AngleRange,
) -> Result<PathSet> {
    if count == 0 {
        return Err(Error::Config("path count must be at least 1".into()));
    }
    let paths = (0..count)
        .map(|_| PathParams {
            gain: complex_gaussian(rng, 1.0),
            aod_azimuth: aod_range.sample(rng),
            aoa_azimuth: aoa_range.sample(rng),
            aod_elevation: aod_range.sample(rng),
            aoa_elevation: aoa_range.sample(rng),
        })
        .collect();
    PathSet::new(paths)
}

/// Assemble H = γ · Σ_l α_l · f_r(φ_l^r) · f_t(φ_l^t)^H with γ = √(N_r·N_t/L).
///
/// Antenna element gains are unity inside the sampled angle ranges, so they do
/// not appear explicitly.
pub fn assemble_channel(
    paths: &PathSet,
    rx: &ArrayGeometry,
    tx: &ArrayGeometry,
) -> ChannelMatrix {
    let n_r = rx.element_count();
    let n_t = tx.element_count();
    let l = paths.len() as f64;
    let gamma = ((n_r * n_t) as f64 / l).sqrt();
    let mut h = DMatrix::<Complex64>::zeros(n_r, n_t);
    for path in paths.paths() {
        let f_r = ula_response(path.aoa_azimuth, rx);
        let f_t = ula_response(path.aod_azimuth, tx);
        h += &f_r * f_t.adjoint() * (path.gain * gamma);
    }
    ChannelMatrix::from_matrix(h)
}
