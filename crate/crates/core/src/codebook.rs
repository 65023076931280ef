//! Orthonormal constant-modulus AWV codebook, block-diagonal analog
//! precoders, and the cyclic-rotation trial schedule.
//!
//! Codewords are the first N columns of the M-point DFT matrix scaled by
//! 1/√M: the canonical family that is simultaneously orthonormal and
//! realizable with phase shifters of fixed amplitude 1/√M.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// N orthonormal analog weighting vectors of length M with entries of
/// constant modulus 1/√M.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    codewords: Vec<DVector<Complex64>>,
}

impl Codebook {
    /// Number of codewords N.
    pub fn n(&self) -> usize {
        self.codewords.len()
    }

    /// Codeword length M.
    pub fn m(&self) -> usize {
        self.codewords[0].len()
    }

    pub fn codeword(&self, index: usize) -> &DVector<Complex64> {
        &self.codewords[index]
    }

    pub fn codewords(&self) -> &[DVector<Complex64>] {
        &self.codewords
    }

    /// Stack the codewords as columns of an M × N matrix.
    pub fn as_matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.m(), self.n());
        for (j, cw) in self.codewords.iter().enumerate() {
            m.set_column(j, cw);
        }
        m
    }
}

/// Build the N-codeword, length-M DFT codebook.
pub fn make_codebook(n: usize, m: usize) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::Config("codebook size N must be at least 1".into()));
    }
    if n > m {
        return Err(Error::Config(format!(
            "codebook size N={n} exceeds codeword length M={m}; constant-modulus \
             orthogonality needs N <= M"
        )));
    }
    let amplitude = 1.0 / (m as f64).sqrt();
    let codewords = (0..n)
        .map(|col| {
            DVector::from_fn(m, |row, _| {
                let phase = TAU * (row as f64) * (col as f64) / m as f64;
                Complex64::from_polar(amplitude, phase)
            })
        })
        .collect();
    Ok(Codebook { codewords })
}

/// Cyclic assignment of codewords to subarrays for one training trial.
///
/// Indices are 0-based: at rotation k, subarray i transmits codeword
/// (i − k) mod N, so k = 0 is the identity assignment and k = 1 hands
/// subarray 0 the last codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationAssignment {
    rotation: usize,
    map: Vec<usize>,
}

impl RotationAssignment {
    pub fn rotation(&self) -> usize {
        self.rotation
    }

    /// Codeword index transmitted by the given subarray.
    pub fn codeword_for(&self, subarray: usize) -> usize {
        self.map[subarray]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn n_subarrays(&self) -> usize {
        self.map.len()
    }
}

/// Build the rotation-k assignment over `n` subarrays.
pub fn rotate(n: usize, k: usize) -> Result<RotationAssignment> {
    if n == 0 {
        return Err(Error::Config("subarray count must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::Config(format!(
            "rotation index {k} out of range for {n} subarrays"
        )));
    }
    let map = (0..n).map(|i| (i + n - k) % n).collect();
    Ok(RotationAssignment { rotation: k, map })
}

/// Block-diagonal NM × N analog precoding stage: column n carries one
/// length-M weighting vector in rows n·M..(n+1)·M, zeros elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogPrecoder {
    entries: DMatrix<Complex64>,
    block_len: usize,
}

impl AnalogPrecoder {
    /// Place `blocks[n]` into block row n of column n. All blocks must share
    /// one length.
    pub fn from_blocks(blocks: &[DVector<Complex64>]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Config(
                "analog precoder needs at least one block".into(),
            ));
        }
        let block_len = blocks[0].len();
        if block_len == 0 || blocks.iter().any(|b| b.len() != block_len) {
            return Err(Error::DimensionMismatch {
                context: "analog precoder blocks",
                expected: format!("{} vectors of equal nonzero length", blocks.len()),
                got: format!("{:?}", blocks.iter().map(DVector::len).collect::<Vec<_>>()),
            });
        }
        let n = blocks.len();
        let mut entries = DMatrix::zeros(n * block_len, n);
        for (col, block) in blocks.iter().enumerate() {
            for (row, value) in block.iter().enumerate() {
                entries[(col * block_len + row, col)] = *value;
            }
        }
        Ok(Self { entries, block_len })
    }

    /// The full NM × N matrix.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Stream count N.
    pub fn n_streams(&self) -> usize {
        self.entries.ncols()
    }

    /// Antennas per subarray M.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Copy of the weighting vector in block `n`.
    pub fn block(&self, n: usize) -> DVector<Complex64> {
        let start = n * self.block_len;
        DVector::from_fn(self.block_len, |i, _| self.entries[(start + i, n)])
    }
}

/// Assemble the block-diagonal precoder that realizes `assignment` over
/// `codebook`.
pub fn assemble_precoder(
    codebook: &Codebook,
    assignment: &RotationAssignment,
) -> Result<AnalogPrecoder> {
    if assignment.n_subarrays() != codebook.n() {
        return Err(Error::DimensionMismatch {
            context: "precoder assembly",
            expected: format!("assignment over {} subarrays", codebook.n()),
            got: format!("assignment over {} subarrays", assignment.n_subarrays()),
        });
    }
    let blocks: Vec<DVector<Complex64>> = (0..codebook.n())
        .map(|i| codebook.codeword(assignment.codeword_for(i)).clone())
        .collect();
    AnalogPrecoder::from_blocks(&blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gram_deviation_from_identity(m: &DMatrix<Complex64>) -> f64 {
        let gram = m.adjoint() * m;
        let identity = DMatrix::<Complex64>::identity(gram.nrows(), gram.ncols());
        (gram - identity)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_point_codebook_is_the_hadamard_pair() {
        let cb = make_codebook(2, 2).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        let a0 = cb.codeword(0);
        let a1 = cb.codeword(1);
        assert!((a0[0] - Complex64::new(s, 0.0)).norm() < 1e-12);
        assert!((a0[1] - Complex64::new(s, 0.0)).norm() < 1e-12);
        assert!((a1[0] - Complex64::new(s, 0.0)).norm() < 1e-12);
        assert!((a1[1] - Complex64::new(-s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eight_by_eight_gram_is_identity() {
        let cb = make_codebook(8, 8).unwrap();
        assert!(gram_deviation_from_identity(&cb.as_matrix()) <= 1e-12);
    }

    #[test]
    fn single_codeword_is_uniform() {
        let cb = make_codebook(1, 4).unwrap();
        for z in cb.codeword(0).iter() {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn oversized_codebook_is_rejected() {
        assert!(make_codebook(9, 8).is_err());
        assert!(make_codebook(0, 8).is_err());
    }

    #[test]
    fn rotation_zero_is_identity() {
        let r = rotate(8, 0).unwrap();
        for i in 0..8 {
            assert_eq!(r.codeword_for(i), i);
        }
    }

    #[test]
    fn rotation_one_hands_subarray_zero_the_last_codeword() {
        let r = rotate(8, 1).unwrap();
        assert_eq!(r.codeword_for(0), 7);
        assert_eq!(r.codeword_for(1), 0);
    }

    #[test]
    fn rotation_out_of_range_is_rejected() {
        assert!(rotate(8, 8).is_err());
    }

    #[test]
    fn rotations_cover_a_latin_square() {
        let n = 3;
        let mut seen = vec![vec![false; n]; n];
        for k in 0..n {
            let r = rotate(n, k).unwrap();
            for (sub, row) in seen.iter_mut().enumerate() {
                let cw = r.codeword_for(sub);
                assert!(!row[cw], "pair ({sub}, {cw}) repeated");
                row[cw] = true;
            }
        }
        assert!(seen.iter().flatten().all(|&v| v));
    }

    #[test]
    fn precoder_layout_identity_rotation() {
        let cb = make_codebook(2, 2).unwrap();
        let a = assemble_precoder(&cb, &rotate(2, 0).unwrap()).unwrap();
        let m = a.matrix();
        assert_eq!(m.shape(), (4, 2));
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((m[(0, 0)] - Complex64::new(s, 0.0)).norm() < 1e-12);
        assert!((m[(1, 0)] - Complex64::new(s, 0.0)).norm() < 1e-12);
        assert!((m[(2, 1)] - Complex64::new(s, 0.0)).norm() < 1e-12);
        assert!((m[(3, 1)] - Complex64::new(-s, 0.0)).norm() < 1e-12);
        assert_eq!(m[(2, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn precoder_layout_swapped_under_rotation_one() {
        let cb = make_codebook(2, 2).unwrap();
        let a = assemble_precoder(&cb, &rotate(2, 1).unwrap()).unwrap();
        assert_eq!(a.block(0), *cb.codeword(1));
        assert_eq!(a.block(1), *cb.codeword(0));
    }

    #[test]
    fn precoder_dimension_mismatch_is_rejected() {
        let cb = make_codebook(4, 8).unwrap();
        let r = rotate(3, 1).unwrap();
        assert!(assemble_precoder(&cb, &r).is_err());
    }

    proptest! {
        #[test]
        fn codebook_gram_identity_and_modulus(m in 1usize..32, frac in 0.0f64..1.0) {
            let n = 1 + ((m as f64 - 1.0) * frac) as usize;
            let cb = make_codebook(n, m).unwrap();
            prop_assert!(gram_deviation_from_identity(&cb.as_matrix()) <= 1e-12);
            let expected = 1.0 / (m as f64).sqrt();
            for cw in cb.codewords() {
                for z in cw.iter() {
                    prop_assert!((z.norm() - expected).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn precoder_columns_orthonormal(m in 1usize..12, n in 1usize..12, k_frac in 0.0f64..1.0) {
            let n = n.min(m);
            let k = ((n as f64 - 1.0) * k_frac) as usize;
            let cb = make_codebook(n, m).unwrap();
            let a = assemble_precoder(&cb, &rotate(n, k).unwrap()).unwrap();
            prop_assert!(gram_deviation_from_identity(a.matrix()) <= 1e-12);
        }
    }
}
