//! Orthonormal DCT-II and its inverse (DCT-III).
//!
//! `X[k] = s(k) * sum_n x[n] cos(pi (2n + 1) k / (2L))` with
//! `s(0) = sqrt(1/L)` and `s(k) = sqrt(2/L)` otherwise. The basis is
//! orthonormal, so the inverse is the transpose.
//!
//! The predictor works on short windows (tens of frames), so the transform
//! is a dense basis matrix built once per length.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Row-major `L x L` orthonormal DCT-II basis; row `k` is frequency `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBasis {
    len: usize,
    rows: Vec<f64>,
}

impl DctBasis {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "DCT length must be at least 1");
        let mut rows = vec![0.0; len * len];
        let lf = len as f64;
        for k in 0..len {
            let s = if k == 0 {
                libm::sqrt(1.0 / lf)
            } else {
                libm::sqrt(2.0 / lf)
            };
            for n in 0..len {
                rows[k * len + n] = s * libm::cos(PI * (2 * n + 1) as f64 * k as f64 / (2.0 * lf));
            }
        }
        Self { len, rows }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Basis entry for frequency `k` at sample `n`.
    #[inline]
    pub fn at(&self, k: usize, n: usize) -> f64 {
        self.rows[k * self.len + n]
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len);
        (0..self.len)
            .map(|k| {
                let row = &self.rows[k * self.len..(k + 1) * self.len];
                row.iter().zip(x).map(|(b, v)| b * v).sum()
            })
            .collect()
    }

    /// Inverse transform; `coeffs` shorter than the basis are zero-padded.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        assert!(coeffs.len() <= self.len);
        let mut out = vec![0.0; self.len];
        for (k, &c) in coeffs.iter().enumerate() {
            let row = &self.rows[k * self.len..(k + 1) * self.len];
            for (o, b) in out.iter_mut().zip(row) {
                *o += c * b;
            }
        }
        out
    }
}

/// Orthonormal DCT-II of `x`.
pub fn dct(x: &[f64]) -> Vec<f64> {
    DctBasis::new(x.len()).forward(x)
}

/// Inverse of [`dct`].
pub fn idct(coeffs: &[f64]) -> Vec<f64> {
    DctBasis::new(coeffs.len()).inverse(coeffs)
}
