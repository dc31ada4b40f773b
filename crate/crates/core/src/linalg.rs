//! Small dense matrices for the `R^{N×n}` values that appear as derivative
//! densities. Only `N, n ≤ 2` is needed, so the storage is a fixed array and
//! the type is `Copy`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub const MAX_ENTRIES: usize = 4;

/// Points of `Ω ⊂ R^n` for `n ∈ {1, 2}`; the second coordinate is ignored in 1D.
pub type Point = [f64; 2];

/// Row-major `rows × cols` matrix with at most four entries.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat {
    rows: u8,
    cols: u8,
    data: [f64; MAX_ENTRIES],
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            rows >= 1 && cols >= 1 && rows * cols <= MAX_ENTRIES,
            "unsupported matrix shape {rows}x{cols}"
        );
        Self {
            rows: rows as u8,
            cols: cols as u8,
            data: [0.0; MAX_ENTRIES],
        }
    }

    pub fn scalar(v: f64) -> Self {
        let mut m = Self::zeros(1, 1);
        m.data[0] = v;
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        let mut m = Self::zeros(rows, cols);
        m.data[..entries.len()].copy_from_slice(entries);
        m
    }

    pub fn column(entries: &[f64]) -> Self {
        Self::from_rows(entries.len(), 1, entries)
    }

    /// Basis matrix `E_{ij}`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.set(i, j, 1.0);
        m
    }

    /// Tensor product `a ⊗ b = a bᵀ`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                m.set(i, j, ai * bj);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows as usize
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols as usize
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows() && j < self.cols());
        self.data[i * self.cols() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows() && j < self.cols());
        let c = self.cols();
        self.data[i * c + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len()]
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        let n = self.len();
        &mut self.data[..n]
    }

    /// Frobenius norm, the norm `|A|` used throughout.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for v in self.as_slice() {
            s += v * v;
        }
        s.sqrt()
    }

    /// Frobenius inner product `A : B`.
    pub fn dot(&self, other: &Mat) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut m = *self;
        for v in m.as_mut_slice() {
            *v *= s;
        }
        m
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        let mut m = *self;
        for v in m.as_mut_slice() {
            *v = f(*v);
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.as_slice().iter().all(|v| *v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    /// Polar `A/|A|`; `None` for the zero matrix.
    pub fn polar(&self) -> Option<Mat> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}{:?}", self.rows, self.cols, self.as_slice())
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(self, rhs: Mat) -> Mat {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in addition");
        let mut m = self;
        for (a, b) in m.as_mut_slice().iter_mut().zip(rhs.as_slice()) {
            *a += b;
        }
        m
    }
}

impl AddAssign for Mat {
    fn add_assign(&mut self, rhs: Mat) {
        *self = *self + rhs;
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(self, rhs: Mat) -> Mat {
        self + (-rhs)
    }
}

impl Neg for Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Mat {
    type Output = Mat;
    fn mul(self, rhs: f64) -> Mat {
        self.scale(rhs)
    }
}

/// Serialized as a row-major nested array.
impl Serialize for Mat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.get(i, j)).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Scalar(f64),
            Flat(Vec<f64>),
            Nested(Vec<Vec<f64>>),
        }
        let m = match Repr::deserialize(d)? {
            Repr::Scalar(v) => Mat::scalar(v),
            Repr::Flat(v) => {
                if v.is_empty() || v.len() > 2 {
                    return Err(serde::de::Error::custom("column vector must have 1 or 2 entries"));
                }
                Mat::column(&v)
            }
            Repr::Nested(rows) => {
                let r = rows.len();
                let c = rows.first().map_or(0, |row| row.len());
                if r == 0 || c == 0 || r * c > MAX_ENTRIES || rows.iter().any(|row| row.len() != c) {
                    return Err(serde::de::Error::custom("ragged or oversized matrix"));
                }
                let flat: Vec<f64> = rows.into_iter().flatten().collect();
                Mat::from_rows(r, c, &flat)
            }
        };
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outer_product_is_a_b_transpose() {
        let m = Mat::outer(&[1.0, 2.0], &[3.0, -1.0]);
        assert_eq!(m.as_slice(), &[3.0, -1.0, 6.0, -2.0]);
        assert_eq!(m.shape(), (2, 2));
    }

    #[test]
    fn frobenius_norm_and_polar() {
        let m = Mat::from_rows(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        assert_eq!(m.norm(), 5.0);
        let p = m.polar().unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert!(Mat::zeros(1, 2).polar().is_none());
    }

    #[test]
    fn serde_accepts_scalars_and_nested() {
        let m: Mat = serde_json::from_str("2.5").unwrap();
        assert_eq!(m, Mat::scalar(2.5));
        let m: Mat = serde_json::from_str("[[1,2],[3,4]]").unwrap();
        assert_eq!(m.get(1, 0), 3.0);
        assert!(serde_json::from_str::<Mat>("[[1,2],[3]]").is_err());
    }
}
