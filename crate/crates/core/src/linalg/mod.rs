//! Dense vectors and linear operators with adjoints.

mod blur;
mod spectral;

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use thiserror::Error;

pub use blur::{gaussian_blur, BlurMap};
pub use spectral::{estimate_spectral_norm_sq, SpectralEstimate, SPECTRAL_SAFETY_FACTOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("dimension must be positive")]
    EmptyDimension,
    #[error("kernel size must be odd, got {0}")]
    EvenKernel(usize),
    #[error("blur sigma must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("matrix data has {found} entries, expected {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, found: usize },
    #[error("power iteration needs at least one sweep")]
    NoSweeps,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// A finite-dimensional real vector.
///
/// The checked constructor [`Vector::new`] rejects NaN and infinities.
/// Arithmetic does not re-check; the solver guards iterates explicitly.
#[derive(Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(LinalgError::EmptyDimension);
        }
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Self(vec![value; dim])
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self((0..dim).map(f).collect())
    }

    pub(crate) fn from_vec(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Inner product; panics on dimension mismatch. See [`dot`] for the checked form.
    pub fn inner(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> Vector {
        Vector(self.0.iter().map(|x| alpha * x).collect())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &Vector) {
        assert_eq!(self.dim(), x.dim());
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * xi;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&x| f(x)).collect())
    }

    /// Coordinatewise combination with a second vector of equal length.
    pub fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Vector {
        assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = LinalgError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scaled(self)
    }
}

/// Checked inner product.
pub fn dot(u: &Vector, v: &Vector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(u.inner(v))
}

pub fn norm(v: &Vector) -> f64 {
    v.norm()
}

/// A linear operator `R^in_dim -> R^out_dim` together with its adjoint.
///
/// Implementations are immutable after construction.
pub trait LinearMap: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, v: &Vector) -> Vector;
    fn apply_adjoint(&self, u: &Vector) -> Vector;

    /// `D^* D v`
    fn normal_apply(&self, v: &Vector) -> Vector {
        self.apply_adjoint(&self.apply(v))
    }

    fn check_input(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.in_dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.in_dim(),
                found: v.dim(),
            });
        }
        Ok(())
    }

    fn check_output(&self, u: &Vector) -> Result<()> {
        if u.dim() != self.out_dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.out_dim(),
                found: u.dim(),
            });
        }
        Ok(())
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyDimension);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::BadShape {
                rows,
                cols,
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl LinearMap for DenseMatrix {
    fn in_dim(&self) -> usize {
        self.cols
    }

    fn out_dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, v: &Vector) -> Vector {
        assert_eq!(v.dim(), self.cols, "matrix-vector dimension mismatch");
        let x = v.as_slice();
        Vector::from_vec(
            self.data
                .chunks_exact(self.cols)
                .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    fn apply_adjoint(&self, u: &Vector) -> Vector {
        assert_eq!(u.dim(), self.rows, "adjoint dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (row, &ui) in self.data.chunks_exact(self.cols).zip(u.as_slice()) {
            if ui == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * ui;
            }
        }
        Vector::from_vec(out)
    }
}

/// Identity on `R^n`.
#[derive(Clone, Copy, Debug)]
pub struct IdentityMap(pub usize);

impl LinearMap for IdentityMap {
    fn in_dim(&self) -> usize {
        self.0
    }

    fn out_dim(&self) -> usize {
        self.0
    }

    fn apply(&self, v: &Vector) -> Vector {
        v.clone()
    }

    fn apply_adjoint(&self, u: &Vector) -> Vector {
        u.clone()
    }
}
