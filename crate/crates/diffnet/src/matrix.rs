//! Dense matrix kernels: construction, products, norms, sample covariance,
//! and the soft-threshold operator the sparse solvers are built from.

use std::ops::{Add, Div, Index, Mul, Sub};

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::threading;

/// Dense row-major matrix of finite `f64` entries with at least one row and
/// one column. Constructors validate shape and finiteness once, so every
/// kernel downstream can assume well-formed input.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    data: Array2<f64>,
}

/// Frobenius, entrywise l1, and max-absolute norms, computed in one pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixNorms {
    pub frobenius: f64,
    pub l1: f64,
    pub max_abs: f64,
}

impl Matrix {
    /// Builds a matrix from nested rows.
    ///
    /// Errors if there are no rows, a row is empty, rows are ragged, or any
    /// entry is not finite.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyData("matrix has no rows".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::EmptyData("matrix has no columns".into()));
        }
        let mut flat = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_shape_vec(rows.len(), cols, flat)
    }

    /// Builds a matrix from a row-major flat vector.
    pub fn from_shape_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyData(format!(
                "matrix shape {rows}x{cols} has an empty dimension"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry {} at position ({}, {})",
                values[pos],
                pos / cols,
                pos % cols
            )));
        }
        let data = Array2::from_shape_vec((rows, cols), values)
            .expect("length checked against shape above");
        Ok(Matrix { data })
    }

    /// Builds a matrix by evaluating `f(i, j)` at every position.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut flat = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                flat.push(f(i, j));
            }
        }
        Self::from_shape_vec(rows, cols, flat)
    }

    /// All-zero matrix. Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            data: Array2::zeros((rows, cols)),
        }
    }

    /// Identity matrix of order `p`. Panics if `p` is zero.
    pub fn identity(p: usize) -> Self {
        assert!(p > 0, "matrix dimensions must be positive");
        Matrix {
            data: Array2::eye(p),
        }
    }

    pub(crate) fn from_array(data: Array2<f64>) -> Self {
        debug_assert!(data.nrows() > 0 && data.ncols() > 0);
        Matrix { data }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[[i, j]] = value;
    }

    /// Borrows the backing `ndarray` storage.
    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    /// Owned transpose.
    pub fn transpose(&self) -> Matrix {
        Matrix {
            data: self.data.t().to_owned(),
        }
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Matrix {
            data: dgemm(self.data.view(), rhs.data.view()),
        })
    }

    /// Transposed product `self^T * rhs` without materializing the transpose.
    pub fn tr_matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows() != rhs.rows() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply ({}x{})^T by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Matrix {
            data: dgemm(self.data.t(), rhs.data.view()),
        })
    }

    /// Product against a transpose, `self * rhs^T`.
    pub fn matmul_tr(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols() != rhs.cols() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by ({}x{})^T",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Matrix {
            data: dgemm(self.data.view(), rhs.data.t()),
        })
    }

    /// Matrix-vector product.
    pub(crate) fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols(), v.len(), "matvec dimension mismatch");
        let v = Array1::from_iter(v.iter().copied());
        self.data.dot(&v).to_vec()
    }

    /// Entrywise scaling by a scalar.
    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            data: self.data.mapv(|v| v * factor),
        }
    }

    /// Frobenius inner product `sum_ij self[i,j] * other[i,j]`.
    pub fn dot(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "dot shape mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Soft-threshold operator: shrinks each entry toward zero by `tau`,
    /// `sign(x) * max(|x| - tau, 0)`. Errors if `tau` is negative or not
    /// finite.
    pub fn soft_threshold(&self, tau: f64) -> Result<Matrix> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "soft-threshold level must be finite and non-negative, got {tau}"
            )));
        }
        Ok(Matrix {
            data: self.data.mapv(|v| {
                let m = v.abs() - tau;
                if m > 0.0 {
                    m * v.signum()
                } else {
                    0.0
                }
            }),
        })
    }

    /// All three norms in one pass.
    pub fn norms(&self) -> MatrixNorms {
        let mut sq = 0.0;
        let mut l1 = 0.0;
        let mut max_abs: f64 = 0.0;
        for &v in self.data.iter() {
            let a = v.abs();
            sq += v * v;
            l1 += a;
            max_abs = max_abs.max(a);
        }
        MatrixNorms {
            frobenius: sq.sqrt(),
            l1,
            max_abs,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.norms().frobenius
    }

    pub fn l1_norm(&self) -> f64 {
        self.norms().l1
    }

    pub fn max_abs(&self) -> f64 {
        self.norms().max_abs
    }

    /// Number of entries with `|value| > tol`.
    pub fn count_nonzero(&self, tol: f64) -> usize {
        self.data.iter().filter(|v| v.abs() > tol).count()
    }

    /// Largest absolute gap between mirrored entries. Panics if not square.
    pub fn max_asymmetry(&self) -> f64 {
        assert!(self.is_square(), "asymmetry is defined for square matrices");
        let p = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                worst = worst.max((self.data[[i, j]] - self.data[[j, i]]).abs());
            }
        }
        worst
    }

    /// Symmetric part `(self + self^T) / 2`. Panics if not square.
    pub fn symmetrized(&self) -> Matrix {
        assert!(self.is_square(), "can only symmetrize square matrices");
        let p = self.rows();
        let mut out = self.data.clone();
        for i in 0..p {
            for j in (i + 1)..p {
                let v = 0.5 * (self.data[[i, j]] + self.data[[j, i]]);
                out[[i, j]] = v;
                out[[j, i]] = v;
            }
        }
        Matrix { data: out }
    }

    /// Subtracts each column's mean from that column.
    pub fn centered_columns(&self) -> Matrix {
        let means = self
            .data
            .mean_axis(Axis(0))
            .expect("matrix has at least one row");
        Matrix {
            data: &self.data - &means,
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[[i, j]]
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        Matrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        Matrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;

    fn mul(self, factor: f64) -> Matrix {
        self.scale(factor)
    }
}

impl Div<f64> for &Matrix {
    type Output = Matrix;

    /// True elementwise division: rounds each `a_ij / d` once, which keeps
    /// entry ordering consistent with other quantities divided by the same
    /// `d` (multiplying by a rounded reciprocal does not).
    fn div(self, divisor: f64) -> Matrix {
        Matrix {
            data: self.data.mapv(|v| v / divisor),
        }
    }
}

/// Sample covariance `S = X^T X / n` of an `n x p` data matrix whose rows are
/// observations, using the divisor `n`. With `center` set, column means are
/// subtracted first. The result is made exactly symmetric by mirroring the
/// upper triangle (empty input is unrepresentable; see [`Matrix`]).
pub fn sample_covariance(x: &Matrix, center: bool) -> Matrix {
    let xc;
    let data = if center {
        xc = x.centered_columns();
        &xc
    } else {
        x
    };
    let n = data.rows() as f64;
    let mut g = dgemm(data.data.t(), data.data.view());
    g.mapv_inplace(|v| v / n);
    mirror_upper(&mut g);
    Matrix { data: g }
}

/// Copies the upper triangle onto the lower one, making `g` exactly symmetric.
pub(crate) fn mirror_upper(g: &mut Array2<f64>) {
    let p = g.nrows();
    debug_assert_eq!(p, g.ncols());
    for i in 0..p {
        for j in (i + 1)..p {
            g[[j, i]] = g[[i, j]];
        }
    }
}

/// Checks that `m` is square and symmetric within `tol` (relative to the
/// largest entry magnitude, with a floor of 1).
pub(crate) fn ensure_symmetric(m: &Matrix, tol: f64, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "{what} requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let gap = m.max_asymmetry();
    let scale = m.max_abs().max(1.0);
    if gap > tol * scale {
        return Err(Error::InvalidArgument(format!(
            "{what} requires a symmetric matrix (worst mirrored-entry gap {gap:e})"
        )));
    }
    Ok(())
}

/// Dense product with optional row-block parallelism. Each output row is
/// produced by the same sequential kernel regardless of the block split, so
/// results differ across thread budgets only by floating-point reassociation.
fn dgemm(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let threads = threading::threads();
    let rows = a.nrows();
    let flops = rows * a.ncols() * b.ncols();
    if threads > 1 && rows >= 2 * threads && flops >= (1 << 20) {
        let chunk = rows.div_ceil(threads);
        let blocks: Vec<Array2<f64>> = (0..rows)
            .step_by(chunk)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|start| {
                let end = (start + chunk).min(rows);
                a.slice(s![start..end, ..]).dot(&b)
            })
            .collect();
        let views: Vec<_> = blocks.iter().map(|m| m.view()).collect();
        concatenate(Axis(0), &views).expect("row blocks share column count")
    } else {
        a.dot(&b)
    }
}
