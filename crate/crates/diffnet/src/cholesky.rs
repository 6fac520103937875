//! Cholesky factorization for symmetric positive-definite matrices, used to
//! invert designed precision matrices and to sample correlated Gaussians.

use crate::error::{Error, Result};
use crate::matrix::{ensure_symmetric, mirror_upper, Matrix};

/// Pivots at or below this value abort the factorization as not positive
/// definite.
const PIVOT_FLOOR: f64 = 1e-12;

/// Lower-triangular factor `L` with `L L^T = S`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    lower: Matrix,
}

impl CholeskyFactor {
    /// Factors a symmetric positive-definite matrix. Fails with the pivot
    /// index if a diagonal pivot falls to `1e-12` or below.
    pub fn factor(s: &Matrix) -> Result<Self> {
        ensure_symmetric(s, 1e-10, "cholesky factorization")?;
        let p = s.rows();
        let mut l = Matrix::zeros(p, p);
        for j in 0..p {
            let mut d = s.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if d <= PIVOT_FLOOR {
                return Err(Error::NotPositiveDefinite { index: j, value: d });
            }
            let dj = d.sqrt();
            l.set(j, j, dj);
            for i in (j + 1)..p {
                let mut v = s.get(i, j);
                for k in 0..j {
                    v -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, v / dj);
            }
        }
        Ok(CholeskyFactor { lower: l })
    }

    pub fn size(&self) -> usize {
        self.lower.rows()
    }

    /// The lower-triangular factor.
    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    /// Solves `S x = b` by forward then back substitution.
    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        let p = self.size();
        if b.len() != p {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side has length {}, expected {p}",
                b.len()
            )));
        }
        // L y = b
        let mut y = vec![0.0; p];
        for i in 0..p {
            let mut v = b[i];
            for k in 0..i {
                v -= self.lower.get(i, k) * y[k];
            }
            y[i] = v / self.lower.get(i, i);
        }
        // L^T x = y
        let mut x = vec![0.0; p];
        for i in (0..p).rev() {
            let mut v = y[i];
            for k in (i + 1)..p {
                v -= self.lower.get(k, i) * x[k];
            }
            x[i] = v / self.lower.get(i, i);
        }
        Ok(x)
    }

    /// Solves `S X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix> {
        let p = self.size();
        if b.rows() != p {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side has {} rows, expected {p}",
                b.rows()
            )));
        }
        let mut out = Matrix::zeros(p, b.cols());
        let mut col = vec![0.0; p];
        for j in 0..b.cols() {
            for i in 0..p {
                col[i] = b.get(i, j);
            }
            let x = self.solve_vec(&col)?;
            for i in 0..p {
                out.set(i, j, x[i]);
            }
        }
        Ok(out)
    }

    /// Explicit inverse `S^{-1}`, made exactly symmetric by mirroring.
    pub fn inverse(&self) -> Matrix {
        let p = self.size();
        let inv = self
            .solve_matrix(&Matrix::identity(p))
            .expect("identity has matching shape");
        let mut data = inv.as_array().clone();
        mirror_upper(&mut data);
        Matrix::from_array(data)
    }
}
