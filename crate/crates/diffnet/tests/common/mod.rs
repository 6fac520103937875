//! Independent reference implementations used to cross-check the library:
//! explicit Kronecker products, column-major vectorization, an
//! inertia-bisection eigenvalue solver, and finite differences. None of
//! them share code with the crate under test.

use diffnet::{Matrix, NormalSource};

/// Explicit Kronecker product, built entry by entry.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = (a.rows(), a.cols());
    let (br, bc) = (b.rows(), b.cols());
    let mut rows = vec![vec![0.0; ac * bc]; ar * br];
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    rows[i * br + k][j * bc + l] = a.get(i, j) * b.get(k, l);
                }
            }
        }
    }
    Matrix::from_rows(&rows).unwrap()
}

/// Column-major stacking of a matrix into a vector.
pub fn vec_stack(m: &Matrix) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.rows() * m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            v.push(m.get(i, j));
        }
    }
    v
}

/// Matrix with independent standard-normal entries.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut source = NormalSource::new(seed);
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..cols).map(|_| source.next_standard_normal()).collect())
        .collect();
    Matrix::from_rows(&data).unwrap()
}

/// Random symmetric positive-definite matrix `G G^T / p + ridge * I`.
pub fn random_spd(p: usize, seed: u64, ridge: f64) -> Matrix {
    let g = random_matrix(p, p, seed);
    let mut rows = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            let mut acc = 0.0;
            for k in 0..p {
                acc += g.get(i, k) * g.get(j, k);
            }
            rows[i][j] = acc / p as f64 + if i == j { ridge } else { 0.0 };
        }
    }
    Matrix::from_rows(&rows).unwrap()
}

/// Number of eigenvalues of symmetric `s` strictly greater than `shift`,
/// by Sylvester's law of inertia: eliminate symmetrically and count
/// positive pivots. Returns `None` when a pivot vanishes (caller nudges
/// the shift).
fn eigenvalues_above(s: &Matrix, shift: f64) -> Option<usize> {
    let p = s.rows();
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| s.get(i, j) - if i == j { shift } else { 0.0 })
                .collect()
        })
        .collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let mut positive = 0;
    for k in 0..p {
        let pivot = a[k][k];
        if pivot.abs() < 1e-14 * scale {
            return None;
        }
        if pivot > 0.0 {
            positive += 1;
        }
        for i in (k + 1)..p {
            let factor = a[i][k] / pivot;
            for j in k..p {
                a[i][j] -= factor * a[k][j];
            }
        }
    }
    Some(positive)
}

/// Largest eigenvalue of a symmetric matrix by bisection on the inertia
/// count, bracketed by Gershgorin discs. Robust to repeated eigenvalues;
/// accurate to ~1e-12 of the matrix scale.
pub fn largest_eigenvalue_oracle(s: &Matrix) -> f64 {
    assert!(s.is_square() && s.rows() > 0);
    let p = s.rows();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..p {
        let radius: f64 = (0..p).filter(|&j| j != i).map(|j| s.get(i, j).abs()).sum();
        lo = lo.min(s.get(i, i) - radius);
        hi = hi.max(s.get(i, i) + radius);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let (mut lo, mut hi) = (lo - scale * 1e-9, hi + scale * 1e-9);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        let mut probe = mid;
        let count = loop {
            if let Some(c) = eigenvalues_above(s, probe) {
                break c;
            }
            probe += scale * 1e-11; // unlucky shift hit a zero pivot
        };
        if count >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Central-difference gradient of `f` at `at`.
pub fn fd_gradient<F>(f: F, at: &Matrix, h: f64) -> Matrix
where
    F: Fn(&Matrix) -> f64,
{
    let base: Vec<Vec<f64>> = (0..at.rows())
        .map(|i| (0..at.cols()).map(|j| at.get(i, j)).collect())
        .collect();
    let shifted = |i: usize, j: usize, by: f64| {
        let mut rows = base.clone();
        rows[i][j] += by;
        Matrix::from_rows(&rows).unwrap()
    };
    let mut rows = vec![vec![0.0; at.cols()]; at.rows()];
    for i in 0..at.rows() {
        for (j, slot) in rows[i].iter_mut().enumerate() {
            *slot = (f(&shifted(i, j, h)) - f(&shifted(i, j, -h))) / (2.0 * h);
        }
    }
    Matrix::from_rows(&rows).unwrap()
}

/// Relative gap between two matrices in the max-absolute norm.
pub fn rel_gap(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).max_abs() / (a.max_abs().max(b.max_abs()) + f64::MIN_POSITIVE)
}
