//! Power iteration for the largest eigenvalue of a symmetric positive
//! semidefinite matrix, the building block of the solvers' step sizes.

use crate::error::Result;
use crate::matrix::{ensure_symmetric, Matrix};

/// Default relative-change tolerance for [`largest_eigenvalue`].
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default iteration cap for [`largest_eigenvalue`].
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Outcome of a power iteration. When the relative change between successive
/// Rayleigh quotients never falls below the tolerance, `converged` is false
/// and `value` carries the best estimate.
#[derive(Clone, Copy, Debug)]
pub struct PowerEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration with the default tolerance (1e-8 relative) and cap (1000).
pub fn largest_eigenvalue_default(s: &Matrix) -> Result<PowerEstimate> {
    largest_eigenvalue(s, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// Estimates the largest eigenvalue of a symmetric PSD matrix by power
/// iteration from the deterministic all-ones start vector, stopping when the
/// Rayleigh quotient's relative change drops below `tol`.
pub fn largest_eigenvalue(s: &Matrix, tol: f64, max_iter: usize) -> Result<PowerEstimate> {
    ensure_symmetric(s, 1e-10, "power iteration")?;
    let p = s.rows();
    if s.max_abs() == 0.0 {
        return Ok(PowerEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let mut v = vec![1.0 / (p as f64).sqrt(); p];
    let mut rayleigh: f64 = 0.0;
    let mut have_prev = false;
    let mut restarted = false;
    for iter in 1..=max_iter {
        let w = s.matvec(&v);
        let next = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= f64::MIN_POSITIVE * p as f64 {
            // The start vector sits (numerically) in the kernel; restart once
            // from a deterministic ramp before giving up.
            if restarted {
                return Ok(PowerEstimate {
                    value: rayleigh.max(0.0),
                    iterations: iter,
                    converged: false,
                });
            }
            restarted = true;
            have_prev = false;
            let scale = ((p * (p + 1) * (2 * p + 1)) as f64 / 6.0).sqrt();
            v = (1..=p).map(|i| i as f64 / scale).collect();
            continue;
        }
        if have_prev && (next - rayleigh).abs() <= tol * next.abs() {
            return Ok(PowerEstimate {
                value: next,
                iterations: iter,
                converged: true,
            });
        }
        rayleigh = next;
        have_prev = true;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    Ok(PowerEstimate {
        value: rayleigh,
        iterations: max_iter,
        converged: false,
    })
}
