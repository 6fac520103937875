//! ADMM reference solver for the asymmetric loss.
//!
//! Splitting the penalized objective as `loss(D) + lambda |A|_1` subject to
//! `D = A` gives three closed-form updates per iteration:
//!
//! 1. `D`-update: solve the ridge-regularized Sylvester system
//!    `S1 D S2 + rho D = S1 - S2 + rho (A - B)`,
//! 2. `A`-update: soft-threshold `D + B` at `lambda / rho`,
//! 3. dual update: `B <- B + D - A`.
//!
//! The Sylvester solve diagonalizes both covariances once (cyclic Jacobi)
//! and divides in the eigenbasis, so every iteration costs four dense
//! multiplications. This is deliberately simple and `O(p^3)`: it exists to
//! cross-check the accelerated solver, not to replace it, and refuses
//! problems beyond [`MAX_ORACLE_DIM`].

use crate::error::{Error, Result};
use crate::loss::{GradientEngine, LossKind};
use crate::matrix::{ensure_symmetric, Matrix};
use crate::solver::{PathResult, SolverResult};

/// Largest dimension the reference solver accepts.
pub const MAX_ORACLE_DIM: usize = 200;

/// Relative off-diagonal mass at which the Jacobi sweep stops.
pub const JACOBI_TOL: f64 = 1e-12;

/// Jacobi sweeps allowed before giving up.
const MAX_JACOBI_SWEEPS: usize = 100;

/// Eigenvalues (descending) and matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Stops once the off-diagonal Frobenius mass falls below `tol` times the
/// matrix Frobenius norm.
pub fn symmetric_eigen(s: &Matrix, tol: f64) -> Result<EigenDecomposition> {
    ensure_symmetric(s, 1e-10, "eigendecomposition")?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eigendecomposition tolerance must be positive, got {tol}"
        )));
    }
    let p = s.rows();
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| s.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale = s.frobenius_norm();

    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut acc = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                acc += 2.0 * a[i][j] * a[i][j];
            }
        }
        acc.sqrt()
    };

    let mut done = scale == 0.0 || off(&a) <= tol * scale;
    if !done {
        for _sweep in 0..MAX_JACOBI_SWEEPS {
            for r in 0..p.saturating_sub(1) {
                for q in (r + 1)..p {
                    let apq = a[r][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[r][r]) / (2.0 * apq);
                    // Stable for huge |theta|: t -> 0 and the rotation is a
                    // near-identity that still annihilates the tiny pivot.
                    let t = if theta.is_finite() {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    } else {
                        0.0
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;

                    let (arr, aqq) = (a[r][r], a[q][q]);
                    a[r][r] = arr - t * apq;
                    a[q][q] = aqq + t * apq;
                    a[r][q] = 0.0;
                    a[q][r] = 0.0;
                    for i in 0..p {
                        if i != r && i != q {
                            let (air, aiq) = (a[i][r], a[i][q]);
                            a[i][r] = c * air - sn * aiq;
                            a[r][i] = a[i][r];
                            a[i][q] = sn * air + c * aiq;
                            a[q][i] = a[i][q];
                        }
                        let (vir, viq) = (v[i][r], v[i][q]);
                        v[i][r] = c * vir - sn * viq;
                        v[i][q] = sn * vir + c * viq;
                    }
                }
            }
            if off(&a) <= tol * scale {
                done = true;
                break;
            }
        }
    }
    if !done {
        return Err(Error::EigenFailure(format!(
            "Jacobi sweep did not reduce off-diagonal mass below {tol:e} in {MAX_JACOBI_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors = Matrix::from_fn(p, p, |i, j| v[i][order[j]])?;
    Ok(EigenDecomposition { values, vectors })
}

/// Solver for `S1 D S2 + rho D = C` via the spectral method: with
/// `S1 = U1 diag(d1) U1^T` and `S2 = U2 diag(d2) U2^T`,
/// `D = U1 [ (U1^T C U2)_{ij} / (d1_i d2_j + rho) ] U2^T`. The two
/// decompositions are computed once at construction, so repeated solves
/// (one per ADMM iteration) cost four multiplications each.
#[derive(Clone, Debug)]
pub struct SylvesterRidge {
    e1: EigenDecomposition,
    e2: EigenDecomposition,
    rho: f64,
}

impl SylvesterRidge {
    pub fn new(s1: &Matrix, s2: &Matrix, rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "ridge parameter must be positive, got {rho}"
            )));
        }
        if s1.shape() != s2.shape() {
            return Err(Error::ShapeMismatch(format!(
                "coefficient matrices have different orders: {} vs {}",
                s1.rows(),
                s2.rows()
            )));
        }
        Ok(SylvesterRidge {
            e1: symmetric_eigen(s1, JACOBI_TOL)?,
            e2: symmetric_eigen(s2, JACOBI_TOL)?,
            rho,
        })
    }

    pub fn solve(&self, c: &Matrix) -> Result<Matrix> {
        let p = self.e1.vectors.rows();
        if c.shape() != (p, p) {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side must be {p}x{p}, got {}x{}",
                c.rows(),
                c.cols()
            )));
        }
        let mut core = self.e1.vectors.tr_matmul(c)?.matmul(&self.e2.vectors)?;
        for i in 0..p {
            for j in 0..p {
                let denom = self.e1.values[i] * self.e2.values[j] + self.rho;
                core.set(i, j, core.get(i, j) / denom);
            }
        }
        self.e1.vectors.matmul(&core)?.matmul_tr(&self.e2.vectors)
    }
}

/// One-shot convenience wrapper around [`SylvesterRidge`].
pub fn solve_sylvester_ridge(s1: &Matrix, s2: &Matrix, rho: f64, c: &Matrix) -> Result<Matrix> {
    SylvesterRidge::new(s1, s2, rho)?.solve(c)
}

/// Tuning knobs for [`admm_solve`]: defaults `rho = 1.0`, `rel_tol = 1e-5`,
/// `max_iter = 10000`.
#[derive(Clone, Debug)]
pub struct AdmmConfig {
    pub lambda: f64,
    pub rho: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl AdmmConfig {
    pub fn new(lambda: f64) -> Self {
        AdmmConfig {
            lambda,
            rho: 1.0,
            rel_tol: 1e-5,
            max_iter: 10_000,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "augmentation parameter must be positive, got {}",
                self.rho
            )));
        }
        if !self.rel_tol.is_finite() || self.rel_tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "relative tolerance must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument(
                "iteration cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Convergence diagnostics beyond the shared result fields.
#[derive(Clone, Copy, Debug)]
pub struct AdmmDiagnostics {
    /// `|D - A|_F` at the final iteration: how far the smooth iterate sits
    /// from the reported sparse one.
    pub primal_residual: f64,
}

fn check_engine(engine: &GradientEngine) -> Result<()> {
    if engine.kind() != LossKind::Asymmetric {
        return Err(Error::InvalidArgument(
            "the reference solver only handles the asymmetric loss".into(),
        ));
    }
    let p = engine.dimension();
    if p > MAX_ORACLE_DIM {
        return Err(Error::InvalidArgument(format!(
            "reference solver is limited to {MAX_ORACLE_DIM} variables, got {p}"
        )));
    }
    Ok(())
}

/// Core loop shared by the single solve and the path sweep; returns the
/// final dual variable so sweeps can warm-start it.
fn run_admm(
    engine: &GradientEngine,
    ridge: &SylvesterRidge,
    config: &AdmmConfig,
    start: Option<(Matrix, Matrix)>,
) -> Result<(SolverResult, AdmmDiagnostics, Matrix)> {
    config.validate()?;
    let p = engine.dimension();
    let (mut a, mut b) = start.unwrap_or_else(|| (Matrix::zeros(p, p), Matrix::zeros(p, p)));
    let tau = config.lambda / config.rho;

    let mut f_cur = engine.objective(&a, config.lambda)?;
    let divergence_cap = 1e12 * (f_cur.abs() + 1.0);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut primal_residual = f64::INFINITY;

    for pass in 1..=config.max_iter {
        let c = engine.diff() + &(&(&a - &b) * config.rho);
        let delta = ridge.solve(&c)?;
        let a_next = (&delta + &b).soft_threshold(tau)?;
        b = &(&b + &delta) - &a_next;
        a = a_next;

        let f_next = engine.objective(&a, config.lambda)?;
        if !f_next.is_finite() || f_next > divergence_cap {
            return Err(Error::Divergence {
                iteration: pass,
                value: f_next,
            });
        }
        trace.push(f_next);
        iterations = pass;
        primal_residual = (&delta - &a).frobenius_norm();
        // A stalled objective alone is not enough: the splitting variable
        // can sit still for a pass (e.g. fully thresholded away) while the
        // consensus pair is far from feasible, so insist on primal
        // feasibility as well.
        let done = (f_cur - f_next).abs() < config.rel_tol * (f_cur.abs() + 1.0)
            && primal_residual <= config.rel_tol * (1.0 + a.frobenius_norm());
        f_cur = f_next;
        if done {
            converged = true;
            break;
        }
    }

    Ok((
        SolverResult {
            delta_hat: a,
            iterations,
            converged,
            objective: f_cur,
            objective_trace: trace,
            lipschitz_used: None,
            lambda: config.lambda,
        },
        AdmmDiagnostics { primal_residual },
        b,
    ))
}

/// Minimizes the asymmetric penalized objective by ADMM. The reported
/// estimate is the sparse splitting variable, so its zeros are exact.
pub fn admm_solve(engine: &GradientEngine, config: &AdmmConfig) -> Result<SolverResult> {
    admm_solve_with_diagnostics(engine, config).map(|(r, _)| r)
}

/// [`admm_solve`] plus the final primal residual.
pub fn admm_solve_with_diagnostics(
    engine: &GradientEngine,
    config: &AdmmConfig,
) -> Result<(SolverResult, AdmmDiagnostics)> {
    check_engine(engine)?;
    config.validate()?;
    let ridge = SylvesterRidge::new(engine.s1(), engine.s2(), config.rho)?;
    run_admm(engine, &ridge, config, None).map(|(r, d, _)| (r, d))
}

/// ADMM along a strictly decreasing penalty grid. The two covariance
/// eigendecompositions are computed once and shared; each solve warm-starts
/// from the previous primal/dual pair.
pub fn admm_solve_path(
    engine: &GradientEngine,
    lambdas: &[f64],
    config: &AdmmConfig,
) -> Result<PathResult> {
    check_engine(engine)?;
    config.validate()?;
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty penalty grid".into()));
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if !l.is_finite() || l < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid entry {i} must be finite and non-negative, got {l}"
            )));
        }
        if i > 0 && l >= lambdas[i - 1] {
            return Err(Error::InvalidArgument(format!(
                "grid must decrease strictly, but entry {i} ({l}) >= entry {} ({})",
                i - 1,
                lambdas[i - 1]
            )));
        }
    }
    let ridge = SylvesterRidge::new(engine.s1(), engine.s2(), config.rho)?;
    let mut results = Vec::with_capacity(lambdas.len());
    let mut carry: Option<(Matrix, Matrix)> = None;
    for &lambda in lambdas {
        let at = AdmmConfig {
            lambda,
            ..config.clone()
        };
        let (r, _, b) = run_admm(engine, &ridge, &at, carry.take())
            .map_err(|e| Error::at_lambda(lambda, e))?;
        carry = Some((r.delta_hat.clone(), b));
        results.push(r);
    }
    Ok(PathResult {
        lambdas: lambdas.to_vec(),
        results,
    })
}
