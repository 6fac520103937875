//! Accelerated proximal-gradient (FISTA) solver and penalty-grid sweeps.
//!
//! Each pass takes a gradient step of length `1/L` from an extrapolated
//! point and soft-thresholds the result; the extrapolation weight follows
//! the classic momentum recursion `t <- (1 + sqrt(1 + 4 t^2)) / 2`, which
//! yields an `O(1/k^2)` objective gap. Iteration stops when the objective
//! change falls below `rel_tol * (|F| + 1)` or after `max_iter` passes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::loss::{GradientEngine, QuadCache};
use crate::matrix::Matrix;
use crate::threading;

/// Relative safety margin applied to the Lipschitz constant before it is
/// used as a step denominator, absorbing power-iteration underestimates.
const STEP_INFLATION: f64 = 1e-6;

/// Objectives beyond `1e12 * (|F(start)| + 1)` abort the run as divergent.
const DIVERGENCE_FACTOR: f64 = 1e12;

/// Tuning knobs for [`fista_solve`]. Build with [`SolverConfig::new`] and
/// the `with_*` methods; the defaults are `rel_tol = 1e-5`,
/// `max_iter = 10000`, no output symmetrization, and an automatically
/// estimated Lipschitz constant.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub lambda: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub symmetrize_output: bool,
    /// Caller-supplied Lipschitz constant; skips the power-iteration
    /// estimate when set.
    pub lipschitz_override: Option<f64>,
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        SolverConfig {
            lambda,
            rel_tol: 1e-5,
            max_iter: 10_000,
            symmetrize_output: false,
            lipschitz_override: None,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_symmetrize_output(mut self, on: bool) -> Self {
        self.symmetrize_output = on;
        self
    }

    pub fn with_lipschitz_override(mut self, l: f64) -> Self {
        self.lipschitz_override = Some(l);
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty must be finite and non-negative, got {}",
                self.lambda
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
        if let Some(l) = self.lipschitz_override {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "Lipschitz override must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one solve: the estimate plus convergence diagnostics.
#[derive(Clone, Debug)]
pub struct SolverResult {
    pub delta_hat: Matrix,
    /// Proximal passes performed (one per trace entry unless the output was
    /// symmetrized, which appends a final recomputed objective).
    pub iterations: usize,
    pub converged: bool,
    /// Final penalized objective; always equals the last trace entry.
    pub objective: f64,
    /// Penalized objective after every pass.
    pub objective_trace: Vec<f64>,
    /// Inflated step constant actually used; `None` for solvers that take no
    /// gradient steps.
    pub lipschitz_used: Option<f64>,
    pub lambda: f64,
}

/// Solutions along a decreasing penalty grid.
#[derive(Clone, Debug)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub results: Vec<SolverResult>,
}

/// Momentum recursion `(1 + sqrt(1 + 4 t^2)) / 2`; requires `t >= 1`.
pub fn momentum_next(t: f64) -> Result<f64> {
    if !t.is_finite() || t < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "momentum accumulator must be at least 1, got {t}"
        )));
    }
    Ok(0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()))
}

/// Minimizes `loss + lambda * |D|_1` by FISTA, starting from `start` (zero
/// when omitted). The trace records the objective after every pass; the run
/// converges when successive objectives differ by less than
/// `rel_tol * (|F| + 1)`.
pub fn fista_solve(
    engine: &GradientEngine,
    config: &SolverConfig,
    start: Option<&Matrix>,
) -> Result<SolverResult> {
    config.validate()?;
    let p = engine.dimension();
    let mut cur = match start {
        Some(m) => {
            if m.shape() != (p, p) {
                return Err(Error::ShapeMismatch(format!(
                    "warm start must be {p}x{p}, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            m.clone()
        }
        None => Matrix::zeros(p, p),
    };
    let l_raw = match config.lipschitz_override {
        Some(l) => l,
        None => engine.lipschitz_constant()?,
    };
    let l_used = l_raw * (1.0 + STEP_INFLATION);
    let tau = config.lambda / l_used;

    let mut prev = cur.clone();
    // Cache the quadratic-factor products of the two most recent iterates;
    // they are linear in the iterate, so the extrapolated point needs no
    // fresh matrix products and each pass pays for exactly one evaluation.
    let mut cache_cur = engine.quad_cache(&cur)?;
    let mut cache_prev = cache_cur.clone();
    let mut f_cur = engine.objective_from_cache(&cur, &cache_cur, config.lambda);
    let divergence_cap = DIVERGENCE_FACTOR * (f_cur.abs() + 1.0);
    let (mut t_prev, mut t_cur) = (1.0, 1.0);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for pass in 1..=config.max_iter {
        let mu = (t_prev - 1.0) / t_cur;
        let (extra, cache_extra) = if mu == 0.0 {
            (cur.clone(), cache_cur.clone())
        } else {
            (
                &cur + &(&(&cur - &prev) * mu),
                QuadCache::extrapolate(&cache_cur, &cache_prev, mu),
            )
        };
        // Divide rather than multiply by a reciprocal: the threshold is
        // `lambda / l_used`, and only matching rounding guarantees that a
        // penalty of exactly max|S1 - S2| cancels to the literal zero
        // matrix.
        let gradient = engine.gradient_from_cache(&cache_extra);
        let step = &extra - &(&gradient / l_used);
        let next = step.soft_threshold(tau)?;
        let cache_next = engine.quad_cache(&next)?;
        let f_next = engine.objective_from_cache(&next, &cache_next, config.lambda);
        if !f_next.is_finite() || f_next > divergence_cap {
            return Err(Error::Divergence {
                iteration: pass,
                value: f_next,
            });
        }
        trace.push(f_next);
        iterations = pass;
        let done = (f_cur - f_next).abs() < config.rel_tol * (f_cur.abs() + 1.0);
        prev = std::mem::replace(&mut cur, next);
        cache_prev = std::mem::replace(&mut cache_cur, cache_next);
        f_cur = f_next;
        if done {
            converged = true;
            break;
        }
        let t_next = momentum_next(t_cur)?;
        t_prev = std::mem::replace(&mut t_cur, t_next);
    }

    if config.symmetrize_output {
        cur = cur.symmetrized();
        f_cur = engine.objective(&cur, config.lambda)?;
        trace.push(f_cur);
    }
    Ok(SolverResult {
        delta_hat: cur,
        iterations,
        converged,
        objective: f_cur,
        objective_trace: trace,
        lipschitz_used: Some(l_used),
        lambda: config.lambda,
    })
}

/// Linearly spaced penalty grid from `max` down to `max * min_ratio`, with
/// both endpoints hit exactly. Requires `max > 0`, `n >= 1`, and
/// `min_ratio` in `(0, 1]`; a ratio of exactly 1 only makes sense for a
/// single-point grid.
pub fn lambda_grid(max: f64, n: usize, min_ratio: f64) -> Result<Vec<f64>> {
    if !max.is_finite() || max <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "grid anchor must be positive, got {max}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("grid needs at least one point".into()));
    }
    if !min_ratio.is_finite() || min_ratio <= 0.0 || min_ratio > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "grid ratio must lie in (0, 1], got {min_ratio}"
        )));
    }
    if n == 1 {
        return Ok(vec![max]);
    }
    if min_ratio == 1.0 {
        return Err(Error::InvalidArgument(
            "grid ratio of 1 cannot produce a strictly decreasing grid".into(),
        ));
    }
    let lo = max * min_ratio;
    let steps = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let alpha = i as f64 / steps;
            max * (1.0 - alpha) + lo * alpha
        })
        .collect())
}

/// Solves along a strictly decreasing penalty grid. With `warm_start`, each
/// solve begins at the previous solution; otherwise the fits are independent
/// (and run in parallel when a thread pool is configured). Failures carry
/// the offending penalty level.
pub fn solve_path(
    engine: &GradientEngine,
    lambdas: &[f64],
    config: &SolverConfig,
    warm_start: bool,
) -> Result<PathResult> {
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

    let at = |lambda: f64| SolverConfig {
        lambda,
        ..config.clone()
    };
    let results = if warm_start {
        let mut results = Vec::with_capacity(lambdas.len());
        let mut carry: Option<Matrix> = None;
        for &lambda in lambdas {
            let r = fista_solve(engine, &at(lambda), carry.as_ref())
                .map_err(|e| Error::at_lambda(lambda, e))?;
            carry = Some(r.delta_hat.clone());
            results.push(r);
        }
        results
    } else if threading::threads() > 1 {
        lambdas
            .par_iter()
            .map(|&lambda| {
                fista_solve(engine, &at(lambda), None).map_err(|e| Error::at_lambda(lambda, e))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        lambdas
            .iter()
            .map(|&lambda| {
                fista_solve(engine, &at(lambda), None).map_err(|e| Error::at_lambda(lambda, e))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(PathResult {
        lambdas: lambdas.to_vec(),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{LossKind, ModeChoice};
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| uniform(&mut rng)).unwrap()
    }

    fn random_engine(kind: LossKind, p: usize, n: usize, seed: u64) -> GradientEngine {
        let x = random_matrix(n, p, seed);
        let y = random_matrix(n, p, seed + 1);
        GradientEngine::from_data(kind, &x, &y, ModeChoice::Dense).unwrap()
    }

    #[test]
    fn momentum_matches_closed_form_values() {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((momentum_next(1.0).unwrap() - golden).abs() < 1e-15);
        // One more application of the recursion from the golden ratio.
        assert!((momentum_next(golden).unwrap() - 2.193527085331054).abs() < 1e-12);
        assert!(matches!(momentum_next(0.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            momentum_next(f64::NAN),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn momentum_grows_at_least_linearly() {
        let mut t = 1.0;
        for k in 0..200 {
            assert!(t >= (k as f64 + 2.0) / 2.0 - 1e-12, "t_{k} = {t}");
            t = momentum_next(t).unwrap();
        }
    }

    #[test]
    fn grid_examples_and_exact_endpoints() {
        assert_eq!(lambda_grid(1.0, 3, 0.5).unwrap(), vec![1.0, 0.75, 0.5]);
        assert_eq!(lambda_grid(0.7, 1, 0.5).unwrap(), vec![0.7]);
        // min_ratio of 1 is fine for a single point.
        assert_eq!(lambda_grid(2.0, 1, 1.0).unwrap(), vec![2.0]);

        let g = lambda_grid(0.8317, 50, 0.5).unwrap();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.8317);
        assert_eq!(g[49], 0.8317 * 0.5);
        let gap = g[0] - g[1];
        for w in g.windows(2) {
            assert!((w[0] - w[1] - gap).abs() < 1e-12);
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        assert!(lambda_grid(0.0, 5, 0.5).is_err());
        assert!(lambda_grid(-1.0, 5, 0.5).is_err());
        assert!(lambda_grid(1.0, 0, 0.5).is_err());
        assert!(lambda_grid(1.0, 5, 0.0).is_err());
        assert!(lambda_grid(1.0, 5, 1.5).is_err());
        assert!(lambda_grid(1.0, 5, 1.0).is_err());
    }

    #[test]
    fn penalty_at_threshold_fixes_zero_in_two_passes() {
        let engine = random_engine(LossKind::Asymmetric, 8, 12, 11);
        let config = SolverConfig::new(engine.lambda_max());
        let r = fista_solve(&engine, &config, None).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(r.delta_hat.get(i, j).to_bits(), 0u64);
            }
        }
    }

    #[test]
    fn identical_covariances_give_zero_estimate() {
        let s = crate::matrix::sample_covariance(&random_matrix(20, 6, 3), true);
        let engine = GradientEngine::from_covariances(LossKind::Symmetric, s.clone(), s).unwrap();
        let r = fista_solve(&engine, &SolverConfig::new(0.2), None).unwrap();
        assert!(r.converged);
        assert_eq!(r.delta_hat, Matrix::zeros(6, 6));
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn solution_is_optimal_under_random_perturbations() {
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let engine = random_engine(kind, 10, 40, 21);
            let lambda = 0.3 * engine.lambda_max();
            let config = SolverConfig::new(lambda)
                .with_rel_tol(1e-12)
                .with_max_iter(20_000);
            let r = fista_solve(&engine, &config, None).unwrap();
            assert!(r.converged);
            let f_hat = engine.objective(&r.delta_hat, lambda).unwrap();
            for trial in 0..50 {
                let dir = random_matrix(10, 10, 1000 + trial);
                let probe = &r.delta_hat + &(&dir * 1e-3);
                let f_probe = engine.objective(&probe, lambda).unwrap();
                assert!(
                    f_hat <= f_probe + 1e-10,
                    "kind {kind:?} trial {trial}: {f_hat} > {f_probe}"
                );
            }
        }
    }

    #[test]
    fn trace_tracks_objective_and_iterations() {
        let engine = random_engine(LossKind::Asymmetric, 6, 30, 40);
        let config = SolverConfig::new(0.2 * engine.lambda_max()).with_rel_tol(1e-9);
        let r = fista_solve(&engine, &config, None).unwrap();
        assert!(r.converged);
        assert_eq!(r.objective_trace.len(), r.iterations);
        assert_eq!(*r.objective_trace.last().unwrap(), r.objective);
        assert!(r.objective <= r.objective_trace[0] + 1e-12);
        assert!(r.lipschitz_used.unwrap() > engine.lipschitz_constant().unwrap());
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let engine = random_engine(LossKind::Asymmetric, 6, 30, 41);
        let config = SolverConfig::new(0.05 * engine.lambda_max())
            .with_rel_tol(1e-14)
            .with_max_iter(3);
        let r = fista_solve(&engine, &config, None).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
        assert_eq!(r.objective_trace.len(), 3);
    }

    #[test]
    fn understated_curvature_is_reported_as_divergence() {
        let engine = random_engine(LossKind::Asymmetric, 8, 40, 42);
        let l = engine.lipschitz_constant().unwrap();
        let config = SolverConfig::new(0.1 * engine.lambda_max())
            .with_lipschitz_override(l / 1000.0)
            .with_max_iter(10_000);
        match fista_solve(&engine, &config, None) {
            Err(Error::Divergence { iteration, .. }) => assert!(iteration >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn symmetrized_output_is_exactly_symmetric() {
        let engine = random_engine(LossKind::Symmetric, 7, 25, 43);
        let lambda = 0.3 * engine.lambda_max();
        let config = SolverConfig::new(lambda).with_symmetrize_output(true);
        let r = fista_solve(&engine, &config, None).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(
                    r.delta_hat.get(i, j).to_bits(),
                    r.delta_hat.get(j, i).to_bits()
                );
            }
        }
        assert_eq!(r.objective_trace.len(), r.iterations + 1);
        assert_eq!(*r.objective_trace.last().unwrap(), r.objective);
        let recomputed = engine.objective(&r.delta_hat, lambda).unwrap();
        assert_eq!(r.objective, recomputed);
    }

    #[test]
    fn warm_and_cold_sweeps_agree_on_objectives() {
        let engine = random_engine(LossKind::Symmetric, 10, 50, 44);
        let grid = lambda_grid(engine.lambda_max(), 6, 0.4).unwrap();
        let config = SolverConfig::new(0.0).with_rel_tol(1e-10).with_max_iter(50_000);
        let warm = solve_path(&engine, &grid, &config, true).unwrap();
        let cold = solve_path(&engine, &grid, &config, false).unwrap();
        assert_eq!(warm.lambdas, grid);
        for (w, c) in warm.results.iter().zip(&cold.results) {
            assert!(w.converged && c.converged);
            assert_eq!(w.lambda, c.lambda);
            let gap = (w.objective - c.objective).abs();
            assert!(
                gap <= 1e-6 * (1.0 + w.objective.abs()),
                "lambda {}: warm {} vs cold {}",
                w.lambda,
                w.objective,
                c.objective
            );
        }
        // Weaker penalties can only lower the optimal objective.
        for pair in warm.results.windows(2) {
            assert!(pair[1].objective <= pair[0].objective + 1e-9);
        }
    }

    #[test]
    fn path_rejects_unsorted_grids_and_tags_failures() {
        let engine = random_engine(LossKind::Asymmetric, 5, 20, 45);
        let config = SolverConfig::new(0.0);
        assert!(solve_path(&engine, &[], &config, true).is_err());
        assert!(solve_path(&engine, &[0.5, 0.5], &config, true).is_err());
        assert!(solve_path(&engine, &[0.2, 0.5], &config, true).is_err());

        // A curvature-free problem fails inside the sweep; the error names
        // the penalty level it failed at.
        let zero = Matrix::zeros(4, 4);
        let flat = GradientEngine::from_covariances(LossKind::Asymmetric, zero.clone(), zero)
            .unwrap();
        match solve_path(&flat, &[0.3, 0.1], &config, true) {
            Err(Error::AtLambda { lambda, source }) => {
                assert_eq!(lambda, 0.3);
                assert!(matches!(*source, Error::DegenerateData(_)));
            }
            other => panic!("expected tagged failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs_and_starts() {
        let engine = random_engine(LossKind::Asymmetric, 4, 10, 46);
        assert!(fista_solve(&engine, &SolverConfig::new(-0.1), None).is_err());
        assert!(fista_solve(&engine, &SolverConfig::new(0.1).with_rel_tol(0.0), None).is_err());
        assert!(fista_solve(&engine, &SolverConfig::new(0.1).with_max_iter(0), None).is_err());
        assert!(
            fista_solve(&engine, &SolverConfig::new(0.1).with_lipschitz_override(0.0), None)
                .is_err()
        );
        let wrong = Matrix::zeros(3, 3);
        assert!(matches!(
            fista_solve(&engine, &SolverConfig::new(0.1), Some(&wrong)),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
