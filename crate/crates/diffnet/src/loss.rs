//! Loss values and gradients for the differential-network estimators.
//!
//! Both supported losses are convex quadratics in the estimate `D` built
//! from the two group covariances `S1`, `S2`:
//!
//! - asymmetric: `L(D) = tr(D^T S1 D S2) / 2 - tr(D (S1 - S2))`
//! - symmetric:  `L(D) = tr(D^T S1 D S2) / 4 + tr(D^T S2 D S1) / 4 - tr(D (S1 - S2))`
//!
//! Either is minimized (in population) at the precision-matrix difference,
//! so no covariance ever has to be inverted. A [`GradientEngine`] evaluates
//! values and gradients along one of two routes: a dense route that
//! multiplies `p x p` matrices, and a low-rank route that reassociates the
//! products through the `n x p` data matrices, costing `O(n p^2)` instead of
//! `O(p^3)` - the better choice whenever `n1 + n2 < p`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::matrix::{ensure_symmetric, sample_covariance, Matrix};
use crate::power::largest_eigenvalue_default;

/// Which of the two convex losses to optimize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// `tr(D^T S1 D S2)/2 - tr(D (S1 - S2))`; cheapest per evaluation.
    Asymmetric,
    /// The symmetrized average of the asymmetric loss and its transpose
    /// counterpart; keeps iterates symmetric when started symmetric.
    Symmetric,
}

impl LossKind {
    /// Short lowercase name used in metadata and CLI flags.
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Asymmetric => "asym",
            LossKind::Symmetric => "sym",
        }
    }
}

/// How the engine should evaluate products.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeChoice {
    /// Pick the low-rank route exactly when `n1 + n2 < p`.
    Auto,
    /// Always multiply dense `p x p` covariances.
    Dense,
    /// Always route products through the centered data matrices.
    LowRank,
}

/// Centered data matrices retained for low-rank product evaluation.
#[derive(Clone, Debug)]
struct LowRankData {
    x: Matrix,
    y: Matrix,
}

/// Quadratic-factor products `S1 D S2` (and `S2 D S1` under the symmetric
/// loss) attached to one iterate.
#[derive(Clone, Debug)]
pub(crate) struct QuadCache {
    forward: Matrix,
    backward: Option<Matrix>,
}

impl QuadCache {
    /// Products at `cur + mu (cur - prev)`, by linearity of the factor map.
    pub(crate) fn extrapolate(cur: &QuadCache, prev: &QuadCache, mu: f64) -> QuadCache {
        let combine = |c: &Matrix, p: &Matrix| &(c * (1.0 + mu)) - &(p * mu);
        QuadCache {
            forward: combine(&cur.forward, &prev.forward),
            backward: match (&cur.backward, &prev.backward) {
                (Some(c), Some(p)) => Some(combine(c, p)),
                _ => None,
            },
        }
    }
}

/// Shared, immutable evaluation context for one two-sample problem: loss
/// values, gradients, the penalized objective, and the gradient's Lipschitz
/// constant (computed once on first use).
#[derive(Debug)]
pub struct GradientEngine {
    kind: LossKind,
    s1: Matrix,
    s2: Matrix,
    diff: Matrix,
    low_rank: Option<LowRankData>,
    lipschitz: OnceLock<f64>,
}

impl GradientEngine {
    /// Dense engine straight from two covariance matrices (each symmetric to
    /// 1e-8 and of matching order).
    pub fn from_covariances(kind: LossKind, s1: Matrix, s2: Matrix) -> Result<Self> {
        ensure_symmetric(&s1, 1e-8, "gradient engine (group-1 covariance)")?;
        ensure_symmetric(&s2, 1e-8, "gradient engine (group-2 covariance)")?;
        if s1.shape() != s2.shape() {
            return Err(Error::ShapeMismatch(format!(
                "covariances have different orders: {} vs {}",
                s1.rows(),
                s2.rows()
            )));
        }
        let diff = &s1 - &s2;
        Ok(GradientEngine {
            kind,
            s1,
            s2,
            diff,
            low_rank: None,
            lipschitz: OnceLock::new(),
        })
    }

    /// Engine built from raw data matrices (rows are observations, columns
    /// variables). Columns are centered here; covariances use the divisor
    /// `n`. `Auto` switches to the low-rank route when `n1 + n2 < p`.
    pub fn from_data(kind: LossKind, x: &Matrix, y: &Matrix, choice: ModeChoice) -> Result<Self> {
        if x.cols() != y.cols() {
            return Err(Error::ShapeMismatch(format!(
                "groups measure different variable counts: {} vs {}",
                x.cols(),
                y.cols()
            )));
        }
        let xc = x.centered_columns();
        let yc = y.centered_columns();
        let s1 = sample_covariance(&xc, false);
        let s2 = sample_covariance(&yc, false);
        let low_rank = match choice {
            ModeChoice::Dense => false,
            ModeChoice::LowRank => true,
            ModeChoice::Auto => x.rows() + y.rows() < x.cols(),
        };
        let diff = &s1 - &s2;
        Ok(GradientEngine {
            kind,
            s1,
            s2,
            diff,
            low_rank: low_rank.then_some(LowRankData { x: xc, y: yc }),
            lipschitz: OnceLock::new(),
        })
    }

    /// Problem dimension `p`.
    pub fn dimension(&self) -> usize {
        self.s1.rows()
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// Whether products are evaluated through the data matrices.
    pub fn is_low_rank(&self) -> bool {
        self.low_rank.is_some()
    }

    /// Route name used in metadata: `"lowrank"` or `"dense"`.
    pub fn mode_name(&self) -> &'static str {
        if self.is_low_rank() {
            "lowrank"
        } else {
            "dense"
        }
    }

    /// Group-1 covariance.
    pub fn s1(&self) -> &Matrix {
        &self.s1
    }

    /// Group-2 covariance.
    pub fn s2(&self) -> &Matrix {
        &self.s2
    }

    /// Cached covariance difference `S1 - S2`.
    pub fn diff(&self) -> &Matrix {
        &self.diff
    }

    /// Largest absolute entry of `S1 - S2`: the smallest penalty with an
    /// all-zero solution, and the anchor of default penalty grids.
    pub fn lambda_max(&self) -> f64 {
        self.diff.max_abs()
    }

    fn check_delta(&self, delta: &Matrix) -> Result<()> {
        let p = self.dimension();
        if delta.shape() != (p, p) {
            return Err(Error::ShapeMismatch(format!(
                "estimate must be {p}x{p}, got {}x{}",
                delta.rows(),
                delta.cols()
            )));
        }
        Ok(())
    }

    /// `S1 D S2` (or `S2 D S1` with `swap`), along the configured route.
    fn quad_product(&self, delta: &Matrix, swap: bool) -> Result<Matrix> {
        match &self.low_rank {
            None => {
                let (a, b) = if swap {
                    (&self.s2, &self.s1)
                } else {
                    (&self.s1, &self.s2)
                };
                a.matmul(delta)?.matmul(b)
            }
            Some(lr) => {
                // S1 D S2 = X^T (X D Y^T) Y / (n1 n2), never forming p x p
                // intermediates.
                let (a, b) = if swap { (&lr.y, &lr.x) } else { (&lr.x, &lr.y) };
                let scale = 1.0 / (lr.x.rows() as f64 * lr.y.rows() as f64);
                let inner = a.matmul(delta)?.matmul_tr(b)?;
                Ok(a.tr_matmul(&inner.matmul(b)?)?.scale(scale))
            }
        }
    }

    /// Quadratic trace term `tr(D^T S1 D S2)` (or with the factors swapped).
    fn quad_trace(&self, delta: &Matrix, swap: bool) -> Result<f64> {
        match &self.low_rank {
            None => Ok(delta.dot(&self.quad_product(delta, swap)?)),
            Some(lr) => {
                // tr(D^T S1 D S2) = |X D Y^T|_F^2 / (n1 n2).
                let (a, b) = if swap { (&lr.y, &lr.x) } else { (&lr.x, &lr.y) };
                let inner = a.matmul(delta)?.matmul_tr(b)?;
                let f = inner.frobenius_norm();
                Ok(f * f / (lr.x.rows() as f64 * lr.y.rows() as f64))
            }
        }
    }

    /// Loss value at `delta`.
    pub fn loss_value(&self, delta: &Matrix) -> Result<f64> {
        self.check_delta(delta)?;
        let linear = delta.dot(&self.diff);
        match self.kind {
            LossKind::Asymmetric => Ok(0.5 * self.quad_trace(delta, false)? - linear),
            LossKind::Symmetric => Ok(0.25 * self.quad_trace(delta, false)?
                + 0.25 * self.quad_trace(delta, true)?
                - linear),
        }
    }

    /// Gradient of the loss at `delta`.
    pub fn gradient(&self, delta: &Matrix) -> Result<Matrix> {
        self.check_delta(delta)?;
        let quad = match self.kind {
            LossKind::Asymmetric => self.quad_product(delta, false)?,
            LossKind::Symmetric => {
                let forward = self.quad_product(delta, false)?;
                let backward = self.quad_product(delta, true)?;
                &(&forward + &backward) * 0.5
            }
        };
        Ok(&quad - &self.diff)
    }

    /// Penalized objective `loss(delta) + lambda * |delta|_1`.
    pub fn objective(&self, delta: &Matrix, lambda: f64) -> Result<f64> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty must be finite and non-negative, got {lambda}"
            )));
        }
        Ok(self.loss_value(delta)? + lambda * delta.l1_norm())
    }

    /// Quadratic-factor products for one iterate, the only O(n p^2) work a
    /// solver pass needs. The factor map is linear in the iterate, so
    /// extrapolated points combine cached products instead of recomputing.
    pub(crate) fn quad_cache(&self, delta: &Matrix) -> Result<QuadCache> {
        self.check_delta(delta)?;
        Ok(QuadCache {
            forward: self.quad_product(delta, false)?,
            backward: match self.kind {
                LossKind::Asymmetric => None,
                LossKind::Symmetric => Some(self.quad_product(delta, true)?),
            },
        })
    }

    /// Gradient assembled from cached products.
    pub(crate) fn gradient_from_cache(&self, cache: &QuadCache) -> Matrix {
        match &cache.backward {
            None => &cache.forward - &self.diff,
            Some(b) => &(&(&cache.forward + b) * 0.5) - &self.diff,
        }
    }

    /// Penalized objective assembled from `delta`'s cached products.
    pub(crate) fn objective_from_cache(
        &self,
        delta: &Matrix,
        cache: &QuadCache,
        lambda: f64,
    ) -> f64 {
        let linear = delta.dot(&self.diff);
        let smooth = match &cache.backward {
            None => 0.5 * delta.dot(&cache.forward) - linear,
            Some(b) => 0.25 * (delta.dot(&cache.forward) + delta.dot(b)) - linear,
        };
        smooth + lambda * delta.l1_norm()
    }

    /// Lipschitz constant of the gradient: the product of the two largest
    /// covariance eigenvalues, estimated by power iteration. Computed once
    /// and cached; concurrent first calls recompute the same value, so the
    /// race is benign.
    pub fn lipschitz_constant(&self) -> Result<f64> {
        if let Some(v) = self.lipschitz.get() {
            return Ok(*v);
        }
        let e1 = largest_eigenvalue_default(&self.s1)?;
        let e2 = largest_eigenvalue_default(&self.s2)?;
        if e1.value <= 0.0 || e2.value <= 0.0 {
            return Err(Error::DegenerateData(
                "a group covariance is zero; the loss has no curvature".into(),
            ));
        }
        let _ = self.lipschitz.set(e1.value * e2.value);
        Ok(*self.lipschitz.get().expect("value was just stored"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| uniform(&mut rng)).unwrap()
    }

    fn random_engines(kind: LossKind, p: usize, n: usize, seed: u64) -> (GradientEngine, GradientEngine) {
        let x = random_matrix(n, p, seed);
        let y = random_matrix(n, p, seed + 1);
        let dense = GradientEngine::from_data(kind, &x, &y, ModeChoice::Dense).unwrap();
        let lowrank = GradientEngine::from_data(kind, &x, &y, ModeChoice::LowRank).unwrap();
        (dense, lowrank)
    }

    /// Independent oracle: quadruple-loop evaluation of tr(D^T A D B).
    fn trace_quad_oracle(delta: &Matrix, a: &Matrix, b: &Matrix) -> f64 {
        let p = delta.rows();
        let mut acc = 0.0;
        for i in 0..p {
            for r in 0..p {
                for c in 0..p {
                    for s in 0..p {
                        acc += delta.get(r, i) * a.get(r, c) * delta.get(c, s) * b.get(s, i);
                    }
                }
            }
        }
        acc
    }

    fn trace_linear_oracle(delta: &Matrix, d: &Matrix) -> f64 {
        let p = delta.rows();
        let mut acc = 0.0;
        for i in 0..p {
            for j in 0..p {
                acc += delta.get(i, j) * d.get(j, i);
            }
        }
        acc
    }

    #[test]
    fn loss_is_zero_at_zero() {
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let (dense, lowrank) = random_engines(kind, 6, 4, 7);
            let zero = Matrix::zeros(6, 6);
            assert_eq!(dense.loss_value(&zero).unwrap(), 0.0);
            assert_eq!(lowrank.loss_value(&zero).unwrap(), 0.0);
        }
    }

    #[test]
    fn identity_covariances_give_half_p() {
        let p = 5;
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let engine =
                GradientEngine::from_covariances(kind, Matrix::identity(p), Matrix::identity(p))
                    .unwrap();
            let v = engine.loss_value(&Matrix::identity(p)).unwrap();
            assert!((v - p as f64 / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn loss_matches_quadruple_loop_oracle() {
        let p = 4;
        let delta = random_matrix(p, p, 100);
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let (dense, lowrank) = random_engines(kind, p, 6, 101);
            let (s1, s2, diff) = (dense.s1(), dense.s2(), dense.diff());
            let expected = match kind {
                LossKind::Asymmetric => {
                    0.5 * trace_quad_oracle(&delta, s1, s2) - trace_linear_oracle(&delta, diff)
                }
                LossKind::Symmetric => {
                    0.25 * trace_quad_oracle(&delta, s1, s2)
                        + 0.25 * trace_quad_oracle(&delta, s2, s1)
                        - trace_linear_oracle(&delta, diff)
                }
            };
            assert!((dense.loss_value(&delta).unwrap() - expected).abs() < 1e-12);
            assert!((lowrank.loss_value(&delta).unwrap() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_at_zero_is_negative_covariance_difference() {
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let (dense, lowrank) = random_engines(kind, 5, 8, 9);
            let zero = Matrix::zeros(5, 5);
            let expected = &Matrix::zeros(5, 5) - dense.diff();
            assert_eq!(dense.gradient(&zero).unwrap(), expected);
            assert_eq!(lowrank.gradient(&zero).unwrap(), expected);
        }
    }

    #[test]
    fn identity_covariances_make_gradient_the_identity_map() {
        let p = 4;
        let delta = random_matrix(p, p, 55);
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let engine =
                GradientEngine::from_covariances(kind, Matrix::identity(p), Matrix::identity(p))
                    .unwrap();
            let g = engine.gradient(&delta).unwrap();
            for i in 0..p {
                for j in 0..p {
                    assert!((g.get(i, j) - delta.get(i, j)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let p = 5;
        let h = 1e-5;
        let delta = random_matrix(p, p, 77);
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let (dense, lowrank) = random_engines(kind, p, 7, 78);
            for engine in [&dense, &lowrank] {
                let grad = engine.gradient(&delta).unwrap();
                for i in 0..p {
                    for j in 0..p {
                        let mut up = delta.clone();
                        up.set(i, j, delta.get(i, j) + h);
                        let mut down = delta.clone();
                        down.set(i, j, delta.get(i, j) - h);
                        let fd = (engine.loss_value(&up).unwrap()
                            - engine.loss_value(&down).unwrap())
                            / (2.0 * h);
                        assert!(
                            (fd - grad.get(i, j)).abs() <= 1e-5,
                            "kind {kind:?} entry ({i},{j}): fd {fd} vs grad {}",
                            grad.get(i, j)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dense_and_lowrank_routes_agree() {
        for (p, n) in [(10, 4), (24, 9)] {
            let delta = random_matrix(p, p, 200 + p as u64);
            for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
                let (dense, lowrank) = random_engines(kind, p, n, 300 + p as u64);
                let gd = dense.gradient(&delta).unwrap();
                let gl = lowrank.gradient(&delta).unwrap();
                let rel = (&gd - &gl).frobenius_norm() / gd.frobenius_norm();
                assert!(rel <= 1e-10, "kind {kind:?} p {p}: rel gap {rel}");
                let (vd, vl) = (
                    dense.loss_value(&delta).unwrap(),
                    lowrank.loss_value(&delta).unwrap(),
                );
                assert!((vd - vl).abs() <= 1e-10 * (1.0 + vd.abs()));
            }
        }
    }

    #[test]
    fn auto_mode_switches_on_sample_size() {
        let x = random_matrix(4, 10, 1);
        let y = random_matrix(5, 10, 2);
        let lr = GradientEngine::from_data(LossKind::Asymmetric, &x, &y, ModeChoice::Auto).unwrap();
        assert!(lr.is_low_rank()); // 9 < 10
        let x = random_matrix(5, 10, 3);
        let dn = GradientEngine::from_data(LossKind::Asymmetric, &x, &y, ModeChoice::Auto).unwrap();
        assert!(!dn.is_low_rank()); // 10 >= 10
        assert_eq!(dn.mode_name(), "dense");
    }

    #[test]
    fn lipschitz_constant_examples() {
        let engine = GradientEngine::from_covariances(
            LossKind::Asymmetric,
            Matrix::identity(6),
            Matrix::identity(6),
        )
        .unwrap();
        assert!((engine.lipschitz_constant().unwrap() - 1.0).abs() < 1e-10);

        let d1 = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let d2 = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let engine = GradientEngine::from_covariances(LossKind::Symmetric, d1, d2).unwrap();
        let l = engine.lipschitz_constant().unwrap();
        assert!((l - 8.0).abs() < 8.0 * 1e-7, "got {l}");
        // Cached: second call returns the identical value.
        assert_eq!(engine.lipschitz_constant().unwrap(), l);
    }

    #[test]
    fn constant_data_is_degenerate() {
        let x = Matrix::from_rows(&[vec![2.0, 2.0], vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        let engine =
            GradientEngine::from_data(LossKind::Asymmetric, &x, &x, ModeChoice::Dense).unwrap();
        assert!(matches!(
            engine.lipschitz_constant(),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn objective_adds_scaled_l1_norm() {
        let (dense, _) = random_engines(LossKind::Asymmetric, 4, 6, 400);
        let delta = random_matrix(4, 4, 401);
        let expected = dense.loss_value(&delta).unwrap() + 0.3 * delta.l1_norm();
        assert!((dense.objective(&delta, 0.3).unwrap() - expected).abs() < 1e-14);
        assert_eq!(
            dense.objective(&delta, 0.0).unwrap(),
            dense.loss_value(&delta).unwrap()
        );
        assert!(matches!(
            dense.objective(&delta, -1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn gradient_satisfies_lipschitz_inequality() {
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let (dense, _) = random_engines(kind, 8, 12, 500);
            let l = dense.lipschitz_constant().unwrap();
            for trial in 0..10 {
                let a = random_matrix(8, 8, 600 + trial);
                let b = random_matrix(8, 8, 700 + trial);
                let lhs = (&dense.gradient(&a).unwrap() - &dense.gradient(&b).unwrap())
                    .frobenius_norm();
                let rhs = l * (&a - &b).frobenius_norm();
                assert!(
                    lhs <= rhs * (1.0 + 1e-10),
                    "kind {kind:?} trial {trial}: {lhs} > {rhs}"
                );
            }
        }
    }

    #[test]
    fn symmetric_loss_gradient_preserves_symmetry() {
        let (dense, lowrank) = random_engines(LossKind::Symmetric, 7, 9, 800);
        let delta = random_matrix(7, 7, 801).symmetrized();
        assert!(dense.gradient(&delta).unwrap().max_asymmetry() <= 1e-12);
        assert!(lowrank.gradient(&delta).unwrap().max_asymmetry() <= 1e-12);
    }

    #[test]
    fn loss_is_midpoint_convex() {
        for kind in [LossKind::Asymmetric, LossKind::Symmetric] {
            let (dense, _) = random_engines(kind, 6, 9, 900);
            for trial in 0..10 {
                let a = random_matrix(6, 6, 910 + trial);
                let b = random_matrix(6, 6, 920 + trial);
                let mid = &(&a + &b) * 0.5;
                let lhs = dense.loss_value(&mid).unwrap();
                let rhs = 0.5 * (dense.loss_value(&a).unwrap() + dense.loss_value(&b).unwrap());
                assert!(lhs <= rhs + 1e-12);
            }
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let x = random_matrix(5, 4, 31);
        let y = random_matrix(5, 3, 32);
        assert!(matches!(
            GradientEngine::from_data(LossKind::Asymmetric, &x, &y, ModeChoice::Auto),
            Err(Error::ShapeMismatch(_))
        ));

        let (dense, _) = random_engines(LossKind::Asymmetric, 4, 5, 33);
        let wrong = Matrix::zeros(3, 3);
        assert!(matches!(
            dense.gradient(&wrong),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            GradientEngine::from_covariances(
                LossKind::Asymmetric,
                random_matrix(3, 3, 34),
                random_matrix(3, 3, 35)
            ),
            Err(Error::InvalidArgument(_))
        ));
    }
}
