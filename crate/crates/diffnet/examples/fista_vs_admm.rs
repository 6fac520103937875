//! Cross-check the accelerated proximal-gradient solver against the
//! splitting-based reference solver on the same asymmetric-loss problem:
//! both minimize the same convex objective, so their optima must agree.
//!
//!     cargo run --release --example fista_vs_admm

use diffnet::{
    admm_solve_with_diagnostics, fista_solve, sample_two, AdmmConfig, GradientEngine, LossKind,
    ModeChoice, SimDesign, SimVariant, SolverConfig,
};

fn main() -> diffnet::Result<()> {
    let design = SimDesign::build(SimVariant::SparseCase, 30)?;
    let (x, y) = sample_two(&design, 80, 80, 11)?;

    // The reference solver handles the asymmetric loss only.
    let engine = GradientEngine::from_data(LossKind::Asymmetric, &x, &y, ModeChoice::Dense)?;
    let lambda = 0.5 * engine.lambda_max();

    let fista = fista_solve(&engine, &SolverConfig::new(lambda).with_rel_tol(1e-8), None)?;
    let (admm, diag) =
        admm_solve_with_diagnostics(&engine, &AdmmConfig::new(lambda).with_rel_tol(1e-8))?;

    println!("lambda = {lambda:.5}");
    println!(
        "fista: {:>5} passes, objective = {:.10}, step constant = {:.4}",
        fista.iterations,
        fista.objective,
        fista.lipschitz_used.unwrap()
    );
    println!(
        "admm:  {:>5} passes, objective = {:.10}, primal residual = {:.2e}",
        admm.iterations, admm.objective, diag.primal_residual
    );

    let rel = (fista.objective - admm.objective).abs() / (admm.objective.abs() + 1.0);
    let gap = (&fista.delta_hat - &admm.delta_hat).max_abs();
    println!("relative objective gap = {rel:.2e}");
    println!("max entrywise estimate gap = {gap:.2e}");
    assert!(rel < 1e-6, "solvers disagree on the optimum");
    println!("agreement within 1e-6: ok");
    Ok(())
}
