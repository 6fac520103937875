//! Solve a decreasing-penalty path with warm starts and trace how the
//! estimate densifies as the penalty relaxes.
//!
//!     cargo run --release --example solution_path

use diffnet::{
    lambda_grid, sample_two, solve_path, support_metrics, GradientEngine, LossKind, ModeChoice,
    SimDesign, SimVariant, SolverConfig,
};

fn main() -> diffnet::Result<()> {
    let design = SimDesign::build(SimVariant::SparseCase, 60)?;
    let (x, y) = sample_two(&design, 150, 150, 7)?;
    let engine = GradientEngine::from_data(LossKind::Symmetric, &x, &y, ModeChoice::Auto)?;

    // Ten log-free, linearly spaced penalties from lambda_max (all-zero
    // solution) down to half of it; each solve starts from the previous
    // solution, so late solves take only a handful of passes.
    let grid = lambda_grid(engine.lambda_max(), 10, 0.5)?;
    let config = SolverConfig::new(0.0).with_symmetrize_output(true);
    let path = solve_path(&engine, &grid, &config, true)?;

    println!("{:>10}  {:>6}  {:>9}  {:>12}  {:>5}", "lambda", "iters", "nonzeros", "objective", "f1");
    let mut best = (0.0_f64, 0.0_f64);
    for r in &path.results {
        let m = support_metrics(&r.delta_hat, &design.delta_star, 0.0)?;
        if m.f1 > best.1 {
            best = (r.lambda, m.f1);
        }
        println!(
            "{:>10.5}  {:>6}  {:>9}  {:>12.6}  {:>5.3}",
            r.lambda,
            r.iterations,
            r.delta_hat.count_nonzero(0.0),
            r.objective,
            m.f1
        );
    }
    println!("best f1 = {:.3} at lambda = {:.5}", best.1, best.0);

    // Rerun without warm starts: same estimates, more total work.
    let cold = solve_path(&engine, &grid, &config, false)?;
    let warm_total: usize = path.results.iter().map(|r| r.iterations).sum();
    let cold_total: usize = cold.results.iter().map(|r| r.iterations).sum();
    println!("total passes: warm = {warm_total}, cold = {cold_total}");
    Ok(())
}
