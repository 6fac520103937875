//! Command-line front end: `estimate`, `path`, `simulate`, and `bench`.
//!
//! Exit codes are part of the contract so harnesses can script the tool:
//! 0 success (and convergence), 1 usage error, 2 data error (parsing,
//! degenerate or mismatched input), 3 iteration cap reached without
//! convergence (outputs are still written). Every command writes a
//! `meta.json` sidecar; numeric output files print 17 significant digits so
//! round trips are lossless.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::admm::{admm_solve, admm_solve_path, AdmmConfig};
use crate::data::{load_csv, nonparanormal, split_by_label, standardize, write_csv, CsvOptions, TwoSampleData};
use crate::error::{Error, Result};
use crate::loss::{GradientEngine, LossKind, ModeChoice};
use crate::matrix::Matrix;
use crate::sim::{sample_two, SimDesign, SimVariant};
use crate::solver::{fista_solve, lambda_grid, solve_path, PathResult, SolverConfig, SolverResult};
use crate::threading;

#[derive(Parser)]
#[command(
    name = "diffnet",
    version,
    about = "Sparse differential-network estimation from two-sample data"
)]
struct Cli {
    /// Worker threads for matrix products and cold-start sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the precision-matrix difference at one penalty level.
    Estimate(EstimateArgs),
    /// Solve a full decreasing-penalty path.
    Path(PathArgs),
    /// Generate synthetic two-group data with a known sparse difference.
    Simulate(SimulateArgs),
    /// Time path solves across solvers, modes, and problem sizes.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LossFlag {
    Sym,
    Asym,
}

impl LossFlag {
    fn kind(self) -> LossKind {
        match self {
            LossFlag::Sym => LossKind::Symmetric,
            LossFlag::Asym => LossKind::Asymmetric,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverFlag {
    Fista,
    Admm,
}

impl SolverFlag {
    fn name(self) -> &'static str {
        match self {
            SolverFlag::Fista => "fista",
            SolverFlag::Admm => "admm",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeFlag {
    Auto,
    Dense,
    Lowrank,
}

impl ModeFlag {
    fn choice(self) -> ModeChoice {
        match self {
            ModeFlag::Auto => ModeChoice::Auto,
            ModeFlag::Dense => ModeChoice::Dense,
            ModeFlag::Lowrank => ModeChoice::LowRank,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeFlag::Auto => "auto",
            ModeFlag::Dense => "dense",
            ModeFlag::Lowrank => "lowrank",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CaseFlag {
    Sparse,
    Asymsparse,
}

impl CaseFlag {
    fn variant(self) -> SimVariant {
        match self {
            CaseFlag::Sparse => SimVariant::SparseCase,
            CaseFlag::Asymsparse => SimVariant::AsymptoticSparseCase,
        }
    }
}

/// Input selection and preprocessing, shared by `estimate` and `path`.
#[derive(Args)]
struct DataArgs {
    /// Group-1 observations (CSV, rows are observations).
    #[arg(long, value_name = "FILE")]
    x: Option<PathBuf>,
    /// Group-2 observations (CSV).
    #[arg(long, value_name = "FILE")]
    y: Option<PathBuf>,
    /// One CSV holding both groups, distinguished by a label column.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["x", "y"])]
    data: Option<PathBuf>,
    /// Name of the binary label column inside --data.
    #[arg(long, value_name = "COL")]
    label: Option<String>,
    /// Field delimiter (single ASCII character).
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Input files carry no header row.
    #[arg(long)]
    no_header: bool,
    /// Center and scale each column per group before estimation.
    #[arg(long)]
    standardize: bool,
    /// Rank-based Gaussianization per group (after any standardization).
    #[arg(long)]
    npn: bool,
}

impl DataArgs {
    fn csv_options(&self) -> Result<CsvOptions> {
        if !self.delimiter.is_ascii() {
            return Err(Error::InvalidArgument(format!(
                "delimiter must be a single ASCII character, got {:?}",
                self.delimiter
            )));
        }
        Ok(CsvOptions {
            has_header: !self.no_header,
            delimiter: self.delimiter as u8,
        })
    }

    fn load(&self) -> Result<TwoSampleData> {
        let options = self.csv_options()?;
        let data = match (&self.x, &self.y, &self.data, &self.label) {
            (Some(x), Some(y), None, None) => {
                let (xm, names) = load_csv(x, &options)?;
                let (ym, _) = load_csv(y, &options)?;
                TwoSampleData::new(xm, ym, names)?
            }
            (None, None, Some(path), Some(label)) => split_by_label(path, label, &options)?,
            _ => {
                return Err(Error::InvalidArgument(
                    "provide either --x and --y, or --data with --label".into(),
                ))
            }
        };
        let transform = |m: &Matrix| -> Result<Matrix> {
            let mut out = None;
            if self.standardize {
                out = Some(standardize(m)?);
            }
            if self.npn {
                out = Some(nonparanormal(out.as_ref().unwrap_or(m))?);
            }
            Ok(out.unwrap_or_else(|| m.clone()))
        };
        let x = transform(&data.x)?;
        let y = transform(&data.y)?;
        TwoSampleData::new(x, y, data.variable_names)
    }

    fn input_paths(&self) -> Vec<&Path> {
        [self.x.as_deref(), self.y.as_deref(), self.data.as_deref()]
            .into_iter()
            .flatten()
            .collect()
    }
}

/// Solver selection and stopping rule, shared by `estimate` and `path`.
#[derive(Args)]
struct SolveArgs {
    /// Loss to minimize.
    #[arg(long, value_enum, default_value_t = LossFlag::Sym)]
    loss: LossFlag,
    #[arg(long, value_enum, default_value_t = SolverFlag::Fista)]
    solver: SolverFlag,
    /// Gradient evaluation route; auto picks low-rank when n1 + n2 < p.
    #[arg(long, value_enum, default_value_t = ModeFlag::Auto)]
    mode: ModeFlag,
    /// Relative objective-change stopping tolerance.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Augmentation parameter of the admm solver.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Average the estimate with its transpose before writing outputs.
    #[arg(long)]
    symmetrize: bool,
}

impl SolveArgs {
    fn solve_one(
        &self,
        engine: &GradientEngine,
        lambda: f64,
        start: Option<&Matrix>,
    ) -> Result<SolverResult> {
        match self.solver {
            SolverFlag::Fista => {
                let config = SolverConfig::new(lambda)
                    .with_rel_tol(self.tol)
                    .with_max_iter(self.max_iter)
                    .with_symmetrize_output(self.symmetrize);
                fista_solve(engine, &config, start)
            }
            SolverFlag::Admm => {
                let config = AdmmConfig::new(lambda)
                    .with_rho(self.rho)
                    .with_rel_tol(self.tol)
                    .with_max_iter(self.max_iter);
                let mut result = admm_solve(engine, &config)?;
                if self.symmetrize {
                    result.delta_hat = result.delta_hat.symmetrized();
                    result.objective = engine.objective(&result.delta_hat, lambda)?;
                    result.objective_trace.push(result.objective);
                }
                Ok(result)
            }
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Penalty level.
    #[arg(long)]
    lambda: f64,
    #[command(flatten)]
    solve: SolveArgs,
    /// Directory receiving delta.csv, edges.csv, meta.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solve: SolveArgs,
    /// Number of penalty levels.
    #[arg(long, default_value_t = 50)]
    nlambda: usize,
    /// Smallest penalty as a fraction of the largest.
    #[arg(long, default_value_t = 0.5)]
    lambda_min_ratio: f64,
    /// Start each penalty from the previous solution (the default).
    #[arg(long, overrides_with = "no_warm_start")]
    warm_start: bool,
    /// Solve every penalty level independently.
    #[arg(long, overrides_with = "warm_start")]
    no_warm_start: bool,
    /// Directory receiving path.csv and meta.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Covariance design to draw from.
    #[arg(long, value_enum)]
    case: CaseFlag,
    /// Number of variables.
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 200)]
    n1: usize,
    #[arg(long, default_value_t = 200)]
    n2: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving x.csv, y.csv, truth.csv, meta.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Problem sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<usize>,
    /// Replicates per size (fresh data each).
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, value_enum, default_value_t = CaseFlag::Sparse)]
    case: CaseFlag,
    /// Solvers to time, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SolverFlag::Fista])]
    solver: Vec<SolverFlag>,
    /// Evaluation modes to time, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeFlag::Auto])]
    mode: Vec<ModeFlag>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    n1: usize,
    #[arg(long, default_value_t = 200)]
    n2: usize,
    /// Loss to minimize (the admm solver requires asym).
    #[arg(long, value_enum, default_value_t = LossFlag::Asym)]
    loss: LossFlag,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 50)]
    nlambda: usize,
    #[arg(long, default_value_t = 0.5)]
    lambda_min_ratio: f64,
    /// Directory receiving bench.csv and meta.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Sidecar serialized next to every command's outputs. Optional fields are
/// omitted when they do not apply to the command.
#[derive(Serialize)]
struct RunMetadata {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    loss: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nlambda: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_min_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warm_start: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lipschitz_used: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    standardize: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    npn: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetrize: Option<bool>,
    threads: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    inputs: Vec<FileChecksum>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    outputs: Vec<FileChecksum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_lambda: Option<Vec<LambdaStat>>,
}

impl RunMetadata {
    fn new(command: &str) -> Self {
        RunMetadata {
            command: command.into(),
            loss: None,
            solver: None,
            mode: None,
            lambda: None,
            lambda_max: None,
            nlambda: None,
            lambda_min_ratio: None,
            warm_start: None,
            rho: None,
            tol: None,
            max_iter: None,
            iterations: None,
            objective: None,
            converged: None,
            lipschitz_used: None,
            wall_time_seconds: None,
            seed: None,
            case: None,
            p: None,
            p_list: None,
            reps: None,
            n1: None,
            n2: None,
            standardize: None,
            npn: None,
            symmetrize: None,
            threads: threading::threads(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            per_lambda: None,
        }
    }
}

#[derive(Serialize)]
struct FileChecksum {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct LambdaStat {
    lambda: f64,
    iterations: usize,
    objective: f64,
    converged: bool,
    nonzeros: usize,
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    threading::set_threads(cli.threads);
    let outcome = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Path(args) => cmd_path(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Usage problems exit 1; everything else is a data/processing error (2).
fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => 1,
        Error::AtLambda { source, .. } => exit_code_for(source),
        _ => 2,
    }
}

fn build_engine(data: &TwoSampleData, solve: &SolveArgs) -> Result<GradientEngine> {
    GradientEngine::from_data(solve.loss.kind(), &data.x, &data.y, solve.mode.choice())
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    if !args.lambda.is_finite() || args.lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "--lambda must be finite and non-negative, got {}",
            args.lambda
        )));
    }
    let started = Instant::now();
    let data = args.data.load()?;
    let engine = build_engine(&data, &args.solve)?;
    let result = args.solve.solve_one(&engine, args.lambda, None)?;

    std::fs::create_dir_all(&args.out)?;
    let delta_path = args.out.join("delta.csv");
    let edges_path = args.out.join("edges.csv");
    write_csv(&delta_path, &result.delta_hat, None)?;
    write_edges_csv(&edges_path, &result.delta_hat)?;

    let mut meta = RunMetadata::new("estimate");
    meta.loss = Some(args.solve.loss.kind().name().into());
    meta.solver = Some(args.solve.solver.name().into());
    meta.mode = Some(engine.mode_name().into());
    meta.lambda = Some(args.lambda);
    meta.lambda_max = Some(engine.lambda_max());
    meta.rho = (args.solve.solver == SolverFlag::Admm).then_some(args.solve.rho);
    meta.tol = Some(args.solve.tol);
    meta.max_iter = Some(args.solve.max_iter);
    meta.iterations = Some(result.iterations);
    meta.objective = Some(result.objective);
    meta.converged = Some(result.converged);
    meta.lipschitz_used = result.lipschitz_used;
    meta.p = Some(engine.dimension());
    meta.n1 = Some(data.x.rows());
    meta.n2 = Some(data.y.rows());
    meta.standardize = Some(args.data.standardize);
    meta.npn = Some(args.data.npn);
    meta.symmetrize = Some(args.solve.symmetrize);
    meta.inputs = checksums(&args.data.input_paths())?;
    meta.wall_time_seconds = Some(started.elapsed().as_secs_f64());
    write_json(&args.out.join("meta.json"), &meta)?;

    println!(
        "estimate: p={}, lambda={}, {} iterations, {}",
        engine.dimension(),
        args.lambda,
        result.iterations,
        if result.converged { "converged" } else { "hit the iteration cap" }
    );
    Ok(if result.converged { 0 } else { 3 })
}

fn cmd_path(args: PathArgs) -> Result<i32> {
    let started = Instant::now();
    let data = args.data.load()?;
    let engine = build_engine(&data, &args.solve)?;
    let lambda_max = engine.lambda_max();
    if lambda_max <= 0.0 {
        return Err(Error::DegenerateData(
            "the two groups have identical covariances; no penalty grid exists".into(),
        ));
    }
    let grid = lambda_grid(lambda_max, args.nlambda, args.lambda_min_ratio)?;
    let warm = !args.no_warm_start;

    let path = match args.solve.solver {
        SolverFlag::Fista => {
            let config = SolverConfig::new(0.0)
                .with_rel_tol(args.solve.tol)
                .with_max_iter(args.solve.max_iter)
                .with_symmetrize_output(args.solve.symmetrize);
            solve_path(&engine, &grid, &config, warm)?
        }
        SolverFlag::Admm => {
            let mut path = if warm {
                let config = AdmmConfig::new(0.0)
                    .with_rho(args.solve.rho)
                    .with_rel_tol(args.solve.tol)
                    .with_max_iter(args.solve.max_iter);
                admm_solve_path(&engine, &grid, &config)?
            } else {
                let results = grid
                    .iter()
                    .map(|&lambda| {
                        let config = AdmmConfig::new(lambda)
                            .with_rho(args.solve.rho)
                            .with_rel_tol(args.solve.tol)
                            .with_max_iter(args.solve.max_iter);
                        admm_solve(&engine, &config).map_err(|e| Error::at_lambda(lambda, e))
                    })
                    .collect::<Result<Vec<_>>>()?;
                PathResult {
                    lambdas: grid.clone(),
                    results,
                }
            };
            if args.solve.symmetrize {
                for r in &mut path.results {
                    r.delta_hat = r.delta_hat.symmetrized();
                    r.objective = engine.objective(&r.delta_hat, r.lambda)?;
                    r.objective_trace.push(r.objective);
                }
            }
            path
        }
    };

    std::fs::create_dir_all(&args.out)?;
    write_path_csv(&args.out.join("path.csv"), &path)?;

    let all_converged = path.results.iter().all(|r| r.converged);
    let mut meta = RunMetadata::new("path");
    meta.loss = Some(args.solve.loss.kind().name().into());
    meta.solver = Some(args.solve.solver.name().into());
    meta.mode = Some(engine.mode_name().into());
    meta.lambda_max = Some(lambda_max);
    meta.nlambda = Some(args.nlambda);
    meta.lambda_min_ratio = Some(args.lambda_min_ratio);
    meta.warm_start = Some(warm);
    meta.rho = (args.solve.solver == SolverFlag::Admm).then_some(args.solve.rho);
    meta.tol = Some(args.solve.tol);
    meta.max_iter = Some(args.solve.max_iter);
    meta.converged = Some(all_converged);
    meta.p = Some(engine.dimension());
    meta.n1 = Some(data.x.rows());
    meta.n2 = Some(data.y.rows());
    meta.standardize = Some(args.data.standardize);
    meta.npn = Some(args.data.npn);
    meta.symmetrize = Some(args.solve.symmetrize);
    meta.inputs = checksums(&args.data.input_paths())?;
    meta.per_lambda = Some(
        path.results
            .iter()
            .map(|r| LambdaStat {
                lambda: r.lambda,
                iterations: r.iterations,
                objective: r.objective,
                converged: r.converged,
                nonzeros: r.delta_hat.count_nonzero(0.0),
            })
            .collect(),
    );
    meta.wall_time_seconds = Some(started.elapsed().as_secs_f64());
    write_json(&args.out.join("meta.json"), &meta)?;

    println!(
        "path: p={}, {} penalties from {:.6e}, {}",
        engine.dimension(),
        path.lambdas.len(),
        lambda_max,
        if all_converged { "all converged" } else { "some hit the iteration cap" }
    );
    Ok(if all_converged { 0 } else { 3 })
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let design = SimDesign::build(args.case.variant(), args.p)?;
    let (x, y) = sample_two(&design, args.n1, args.n2, args.seed)?;

    std::fs::create_dir_all(&args.out)?;
    let names: Vec<String> = (1..=args.p).map(|j| format!("V{j}")).collect();
    let x_path = args.out.join("x.csv");
    let y_path = args.out.join("y.csv");
    let truth_path = args.out.join("truth.csv");
    write_csv(&x_path, &x, Some(&names))?;
    write_csv(&y_path, &y, Some(&names))?;
    write_truth_csv(&truth_path, &design.delta_star)?;

    let mut meta = RunMetadata::new("simulate");
    meta.case = Some(args.case.variant().name().into());
    meta.p = Some(args.p);
    meta.n1 = Some(args.n1);
    meta.n2 = Some(args.n2);
    meta.seed = Some(args.seed);
    // No wall time and basenames only: reruns with one seed must produce
    // byte-identical files regardless of --out.
    meta.outputs = checksums(&[&x_path, &y_path, &truth_path])?;
    for out in &mut meta.outputs {
        out.file = Path::new(&out.file)
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| out.file.clone());
    }
    write_json(&args.out.join("meta.json"), &meta)?;

    println!(
        "simulate: case={}, p={}, n1={}, n2={}, seed={}",
        args.case.variant().name(),
        args.p,
        args.n1,
        args.n2,
        args.seed
    );
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    if args.reps == 0 {
        return Err(Error::InvalidArgument("--reps must be at least 1".into()));
    }
    let kind = args.loss.kind();
    let mut rows: Vec<(String, String, usize, usize, f64, usize)> = Vec::new();

    for (p_index, &p) in args.p.iter().enumerate() {
        let design = SimDesign::build(args.case.variant(), p)?;
        for rep in 0..args.reps {
            // One dataset per (p, rep), shared across solver/mode cells.
            let data_seed = args.seed + (p_index * args.reps + rep) as u64;
            let (x, y) = sample_two(&design, args.n1, args.n2, data_seed)?;
            for &solver in &args.solver {
                for &mode in &args.mode {
                    if solver == SolverFlag::Admm {
                        if kind != LossKind::Asymmetric {
                            eprintln!("skipping admm with the sym loss (unsupported)");
                            continue;
                        }
                        if mode == ModeFlag::Lowrank {
                            eprintln!("skipping admm in lowrank mode (dense-only solver)");
                            continue;
                        }
                        if p > crate::admm::MAX_ORACLE_DIM {
                            eprintln!(
                                "skipping admm at p={p} (reference solver caps at {})",
                                crate::admm::MAX_ORACLE_DIM
                            );
                            continue;
                        }
                    }
                    let engine = GradientEngine::from_data(kind, &x, &y, mode.choice())?;
                    let grid =
                        lambda_grid(engine.lambda_max(), args.nlambda, args.lambda_min_ratio)?;
                    let timer = Instant::now();
                    let path = match solver {
                        SolverFlag::Fista => {
                            let config = SolverConfig::new(0.0)
                                .with_rel_tol(args.tol)
                                .with_max_iter(args.max_iter);
                            solve_path(&engine, &grid, &config, true)?
                        }
                        SolverFlag::Admm => {
                            let config = AdmmConfig::new(0.0)
                                .with_rho(args.rho)
                                .with_rel_tol(args.tol)
                                .with_max_iter(args.max_iter);
                            admm_solve_path(&engine, &grid, &config)?
                        }
                    };
                    let seconds = timer.elapsed().as_secs_f64();
                    let iterations_total: usize =
                        path.results.iter().map(|r| r.iterations).sum();
                    rows.push((
                        solver.name().into(),
                        mode.name().into(),
                        p,
                        rep,
                        seconds,
                        iterations_total,
                    ));
                }
            }
        }
    }

    std::fs::create_dir_all(&args.out)?;
    let bench_path = args.out.join("bench.csv");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&bench_path)?);
    writeln!(file, "solver,mode,p,rep,seconds,iterations_total")?;
    for (solver, mode, p, rep, seconds, iterations) in &rows {
        writeln!(file, "{solver},{mode},{p},{rep},{seconds:.6e},{iterations}")?;
    }
    file.flush()?;
    drop(file);

    let mut meta = RunMetadata::new("bench");
    meta.loss = Some(kind.name().into());
    meta.case = Some(args.case.variant().name().into());
    meta.p_list = Some(args.p.clone());
    meta.reps = Some(args.reps);
    meta.n1 = Some(args.n1);
    meta.n2 = Some(args.n2);
    meta.seed = Some(args.seed);
    meta.tol = Some(args.tol);
    meta.max_iter = Some(args.max_iter);
    meta.nlambda = Some(args.nlambda);
    meta.lambda_min_ratio = Some(args.lambda_min_ratio);
    write_json(&args.out.join("meta.json"), &meta)?;

    println!("bench: {} timed cells -> {}", rows.len(), bench_path.display());
    Ok(0)
}

/// True when every mirrored pair matches bitwise; governs whether edge
/// lists may drop the lower triangle.
fn is_bitwise_symmetric(m: &Matrix) -> bool {
    if !m.is_square() {
        return false;
    }
    for i in 0..m.rows() {
        for j in (i + 1)..m.cols() {
            if m.get(i, j).to_bits() != m.get(j, i).to_bits() {
                return false;
            }
        }
    }
    true
}

/// Writes the nonzero entries as `i,j,value` rows (1-indexed). Symmetric
/// estimates emit the upper triangle only; densifying the rows (mirroring
/// across the diagonal for triangle files) reproduces the dense matrix
/// bitwise.
fn write_edges_csv(path: &Path, delta: &Matrix) -> Result<usize> {
    let symmetric = is_bitwise_symmetric(delta);
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "i,j,value")?;
    let mut written = 0;
    for i in 0..delta.rows() {
        let j_start = if symmetric { i } else { 0 };
        for j in j_start..delta.cols() {
            let v = delta.get(i, j);
            if v != 0.0 {
                writeln!(file, "{},{},{:.16e}", i + 1, j + 1, v)?;
                written += 1;
            }
        }
    }
    file.flush()?;
    Ok(written)
}

/// Writes `lambda,i,j,value` rows for every nonzero at every penalty level,
/// in grid order.
fn write_path_csv(path: &Path, result: &PathResult) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "lambda,i,j,value")?;
    for r in &result.results {
        for i in 0..r.delta_hat.rows() {
            for j in 0..r.delta_hat.cols() {
                let v = r.delta_hat.get(i, j);
                if v != 0.0 {
                    writeln!(file, "{:.16e},{},{},{:.16e}", r.lambda, i + 1, j + 1, v)?;
                }
            }
        }
    }
    file.flush()?;
    Ok(())
}

/// Writes the upper triangle of the true difference as `i,j,value` rows.
fn write_truth_csv(path: &Path, delta_star: &Matrix) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "i,j,value")?;
    for i in 0..delta_star.rows() {
        for j in i..delta_star.cols() {
            let v = delta_star.get(i, j);
            if v != 0.0 {
                writeln!(file, "{},{},{:.16e}", i + 1, j + 1, v)?;
            }
        }
    }
    file.flush()?;
    Ok(())
}

fn write_json(path: &Path, meta: &RunMetadata) -> Result<()> {
    let body = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::InvalidArgument(format!("metadata serialization failed: {e}")))?;
    std::fs::write(path, body + "\n")?;
    Ok(())
}

fn checksums(paths: &[&Path]) -> Result<Vec<FileChecksum>> {
    paths
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p)?;
            let digest = Sha256::digest(&bytes);
            let mut hex = String::with_capacity(64);
            for b in digest {
                hex.push_str(&format!("{b:02x}"));
            }
            Ok(FileChecksum {
                file: p.display().to_string(),
                sha256: hex,
            })
        })
        .collect()
}
