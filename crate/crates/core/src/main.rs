use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use loglin::cli::{cmd_compare, cmd_diagnose, cmd_solve, AlgorithmKind, DatasetSpec, RunManifest};
use loglin::data::SyntheticSpec;
use loglin::model::{ConstantsMode, LambdaPolicy, SolverConfig};

#[derive(Parser)]
#[command(
    name = "loglin",
    version,
    about = "Logistic-regression solvers with loss-inverse learning rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Run one solver and write its per-iteration trace as CSV
    Solve(SolveArgs),
    /// Record the l2 smoothness ratio along a gradient-descent path
    Diagnose(DiagnoseArgs),
    /// Fixed vs heuristic vs variable step sizes from the same start
    Compare(CompareArgs),
    /// Re-execute a run from a saved manifest
    Rerun {
        /// Path to a *.manifest.json written by a previous run
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AlgoFlag {
    GreedyCd,
    FcCd,
    GdVariable,
    GdFixed,
    GdHeuristic,
}

impl From<AlgoFlag> for AlgorithmKind {
    fn from(a: AlgoFlag) -> Self {
        match a {
            AlgoFlag::GreedyCd => AlgorithmKind::GreedyCd,
            AlgoFlag::FcCd => AlgorithmKind::FcCd,
            AlgoFlag::GdVariable => AlgorithmKind::GdVariable,
            AlgoFlag::GdFixed => AlgorithmKind::GdFixed,
            AlgoFlag::GdHeuristic => AlgorithmKind::GdHeuristic,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeFlag {
    Empirical,
    Conservative,
}

impl From<ModeFlag> for ConstantsMode {
    fn from(m: ModeFlag) -> Self {
        match m {
            ModeFlag::Empirical => ConstantsMode::Empirical,
            ModeFlag::Conservative => ConstantsMode::Conservative,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// LIBSVM-format dataset file
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Synthetic separable instance as m,n,margin,seed
    #[arg(long, value_parser = parse_synthetic)]
    synthetic: Option<SyntheticTuple>,
    /// Rescale each feature column into [-1, 1]
    #[arg(long)]
    scale_features: bool,
    /// Feature magnitude bound for --synthetic rows
    #[arg(long = "box", default_value_t = 1.0)]
    box_bound: f64,
    /// Number of nonzeros in the planted direction of --synthetic
    #[arg(long)]
    planted_sparsity: Option<usize>,
}

#[derive(Clone)]
struct SyntheticTuple {
    examples: usize,
    features: usize,
    margin: f64,
    seed: u64,
}

fn parse_synthetic(s: &str) -> Result<SyntheticTuple, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected m,n,margin,seed".into());
    }
    Ok(SyntheticTuple {
        examples: parts[0].trim().parse().map_err(|_| "bad m")?,
        features: parts[1].trim().parse().map_err(|_| "bad n")?,
        margin: parts[2].trim().parse().map_err(|_| "bad margin")?,
        seed: parts[3].trim().parse().map_err(|_| "bad seed")?,
    })
}

impl DataArgs {
    fn dataset(&self) -> Result<DatasetSpec, String> {
        match (&self.data, &self.synthetic) {
            (Some(p), None) => Ok(DatasetSpec::Path(p.clone())),
            (None, Some(t)) => {
                let mut spec = SyntheticSpec::new(t.examples, t.features, t.margin, t.seed)
                    .with_box(self.box_bound);
                if let Some(s) = self.planted_sparsity {
                    spec = spec.with_sparsity(s);
                }
                Ok(DatasetSpec::Synthetic(spec))
            }
            _ => Err("exactly one of --data / --synthetic is required".into()),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Solver to run
    #[arg(long, value_enum)]
    algo: AlgoFlag,
    #[command(flatten)]
    data: DataArgs,
    /// Iteration budget T
    #[arg(long)]
    iters: usize,
    /// Box bound B (required for greedy-cd)
    #[arg(long = "B")]
    solution_bound: Option<f64>,
    /// l1 estimate B1 (defaults to B)
    #[arg(long = "B1")]
    l1_estimate: Option<f64>,
    /// Approximation slack delta in (0,1)
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Loss target: stop once f(x) <= eps
    #[arg(long)]
    eps: Option<f64>,
    /// Constant lambda in (0,1] instead of the adaptive schedule
    #[arg(long)]
    lambda: Option<f64>,
    /// Smoothness-constant mode for the variable policy
    #[arg(long, value_enum, default_value_t = ModeFlag::Empirical)]
    mode: ModeFlag,
    /// Restricted-subproblem gradient tolerance (default 1e-10 * m)
    #[arg(long)]
    tol_grad: Option<f64>,
    /// Base seed for the run
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace CSV output path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Gradient-descent iterations to sample
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = ModeFlag::Empirical)]
    mode: ModeFlag,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ratio report CSV output path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Iteration budget per policy
    #[arg(long)]
    iters: usize,
    /// Warmup iterations: run GD, then drop misclassified rows
    #[arg(long)]
    separabilize: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeFlag::Empirical)]
    mode: ModeFlag,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Joined comparison CSV path; per-policy files sit next to it
    #[arg(long)]
    out: PathBuf,
}

/// Flag-contract violations clap cannot express; exit code 2 like any other
/// usage error.
fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("run with --help for usage");
    ExitCode::from(2)
}

fn run(result: loglin::Result<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Commands::Solve(args) => {
            let algo: AlgorithmKind = args.algo.into();
            if algo == AlgorithmKind::GreedyCd && args.solution_bound.is_none() {
                return usage_error("--algo greedy-cd requires --B");
            }
            if algo == AlgorithmKind::FcCd && args.eps.is_some() {
                return usage_error("--eps is not supported for fc-cd (use --iters)");
            }
            if let Some(l) = args.lambda {
                if !(l > 0.0 && l <= 1.0) {
                    return usage_error("--lambda must lie in (0, 1]");
                }
            }
            if let Some(t) = args.tol_grad {
                if t <= 0.0 || t.is_nan() {
                    return usage_error("--tol-grad must be positive");
                }
            }
            let dataset = match args.data.dataset() {
                Ok(d) => d,
                Err(msg) => return usage_error(&msg),
            };
            let mut config = SolverConfig::new(args.solution_bound.unwrap_or(1.0), args.iters);
            config.l1_estimate = args.l1_estimate;
            config.delta = args.delta;
            config.epsilon = args.eps;
            config.lambda = match args.lambda {
                Some(l) => LambdaPolicy::Constant(l),
                None => LambdaPolicy::Adaptive,
            };
            // 0 marks "derive 1e-10 * m once the data is loaded"
            config.tol_grad = args.tol_grad.unwrap_or(0.0);
            let mut manifest = RunManifest {
                command: "solve".into(),
                dataset,
                algorithm: Some(algo),
                config,
                mode: args.mode.into(),
                constants: None,
                seed: args.seed,
                scale_features: args.data.scale_features,
                separabilize: None,
                output_path: args.out,
            };
            run(cmd_solve(&mut manifest).map(|_| ()))
        }
        Commands::Diagnose(args) => {
            let dataset = match args.data.dataset() {
                Ok(d) => d,
                Err(msg) => return usage_error(&msg),
            };
            let mut manifest = RunManifest {
                command: "diagnose".into(),
                dataset,
                algorithm: None,
                config: SolverConfig::new(1.0, args.iters),
                mode: args.mode.into(),
                constants: None,
                seed: args.seed,
                scale_features: args.data.scale_features,
                separabilize: None,
                output_path: args.out,
            };
            run(cmd_diagnose(&mut manifest).map(|_| ()))
        }
        Commands::Compare(args) => {
            if args.separabilize == Some(0) {
                return usage_error("--separabilize needs at least 1 warmup iteration");
            }
            let dataset = match args.data.dataset() {
                Ok(d) => d,
                Err(msg) => return usage_error(&msg),
            };
            let mut manifest = RunManifest {
                command: "compare".into(),
                dataset,
                algorithm: None,
                config: SolverConfig::new(1.0, args.iters),
                mode: args.mode.into(),
                constants: None,
                seed: args.seed,
                scale_features: args.data.scale_features,
                separabilize: args.separabilize,
                output_path: args.out,
            };
            run(cmd_compare(&mut manifest).map(|_| ()))
        }
        Commands::Rerun { manifest } => {
            let loaded = match RunManifest::load(&manifest) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            run(loglin::cli::run_manifest(&loaded))
        }
    }
}
