//! `rkspace`: batch front end over JSON kernel specs and CSV data.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 positivity violation,
//! 3 solver non-convergence.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rkspace::duality::{is_min_kernel, min_kernel};
use rkspace::io::{
    grid, grid_pairs, read_dataset_csv, read_pairs_csv, read_points_csv, write_gram_csv,
    write_kernel_values_csv, write_predictions_csv,
};
use rkspace::kernel::{gram, positivity_check, sample_points};
use rkspace::solvers::{fit_krr, fit_pnorm};
use rkspace::verify::{all_passed, report_json, run_suite, summary};
use rkspace::{FitConfig, KernelSpec, RksError};

#[derive(Parser)]
#[command(
    name = "rkspace",
    version,
    about = "Reproducing kernel construction, checks and fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate K(x, y) over a pair list or a grid; writes `x,y,K` CSV.
    KernelEval(KernelEvalArgs),
    /// Gram matrix of a point list as CSV.
    Gram(GramArgs),
    /// Sampled positivity test; exits 2 on a violation.
    CheckPsd(CheckPsdArgs),
    /// Fit a regularized least-squares model; writes the fit as JSON.
    Fit(FitArgs),
    /// Run the verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct KernelInput {
    /// Kernel spec JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Override the quadrature resolution of the kernel.
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Args)]
struct KernelEvalArgs {
    #[command(flatten)]
    kernel: KernelInput,
    /// Pairs CSV: the first half of the columns is x, the second y.
    #[arg(
        long,
        alias = "pairs",
        conflicts_with = "grid",
        required_unless_present = "grid"
    )]
    data: Option<PathBuf>,
    /// Scalar grid `lo:hi:n`; evaluates all n² pairs.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GramArgs {
    #[command(flatten)]
    kernel: KernelInput,
    /// Points CSV.
    #[arg(long, alias = "points")]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckPsdArgs {
    #[command(flatten)]
    kernel: KernelInput,
    /// Points CSV; without it `--sample` points are drawn from the domain.
    #[arg(long, alias = "points", conflicts_with = "sample")]
    data: Option<PathBuf>,
    /// Number of points to sample.
    #[arg(long, default_value_t = 8)]
    sample: usize,
    /// Sampling box half-width for unbounded domains.
    #[arg(long, default_value_t = 2.0)]
    bound: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance on the smallest eigenvalue.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Test (G + Gᵀ)/2 for kernels without a symmetry guarantee.
    #[arg(long)]
    symmetrize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Krr,
    Pnorm,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV with columns `x[,x2,...],y`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "krr")]
    solver: Solver,
    /// Kernel spec JSON (KRR; defaults to min(x, y) on [0, 1]).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    lambda: f64,
    /// Stabilizer exponent (p-norm solver).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Fit JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Query points CSV for predictions (defaults to the training inputs).
    #[arg(long)]
    query: Option<PathBuf>,
    /// Predictions CSV output.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run a single group: table1, basis_roundtrip, positivity, subduality,
    /// reproducing or continuity.
    #[arg(long)]
    only: Option<String>,
    /// JSON report output; the summary then goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Error(RksError),
    Exit(u8),
}

impl From<RksError> for Failure {
    fn from(e: RksError) -> Self {
        Failure::Error(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Error(RksError::Io(e))
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn open(path: &Path) -> Result<File, RksError> {
    File::open(path).map_err(|e| RksError::invalid(format!("cannot open {}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, RksError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            RksError::invalid(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_kernel(path: &Path, resolution: Option<usize>) -> Result<KernelSpec, RksError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RksError::invalid(format!("cannot read {}: {e}", path.display())))?;
    let kernel = KernelSpec::from_json_str(&text)?;
    match resolution {
        Some(n) => kernel.with_resolution(n),
        None => Ok(kernel),
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, RksError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || RksError::invalid(format!("grid must be lo:hi:n, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    grid(lo, hi, n)
}

fn kernel_eval(args: KernelEvalArgs) -> CmdResult {
    let kernel = load_kernel(&args.kernel.spec, args.kernel.resolution)?;
    let pairs = match (&args.data, &args.grid) {
        (Some(path), _) => read_pairs_csv(open(path)?)?,
        (None, Some(g)) => grid_pairs(&parse_grid(g)?),
        (None, None) => unreachable!("clap requires one input"),
    };
    let dim = pairs
        .first()
        .map_or_else(|| kernel.input_dim().unwrap_or(1), |p| p.0.len());
    let rows = pairs
        .into_iter()
        .map(|(x, y)| kernel.eval(&x, &y).map(|k| (x, y, k)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = output(args.out.as_deref())?;
    write_kernel_values_csv(&rows, dim, &mut out)?;
    out.flush()?;
    Ok(())
}

fn gram_cmd(args: GramArgs) -> CmdResult {
    let kernel = load_kernel(&args.kernel.spec, args.kernel.resolution)?;
    let points = read_points_csv(open(&args.data)?)?;
    let g = gram(&kernel, &points)?;
    let mut out = output(args.out.as_deref())?;
    write_gram_csv(&g, &mut out)?;
    out.flush()?;
    Ok(())
}

fn check_psd(args: CheckPsdArgs) -> CmdResult {
    let kernel = load_kernel(&args.kernel.spec, args.kernel.resolution)?;
    let points = match &args.data {
        Some(path) => read_points_csv(open(path)?)?,
        None => sample_points(&kernel, args.sample, args.seed, args.bound)?,
    };
    let report = positivity_check(&kernel, &points, args.tolerance, args.symmetrize)?;
    let mut doc = serde_json::to_value(&report.verdict).expect("verdict serializes");
    if let serde_json::Value::Object(map) = &mut doc {
        map.insert("threshold".into(), report.threshold.into());
        map.insert("points".into(), points.len().into());
    }
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
    out.flush()?;
    if report.verdict.is_positive() {
        Ok(())
    } else {
        Err(Failure::Exit(2))
    }
}

fn fit(args: FitArgs) -> CmdResult {
    let data = read_dataset_csv(open(&args.data)?)?;
    let kernel = match &args.spec {
        Some(path) => Arc::new(load_kernel(path, args.resolution)?),
        None => min_kernel(),
    };
    let mut config = FitConfig::new(args.lambda).with_seed(args.seed);
    if let Some(p) = args.p {
        config = config.with_p(p);
    }
    if let Some(n) = args.max_iterations {
        config.max_iterations = n;
    }
    let outcome = match args.solver {
        Solver::Krr => fit_krr(kernel, &data, &config),
        Solver::Pnorm => {
            if !is_min_kernel(&kernel) {
                return Err(RksError::invalid(
                    "the p-norm solver works with min(x, y) on [0, 1] only",
                )
                .into());
            }
            if args.p.is_none() {
                return Err(RksError::invalid("--p is required for the p-norm solver").into());
            }
            fit_pnorm(&data, &config)
        }
    };
    let result = match outcome {
        Ok(r) => r,
        Err(RksError::NotConverged(diag)) => {
            eprintln!("error: solver did not converge");
            eprintln!("{}", serde_json::to_string_pretty(&*diag).expect("json"));
            return Err(Failure::Exit(3));
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{}", result.to_json_string())?;
    out.flush()?;

    if let Some(path) = &args.predictions {
        let queries = match &args.query {
            Some(q) => read_points_csv(open(q)?)?,
            None => data.xs.clone(),
        };
        let rows = queries
            .into_iter()
            .map(|x| result.predict(&x).map(|v| (x, v)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = output(Some(path))?;
        write_predictions_csv(&rows, data.dim(), &mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> CmdResult {
    let reports = run_suite(args.seed, args.only.as_deref())?;
    let json = report_json(&reports);
    match &args.out {
        Some(path) => {
            let mut out = output(Some(path))?;
            writeln!(out, "{json}")?;
            out.flush()?;
            print!("{}", summary(&reports));
        }
        None => {
            println!("{json}");
            eprint!("{}", summary(&reports));
        }
    }
    if all_passed(&reports) {
        Ok(())
    } else {
        Err(Failure::Exit(1))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::KernelEval(a) => kernel_eval(a),
        Command::Gram(a) => gram_cmd(a),
        Command::CheckPsd(a) => check_psd(a),
        Command::Fit(a) => fit(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Exit(code)) => ExitCode::from(code),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
