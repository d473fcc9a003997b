mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zimix::mml::EmConfig;
use zimix::Method;

#[derive(Debug, Parser)]
#[command(name = "zimix", version, about = "Zero-inflated two-sample mixture estimation")]
struct Cli {
    /// Worker threads for bootstrap and simulation (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Print errors to stderr as a JSON object.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one estimator and write the estimate.
    Estimate(EstimateArgs),
    /// Bootstrap standard errors, percentile intervals and CDF bands.
    Bootstrap(BootstrapArgs),
    /// Kernel densities of log levels and the posterior probability curve.
    Posterior(PosteriorArgs),
    /// Run a Monte Carlo study described by a TOML file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Binomial,
    El,
    Mml,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Binomial => Method::BinomialPlugin,
            MethodArg::El => Method::EmpiricalLikelihood,
            MethodArg::Mml => Method::MmlEm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct EmArgs {
    /// Trimming fraction for the evaluation grid.
    #[arg(long, default_value_t = 0.001)]
    q: f64,
    /// Stop when the likelihood increment is at most this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Number of EM starting points.
    #[arg(long, default_value_t = 6)]
    starts: usize,
    /// Random seed.
    #[arg(long, env = "ZIMIX_SEED")]
    seed: Option<u64>,
}

impl EmArgs {
    fn config(&self) -> EmConfig {
        EmConfig {
            q: self.q,
            tol: self.tol,
            max_iters: self.max_iters,
            n_starts: self.starts,
            rng_seed: self.seed.unwrap_or(0),
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    /// CSV with columns `group,value`; group is `x` or `y`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Mml)]
    method: MethodArg,
    #[command(flatten)]
    em: EmArgs,
    /// Write results even when the fit carries degeneracy flags.
    #[arg(long)]
    allow_degenerate: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the per-iteration EM trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, default_value_t = 1000)]
    boot: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Prefix for the band files `<prefix>_f1.csv` and `<prefix>_f2.csv`
    /// (default: derived from --output when it is given).
    #[arg(long)]
    bands: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PosteriorArgs {
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// TOML study description.
    #[arg(long)]
    config: PathBuf,
    /// Estimators to compare.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Mml, MethodArg::Binomial])]
    methods: Vec<MethodArg>,
    /// Override the replication count of every cell.
    #[arg(long)]
    reps: Option<usize>,
    #[command(flatten)]
    em: EmArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_errors = cli.json_errors;
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json_errors {
                let body = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
                eprintln!("{body}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
