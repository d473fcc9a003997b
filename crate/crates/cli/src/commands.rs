use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use zimix::bootstrap::{bootstrap, fit_method, BootstrapConfig, BootstrapSummary};
use zimix::mml::{fit_mml_detailed, write_trace, GridCounts};
use zimix::posterior::{density_estimate, posterior_csv, posterior_probability};
use zimix::sample::{EvalGrid, TwoSampleData};
use zimix::sim::{run_cells, SimConfig};
use zimix::{Flag, Method, MixtureEstimate};

use crate::{BootstrapArgs, Cli, Command, EstimateArgs, FitArgs, Format, PosteriorArgs, ReportFormat, SimulateArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] zimix::Error),
    #[error("fit carries degeneracy flags {0:?}; pass --allow-degenerate to accept it")]
    Flagged(Vec<Flag>),
    #[error("{dropped} of {n_boot} bootstrap replicates were degenerate; pass --allow-degenerate to accept")]
    BootstrapFlagged { dropped: usize, n_boot: usize },
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.kind(),
            CliError::Flagged(_) | CliError::BootstrapFlagged { .. } => "flagged",
            CliError::Io { .. } => "io",
            CliError::Pool(_) => "workers",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(zimix::Error::InvalidArgument(_) | zimix::Error::Config(_)) => 2,
            CliError::Lib(zimix::Error::Degenerate(_)) => 3,
            CliError::Flagged(_) | CliError::BootstrapFlagged { .. } => 3,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Pool(e.to_string()))?;
    }
    match cli.command {
        Command::Estimate(args) => estimate(args),
        Command::Bootstrap(args) => run_bootstrap(args),
        Command::Posterior(args) => posterior(args),
        Command::Simulate(args) => simulate(args),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(zimix::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn load(fit: &FitArgs) -> Result<TwoSampleData<f64>> {
    fit.em.config().validate()?;
    Ok(TwoSampleData::from_csv_path(&fit.input)?)
}

fn check_flags(est: &MixtureEstimate<f64>, allow: bool) -> Result<()> {
    let bad: Vec<Flag> = est.flags.iter().copied().filter(|f| f.is_degenerate()).collect();
    if !bad.is_empty() && !allow {
        return Err(CliError::Flagged(bad));
    }
    if est.has_flag(Flag::TiedPositives) {
        eprintln!("note: tied positive values; the closed-form empirical likelihood assumes none");
    }
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let data = load(&args.fit)?;
    let config = args.fit.em.config();
    let method = Method::from(args.fit.method);
    let est = if method == Method::MmlEm {
        let grid = EvalGrid::build(&data, config.q)?;
        let fit = fit_mml_detailed(&data, &grid, &config)?;
        if let Some(path) = &args.trace {
            let records: Vec<_> = fit.runs.iter().flat_map(|r| r.trace.iter().copied()).collect();
            let file = fs::File::create(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            write_trace(std::io::BufWriter::new(file), &records)?;
        }
        fit.estimate
    } else {
        fit_method(&data, method, &config)?
    };
    check_flags(&est, args.fit.allow_degenerate)?;
    let text = match args.format {
        Format::Json => to_json(&est)?,
        Format::Csv => est.cdf_csv(),
    };
    emit(args.output.as_deref(), &text)
}

fn band_paths(args: &BootstrapArgs) -> Option<(PathBuf, PathBuf)> {
    let prefix = match (&args.bands, &args.output) {
        (Some(p), _) => p.clone(),
        (None, Some(out)) => out.with_extension(""),
        (None, None) => return None,
    };
    let with = |suffix: &str| {
        let mut s = prefix.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    Some((with("_f1.csv"), with("_f2.csv")))
}

fn summary_csv(s: &BootstrapSummary) -> String {
    format!(
        "parameter,estimate,se,lo,hi\nlambda,{},{},{},{}\np,{},{},{},{}\n",
        s.lambda, s.se_lambda, s.ci_lambda.0, s.ci_lambda.1, s.p, s.se_p, s.ci_p.0, s.ci_p.1
    )
}

fn run_bootstrap(args: BootstrapArgs) -> Result<()> {
    let data = load(&args.fit)?;
    let em = args.fit.em.config();
    let config = BootstrapConfig {
        n_boot: args.boot,
        level: args.level,
        seed: em.rng_seed,
        em,
    };
    let summary = bootstrap(&data, args.fit.method.into(), &config)?;
    if summary.flagged && !args.fit.allow_degenerate {
        return Err(CliError::BootstrapFlagged {
            dropped: summary.dropped,
            n_boot: summary.n_boot,
        });
    }
    if let Some((p1, p2)) = band_paths(&args) {
        for (path, band) in [(p1, &summary.band_f1), (p2, &summary.band_f2)] {
            emit(Some(&path), &BootstrapSummary::band_csv(band))?;
        }
    }
    let text = match args.format {
        Format::Json => to_json(&summary)?,
        Format::Csv => summary_csv(&summary),
    };
    emit(args.output.as_deref(), &text)
}

#[derive(Serialize)]
struct PosteriorJson<'a> {
    lambda_star: f64,
    h1: f64,
    h2: f64,
    sigma1: f64,
    sigma2: f64,
    x: &'a [f64],
    g1: &'a [f64],
    g2: &'a [f64],
    eta: &'a [Option<f64>],
}

fn posterior(args: PosteriorArgs) -> Result<()> {
    let data = load(&args.fit)?;
    let config = args.fit.em.config();
    let est = fit_method(&data, args.fit.method.into(), &config)?;
    check_flags(&est, args.fit.allow_degenerate)?;
    let grid = EvalGrid::build(&data, config.q)?;
    let counts = GridCounts::new(&data, &grid);
    let dens = density_estimate(&est, &counts)?;
    let eta = posterior_probability(&dens, est.lambda_star)?;
    let text = match args.format {
        Format::Csv => posterior_csv(&dens, &eta),
        Format::Json => to_json(&PosteriorJson {
            lambda_star: est.lambda_star,
            h1: dens.h1,
            h2: dens.h2,
            sigma1: dens.sigma1,
            sigma2: dens.sigma2,
            x: &dens.eval_points,
            g1: &dens.g1,
            g2: &dens.g2,
            eta: &eta,
        })?,
    };
    emit(args.output.as_deref(), &text)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let config = SimConfig::from_toml(&text)?;
    let mut specs = config.cells(0)?;
    for spec in &mut specs {
        if let Some(seed) = args.em.seed {
            spec.seed = seed;
        }
        if let Some(reps) = args.reps {
            spec.n_reps = reps;
        }
        spec.validate()?;
    }
    let methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    let report = run_cells::<f64>(&specs, &methods, &args.em.config())?;
    let text = match args.format {
        ReportFormat::Text => report.render_text(),
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => to_json(&report)?,
    };
    emit(args.output.as_deref(), &text)
}
