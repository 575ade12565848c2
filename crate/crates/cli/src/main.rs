use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frobenius_verify::config::{parse_lambda_grid, resolve_seed, SEED_ENV};
use frobenius_verify::spec_file::Pair;
use frobenius_verify::{exit, exit_code, run_catalog, run_theta, run_verify, Config, InputError, ManifoldSpec, ThetaParams};
use kahler_frobenius::catalog::find_entry;
use kahler_frobenius::theta::ThetaError;
use kahler_frobenius::Complex64;
use nalgebra::DMatrix;

#[derive(Parser)]
#[command(name = "frobenius-verify", version, about = "Checks Kähler potentials and flat quotients for hermitian Frobenius structure")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    opts: Options,
}

#[derive(Args)]
struct Options {
    /// Override a tolerance: structural, fd or theta (repeatable)
    #[arg(long, value_name = "NAME=VALUE", global = true)]
    tolerance: Vec<String>,
    /// Sample points per chart
    #[arg(long, default_value_t = 64, global = true)]
    samples: usize,
    /// Seed for the sample sequence [default: $FROBENIUS_VERIFY_SEED or built in]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated λ values for the pencil
    #[arg(long, value_name = "CSV", default_value = "-1,-0.5,0.5,1,2", global = true, allow_hyphen_values = true)]
    lambda_grid: String,
    /// Truncation radius of theta series
    #[arg(long, default_value_t = 30, global = true)]
    radius: u32,
    /// Catalog name filter (substring)
    #[arg(long, value_name = "FILTER", global = true)]
    catalog: Option<String>,
    /// JSON output (default)
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Human-readable output
    #[arg(long, global = true)]
    text: bool,
    /// Write the report to a file instead of stdout
    #[arg(long, short, value_name = "PATH", global = true)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one manifold spec file
    Verify { spec: String },
    /// Verify catalog entries (all surfaces, or those matching --catalog)
    Catalog,
    /// Theta-function checks for one period matrix
    Theta {
        /// Period matrix as JSON rows of [re, im] pairs
        #[arg(long, default_value = "[[[0,1]]]")]
        tau: String,
        /// Level s
        #[arg(long, default_value_t = 2)]
        level: u32,
    },
    /// Print a catalog entry as a spec file
    Export { name: String },
}

fn config(opts: &Options) -> Result<Config, InputError> {
    let env = std::env::var(SEED_ENV).ok();
    let mut cfg = Config {
        seed: resolve_seed(opts.seed, env.as_deref())?,
        samples: opts.samples,
        lambda_grid: parse_lambda_grid(&opts.lambda_grid)?,
        radius: opts.radius,
        ..Config::default()
    };
    if cfg.samples == 0 {
        return Err(InputError::Invalid("--samples must be at least 1".into()));
    }
    if cfg.radius == 0 {
        return Err(InputError::Invalid("--radius must be at least 1".into()));
    }
    for t in &opts.tolerance {
        cfg.tolerances.set(t)?;
    }
    Ok(cfg)
}

fn parse_tau(text: &str) -> Result<DMatrix<Complex64>, InputError> {
    let rows: Vec<Vec<Pair>> = serde_json::from_str(text)?;
    let g = rows.len();
    if g == 0 || rows.iter().any(|r| r.len() != g) {
        return Err(InputError::Invalid("tau must be a non-empty square matrix".into()));
    }
    Ok(DMatrix::from_fn(g, g, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

fn emit(opts: &Options, body: String) -> Result<(), InputError> {
    match &opts.output {
        Some(path) => std::fs::write(path, body).map_err(|source| InputError::Io { path: path.clone(), source }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, InputError> {
    let opts = &cli.opts;
    let cfg = config(opts)?;
    let command = match (cli.command, &opts.catalog) {
        (Some(c), _) => c,
        (None, Some(_)) => Command::Catalog,
        (None, None) => return Err(InputError::Invalid("no command given; see --help".into())),
    };
    match command {
        Command::Verify { spec } => {
            let manifold = ManifoldSpec::read(&spec)?.validate()?;
            let report = run_verify(&manifold, &cfg);
            emit(opts, if opts.text { report.to_text() } else { report.to_json() + "\n" })?;
            Ok(exit_code(std::slice::from_ref(&report)))
        }
        Command::Catalog => {
            let reports = run_catalog(opts.catalog.as_deref(), &cfg)?;
            let body = if opts.text {
                reports.iter().map(|r| r.to_text()).collect()
            } else {
                serde_json::to_string_pretty(&reports)? + "\n"
            };
            emit(opts, body)?;
            Ok(exit_code(&reports))
        }
        Command::Theta { tau, level } => {
            let params = ThetaParams { tau: parse_tau(&tau)?, level };
            match run_theta(&params, &cfg) {
                Ok(report) => {
                    emit(opts, if opts.text { report.to_text() } else { report.to_json() + "\n" })?;
                    Ok(if report.passed { exit::OK } else { exit::MISMATCH })
                }
                Err(e @ (ThetaError::NotSiegel | ThetaError::NotSymmetric(_) | ThetaError::Shape(_) | ThetaError::OutOfRange { .. })) => {
                    Err(InputError::Invalid(e.to_string()))
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(exit::NUMERIC)
                }
            }
        }
        Command::Export { name } => {
            let entry = find_entry(&name)?;
            emit(opts, serde_json::to_string_pretty(&ManifoldSpec::from_entry(&entry))? + "\n")?;
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::INPUT as u8)
        }
    }
}
