//! `qlimit`: exact q-distributions, their Stieltjes-Wigert approximations and
//! convergence studies from the command line.
//!
//! Exit status: 0 on success, 1 when the library rejects the request (domain,
//! convergence, support or size errors), 2 on usage errors.

mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "qlimit",
    version,
    about = "q-binomial, q-multinomial and Heine laws and their limits"
)]
struct Cli {
    /// Output format; CSV carries the records only.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact probability function values.
    Pmf(PmfArgs),
    /// Mean and variance of the deformed variable [X]_{1/q}.
    Moments(MomentsArgs),
    /// Stieltjes-Wigert approximation next to the exact value.
    Approx(ApproxArgs),
    /// Seeded draws from a q-multinomial law.
    Sample(SampleArgs),
    /// Error sweeps: local limit, discrete limit or multiple Heine.
    Converge(ConvergeArgs),
    /// Ratio of the q-factorial to its Stirling-type formula.
    Stirling(StirlingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Qbinomial,
    Qmultinomial,
    Heine,
    MultipleHeine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxDist {
    Qbinomial,
    Qmultinomial,
    MultipleHeine,
    StieltjesWigert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    /// Every coordinate standardized the same way, with the 1/q shift.
    #[default]
    Standard,
    /// The literal printed variant (two-category or multiple Heine only).
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Limit,
    Discrete,
    Heine,
}

/// Distribution parameters shared by several commands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Params {
    /// Base q in (0, 1).
    #[arg(long)]
    pub q: f64,
    /// Number of trials.
    #[arg(long)]
    pub n: Option<usize>,
    /// q-binomial parameter.
    #[arg(long)]
    pub theta: Option<f64>,
    /// q-multinomial parameters, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub thetas: Vec<f64>,
    /// Exponents with theta_j = q^(-alpha_j n), instead of --theta/--thetas.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub alphas: Vec<f64>,
    /// Heine rate.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Multiple Heine rates, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lambdas: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PmfArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    #[command(flatten)]
    pub params: Params,
    /// Univariate outcome.
    #[arg(long)]
    pub x: Option<usize>,
    /// Multivariate outcome, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub xs: Vec<usize>,
    /// Every outcome of the support (Heine: up to a tail bound of 1e-12).
    #[arg(long)]
    pub all: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MomentsArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    #[command(flatten)]
    pub params: Params,
    /// 1-based coordinate for q-multinomial conditional moments.
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// Counts of coordinates 1..j-1 to condition on.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub prefix: Vec<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ApproxArgs {
    #[arg(long, value_enum)]
    pub dist: ApproxDist,
    #[command(flatten)]
    pub params: Params,
    #[arg(long)]
    pub x: Option<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub xs: Vec<usize>,
    /// Stieltjes-Wigert density arguments, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub w: Vec<f64>,
    /// Every outcome in the central region (exact pmf >= fraction * max).
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = qlimit_core::analysis::DEFAULT_CENTRAL_FRACTION)]
    pub central_fraction: f64,
    #[arg(long, value_enum, default_value_t = FormArg::Standard)]
    pub form: FormArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub thetas: Vec<f64>,
    #[arg(long)]
    pub count: usize,
    /// Required; there is no time-based default.
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConvergeArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub q: f64,
    /// Trial counts, strictly increasing (limit and discrete modes).
    #[arg(long = "n", value_delimiter = ',', num_args = 1..)]
    pub n_values: Vec<usize>,
    /// Limit mode: theta_j = q^(-alpha_j n).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub alphas: Vec<f64>,
    /// Discrete mode: fixed parameters.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub thetas: Vec<f64>,
    /// Discrete mode: grid bound per coordinate.
    #[arg(long, default_value_t = 8)]
    pub x_max: usize,
    /// Heine mode: one rate vector per occurrence, e.g. --lambdas 50,50 --lambdas 200,200.
    #[arg(long, value_parser = parse_rate_set)]
    pub lambdas: Vec<RateSet>,
    #[arg(long, default_value_t = qlimit_core::analysis::DEFAULT_CENTRAL_FRACTION)]
    pub central_fraction: f64,
    #[arg(long, value_enum, default_value_t = FormArg::Standard)]
    pub form: FormArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StirlingArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub q: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub n: Vec<usize>,
}

/// One comma-separated rate vector of the Heine sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RateSet(pub Vec<f64>);

fn parse_rate_set(s: &str) -> Result<RateSet, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()
        .map(RateSet)
}

pub enum Failure {
    Usage(String),
    Library(qlimit_core::Error),
}

impl From<qlimit_core::Error> for Failure {
    fn from(e: qlimit_core::Error) -> Self {
        Failure::Library(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, result) = match &cli.command {
        Command::Pmf(a) => ("pmf", commands::pmf(a)),
        Command::Moments(a) => ("moments", commands::moments(a)),
        Command::Approx(a) => ("approx", commands::approx(a)),
        Command::Sample(a) => ("sample", commands::sample(a)),
        Command::Converge(a) => ("converge", commands::converge(a)),
        Command::Stirling(a) => ("stirling", commands::stirling(a)),
    };
    let out = match result {
        Ok(out) => out,
        Err(Failure::Usage(msg)) => {
            use clap::CommandFactory;
            Cli::command()
                .error(clap::error::ErrorKind::ArgumentConflict, msg)
                .exit();
        }
        Err(Failure::Library(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let written = match cli.format {
        Format::Json => output::write_json(&mut lock, name, &out).map_err(|e| e.to_string()),
        Format::Csv => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            output::write_csv(&mut lock, &out).map_err(|e| e.to_string())
        }
    };
    match written.and_then(|_| lock.flush().map_err(|e| e.to_string())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(1)
        }
    }
}
