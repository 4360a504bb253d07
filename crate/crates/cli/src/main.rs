//! `bandvar` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage, parse and IO errors, 2 for
//! numerical failures such as singular designs or non-convergence.

mod bench;
mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bandvar::forecast::Metric;
use bandvar::selection::{OrderingStrategy, PenaltyConstant};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] bandvar::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bandvar", version, about = "Banded vector autoregressions")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct GlobalArgs {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Record wall-clock start and end times in the manifest.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timestamps: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a banded VAR(1) and a path from it.
    Simulate(SimulateArgs),
    /// Least-squares fit at a given or selected bandwidth.
    Fit(FitArgs),
    /// Bandwidth (and order) selection by BIC.
    Select(SelectArgs),
    /// Sample, banded or thresholded autocovariance.
    Autocov(AutocovArgs),
    /// Point forecasts or post-sample evaluation.
    Forecast(ForecastArgs),
    /// Compare orderings of the series by their BIC totals.
    Order(OrderArgs),
    /// Rerun one of the simulation tables.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Uniform,
    Mixture,
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma {
    Identity,
    Structured,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct BicArgs {
    /// Penalty constant: `loglog` or a non-negative number.
    #[arg(long = "Cn", default_value = "loglog", value_parser = parse_penalty)]
    #[serde(serialize_with = "display_penalty")]
    pub c_n: PenaltyConstant,
    #[arg(long, default_value_t = 1.0)]
    pub penalty_multiplier: f64,
    /// Add k = 0 to the bandwidth grid.
    #[arg(long)]
    pub include_zero: bool,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k0: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub setting: Setting,
    #[arg(long, value_enum, default_value = "identity")]
    pub sigma: Sigma,
    /// Fix the spectral norm of the coefficient matrix.
    #[arg(long)]
    pub target_norm: Option<f64>,
    #[arg(long, default_value_t = bandvar::simulate::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    /// Data CSV; the true model goes to `<stem>.truth.json`.
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Bandwidth; selected by BIC when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Search bound for the selection.
    #[arg(long = "K")]
    pub k_max: Option<usize>,
    #[command(flatten)]
    pub bic: BicArgs,
    /// Centre each series at its mean first.
    #[arg(long)]
    pub demean: bool,
    #[arg(long, default_value = "fit.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct SelectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Bandwidth search bound; `floor(sqrt(n))` capped at `p - 1` by default.
    #[arg(long = "K")]
    pub k_max: Option<usize>,
    /// Also select the order over `1..=L`.
    #[arg(long = "L")]
    pub l_max: Option<usize>,
    #[command(flatten)]
    pub bic: BicArgs,
    /// Also report the whole-model choice.
    #[arg(long)]
    pub joint: bool,
    #[arg(long)]
    pub demean: bool,
    /// Trace JSON; per-row argmins go to `<stem>.argmins.csv`.
    #[arg(long, default_value = "selection.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AutocovMethod {
    Sample,
    Banded,
    Thresholded,
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weights {
    Exponential,
    Normal,
    Ones,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct AutocovArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub lag: usize,
    #[arg(long, value_enum, default_value = "banded")]
    pub method: AutocovMethod,
    /// Fixed banding parameter.
    #[arg(long, conflicts_with = "c")]
    pub r: Option<usize>,
    /// Banding parameter from the rule `round(c log(n / log p))`.
    #[arg(long)]
    pub c: Option<f64>,
    /// Fixed threshold.
    #[arg(long)]
    pub t: Option<f64>,
    /// Bootstrap replicates when tuning is left to the bootstrap.
    #[arg(long, default_value_t = bandvar::autocov::DEFAULT_REPLICATES)]
    pub q: usize,
    #[arg(long, value_enum, default_value = "exponential")]
    pub weights: Weights,
    /// Matrix CSV; metadata goes to `<stem>.json`.
    #[arg(long, default_value = "autocov.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct ForecastArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Model or fit JSON; estimated from the data when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long = "K")]
    pub k_max: Option<usize>,
    #[command(flatten)]
    pub bic: BicArgs,
    #[arg(long)]
    pub demean: bool,
    /// Steps ahead.
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    /// Evaluate on the last `holdout` observations instead of forecasting.
    #[arg(long)]
    pub holdout: Option<usize>,
    /// Refit at every forecast origin.
    #[arg(long)]
    pub refit: bool,
    #[arg(long, default_value = "absolute", value_parser = parse_metric)]
    pub metric: Metric,
    /// Remove period-wise means first.
    #[arg(long)]
    pub period: Option<usize>,
    /// Forecast CSV, or the evaluation report JSON with `--holdout`.
    #[arg(long, default_value = "forecast.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct OrderArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `label,x,y` per series.
    #[arg(long)]
    pub coords: Option<PathBuf>,
    /// Comma-separated: ns, we, nwse, swne, anchor:N.
    #[arg(long, value_delimiter = ',', default_value = "ns,we,nwse,swne", value_parser = parse_strategy)]
    #[serde(serialize_with = "display_list")]
    pub strategy: Vec<OrderingStrategy>,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long = "K")]
    pub k_max: Option<usize>,
    #[command(flatten)]
    pub bic: BicArgs,
    #[arg(long)]
    pub demean: bool,
    #[arg(long, default_value = "orderings.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    T1,
    T2,
    T3,
    T4,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub table: Table,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// True bandwidth; 1 for t1-t3 and 3 for t4 by default.
    #[arg(long)]
    pub k0: Option<usize>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub setting: Setting,
    #[arg(long = "K", default_value_t = bandvar::experiments::STUDY_MAX_BANDWIDTH)]
    pub k_max: usize,
    /// Bootstrap replicates (t4).
    #[arg(long, default_value_t = bandvar::autocov::DEFAULT_REPLICATES)]
    pub q: usize,
    /// Spectral norm of the coefficients (t4).
    #[arg(long, default_value_t = 0.8)]
    pub target_norm: f64,
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
}

fn parse_penalty(s: &str) -> Result<PenaltyConstant, String> {
    s.parse().map_err(|e: bandvar::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: bandvar::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<OrderingStrategy, String> {
    s.parse().map_err(|e: bandvar::Error| e.to_string())
}

fn display_penalty<S: serde::Serializer>(c: &PenaltyConstant, s: S) -> Result<S::Ok, S::Error> {
    match c {
        PenaltyConstant::LogLog => s.serialize_str("loglog"),
        PenaltyConstant::Fixed(v) => s.serialize_f64(*v),
    }
}

fn display_list<S: serde::Serializer>(v: &[OrderingStrategy], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Simulate(a) => commands::simulate(g, a),
        Command::Fit(a) => commands::fit(g, a),
        Command::Select(a) => commands::select(g, a),
        Command::Autocov(a) => commands::autocov(g, a),
        Command::Forecast(a) => commands::forecast(g, a),
        Command::Order(a) => commands::order(g, a),
        Command::Bench(a) => bench::run(g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
