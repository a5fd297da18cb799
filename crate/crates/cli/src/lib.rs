//! The `cramer` command: every experiment and formula evaluation of
//! `cramer-model` behind one flag vocabulary.
//!
//! Each run prints (or writes to `--output`) a JSON document holding the
//! effective configuration, the computed values and any comparison
//! reports, or a CSV table with `--format csv`. Exit codes: 0 on success,
//! 1 when a report fails its rule, 2 on usage or domain errors.

mod commands;
pub mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::Output;

#[derive(Parser, Debug)]
#[command(name = "cramer", version, about = "Simulation and exact-oracle checks for the Cramér random model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Sample one trajectory and list its jump instants.
    Simulate,
    /// Exact mean m_n and variance B_n.
    Moments,
    /// Exact law of S_n checked against the moments.
    ExactLaw,
    /// Local limit theorem error over the validity window.
    Llt,
    /// Characteristic function and its modulus / phase bounds.
    Charfunc,
    /// Theta series and the divisibility estimate it gives.
    Theta,
    /// Divisibility error against the theta estimate.
    Divisibility,
    /// Law of the fair-coin jump instant Delta_k.
    DeltaLaw,
    /// Probability that S_n (or B_n for the fair coin) is prime.
    PrimeProb,
    /// Quasi-primality frequency against e^{-gamma} / ln zeta.
    Quasiprime,
    /// Prime avoidance by the fair-coin jump instants.
    Avoidance,
    /// Principal Dirichlet eigenvalue lambda(z).
    Eigen,
    /// Probability that the OU process stays in [-z, z] up to time T.
    OuSurvival,
    /// Walk amplitude event against OU survival.
    Amplitude,
    /// Gap statistics of Cramér trajectories.
    Gaps,
    /// Subsequence law-of-iterated-logarithm statistic.
    LilSubseq,
    /// Run the acceptance battery and write a directory of reports.
    Suite,
    /// Re-measure the calibration constants and compare with the frozen file.
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Moments => "moments",
            Command::ExactLaw => "exact-law",
            Command::Llt => "llt",
            Command::Charfunc => "charfunc",
            Command::Theta => "theta",
            Command::Divisibility => "divisibility",
            Command::DeltaLaw => "delta-law",
            Command::PrimeProb => "prime-prob",
            Command::Quasiprime => "quasiprime",
            Command::Avoidance => "avoidance",
            Command::Eigen => "eigen",
            Command::OuSurvival => "ou-survival",
            Command::Amplitude => "amplitude",
            Command::Gaps => "gaps",
            Command::LilSubseq => "lil-subseq",
            Command::Suite => "suite",
            Command::Calibrate => "calibrate",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitoringArg {
    Grid,
    Bridge,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetArg {
    /// Every prime.
    All,
    /// The next prime after each power of two.
    Sparse,
    Empty,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubseqArg {
    All,
    /// 2^(2^j)
    DoubleExp,
}

/// Every knob of a run. Unset values fall back to per-command defaults;
/// the resolved values are echoed into the output.
#[derive(Args, Debug, Clone, Default)]
pub struct RunConfig {
    /// Flat key=value file with the same keys as the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// cramer, cramer_doubled or fair_coin.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<u64>,
    #[arg(long, global = true)]
    pub d: Option<u64>,
    #[arg(long, global = true)]
    pub z: Option<f64>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub b: Option<f64>,
    #[arg(long, global = true)]
    pub zeta: Option<f64>,
    #[arg(long, global = true)]
    pub k: Option<u64>,
    /// Time horizon.
    #[arg(long = "t", global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub replicas: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to $CRAMER_WORKERS or the core count.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (or directory for `suite`); stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Frequency t of the characteristic function.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub freq: Option<f64>,
    /// Bound constant K of a rate check; defaults to the calibrated value.
    #[arg(long = "bound", global = true)]
    pub bound: Option<f64>,
    /// Half-width multiplier of the LLT validity window.
    #[arg(long, global = true)]
    pub c_win: Option<f64>,
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Upper end of an eigenvalue curve starting at --z.
    #[arg(long, global = true)]
    pub z_max: Option<f64>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub monitoring: Option<MonitoringArg>,
    #[arg(long, global = true, value_enum)]
    pub set: Option<SetArg>,
    /// Cube schedule j^3, j <= j_max.
    #[arg(long, global = true)]
    pub j_max: Option<u64>,
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    /// Independent trajectories of path scans.
    #[arg(long, global = true)]
    pub seeds: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub subseq: Option<SubseqArg>,
    /// Block base M of the subsequence normalizer.
    #[arg(long, global = true)]
    pub base: Option<f64>,
    #[arg(long, global = true)]
    pub ou_replicas: Option<u64>,
    /// Criteria of `suite` to run (repeatable); all when absent.
    #[arg(long, global = true)]
    pub only: Vec<u8>,
}

/// Parses `argv` (program name first), applies `--config`, runs the
/// command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(&argv) {
        Ok(c) => c,
        Err(e) => return e,
    };
    match commands::execute(&cli) {
        Ok(out) => match out.emit(&cli.opts) {
            Ok(()) => out.exit_code(),
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let _ = e.print();
    e.exit_code()
}

fn parse(argv: &[OsString]) -> Result<Cli, i32> {
    let first = Cli::try_parse_from(argv).map_err(clap_exit)?;
    let Some(path) = first.opts.config.clone() else {
        return Ok(first);
    };
    let entries = config::load(&path).map_err(|e| {
        eprintln!("error: {e}");
        2
    })?;
    let name = first.command.name();
    let sub_at = argv.iter().position(|a| a.to_str() == Some(name)).unwrap_or(1);
    let merged = config::splice(argv, sub_at, &entries);
    Cli::try_parse_from(&merged).map_err(clap_exit)
}
