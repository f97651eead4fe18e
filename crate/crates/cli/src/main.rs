//! `season-info`: fit accuracy curves to game logs, summarize them across
//! leagues, and generate synthetic seasons with known strengths.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use season_info::harness::{DEFAULT_REPLICATES, DEFAULT_X_GRID};
use season_info::models::DEFAULT_PENALTY;
use season_info::League;

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(name = "season-info", version, about = "How much does each game reveal about team strength?")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Accuracy-versus-training-fraction curves for one or more seasons of a league.
    Curve(CurveArgs),
    /// Odds ratios, per-game slopes, informativeness ratios and breakpoints from curve files.
    Summary(SummaryArgs),
    /// Generate a synthetic season and its ground truth.
    Synth(SynthArgs),
    /// Check that game logs parse, and print a one-line summary of each.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Training fractions, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_X_GRID.to_vec())]
    pub x_grid: Vec<f64>,
    /// Random splits per training fraction.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ridge penalty for the win/loss model; must be positive.
    #[arg(long, default_value_t = DEFAULT_PENALTY)]
    pub bt_penalty: f64,
    /// Ridge penalty on strengths for the margin model.
    #[arg(long, default_value_t = DEFAULT_PENALTY)]
    pub mov_penalty: f64,
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Game logs in canonical CSV form, one season per file.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub league: League,
    /// Season labels, one per input (default: file stems).
    #[arg(long, value_delimiter = ',')]
    pub season: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write a run manifest (config, input digests, results) here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    /// Curve files written by `curve`; may mix leagues.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output directory for summary.json, table1_odds_ratios.csv and table2_slopes.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub teams: usize,
    #[arg(long)]
    pub games_per_team: usize,
    /// Sd of normally drawn logit-scale strengths.
    #[arg(long, default_value_t = 1.0, conflicts_with = "strengths")]
    pub strength_sd: f64,
    /// Explicit logit-scale strengths, one per team, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub strengths: Option<Vec<f64>>,
    /// Home advantage on the logit scale.
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub home_adv: f64,
    /// Points per logit unit of expected margin.
    #[arg(long, default_value_t = 7.0)]
    pub mov_scale: f64,
    /// Sd of the margin noise in points (default: 1.702 x mov-scale).
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Destination of the season CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Destination of the ground-truth JSON (default: <out stem>.truth.json).
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "OTHER")]
    pub league: League,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Fit(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Fit(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Curve(a) => commands::curve(a),
        Command::Summary(a) => commands::summary(a),
        Command::Synth(a) => commands::synth(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
