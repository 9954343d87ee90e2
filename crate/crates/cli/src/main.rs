//! `frc`: one binary over the whole pipeline. Answer text flows through
//! `segment` into dataset records, model output through `parse-verdicts` and
//! `reward` into per-sentence rewards, rewards through `advantages` into
//! trainer-ready credit, and predictions through `score`/`report` into
//! evaluation tables; `judge-*` and `simulate` cover the external judge and
//! the shaping simulator. Stages exchange JSONL files so any step can be
//! inspected or replaced.
//!
//! Configuration is layered: built-in defaults, then the TOML file named by
//! `--config` (or `FRC_CONFIG`), then command-line flags, then `FRC_*`
//! environment variables, strongest last. Machine-readable output goes to
//! `--out` (with a `.manifest.json` sidecar) or to stdout when `--out` is
//! omitted. Exit codes: 0 success, 1 data errors, 2 usage errors.

mod advantages;
mod config;
mod dataset;
mod ioutil;
mod judge;
mod manifest;
mod mock;
mod reward;
mod score;
mod segment;
mod simulate;
mod verdicts;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// A command failure with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad invocation: unknown values, missing required pieces, bad config.
    Usage(String),
    /// Bad data: unreadable files, malformed rows, judge failures.
    Data(String),
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure::Usage(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure::Data(message.into())
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::Data(err.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "frc",
    version,
    about = "Sentence-level reward modeling pipeline: segmentation, verdicts, shaped rewards, group credit, evaluation, judging, simulation"
)]
struct Cli {
    /// TOML config file; FRC_CONFIG works too. Flags and FRC_* variables override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split answer text into marked sentences
    Segment(segment::SegmentArgs),
    /// Check a dataset JSONL file and report the first problem
    ValidateDataset(dataset::ValidateArgs),
    /// Summarize dataset label statistics
    Stats(dataset::StatsArgs),
    /// Parse raw model output into verdict lists
    ParseVerdicts(verdicts::ParseArgs),
    /// Score verdicts against gold labels, or preference rows for the policy
    Reward(reward::RewardArgs),
    /// Normalize rollout groups into token-level credit for a trainer
    Advantages(advantages::AdvantagesArgs),
    /// Evaluate predictions against a dataset
    Score(score::ScoreArgs),
    /// Render an evaluation report as an aligned table
    Report(score::ReportArgs),
    /// Grade each dataset answer for factual errors via a judge
    JudgeCorrectness(judge::CorrectnessArgs),
    /// Run position-debiased usefulness duels via a judge
    JudgeUsefulness(judge::UsefulnessArgs),
    /// Train the synthetic label predictor under a shaping variant
    Simulate(simulate::SimulateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let file_cfg = config::load_file(cli.config.as_deref())?;
    let file_cfg = file_cfg.as_ref();
    match &cli.command {
        Command::Segment(args) => segment::run(args, file_cfg),
        Command::ValidateDataset(args) => dataset::run_validate(args),
        Command::Stats(args) => dataset::run_stats(args, file_cfg),
        Command::ParseVerdicts(args) => verdicts::run(args, file_cfg),
        Command::Reward(args) => reward::run(args, file_cfg),
        Command::Advantages(args) => advantages::run(args, file_cfg),
        Command::Score(args) => score::run_score(args, file_cfg),
        Command::Report(args) => score::run_report(args, file_cfg),
        Command::JudgeCorrectness(args) => judge::run_correctness(args, file_cfg),
        Command::JudgeUsefulness(args) => judge::run_usefulness(args, file_cfg),
        Command::Simulate(args) => simulate::run(args, file_cfg),
    }
}
