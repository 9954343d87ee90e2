//! `validate-dataset` and `stats`: dataset linting and label statistics.

use std::path::PathBuf;

use frc_core::dataset::{compute_stats, load_dataset};

use crate::config::{self, Overlay};
use crate::ioutil;
use crate::{CmdResult, Failure};

#[derive(clap::Args)]
pub struct ValidateArgs {
    /// Dataset JSONL file
    path: PathBuf,
}

pub fn run_validate(args: &ValidateArgs) -> CmdResult {
    let records = load_dataset(&args.path)
        .map_err(|e| Failure::data(format!("{}: {e}", args.path.display())))?;
    let stats = compute_stats(&records)
        .map_err(|e| Failure::data(format!("{}: {e}", args.path.display())))?;
    println!(
        "dataset ok: {} queries, {} answers, {} sentences",
        stats.queries, stats.answers, stats.sentences
    );
    Ok(())
}

#[derive(clap::Args)]
pub struct StatsArgs {
    /// Dataset JSONL file
    path: PathBuf,
    /// Write the statistics JSON here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn run_stats(args: &StatsArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &Overlay::default())?;
    let records = load_dataset(&args.path)
        .map_err(|e| Failure::data(format!("{}: {e}", args.path.display())))?;
    let stats = compute_stats(&records)
        .map_err(|e| Failure::data(format!("{}: {e}", args.path.display())))?;
    let mut body = serde_json::to_string_pretty(&stats)
        .map_err(|e| Failure::data(format!("serialize stats: {e}")))?;
    body.push('\n');
    let summary = format!(
        "{} queries, {} answers, {} sentences, {:.4} labeled correct",
        stats.queries, stats.answers, stats.sentences, stats.positive_fraction
    );
    ioutil::emit(
        args.out.as_deref(),
        &body,
        "stats",
        &settings,
        &[&args.path],
        &summary,
    )
}
