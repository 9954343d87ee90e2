//! `score` and `report`: evaluate predictions against a dataset and render
//! the resulting report as an aligned table.

use std::path::PathBuf;

use frc_core::dataset::load_dataset;
use frc_core::metrics::{compile_report, render_table, EvalReport, PredictionRecord};

use crate::config::{self, Overlay};
use crate::ioutil;
use crate::{CmdResult, Failure};

#[derive(clap::Args)]
pub struct ScoreArgs {
    /// Annotated dataset JSONL file
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,
    /// Predictions JSONL file, one record per query
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    /// Write the report JSON here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Print the report as an aligned table instead of JSON
    #[arg(long)]
    table: bool,
}

pub fn run_score(args: &ScoreArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &Overlay::default())?;
    let records = load_dataset(&args.dataset)
        .map_err(|e| Failure::data(format!("{}: {e}", args.dataset.display())))?;
    let predictions = load_predictions(&args.pred)?;
    let report = compile_report(&records, &predictions)
        .map_err(|e| Failure::data(e.to_string()))?;

    let mut body = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::data(format!("serialize report: {e}")))?;
    body.push('\n');
    let summary = format!(
        "scored {} sentences: F1(incorrect) {:.4}, detection {:.4}, NDCG@4 {:.4}",
        report.sentences, report.f1_incorrect, report.detection_rate, report.ndcg_at_4
    );

    if args.table {
        // Human mode: the table replaces the JSON on stdout; the JSON still
        // lands in --out when given.
        if let Some(out) = args.out.as_deref() {
            ioutil::write_atomic(out, body.as_bytes())?;
            crate::manifest::write_beside(out, "score", &settings, &[&args.dataset, &args.pred])?;
        }
        print!("{}", render_table(&report));
        println!("{summary}");
        if let Some(out) = args.out.as_deref() {
            println!("wrote {}", out.display());
        }
        return Ok(());
    }

    ioutil::emit(
        args.out.as_deref(),
        &body,
        "score",
        &settings,
        &[&args.dataset, &args.pred],
        &summary,
    )
}

fn load_predictions(path: &PathBuf) -> Result<Vec<PredictionRecord>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let mut predictions = Vec::new();
    for (line_no, line) in ioutil::jsonl_lines(&text) {
        let record: PredictionRecord = serde_json::from_str(line).map_err(|e| {
            Failure::data(format!("{}:{line_no}: invalid prediction: {e}", path.display()))
        })?;
        predictions.push(record);
    }
    if predictions.is_empty() {
        return Err(Failure::data(format!(
            "{}: no prediction records",
            path.display()
        )));
    }
    Ok(predictions)
}

#[derive(clap::Args)]
pub struct ReportArgs {
    /// Report JSON produced by `score`
    path: PathBuf,
}

pub fn run_report(args: &ReportArgs, _file_cfg: Option<&Overlay>) -> CmdResult {
    let text = std::fs::read_to_string(&args.path)
        .map_err(|e| Failure::data(format!("{}: {e}", args.path.display())))?;
    let report: EvalReport = serde_json::from_str(&text)
        .map_err(|e| Failure::data(format!("{}: invalid report: {e}", args.path.display())))?;
    print!("{}", render_table(&report));
    Ok(())
}
