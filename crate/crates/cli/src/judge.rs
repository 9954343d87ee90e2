//! `judge-correctness` and `judge-usefulness`: drive the external judge, or
//! one of the offline mocks, over a dataset or a duel list.

use std::path::{Path, PathBuf};

use serde::Serialize;

use frc_core::dataset::load_dataset;
use frc_core::judge::{CorrectnessVerdict, DuelRequest, HttpTransport, JudgeGateway};

use crate::config::{self, Overlay, Settings};
use crate::ioutil;
use crate::{mock, CmdResult, Failure};

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CorrectnessMock {
    /// Finds no errors in anything.
    Perfect,
    /// Reproduces the dataset's gold labels.
    Gold,
    /// Replays responses from the --script file.
    Script,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum UsefulnessMock {
    /// Always prefers Answer 1; the debiased duel must tie every pair.
    First,
    /// Prefers the longer answer regardless of position.
    Longer,
    /// Replays responses from the --script file.
    Script,
}

#[derive(clap::Args)]
pub struct CorrectnessArgs {
    /// Annotated dataset JSONL file
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,
    /// Write grading rows here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Run against an offline mock instead of the configured endpoint
    #[arg(long, value_enum)]
    mock: Option<CorrectnessMock>,
    /// JSONL file of scripted judge replies (with --mock script)
    #[arg(long, value_name = "FILE")]
    script: Option<PathBuf>,
    /// Free-text hints appended to every grading prompt
    #[arg(long)]
    hints: Option<String>,
}

#[derive(Serialize)]
struct GradeRow<'a> {
    query_id: &'a str,
    answer_id: &'a str,
    #[serde(flatten)]
    verdict: Option<CorrectnessVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn run_correctness(args: &CorrectnessArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &Overlay::default())?;
    let records = load_dataset(&args.dataset)
        .map_err(|e| Failure::data(format!("{}: {e}", args.dataset.display())))?;

    let gateway = match args.mock {
        Some(CorrectnessMock::Perfect) => JudgeGateway::direct(mock::perfect_correctness()),
        Some(CorrectnessMock::Gold) => JudgeGateway::direct(mock::gold_correctness(&records)),
        Some(CorrectnessMock::Script) => {
            let path = script_path(args.script.as_deref())?;
            JudgeGateway::direct(mock::scripted_from_file(path)?)
        }
        None => live_gateway(&settings)?,
    };

    let mut rows = Vec::new();
    let mut failed = 0usize;
    let mut ratio_sum = 0.0f64;
    let mut graded = 0usize;
    for record in &records {
        for answer in &record.answers {
            let answer_text: String = answer
                .segmented
                .segments
                .iter()
                .map(|s| s.text.as_str())
                .collect();
            let row = match gateway.judge_correctness(record, &answer_text, args.hints.as_deref())
            {
                Ok(verdict) => {
                    graded += 1;
                    ratio_sum += verdict.error_ratio;
                    GradeRow {
                        query_id: &record.query_id,
                        answer_id: &answer.answer_id,
                        verdict: Some(verdict),
                        error: None,
                    }
                }
                Err(err) => {
                    failed += 1;
                    GradeRow {
                        query_id: &record.query_id,
                        answer_id: &answer.answer_id,
                        verdict: None,
                        error: Some(err.to_string()),
                    }
                }
            };
            rows.push(
                serde_json::to_string(&row)
                    .map_err(|e| Failure::data(format!("serialize row: {e}")))?,
            );
        }
    }

    let body = ioutil::to_jsonl(&rows);
    let mut inputs: Vec<&Path> = vec![&args.dataset];
    if let Some(script) = args.script.as_deref() {
        inputs.push(script);
    }
    let mean_ratio = if graded > 0 { ratio_sum / graded as f64 } else { 0.0 };
    let summary = format!(
        "graded {graded} answers ({failed} failed), mean error ratio {mean_ratio:.4}"
    );
    ioutil::emit(args.out.as_deref(), &body, "judge-correctness", &settings, &inputs, &summary)?;
    if failed > 0 {
        return Err(Failure::data(format!("{failed} answers failed to grade")));
    }
    Ok(())
}

#[derive(clap::Args)]
pub struct UsefulnessArgs {
    /// JSONL duel requests {query_id, question, references, anchor, candidate}; stdin when omitted
    input: Option<PathBuf>,
    /// Write duel reports here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Run against an offline mock instead of the configured endpoint
    #[arg(long, value_enum)]
    mock: Option<UsefulnessMock>,
    /// JSONL file of scripted judge replies (with --mock script)
    #[arg(long, value_name = "FILE")]
    script: Option<PathBuf>,
}

pub fn run_usefulness(args: &UsefulnessArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &Overlay::default())?;
    let gateway = match args.mock {
        Some(UsefulnessMock::First) => JudgeGateway::direct(mock::always_first()),
        Some(UsefulnessMock::Longer) => JudgeGateway::direct(mock::prefer_longer()),
        Some(UsefulnessMock::Script) => {
            let path = script_path(args.script.as_deref())?;
            JudgeGateway::direct(mock::scripted_from_file(path)?)
        }
        None => live_gateway(&settings)?,
    };

    let text = ioutil::read_input(args.input.as_deref())?;
    let mut requests = Vec::new();
    for (line_no, line) in ioutil::jsonl_lines(&text) {
        let request: DuelRequest = serde_json::from_str(line)
            .map_err(|e| Failure::data(format!("line {line_no}: invalid duel request: {e}")))?;
        requests.push(request);
    }
    if requests.is_empty() {
        return Err(Failure::data("input holds no duel requests"));
    }

    let (reports, tally) = gateway.run_usefulness_suite(&requests);
    let mut rows = Vec::with_capacity(reports.len());
    for report in &reports {
        rows.push(
            serde_json::to_string(report)
                .map_err(|e| Failure::data(format!("serialize report: {e}")))?,
        );
    }

    let body = ioutil::to_jsonl(&rows);
    let inputs: Vec<&Path> = args
        .input
        .iter()
        .map(PathBuf::as_path)
        .chain(args.script.as_deref())
        .collect();
    let summary = format!(
        "win {}, lose {}, tie {}, failed {}",
        tally.win, tally.lose, tally.tie, tally.failed
    );
    ioutil::emit(args.out.as_deref(), &body, "judge-usefulness", &settings, &inputs, &summary)?;
    if tally.failed > 0 {
        return Err(Failure::data(format!("{} duels failed", tally.failed)));
    }
    Ok(())
}

fn script_path(path: Option<&Path>) -> Result<&Path, Failure> {
    path.ok_or_else(|| Failure::usage("--mock script needs --script FILE"))
}

fn live_gateway(settings: &Settings) -> Result<JudgeGateway, Failure> {
    if settings.judge.base_url.is_empty() {
        return Err(Failure::usage(
            "no judge endpoint configured; set [judge].base_url or pass --mock",
        ));
    }
    let transport = HttpTransport::new(&settings.judge)
        .map_err(|e| Failure::data(format!("judge endpoint: {e}")))?;
    Ok(JudgeGateway::new(Box::new(transport), &settings.judge))
}
