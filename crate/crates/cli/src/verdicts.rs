//! `parse-verdicts`: turn raw model output into structured verdict lists.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use frc_core::trm::{parse_verdicts, TrmVerdict};

use crate::config::{self, Overlay};
use crate::ioutil;
use crate::{CmdResult, Failure};

#[derive(clap::Args)]
pub struct ParseArgs {
    /// JSONL input rows {id?, output, expected_count}; stdin when omitted
    input: Option<PathBuf>,
    /// Write parsed rows here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct InputRow {
    #[serde(default)]
    id: Option<Value>,
    /// Raw reward-model completion text.
    output: String,
    /// How many sentences the graded answer has.
    expected_count: usize,
}

#[derive(Serialize)]
struct OutputRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdicts: Option<Vec<TrmVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn run(args: &ParseArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &Overlay::default())?;
    let text = ioutil::read_input(args.input.as_deref())?;

    let mut rows = Vec::new();
    let mut failed = 0usize;
    for (line_no, line) in ioutil::jsonl_lines(&text) {
        let input: InputRow = serde_json::from_str(line)
            .map_err(|e| Failure::data(format!("line {line_no}: invalid row: {e}")))?;
        let row = match parse_verdicts(&input.output, input.expected_count) {
            Ok(list) => OutputRow {
                id: input.id,
                verdicts: Some(list.verdicts),
                error: None,
            },
            Err(err) => {
                failed += 1;
                OutputRow {
                    id: input.id,
                    verdicts: None,
                    error: Some(err.to_string()),
                }
            }
        };
        rows.push(
            serde_json::to_string(&row)
                .map_err(|e| Failure::data(format!("serialize row: {e}")))?,
        );
    }
    if rows.is_empty() {
        return Err(Failure::data("input holds no rows"));
    }

    let body = ioutil::to_jsonl(&rows);
    let inputs: Vec<&std::path::Path> = args.input.iter().map(PathBuf::as_path).collect();
    let summary = format!("parsed {} of {} rows", rows.len() - failed, rows.len());
    ioutil::emit(
        args.out.as_deref(),
        &body,
        "parse-verdicts",
        &settings,
        &inputs,
        &summary,
    )?;
    if failed > 0 {
        return Err(Failure::data(format!(
            "{failed} of {} rows failed to parse",
            rows.len()
        )));
    }
    Ok(())
}
