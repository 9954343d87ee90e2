//! `segment`: split answer text into marked sentences.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use frc_core::segmenter::{segment, Segment};

use crate::config::{self, Overlay};
use crate::ioutil;
use crate::{CmdResult, Failure};

#[derive(clap::Args)]
pub struct SegmentArgs {
    /// JSONL input (string rows or objects carrying the text field); stdin when omitted
    input: Option<PathBuf>,
    /// Write segmented rows here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Field holding the answer text in object rows
    #[arg(long, default_value = "text")]
    field: String,
    /// Treat the whole input as a single answer text instead of JSONL
    #[arg(long)]
    raw: bool,
}

#[derive(Serialize)]
struct SegmentRow<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a Value>,
    segments: Vec<Segment>,
    marked_text: String,
}

pub fn run(args: &SegmentArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &Overlay::default())?;
    let text = ioutil::read_input(args.input.as_deref())?;

    let mut rows = Vec::new();
    let mut sentences = 0usize;
    if args.raw {
        let segmented =
            segment(&text).map_err(|e| Failure::data(format!("input text: {e}")))?;
        sentences += segmented.segments.len();
        rows.push(render_row(None, segmented)?);
    } else {
        for (line_no, line) in ioutil::jsonl_lines(&text) {
            let value: Value = serde_json::from_str(line)
                .map_err(|e| Failure::data(format!("line {line_no}: invalid JSON: {e}")))?;
            let (id, answer_text) = match &value {
                Value::String(s) => (None, s.as_str()),
                Value::Object(map) => {
                    let answer = map
                        .get(&args.field)
                        .and_then(Value::as_str)
                        .ok_or_else(|| {
                            Failure::data(format!(
                                "line {line_no}: no string field `{}`",
                                args.field
                            ))
                        })?;
                    (map.get("id"), answer)
                }
                _ => {
                    return Err(Failure::data(format!(
                        "line {line_no}: expected a JSON string or object"
                    )))
                }
            };
            let segmented = segment(answer_text)
                .map_err(|e| Failure::data(format!("line {line_no}: {e}")))?;
            sentences += segmented.segments.len();
            rows.push(render_row(id, segmented)?);
        }
        if rows.is_empty() {
            return Err(Failure::data("input holds no rows"));
        }
    }

    let body = ioutil::to_jsonl(&rows);
    let inputs: Vec<&std::path::Path> = args.input.iter().map(PathBuf::as_path).collect();
    let summary = format!("segmented {} answers into {sentences} sentences", rows.len());
    ioutil::emit(
        args.out.as_deref(),
        &body,
        "segment",
        &settings,
        &inputs,
        &summary,
    )
}

fn render_row(
    id: Option<&Value>,
    segmented: frc_core::segmenter::SegmentedAnswer,
) -> Result<String, Failure> {
    let row = SegmentRow {
        id,
        marked_text: segmented.marked_text,
        segments: segmented.segments,
    };
    serde_json::to_string(&row).map_err(|e| Failure::data(format!("serialize row: {e}")))
}
