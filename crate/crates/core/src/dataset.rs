//! Annotated corpus model and its JSONL form.
//!
//! One JSONL line is one query record: the query text, its retrieval
//! context, and one or more segmented answers with per-sentence
//! faithfulness/correctness labels. Field names mirror the judge prompt's
//! input vocabulary (`query`, `now_time`, `search_result`, `answer_order`)
//! so the same schema serves storage and prompt assembly. Documents are
//! stored as a list; prompt building joins them with a blank line.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bit::Bit;
use crate::segmenter::{self, SegmentKind, SegmentedAnswer};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceLabel {
    pub faithfulness: Bit,
    pub correctness: Bit,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedAnswer {
    pub answer_id: String,
    #[serde(flatten)]
    pub segmented: SegmentedAnswer,
    /// One label per segment, in segment order.
    pub labels: Vec<SentenceLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    pub query: String,
    /// Opaque timestamp string, passed through to prompts untouched.
    pub now_time: String,
    #[serde(rename = "search_result")]
    pub documents: Vec<String>,
    pub answers: Vec<AnnotatedAnswer>,
}

/// The four label combinations a sentence can land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrant {
    FaithfulCorrect,
    FaithfulIncorrect,
    UnfaithfulCorrect,
    UnfaithfulIncorrect,
}

pub fn classify_quadrant(faithfulness: Bit, correctness: Bit) -> Quadrant {
    match (faithfulness.is_one(), correctness.is_one()) {
        (true, true) => Quadrant::FaithfulCorrect,
        (true, false) => Quadrant::FaithfulIncorrect,
        (false, true) => Quadrant::UnfaithfulCorrect,
        (false, false) => Quadrant::UnfaithfulIncorrect,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub queries: usize,
    pub answers: usize,
    pub sentences: usize,
    /// Fraction of sentences labeled correct.
    pub positive_fraction: f64,
    pub negative_fraction: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: invalid JSON: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    SchemaError {
        line: usize,
        field: String,
        message: String,
    },
    #[error("dataset contains no records")]
    EmptyDataset,
}

/// Joins retrieved documents into the single prompt field. A blank line
/// separates consecutive documents; no documents yields the empty string.
pub fn join_documents(documents: &[String]) -> String {
    documents.join("\n\n")
}

pub fn load_dataset(path: &Path) -> Result<Vec<QueryRecord>, DatasetError> {
    let file = File::open(path)?;
    load_dataset_from_reader(BufReader::new(file))
}

pub fn load_dataset_from_reader<R: Read>(reader: R) -> Result<Vec<QueryRecord>, DatasetError> {
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).map_err(|err| DatasetError::ParseError {
                line: line_no,
                message: err.to_string(),
            })?;
        records.push(decode_record(&value, line_no)?);
    }
    if records.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    Ok(records)
}

pub fn save_dataset<W: Write>(records: &[QueryRecord], mut writer: W) -> Result<(), DatasetError> {
    for record in records {
        let line = serde_json::to_string(record).map_err(|err| DatasetError::ParseError {
            line: 0,
            message: err.to_string(),
        })?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn compute_stats(records: &[QueryRecord]) -> Result<DatasetStats, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let mut answers = 0usize;
    let mut sentences = 0usize;
    let mut positive = 0usize;
    for record in records {
        answers += record.answers.len();
        for answer in &record.answers {
            sentences += answer.labels.len();
            positive += answer
                .labels
                .iter()
                .filter(|label| label.correctness.is_one())
                .count();
        }
    }
    let total = sentences as f64;
    Ok(DatasetStats {
        queries: records.len(),
        answers,
        sentences,
        positive_fraction: positive as f64 / total,
        negative_fraction: (sentences - positive) as f64 / total,
    })
}

// ---- validating decoder ----------------------------------------------------

struct FieldCx<'a> {
    line: usize,
    path: &'a str,
}

impl FieldCx<'_> {
    fn err(&self, message: impl Into<String>) -> DatasetError {
        DatasetError::SchemaError {
            line: self.line,
            field: self.path.to_string(),
            message: message.into(),
        }
    }
}

fn get<'v>(obj: &'v Value, line: usize, path: &str, key: &str) -> Result<&'v Value, DatasetError> {
    let full = join_path(path, key);
    obj.get(key).ok_or_else(|| DatasetError::SchemaError {
        line,
        field: full,
        message: "missing field".to_string(),
    })
}

fn join_path(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_str(value: &Value, cx: &FieldCx<'_>) -> Result<String, DatasetError> {
    value
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| cx.err("expected a string"))
}

fn as_array<'v>(value: &'v Value, cx: &FieldCx<'_>) -> Result<&'v Vec<Value>, DatasetError> {
    value.as_array().ok_or_else(|| cx.err("expected an array"))
}

fn as_bit(value: &Value, cx: &FieldCx<'_>) -> Result<Bit, DatasetError> {
    let raw = value
        .as_i64()
        .ok_or_else(|| cx.err("expected integer 0 or 1"))?;
    Bit::try_from(raw).map_err(|err| cx.err(err.to_string()))
}

fn decode_record(value: &Value, line: usize) -> Result<QueryRecord, DatasetError> {
    let root = FieldCx { line, path: "" };
    if !value.is_object() {
        return Err(root.err("expected a JSON object"));
    }

    let query_id = as_str(
        get(value, line, "", "query_id")?,
        &FieldCx { line, path: "query_id" },
    )?;
    let query = as_str(get(value, line, "", "query")?, &FieldCx { line, path: "query" })?;
    let now_time = as_str(
        get(value, line, "", "now_time")?,
        &FieldCx { line, path: "now_time" },
    )?;

    let docs_cx = FieldCx { line, path: "search_result" };
    let documents = as_array(get(value, line, "", "search_result")?, &docs_cx)?
        .iter()
        .enumerate()
        .map(|(i, doc)| {
            let path = format!("search_result[{i}]");
            as_str(doc, &FieldCx { line, path: &path })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let answers_cx = FieldCx { line, path: "answers" };
    let raw_answers = as_array(get(value, line, "", "answers")?, &answers_cx)?;
    if raw_answers.is_empty() {
        return Err(answers_cx.err("a record needs at least one answer"));
    }
    let mut answers = Vec::with_capacity(raw_answers.len());
    for (i, raw) in raw_answers.iter().enumerate() {
        answers.push(decode_answer(raw, line, i)?);
    }
    let mut seen = std::collections::HashSet::new();
    for answer in &answers {
        if !seen.insert(answer.answer_id.as_str()) {
            return Err(answers_cx.err(format!("duplicate answer_id `{}`", answer.answer_id)));
        }
    }

    Ok(QueryRecord {
        query_id,
        query,
        now_time,
        documents,
        answers,
    })
}

fn decode_answer(value: &Value, line: usize, idx: usize) -> Result<AnnotatedAnswer, DatasetError> {
    let base = format!("answers[{idx}]");
    let base_cx = FieldCx { line, path: &base };
    if !value.is_object() {
        return Err(base_cx.err("expected a JSON object"));
    }

    let id_path = format!("{base}.answer_id");
    let answer_id = as_str(
        get(value, line, &base, "answer_id")?,
        &FieldCx { line, path: &id_path },
    )?;

    let segs_path = format!("{base}.segments");
    let segs_cx = FieldCx { line, path: &segs_path };
    let raw_segments = as_array(get(value, line, &base, "segments")?, &segs_cx)?;
    if raw_segments.is_empty() {
        return Err(segs_cx.err("an answer needs at least one segment"));
    }
    let mut segments = Vec::with_capacity(raw_segments.len());
    for (i, raw) in raw_segments.iter().enumerate() {
        segments.push(decode_segment(raw, line, &base, i)?);
    }

    let order_path = format!("{base}.answer_order");
    let order_cx = FieldCx { line, path: &order_path };
    let marked_text = as_str(get(value, line, &base, "answer_order")?, &order_cx)?;
    let marker_count = segmenter::inserted_marker_count(&marked_text);
    if marker_count != segments.len() {
        return Err(order_cx.err(format!(
            "{} markers for {} segments",
            marker_count,
            segments.len()
        )));
    }

    let labels_path = format!("{base}.labels");
    let labels_cx = FieldCx { line, path: &labels_path };
    let raw_labels = as_array(get(value, line, &base, "labels")?, &labels_cx)?;
    if raw_labels.len() != segments.len() {
        return Err(labels_cx.err(format!(
            "{} labels for {} segments",
            raw_labels.len(),
            segments.len()
        )));
    }
    let mut labels = Vec::with_capacity(raw_labels.len());
    for (i, raw) in raw_labels.iter().enumerate() {
        labels.push(decode_label(raw, line, &base, i)?);
    }

    Ok(AnnotatedAnswer {
        answer_id,
        segmented: SegmentedAnswer {
            segments,
            marked_text,
        },
        labels,
    })
}

fn decode_segment(
    value: &Value,
    line: usize,
    base: &str,
    idx: usize,
) -> Result<crate::segmenter::Segment, DatasetError> {
    let path = format!("{base}.segments[{idx}]");
    let cx = FieldCx { line, path: &path };
    if !value.is_object() {
        return Err(cx.err("expected a JSON object"));
    }

    let index_path = format!("{path}.index");
    let index_cx = FieldCx { line, path: &index_path };
    let index = get(value, line, &path, "index")?
        .as_u64()
        .ok_or_else(|| index_cx.err("expected a non-negative integer"))?;
    if index as usize != idx {
        return Err(index_cx.err(format!("expected index {idx}, found {index}")));
    }

    let text_path = format!("{path}.text");
    let text_cx = FieldCx { line, path: &text_path };
    let text = as_str(get(value, line, &path, "text")?, &text_cx)?;
    if text.trim().is_empty() {
        return Err(text_cx.err("segment text is empty after trimming whitespace"));
    }

    let kind_path = format!("{path}.kind");
    let kind_cx = FieldCx { line, path: &kind_path };
    let kind = match as_str(get(value, line, &path, "kind")?, &kind_cx)?.as_str() {
        "plain" => SegmentKind::Plain,
        "heading" => SegmentKind::Heading,
        "list_item" => SegmentKind::ListItem,
        other => {
            return Err(kind_cx.err(format!(
                "unknown kind `{other}` (expected plain, heading, or list_item)"
            )))
        }
    };

    Ok(crate::segmenter::Segment {
        index: idx,
        text,
        kind,
    })
}

fn decode_label(
    value: &Value,
    line: usize,
    base: &str,
    idx: usize,
) -> Result<SentenceLabel, DatasetError> {
    let path = format!("{base}.labels[{idx}]");
    let cx = FieldCx { line, path: &path };
    if !value.is_object() {
        return Err(cx.err("expected a JSON object"));
    }

    let f_path = format!("{path}.faithfulness");
    let faithfulness = as_bit(
        get(value, line, &path, "faithfulness")?,
        &FieldCx { line, path: &f_path },
    )?;
    let c_path = format!("{path}.correctness");
    let correctness = as_bit(
        get(value, line, &path, "correctness")?,
        &FieldCx { line, path: &c_path },
    )?;
    let r_path = format!("{path}.rationale");
    let rationale = as_str(
        get(value, line, &path, "rationale")?,
        &FieldCx { line, path: &r_path },
    )?;

    Ok(SentenceLabel {
        faithfulness,
        correctness,
        rationale,
    })
}
