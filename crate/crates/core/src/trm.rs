//! Prompt construction and verdict parsing for the sentence-level reward model.
//!
//! Two prompt templates ship as text resources: the evaluation prompt that asks
//! the model for one faithfulness/reason/correctness triple per marked sentence,
//! and the answering prompt used to generate candidate answers in the first
//! place. Both builders append the filled input object as pretty-printed JSON
//! after the template text, so the template bytes themselves are never touched.
//!
//! Parsing goes the other way: model output is prose-tolerant (code fences,
//! leading chatter), so we scan for the first position where a valid JSON array
//! can be deserialized and validate the rest strictly afterwards.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bit::Bit;
use crate::dataset::{join_documents, QueryRecord};
use crate::segmenter::{render_marked, SegmentedAnswer};

/// Template asking the reward model for per-sentence verdicts.
pub const TRM_EVAL_TEMPLATE: &str = include_str!("../resources/trm_eval_prompt.txt");
/// Template instructing the policy model to answer from retrieved documents.
pub const POLICY_TEMPLATE: &str = include_str!("../resources/policy_prompt.txt");

/// One per-sentence verdict: the faithfulness judgment, the reasoning step
/// that connects it to correctness, and the correctness judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrmVerdict {
    pub faithfulness: Bit,
    pub reason: String,
    pub correctness: Bit,
}

/// Ordered verdicts plus the raw model output they were parsed from.
///
/// Verdict order matches the `[Sentence i]` order of the evaluated answer;
/// `source_text` is retained verbatim for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictList {
    pub verdicts: Vec<TrmVerdict>,
    pub source_text: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerdictError {
    #[error("no JSON array found in model output")]
    NoJsonArray,
    #[error("verdict list has {got} entries, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("verdict {index}: missing or out-of-domain field {field:?}")]
    DomainError { index: usize, field: &'static str },
}

#[derive(Serialize)]
struct TrmPromptInput<'a> {
    query: &'a str,
    now_time: &'a str,
    search_result: String,
    answer_order: String,
}

#[derive(Serialize)]
struct PolicyPromptInput<'a> {
    query: &'a str,
    search_result: String,
}

fn compose(template: &str, filled: &str) -> String {
    let head = template.trim_end_matches('\n');
    let mut prompt = String::with_capacity(head.len() + filled.len() + 2);
    prompt.push_str(head);
    prompt.push('\n');
    prompt.push_str(filled);
    prompt.push('\n');
    prompt
}

/// Build the evaluation prompt for one answer of `record`.
///
/// The caller is responsible for passing an answer that actually belongs to
/// the record; nothing here can check that. The `answer_order` field is
/// re-rendered from the segments rather than trusted from storage.
pub fn build_trm_prompt(record: &QueryRecord, answer: &SegmentedAnswer) -> String {
    let input = TrmPromptInput {
        query: &record.query,
        now_time: &record.now_time,
        search_result: join_documents(&record.documents),
        answer_order: render_marked(answer),
    };
    let filled = serde_json::to_string_pretty(&input).expect("prompt input is plain data");
    compose(TRM_EVAL_TEMPLATE, &filled)
}

/// Build the answering prompt for `record`.
pub fn build_policy_prompt(record: &QueryRecord) -> String {
    let input = PolicyPromptInput {
        query: &record.query,
        search_result: join_documents(&record.documents),
    };
    let filled = serde_json::to_string_pretty(&input).expect("prompt input is plain data");
    compose(POLICY_TEMPLATE, &filled)
}

/// Key used by the evaluation prompt for the reasoning field.
const REASON_KEY: &str = "Correctness Reason";
/// Alternate reasoning key observed in real model transcripts.
const REASON_KEY_ALT: &str = "Reason for Correctness Score";
const FAITHFULNESS_KEY: &str = "Faithfulness Score";
const CORRECTNESS_KEY: &str = "Correctness Score";

/// Parse a model's raw output into verdicts, expecting exactly
/// `expected_count` of them.
///
/// The first substring that deserializes as a JSON array wins; anything before
/// or after it (prose, code fences) is ignored. Scores are coerced leniently:
/// integers 0/1, floats 0.0/1.0, and strings "0"/"1" (after trimming) all
/// count. The reason is read from either known key spelling. A wrong-length
/// list is rejected outright rather than truncated or padded, because silently
/// misaligned verdicts would corrupt every downstream reward.
pub fn parse_verdicts(model_output: &str, expected_count: usize) -> Result<VerdictList, VerdictError> {
    let items = extract_first_array(model_output).ok_or(VerdictError::NoJsonArray)?;
    if items.len() != expected_count {
        return Err(VerdictError::LengthMismatch {
            got: items.len(),
            expected: expected_count,
        });
    }
    let mut verdicts = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let object = item.as_object().ok_or(VerdictError::DomainError {
            index,
            field: "verdict object",
        })?;
        let faithfulness = coerce_bit(object.get(FAITHFULNESS_KEY)).ok_or(VerdictError::DomainError {
            index,
            field: FAITHFULNESS_KEY,
        })?;
        let correctness = coerce_bit(object.get(CORRECTNESS_KEY)).ok_or(VerdictError::DomainError {
            index,
            field: CORRECTNESS_KEY,
        })?;
        let reason = object
            .get(REASON_KEY)
            .or_else(|| object.get(REASON_KEY_ALT))
            .map(reason_text)
            .unwrap_or_default();
        verdicts.push(TrmVerdict {
            faithfulness,
            reason,
            correctness,
        });
    }
    Ok(VerdictList {
        verdicts,
        source_text: model_output.to_string(),
    })
}

/// Render verdicts back into the canonical output shape of the evaluation
/// prompt (its key spelling, its key order).
pub fn serialize_verdicts(verdicts: &[TrmVerdict]) -> String {
    #[derive(Serialize)]
    struct CanonicalVerdict<'a> {
        #[serde(rename = "Faithfulness Score")]
        faithfulness: Bit,
        #[serde(rename = "Correctness Reason")]
        reason: &'a str,
        #[serde(rename = "Correctness Score")]
        correctness: Bit,
    }
    let canonical: Vec<CanonicalVerdict<'_>> = verdicts
        .iter()
        .map(|v| CanonicalVerdict {
            faithfulness: v.faithfulness,
            reason: &v.reason,
            correctness: v.correctness,
        })
        .collect();
    serde_json::to_string_pretty(&canonical).expect("verdicts are plain data")
}

/// Find the first offset where a JSON array deserializes, and return its items.
fn extract_first_array(text: &str) -> Option<Vec<Value>> {
    for (pos, _) in text.match_indices('[') {
        let mut stream = serde_json::Deserializer::from_str(&text[pos..]).into_iter::<Value>();
        if let Some(Ok(Value::Array(items))) = stream.next() {
            return Some(items);
        }
    }
    None
}

fn coerce_bit(value: Option<&Value>) -> Option<Bit> {
    match value? {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Bit::try_from(i).ok()
            } else {
                match n.as_f64() {
                    Some(0.0) => Some(Bit::ZERO),
                    Some(1.0) => Some(Bit::ONE),
                    _ => None,
                }
            }
        }
        Value::String(s) => match s.trim() {
            "0" => Some(Bit::ZERO),
            "1" => Some(Bit::ONE),
            _ => None,
        },
        _ => None,
    }
}

fn reason_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
