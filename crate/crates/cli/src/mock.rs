//! Offline judge stand-ins. Each builder returns a boxed transport that the
//! gateway drives exactly like a live endpoint, so every judge subcommand can
//! run without network access.

use frc_core::dataset::QueryRecord;
use frc_core::judge::{ChatTransport, FnTransport, ScriptedTransport, TransportFailure};

use crate::Failure;

/// Judge that finds no errors in anything.
pub fn perfect_correctness() -> Box<dyn ChatTransport> {
    Box::new(ScriptedTransport::cycle(vec![
        r#"{"Error Analysis": [], "Error Ratio": 0.0}"#.to_string(),
    ]))
}

/// Correctness responses reproducing the gold labels, one per answer in
/// dataset order. Useful for smoke-testing the full loop: grading with this
/// transport must reproduce the annotations exactly.
pub fn gold_correctness(records: &[QueryRecord]) -> Box<dyn ChatTransport> {
    let mut responses = Vec::new();
    for record in records {
        for answer in &record.answers {
            let total = answer.labels.len().max(1);
            let wrong: Vec<usize> = answer
                .labels
                .iter()
                .enumerate()
                .filter(|(_, label)| !label.correctness.is_one())
                .map(|(idx, _)| idx + 1)
                .collect();
            let analysis: Vec<String> = wrong
                .iter()
                .map(|idx| format!("Sentence {idx} contradicts the references."))
                .collect();
            let ratio = wrong.len() as f64 / total as f64;
            let body = serde_json::json!({
                "Error Analysis": analysis,
                "Error Ratio": ratio,
            });
            responses.push(body.to_string());
        }
    }
    if responses.is_empty() {
        responses.push(r#"{"Error Analysis": [], "Error Ratio": 0.0}"#.to_string());
    }
    Box::new(ScriptedTransport::cycle(responses))
}

/// Responses read from a JSONL file: each non-blank line is one JSON string
/// holding a raw judge reply. Replies cycle when requests outnumber them.
pub fn scripted_from_file(path: &std::path::Path) -> Result<Box<dyn ChatTransport>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let mut responses = Vec::new();
    for (line_no, line) in crate::ioutil::jsonl_lines(&text) {
        let reply: String = serde_json::from_str(line).map_err(|e| {
            Failure::data(format!(
                "{}:{line_no}: expected a JSON string: {e}",
                path.display()
            ))
        })?;
        responses.push(reply);
    }
    if responses.is_empty() {
        return Err(Failure::data(format!(
            "{}: script holds no responses",
            path.display()
        )));
    }
    Ok(Box::new(ScriptedTransport::cycle(responses)))
}

/// Usefulness judge with a pure position bias: it always prefers Answer 1.
/// Under the position-debiased duel this must tie every pair.
pub fn always_first() -> Box<dyn ChatTransport> {
    Box::new(FnTransport(|_prompt: &str| {
        Ok(r#"{"Final Partial Order": "Answer 1"}"#.to_string())
    }))
}

/// Usefulness judge that reads both answers out of the prompt and prefers
/// the longer one regardless of position; equal lengths fall back to
/// Answer 1. Content-consistent, so duels produce real wins and losses.
pub fn prefer_longer() -> Box<dyn ChatTransport> {
    Box::new(FnTransport(|prompt: &str| {
        let (one, two) = extract_answers(prompt).ok_or_else(|| {
            TransportFailure("mock judge found no answer pair in prompt".to_string())
        })?;
        let order = if two.chars().count() > one.chars().count() {
            "Answer 2"
        } else {
            "Answer 1"
        };
        Ok(format!(r#"{{"Final Partial Order": "{order}"}}"#))
    }))
}

/// Pull the two candidate answers out of a filled usefulness prompt by
/// parsing the last JSON object that carries both answer fields.
fn extract_answers(prompt: &str) -> Option<(String, String)> {
    let mut found = None;
    for (pos, _) in prompt.match_indices('{') {
        let mut stream =
            serde_json::Deserializer::from_str(&prompt[pos..]).into_iter::<serde_json::Value>();
        if let Some(Ok(serde_json::Value::Object(map))) = stream.next() {
            if let (Some(one), Some(two)) = (
                map.get("Answer 1").and_then(|v| v.as_str()),
                map.get("Answer 2").and_then(|v| v.as_str()),
            ) {
                found = Some((one.to_string(), two.to_string()));
            }
        }
    }
    found
}
