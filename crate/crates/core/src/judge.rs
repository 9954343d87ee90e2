//! External judge gateway: correctness grading and position-debiased
//! usefulness duels, plus the generic chat transport they ride on.
//!
//! The transport speaks the common JSON chat-completion shape (model,
//! messages, temperature), so any hosted or local endpoint works; tests and
//! offline runs plug in deterministic in-process transports instead. Retries
//! apply to transport failures only, never to malformed verdicts: a judge
//! that answered garbage once will usually answer garbage again, and the
//! caller should see it.
//!
//! The usefulness duel sends each pair twice with positions swapped. The
//! candidate wins only when preferred in both orders, loses only when the
//! anchor is preferred in both, and everything else is a tie; a judge that
//! always picks by position therefore always ties.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bit::Bit;
use crate::dataset::{join_documents, QueryRecord};
use crate::reward::Preference;

/// Template grading one answer for factual errors.
pub const CORRECTNESS_TEMPLATE: &str = include_str!("../resources/correctness_eval_prompt.txt");
/// Template comparing two answers for usefulness.
pub const USEFULNESS_TEMPLATE: &str = include_str!("../resources/usefulness_eval_prompt.txt");

/// Connection and sampling settings for a chat-completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatEndpointConfig {
    /// Full URL of the chat-completion route.
    pub base_url: String,
    pub model_name: String,
    /// Environment variable holding the bearer token; unset means no auth.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_k")]
    pub top_k: u32,
    #[serde(default = "default_retry_backoff_ms")]
    pub retry_backoff_ms: u64,
    /// Upper bound on concurrently outstanding requests.
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
}

fn default_api_key_env() -> String {
    "FRC_JUDGE_API_KEY".to_string()
}
fn default_timeout_secs() -> u64 {
    30
}
fn default_max_retries() -> u32 {
    2
}
fn default_temperature() -> f64 {
    1.0
}
fn default_top_k() -> u32 {
    40
}
fn default_retry_backoff_ms() -> u64 {
    200
}
fn default_max_in_flight() -> usize {
    4
}

impl Default for ChatEndpointConfig {
    fn default() -> Self {
        ChatEndpointConfig {
            base_url: String::new(),
            model_name: String::new(),
            api_key_env: default_api_key_env(),
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            temperature: default_temperature(),
            top_k: default_top_k(),
            retry_backoff_ms: default_retry_backoff_ms(),
            max_in_flight: default_max_in_flight(),
        }
    }
}

impl ChatEndpointConfig {
    pub fn validate(&self) -> Result<(), JudgeError> {
        if self.timeout_secs == 0 {
            return Err(JudgeError::MalformedVerdict {
                detail: "endpoint timeout must be positive".into(),
            });
        }
        if self.max_in_flight == 0 {
            return Err(JudgeError::MalformedVerdict {
                detail: "max_in_flight must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// A single failed request attempt; the gateway decides whether to retry.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct TransportFailure(pub String);

/// One chat completion: prompt in, raw text out.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, TransportFailure>;
}

/// HTTP chat-completion transport.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    temperature: f64,
    top_k: u32,
}

impl HttpTransport {
    pub fn new(cfg: &ChatEndpointConfig) -> Result<Self, JudgeError> {
        cfg.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| JudgeError::Transport {
                attempts: 0,
                last_error: e.to_string(),
            })?;
        Ok(HttpTransport {
            client,
            url: cfg.base_url.clone(),
            model: cfg.model_name.clone(),
            api_key: std::env::var(&cfg.api_key_env).ok(),
            temperature: cfg.temperature,
            top_k: cfg.top_k,
        })
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportFailure> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "top_k": self.top_k,
        });
        let mut request = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| TransportFailure(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(TransportFailure(format!("HTTP {status}: {text}")));
        }
        let envelope: Value = response
            .json()
            .map_err(|e| TransportFailure(format!("unreadable response body: {e}")))?;
        envelope["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| TransportFailure("response has no choices[0].message.content".into()))
    }
}

/// Transport that cycles through canned responses; handy for offline runs.
pub struct ScriptedTransport {
    responses: Vec<String>,
    cursor: AtomicUsize,
}

impl ScriptedTransport {
    pub fn cycle(responses: Vec<String>) -> Self {
        assert!(!responses.is_empty(), "scripted transport needs responses");
        ScriptedTransport {
            responses,
            cursor: AtomicUsize::new(0),
        }
    }
}

impl ChatTransport for ScriptedTransport {
    fn complete(&self, _prompt: &str) -> Result<String, TransportFailure> {
        let at = self.cursor.fetch_add(1, Ordering::Relaxed);
        Ok(self.responses[at % self.responses.len()].clone())
    }
}

/// Transport backed by a closure; the building block for custom mocks.
pub struct FnTransport<F>(pub F);

impl<F> ChatTransport for FnTransport<F>
where
    F: Fn(&str) -> Result<String, TransportFailure> + Send + Sync,
{
    fn complete(&self, prompt: &str) -> Result<String, TransportFailure> {
        (self.0)(prompt)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JudgeError {
    #[error("transport failed after {attempts} attempts: {last_error}")]
    Transport { attempts: u32, last_error: String },
    #[error("judge output malformed: {detail}")]
    MalformedVerdict { detail: String },
}

/// Parsed correctness grade for one answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessVerdict {
    pub error_analysis: Vec<String>,
    pub error_ratio: f64,
    /// 1 - error_ratio: the fraction of sentences the judge found sound.
    pub derived_score: f64,
    pub fully_correct: Bit,
    /// Raw judge output, retained verbatim for audit.
    pub transcript: String,
}

/// Result of a position-debiased usefulness duel, from the candidate's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuelResult {
    Win,
    Lose,
    Tie,
}

impl DuelResult {
    /// Map the duel outcome onto the policy-reward preference signal.
    pub fn preference(self) -> Preference {
        match self {
            DuelResult::Win => Preference::Win,
            DuelResult::Lose => Preference::Lose,
            DuelResult::Tie => Preference::Tie,
        }
    }
}

/// Duel outcome plus both raw judge outputs (anchor-first call, then
/// candidate-first call).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuelOutcome {
    pub result: DuelResult,
    pub transcripts: [String; 2],
}

/// One usefulness comparison to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuelRequest {
    pub query_id: String,
    pub question: String,
    pub references: String,
    pub anchor: String,
    pub candidate: String,
}

/// Per-query suite result; failures are recorded, not fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuelReport {
    pub query_id: String,
    pub result: Option<DuelResult>,
    pub error: Option<String>,
    pub transcripts: Option<[String; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsefulnessTally {
    pub win: usize,
    pub lose: usize,
    pub tie: usize,
    pub failed: usize,
}

#[derive(Serialize)]
struct CorrectnessInput<'a> {
    #[serde(rename = "Question")]
    question: &'a str,
    #[serde(rename = "References")]
    references: &'a str,
    #[serde(rename = "Answer to be Analyzed")]
    answer: &'a str,
}

#[derive(Serialize)]
struct UsefulnessInput<'a> {
    #[serde(rename = "Question")]
    question: &'a str,
    #[serde(rename = "References")]
    references: &'a str,
    #[serde(rename = "Answer 1")]
    answer_1: &'a str,
    #[serde(rename = "Answer 2")]
    answer_2: &'a str,
}

fn compose(template: &str, filled: &str) -> String {
    let head = template.trim_end_matches('\n');
    format!("{head}\n{filled}\n")
}

/// Build the correctness-grading prompt. `hints` is operator-supplied free
/// text (known mistakes, where they occur) appended after the filled input.
pub fn build_correctness_prompt(
    question: &str,
    references: &str,
    answer: &str,
    hints: Option<&str>,
) -> String {
    let input = CorrectnessInput {
        question,
        references,
        answer,
    };
    let filled = serde_json::to_string_pretty(&input).expect("prompt input is plain data");
    let mut prompt = compose(CORRECTNESS_TEMPLATE, &filled);
    if let Some(hints) = hints {
        prompt.push_str(hints);
        prompt.push('\n');
    }
    prompt
}

/// Build one positional usefulness prompt.
pub fn build_usefulness_prompt(
    question: &str,
    references: &str,
    answer_1: &str,
    answer_2: &str,
) -> String {
    let input = UsefulnessInput {
        question,
        references,
        answer_1,
        answer_2,
    };
    let filled = serde_json::to_string_pretty(&input).expect("prompt input is plain data");
    compose(USEFULNESS_TEMPLATE, &filled)
}

/// Find the first offset where a JSON object deserializes, and return it.
fn extract_first_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    for (pos, _) in text.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&text[pos..]).into_iter::<Value>();
        if let Some(Ok(Value::Object(map))) = stream.next() {
            return Some(map);
        }
    }
    None
}

fn coerce_ratio(value: &Value) -> Option<f64> {
    match value {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    }
}

/// Parse the correctness judge's raw output.
pub fn parse_correctness(raw: &str) -> Result<CorrectnessVerdict, JudgeError> {
    let object = extract_first_object(raw).ok_or_else(|| JudgeError::MalformedVerdict {
        detail: "no JSON object in judge output".into(),
    })?;
    let ratio_value = object
        .get("Error Ratio")
        .ok_or_else(|| JudgeError::MalformedVerdict {
            detail: "missing \"Error Ratio\"".into(),
        })?;
    let error_ratio = coerce_ratio(ratio_value).ok_or_else(|| JudgeError::MalformedVerdict {
        detail: format!("\"Error Ratio\" is not numeric: {ratio_value}"),
    })?;
    if !(0.0..=1.0).contains(&error_ratio) {
        return Err(JudgeError::MalformedVerdict {
            detail: format!("\"Error Ratio\" {error_ratio} outside [0, 1]"),
        });
    }
    let error_analysis = match object.get("Error Analysis") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|item| match item {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect(),
        _ => Vec::new(),
    };
    Ok(CorrectnessVerdict {
        error_analysis,
        error_ratio,
        derived_score: 1.0 - error_ratio,
        fully_correct: Bit::from(error_ratio == 0.0),
        transcript: raw.to_string(),
    })
}

/// Which answer a usefulness verdict prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PositionalChoice {
    Answer1,
    Answer2,
}

fn parse_usefulness(raw: &str) -> Result<PositionalChoice, JudgeError> {
    let object = extract_first_object(raw).ok_or_else(|| JudgeError::MalformedVerdict {
        detail: "no JSON object in judge output".into(),
    })?;
    let order = object
        .get("Final Partial Order")
        .and_then(Value::as_str)
        .ok_or_else(|| JudgeError::MalformedVerdict {
            detail: "missing \"Final Partial Order\"".into(),
        })?;
    match order.trim() {
        "Answer 1" => Ok(PositionalChoice::Answer1),
        "Answer 2" => Ok(PositionalChoice::Answer2),
        other => Err(JudgeError::MalformedVerdict {
            detail: format!("unrecognized partial order {other:?}"),
        }),
    }
}

/// Retrying gateway over a chat transport.
pub struct JudgeGateway {
    transport: Box<dyn ChatTransport>,
    max_retries: u32,
    retry_backoff: Duration,
    max_in_flight: usize,
}

impl JudgeGateway {
    pub fn new(transport: Box<dyn ChatTransport>, cfg: &ChatEndpointConfig) -> Self {
        JudgeGateway {
            transport,
            max_retries: cfg.max_retries,
            retry_backoff: Duration::from_millis(cfg.retry_backoff_ms),
            max_in_flight: cfg.max_in_flight.max(1),
        }
    }

    /// Gateway over a mock or custom transport with no retries or backoff.
    pub fn direct(transport: Box<dyn ChatTransport>) -> Self {
        JudgeGateway {
            transport,
            max_retries: 0,
            retry_backoff: Duration::ZERO,
            max_in_flight: 1,
        }
    }

    /// Send one prompt with retry-on-transport-failure. Exactly
    /// `max_retries + 1` attempts, exponential backoff between them. Useful
    /// directly for driving reward-model prompts through the same endpoint.
    pub fn complete(&self, prompt: &str) -> Result<String, JudgeError> {
        let mut last_error = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                let exponent = (attempt - 1).min(10);
                std::thread::sleep(self.retry_backoff.saturating_mul(1u32 << exponent));
            }
            match self.transport.complete(prompt) {
                Ok(text) => return Ok(text),
                Err(failure) => last_error = failure.0,
            }
        }
        Err(JudgeError::Transport {
            attempts: self.max_retries + 1,
            last_error,
        })
    }

    /// Grade one answer for factual errors.
    pub fn judge_correctness(
        &self,
        record: &QueryRecord,
        answer_text: &str,
        hints: Option<&str>,
    ) -> Result<CorrectnessVerdict, JudgeError> {
        let references = join_documents(&record.documents);
        let prompt = build_correctness_prompt(&record.query, &references, answer_text, hints);
        let raw = self.complete(&prompt)?;
        parse_correctness(&raw)
    }

    /// Run one position-debiased duel between a fixed anchor answer and a
    /// candidate. The first call shows the anchor as Answer 1, the second
    /// swaps positions; only agreement across both calls produces a non-tie.
    pub fn usefulness_duel(
        &self,
        question: &str,
        references: &str,
        anchor: &str,
        candidate: &str,
    ) -> Result<DuelOutcome, JudgeError> {
        let first_prompt = build_usefulness_prompt(question, references, anchor, candidate);
        let first_raw = self.complete(&first_prompt)?;
        let first = parse_usefulness(&first_raw)?;
        let second_prompt = build_usefulness_prompt(question, references, candidate, anchor);
        let second_raw = self.complete(&second_prompt)?;
        let second = parse_usefulness(&second_raw)?;

        let candidate_first_call = first == PositionalChoice::Answer2;
        let candidate_second_call = second == PositionalChoice::Answer1;
        let result = match (candidate_first_call, candidate_second_call) {
            (true, true) => DuelResult::Win,
            (false, false) => DuelResult::Lose,
            _ => DuelResult::Tie,
        };
        Ok(DuelOutcome {
            result,
            transcripts: [first_raw, second_raw],
        })
    }

    /// Run a batch of duels with bounded fan-out. Failures mark their query
    /// and the suite continues; reports come back in input order.
    pub fn run_usefulness_suite(
        &self,
        requests: &[DuelRequest],
    ) -> (Vec<DuelReport>, UsefulnessTally) {
        let slots: Vec<Mutex<Option<DuelReport>>> =
            requests.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.max_in_flight.min(requests.len().max(1));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, Ordering::Relaxed);
                    if index >= requests.len() {
                        break;
                    }
                    let request = &requests[index];
                    let report = match self.usefulness_duel(
                        &request.question,
                        &request.references,
                        &request.anchor,
                        &request.candidate,
                    ) {
                        Ok(outcome) => DuelReport {
                            query_id: request.query_id.clone(),
                            result: Some(outcome.result),
                            error: None,
                            transcripts: Some(outcome.transcripts),
                        },
                        Err(error) => DuelReport {
                            query_id: request.query_id.clone(),
                            result: None,
                            error: Some(error.to_string()),
                            transcripts: None,
                        },
                    };
                    *slots[index].lock().expect("no panics while holding slot") = Some(report);
                });
            }
        });
        let reports: Vec<DuelReport> = slots
            .into_iter()
            .map(|slot| slot.into_inner().expect("worker finished").expect("slot filled"))
            .collect();
        let mut tally = UsefulnessTally::default();
        for report in &reports {
            match report.result {
                Some(DuelResult::Win) => tally.win += 1,
                Some(DuelResult::Lose) => tally.lose += 1,
                Some(DuelResult::Tie) => tally.tie += 1,
                None => tally.failed += 1,
            }
        }
        (reports, tally)
    }
}
