//! Evaluation metrics over gold and predicted sentence correctness labels.
//!
//! Sentence-level: per-class F1 (the incorrect class is the one that matters
//! under heavy imbalance), support-weighted overall F1, and micro recall.
//! Answer-level: the correctness score is the fraction of correct sentences.
//! Query-level: worst-answer detection against the gold worst, and NDCG over
//! the fixed four-answer ranking with real-valued gains.
//!
//! Tie and degeneracy rules are spelled out on each function; they are chosen
//! so a query never silently contributes garbage: queries without a unique
//! gold worst are skipped and counted, prediction-side ties count as detection
//! when the gold worst is inside the tied set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bit::Bit;
use crate::dataset::QueryRecord;

/// One sentence's gold and predicted correctness bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub gold: Bit,
    pub pred: Bit,
}

/// Raw 2x2 counts, label 1 = correct.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub gold_correct_pred_correct: usize,
    pub gold_correct_pred_incorrect: usize,
    pub gold_incorrect_pred_correct: usize,
    pub gold_incorrect_pred_incorrect: usize,
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: &[LabeledPair]) -> Self {
        let mut matrix = ConfusionMatrix::default();
        for pair in pairs {
            match (pair.gold.is_one(), pair.pred.is_one()) {
                (true, true) => matrix.gold_correct_pred_correct += 1,
                (true, false) => matrix.gold_correct_pred_incorrect += 1,
                (false, true) => matrix.gold_incorrect_pred_correct += 1,
                (false, false) => matrix.gold_incorrect_pred_incorrect += 1,
            }
        }
        matrix
    }

    pub fn total(&self) -> usize {
        self.gold_correct_pred_correct
            + self.gold_correct_pred_incorrect
            + self.gold_incorrect_pred_correct
            + self.gold_incorrect_pred_incorrect
    }
}

/// Per-answer predicted correctness bits, aligned to the dataset's answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedAnswer {
    pub answer_id: String,
    pub correctness: Vec<Bit>,
}

/// All predictions for one query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub query_id: String,
    pub answers: Vec<PredictedAnswer>,
}

/// Per-query metric detail retained in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryBreakdown {
    pub query_id: String,
    pub sentences: usize,
    pub gold_answer_scores: Vec<f64>,
    pub pred_answer_scores: Vec<f64>,
    /// None when the query has no unique gold worst (skipped).
    pub detected_worst: Option<bool>,
    /// None unless the query has exactly four answers.
    pub ndcg_at_4: Option<f64>,
}

/// The full evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sentences: usize,
    pub confusion: ConfusionMatrix,
    pub f1_incorrect: f64,
    pub f1_correct: f64,
    pub f1_overall: f64,
    pub recall: f64,
    pub detection_rate: f64,
    pub detection_eligible: usize,
    pub detection_skipped: usize,
    pub ndcg_at_4: f64,
    pub ndcg_queries: usize,
    pub per_query: Vec<QueryBreakdown>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("metric input is empty")]
    EmptyInput,
    #[error("query has no unique gold worst answer")]
    DegenerateQuery,
    #[error("ranking metric needs exactly 4 answers, got {got}")]
    WrongArity { got: usize },
    #[error("predictions do not align with dataset: {detail}")]
    AlignmentError { detail: String },
}

/// F1 treating `target` as the positive class; 0 when precision and recall
/// are both 0.
pub fn f1_for_label(pairs: &[LabeledPair], target: Bit) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut true_positive = 0usize;
    let mut false_positive = 0usize;
    let mut false_negative = 0usize;
    for pair in pairs {
        match (pair.gold == target, pair.pred == target) {
            (true, true) => true_positive += 1,
            (false, true) => false_positive += 1,
            (true, false) => false_negative += 1,
            (false, false) => {}
        }
    }
    let precision = ratio(true_positive, true_positive + false_positive);
    let recall = ratio(true_positive, true_positive + false_negative);
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Per-class F1 averaged with gold class frequencies as weights.
pub fn f1_overall(pairs: &[LabeledPair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let support_correct = pairs.iter().filter(|p| p.gold.is_one()).count();
    let support_incorrect = pairs.len() - support_correct;
    let f1_correct = f1_for_label(pairs, Bit::ONE)?;
    let f1_incorrect = f1_for_label(pairs, Bit::ZERO)?;
    Ok((support_correct as f64 * f1_correct + support_incorrect as f64 * f1_incorrect)
        / pairs.len() as f64)
}

/// Micro recall: the fraction of sentences whose prediction equals gold.
/// With one label per sentence this coincides with accuracy.
pub fn recall_overall(pairs: &[LabeledPair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let hits = pairs.iter().filter(|p| p.gold == p.pred).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// An answer's correctness score: the fraction of its sentences labeled
/// correct.
pub fn answer_score(labels: &[Bit]) -> Result<f64, MetricsError> {
    if labels.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let correct = labels.iter().filter(|bit| bit.is_one()).count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Whether the predicted scores point at the gold worst answer.
///
/// The gold side must have a unique minimum; otherwise the query is
/// degenerate and the caller should skip it (fewer than two answers counts as
/// degenerate too). The prediction side uses its full tied argmin set, so an
/// exact-tie prediction that includes the gold worst still detects it.
pub fn detect_worst(gold_scores: &[f64], pred_scores: &[f64]) -> Result<Bit, MetricsError> {
    assert_eq!(gold_scores.len(), pred_scores.len(), "score lists must align");
    if gold_scores.len() < 2 {
        return Err(MetricsError::DegenerateQuery);
    }
    let gold_min = gold_scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let gold_argmin: Vec<usize> = gold_scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == gold_min)
        .map(|(i, _)| i)
        .collect();
    if gold_argmin.len() != 1 {
        return Err(MetricsError::DegenerateQuery);
    }
    let pred_min = pred_scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let detected = pred_scores[gold_argmin[0]] == pred_min;
    Ok(Bit::from(detected))
}

/// NDCG over exactly four answers: rank by predicted score descending (input
/// order breaks ties), gains are the raw gold scores, discount log2(rank+1).
/// An all-zero gold vector has ideal DCG 0 and scores 1.0 by convention.
pub fn ndcg_at_4(gold_scores: &[f64], pred_scores: &[f64]) -> Result<f64, MetricsError> {
    if gold_scores.len() != 4 || pred_scores.len() != 4 {
        return Err(MetricsError::WrongArity {
            got: gold_scores.len().max(pred_scores.len()),
        });
    }
    let mut order: Vec<usize> = (0..4).collect();
    // sort_by is stable, so equal predictions keep input order.
    order.sort_by(|&a, &b| pred_scores[b].partial_cmp(&pred_scores[a]).expect("finite scores"));
    let dcg: f64 = order
        .iter()
        .enumerate()
        .map(|(rank, &idx)| gold_scores[idx] / ((rank + 2) as f64).log2())
        .sum();
    let mut ideal = gold_scores.to_vec();
    ideal.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
    let idcg: f64 = ideal
        .iter()
        .enumerate()
        .map(|(rank, gain)| gain / ((rank + 2) as f64).log2())
        .sum();
    if idcg == 0.0 {
        return Ok(1.0);
    }
    Ok(dcg / idcg)
}

/// Compute the full report for a dataset and its aligned predictions.
///
/// Predictions are matched to queries by id (order-independent) and must
/// cover every query, answer, and sentence exactly.
pub fn compile_report(
    records: &[QueryRecord],
    predictions: &[PredictionRecord],
) -> Result<EvalReport, MetricsError> {
    let mut by_query: std::collections::HashMap<&str, &PredictionRecord> =
        std::collections::HashMap::with_capacity(predictions.len());
    for prediction in predictions {
        if by_query.insert(&prediction.query_id, prediction).is_some() {
            return Err(MetricsError::AlignmentError {
                detail: format!("duplicate prediction for query {:?}", prediction.query_id),
            });
        }
    }

    let mut pairs = Vec::new();
    let mut per_query = Vec::with_capacity(records.len());
    let mut detected = 0usize;
    let mut detection_eligible = 0usize;
    let mut detection_skipped = 0usize;
    let mut ndcg_sum = 0.0f64;
    let mut ndcg_queries = 0usize;

    for record in records {
        let prediction = by_query.remove(record.query_id.as_str()).ok_or_else(|| {
            MetricsError::AlignmentError {
                detail: format!("no prediction for query {:?}", record.query_id),
            }
        })?;
        if prediction.answers.len() != record.answers.len() {
            return Err(MetricsError::AlignmentError {
                detail: format!(
                    "query {:?}: {} predicted answers for {} gold answers",
                    record.query_id,
                    prediction.answers.len(),
                    record.answers.len()
                ),
            });
        }
        let mut gold_answer_scores = Vec::with_capacity(record.answers.len());
        let mut pred_answer_scores = Vec::with_capacity(record.answers.len());
        let mut query_sentences = 0usize;
        for (answer, predicted) in record.answers.iter().zip(&prediction.answers) {
            if predicted.answer_id != answer.answer_id {
                return Err(MetricsError::AlignmentError {
                    detail: format!(
                        "query {:?}: predicted answer {:?} where dataset has {:?}",
                        record.query_id, predicted.answer_id, answer.answer_id
                    ),
                });
            }
            if predicted.correctness.len() != answer.labels.len() {
                return Err(MetricsError::AlignmentError {
                    detail: format!(
                        "query {:?} answer {:?}: {} predicted bits for {} sentences",
                        record.query_id,
                        answer.answer_id,
                        predicted.correctness.len(),
                        answer.labels.len()
                    ),
                });
            }
            let gold_bits: Vec<Bit> = answer.labels.iter().map(|l| l.correctness).collect();
            for (gold, pred) in gold_bits.iter().zip(&predicted.correctness) {
                pairs.push(LabeledPair {
                    gold: *gold,
                    pred: *pred,
                });
            }
            query_sentences += gold_bits.len();
            gold_answer_scores.push(answer_score(&gold_bits)?);
            pred_answer_scores.push(answer_score(&predicted.correctness)?);
        }

        let detected_worst = match detect_worst(&gold_answer_scores, &pred_answer_scores) {
            Ok(bit) => {
                detection_eligible += 1;
                if bit.is_one() {
                    detected += 1;
                }
                Some(bit.is_one())
            }
            Err(MetricsError::DegenerateQuery) => {
                detection_skipped += 1;
                None
            }
            Err(other) => return Err(other),
        };
        let query_ndcg = if record.answers.len() == 4 {
            let value = ndcg_at_4(&gold_answer_scores, &pred_answer_scores)?;
            ndcg_sum += value;
            ndcg_queries += 1;
            Some(value)
        } else {
            None
        };
        per_query.push(QueryBreakdown {
            query_id: record.query_id.clone(),
            sentences: query_sentences,
            gold_answer_scores,
            pred_answer_scores,
            detected_worst,
            ndcg_at_4: query_ndcg,
        });
    }

    if let Some(extra) = by_query.keys().next() {
        return Err(MetricsError::AlignmentError {
            detail: format!("prediction for unknown query {extra:?}"),
        });
    }
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }

    Ok(EvalReport {
        sentences: pairs.len(),
        confusion: ConfusionMatrix::from_pairs(&pairs),
        f1_incorrect: f1_for_label(&pairs, Bit::ZERO)?,
        f1_correct: f1_for_label(&pairs, Bit::ONE)?,
        f1_overall: f1_overall(&pairs)?,
        recall: recall_overall(&pairs)?,
        detection_rate: if detection_eligible == 0 {
            0.0
        } else {
            detected as f64 / detection_eligible as f64
        },
        detection_eligible,
        detection_skipped,
        ndcg_at_4: if ndcg_queries == 0 {
            0.0
        } else {
            ndcg_sum / ndcg_queries as f64
        },
        ndcg_queries,
        per_query,
    })
}

/// Render the headline numbers as a fixed-width text table.
pub fn render_table(report: &EvalReport) -> String {
    let headers = [
        "F1(incorrect)",
        "F1(correct)",
        "F1(overall)",
        "Recall",
        "Detection",
        "NDCG@4",
    ];
    let values = [
        report.f1_incorrect,
        report.f1_correct,
        report.f1_overall,
        report.recall,
        report.detection_rate,
        report.ndcg_at_4,
    ];
    let mut header_row = String::new();
    let mut value_row = String::new();
    for (header, value) in headers.iter().zip(values) {
        let cell = format!("{value:.4}");
        let width = header.len().max(cell.len());
        header_row.push_str(&format!("{header:>width$}  "));
        value_row.push_str(&format!("{cell:>width$}  "));
    }
    format!("{}\n{}\n", header_row.trim_end(), value_row.trim_end())
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}
