//! Regenerates the mini-corpus regression fixtures. Ignored by default: the
//! fixtures are committed, and the expected report is deliberately computed
//! by the brute-force oracles rather than the library, so the `score`
//! regression test stays independent of the code it checks.
//!
//! To regenerate after an intentional schema change:
//! `cargo test -p frc-cli --test fixture_gen -- --ignored`

#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frc_core::dataset::{save_dataset, AnnotatedAnswer, QueryRecord, SentenceLabel};
use frc_core::metrics::{
    ConfusionMatrix, EvalReport, PredictedAnswer, PredictionRecord, QueryBreakdown,
};
use frc_core::segmenter::segment;
use frc_core::Bit;

const WORDS: &[&str] = &[
    "the", "reactor", "valve", "reported", "pressure", "held", "steady", "under", "test",
    "sensors", "logged", "every", "cycle", "operators", "confirmed", "readings", "margin",
    "stayed", "within", "bounds", "coolant", "flow", "remained", "nominal",
];

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(3..=6);
    let mut text = String::new();
    for i in 0..len {
        let word = WORDS[rng.gen_range(0..WORDS.len())];
        if i == 0 {
            text.push_str(&word[..1].to_uppercase());
            text.push_str(&word[1..]);
        } else {
            text.push(' ');
            text.push_str(word);
        }
    }
    text.push('.');
    text
}

fn answer_text(rng: &mut ChaCha8Rng, sentences: usize) -> String {
    let parts: Vec<String> = (0..sentences).map(|_| sentence(rng)).collect();
    parts.join(" ")
}

fn bit(rng: &mut ChaCha8Rng, p_one: f64) -> Bit {
    Bit::from(rng.gen_bool(p_one))
}

#[test]
#[ignore = "writes tests/fixtures; run explicitly after intentional changes"]
fn regenerate_mini_corpus_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x00C0FFEE);
    let mut records = Vec::new();
    let mut predictions = Vec::new();

    for q in 0..10usize {
        let mut answers = Vec::new();
        let mut predicted = Vec::new();
        for a in 0..4usize {
            let sentences = rng.gen_range(2..=4usize);
            let text = answer_text(&mut rng, sentences);
            let segmented = segment(&text).expect("synthetic text segments");
            assert_eq!(
                segmented.segments.len(),
                sentences,
                "segmenter disagreed on {text:?}"
            );
            // Query index 3 forces a gold tie for the worst answer: the
            // first two answers are all-incorrect, so detection is skipped.
            let force_zero = q == 3 && a < 2;
            let mut labels = Vec::with_capacity(sentences);
            let mut pred_bits = Vec::with_capacity(sentences);
            for _ in 0..sentences {
                let correctness = if force_zero { Bit::ZERO } else { bit(&mut rng, 0.72) };
                let faithfulness = if rng.gen_bool(0.8) { correctness } else { bit(&mut rng, 0.5) };
                labels.push(SentenceLabel {
                    faithfulness,
                    correctness,
                    rationale: String::new(),
                });
                let flip = rng.gen_bool(0.25);
                let pred = if flip {
                    Bit::from(!correctness.is_one())
                } else {
                    correctness
                };
                pred_bits.push(pred);
            }
            answers.push(AnnotatedAnswer {
                answer_id: format!("a{}", a + 1),
                segmented,
                labels,
            });
            predicted.push(PredictedAnswer {
                answer_id: format!("a{}", a + 1),
                correctness: pred_bits,
            });
        }
        let query_id = format!("q{:02}", q + 1);
        records.push(QueryRecord {
            query_id: query_id.clone(),
            query: format!("What did run {} report?", q + 1),
            now_time: "2024-06-01 10:00".to_string(),
            documents: vec![
                "The reactor test log covering all monitored runs.".to_string(),
                "Operator notes on pressure and coolant readings.".to_string(),
            ],
            answers,
        });
        predictions.push(PredictionRecord {
            query_id,
            answers: predicted,
        });
    }

    let report = oracle_report(&records, &predictions);
    assert!(report.detection_skipped >= 1, "tie query must be skipped");
    assert!(report.detection_eligible >= 6, "most queries must be eligible");
    assert_eq!(report.ndcg_queries, 10);
    assert!(report.f1_incorrect > 0.0 && report.f1_incorrect < 1.0);
    assert!(report.f1_correct > 0.0 && report.f1_correct < 1.0);

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    fs::create_dir_all(&dir).unwrap();

    let mut dataset_bytes = Vec::new();
    save_dataset(&records, &mut dataset_bytes).unwrap();
    fs::write(dir.join("mini_dataset.jsonl"), &dataset_bytes).unwrap();

    let mut pred_bytes = String::new();
    for prediction in &predictions {
        pred_bytes.push_str(&serde_json::to_string(prediction).unwrap());
        pred_bytes.push('\n');
    }
    fs::write(dir.join("mini_predictions.jsonl"), pred_bytes).unwrap();

    let mut report_json = serde_json::to_string_pretty(&report).unwrap();
    report_json.push('\n');
    fs::write(dir.join("expected_report.json"), report_json).unwrap();
}

/// Assemble the full report from the oracle metric implementations alone.
fn oracle_report(records: &[QueryRecord], predictions: &[PredictionRecord]) -> EvalReport {
    let mut gold_pool = Vec::new();
    let mut pred_pool = Vec::new();
    let mut confusion = ConfusionMatrix::default();
    let mut per_query = Vec::new();
    let mut detected = 0usize;
    let mut detection_eligible = 0usize;
    let mut detection_skipped = 0usize;
    let mut ndcg_sum = 0.0f64;
    let mut ndcg_queries = 0usize;

    for (record, prediction) in records.iter().zip(predictions) {
        assert_eq!(record.query_id, prediction.query_id);
        let mut gold_scores = Vec::new();
        let mut pred_scores = Vec::new();
        let mut query_sentences = 0usize;
        for (answer, predicted) in record.answers.iter().zip(&prediction.answers) {
            let gold_bits: Vec<u8> = answer.labels.iter().map(|l| l.correctness.as_u8()).collect();
            let pred_bits: Vec<u8> = predicted.correctness.iter().map(|b| b.as_u8()).collect();
            assert_eq!(gold_bits.len(), pred_bits.len());
            for (&g, &p) in gold_bits.iter().zip(&pred_bits) {
                match (g, p) {
                    (1, 1) => confusion.gold_correct_pred_correct += 1,
                    (1, 0) => confusion.gold_correct_pred_incorrect += 1,
                    (0, 1) => confusion.gold_incorrect_pred_correct += 1,
                    _ => confusion.gold_incorrect_pred_incorrect += 1,
                }
            }
            query_sentences += gold_bits.len();
            gold_scores.push(oracle::oracle_answer_score(&gold_bits));
            pred_scores.push(oracle::oracle_answer_score(&pred_bits));
            gold_pool.extend(gold_bits);
            pred_pool.extend(pred_bits);
        }

        let detected_worst = oracle::oracle_detect_worst(&gold_scores, &pred_scores);
        match detected_worst {
            Some(hit) => {
                detection_eligible += 1;
                if hit {
                    detected += 1;
                }
            }
            None => detection_skipped += 1,
        }

        let query_ndcg = if record.answers.len() == 4 {
            let gold4: [f64; 4] = gold_scores.clone().try_into().unwrap();
            let pred4: [f64; 4] = pred_scores.clone().try_into().unwrap();
            let value = oracle::oracle_ndcg_at_4(&gold4, &pred4);
            ndcg_sum += value;
            ndcg_queries += 1;
            Some(value)
        } else {
            None
        };

        per_query.push(QueryBreakdown {
            query_id: record.query_id.clone(),
            sentences: query_sentences,
            gold_answer_scores: gold_scores,
            pred_answer_scores: pred_scores,
            detected_worst,
            ndcg_at_4: query_ndcg,
        });
    }

    EvalReport {
        sentences: gold_pool.len(),
        confusion,
        f1_incorrect: oracle::oracle_f1(&gold_pool, &pred_pool, 0),
        f1_correct: oracle::oracle_f1(&gold_pool, &pred_pool, 1),
        f1_overall: oracle::oracle_f1_overall(&gold_pool, &pred_pool),
        recall: oracle::oracle_recall(&gold_pool, &pred_pool),
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
    }
}
