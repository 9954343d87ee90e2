//! Desk-scale policy-gradient simulation of reward shaping under label
//! imbalance.
//!
//! This is an analogy, not a scale model: a two-logit Bernoulli predictor
//! (one logit per label head) stands in for the reward model, and a fixed
//! noisy cue channel stands in for everything the real model reads from the
//! text. The cue agrees with the gold bit with probability `cue_accuracy`
//! and enters each head with weight `cue_weight`, so the trained logit only
//! shifts the operating point along that channel. The question the simulator
//! answers is directional: does the shaped reward push the operating point
//! toward or away from the minority (incorrect) class? With a heavy correct
//! prior, a pure match reward drifts toward calling everything correct, while
//! the incorrect-label bonus/penalty variant holds and improves minority F1.
//!
//! Training uses score-function (REINFORCE) updates on sampled batches.
//! Reported metrics are computed in expectation over a fixed evaluation set,
//! so a run with learning rate zero produces a perfectly flat trajectory and
//! two runs with the same seed agree bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bit::Bit;
use crate::metrics::{self, MetricsError};
use crate::reward::{trm_sentence_reward, RewardConfig};
use crate::trm::TrmVerdict;

const EVAL_QUERIES: usize = 48;
const EVAL_ANSWERS_PER_QUERY: usize = 4;
const EVAL_SENTENCES_PER_ANSWER: usize = 10;

/// Simulation settings; the defaults mirror the annotated-corpus imbalance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// P(gold correctness = 1) per sentence.
    pub class_prior_correct: f64,
    /// P(gold faithfulness co-occurs with gold correctness).
    pub faith_correct_coupling: f64,
    /// P(cue bit agrees with its gold bit).
    pub cue_accuracy: f64,
    /// Logit weight of the cue channel.
    pub cue_weight: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub variant: RewardConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            class_prior_correct: 0.8686,
            faith_correct_coupling: 0.8,
            cue_accuracy: 0.8,
            cue_weight: 2.5,
            steps: 300,
            batch_size: 64,
            learning_rate: 0.6,
            seed: 1,
            variant: RewardConfig::rl_cf_plus(),
        }
    }
}

/// Metrics recorded for the parameters entering one training step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimStep {
    pub f1_incorrect: f64,
    pub detection_proxy: f64,
    pub mean_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrajectory {
    pub steps: Vec<SimStep>,
}

/// Final-step metrics for one variant, used for side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: RewardConfig,
    pub final_f1_incorrect: f64,
    pub final_detection_proxy: f64,
    pub final_mean_reward: f64,
}

/// One synthetic sentence: gold bits plus the fixed noisy cues.
#[derive(Debug, Clone, Copy)]
struct EvalSentence {
    gold_faithful: bool,
    gold_correct: bool,
    cue_faithful: bool,
    cue_correct: bool,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn cue_shift(cue: bool, weight: f64) -> f64 {
    if cue {
        weight
    } else {
        -weight
    }
}

fn draw(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.gen::<f64>() < p
}

fn sample_sentence(rng: &mut ChaCha8Rng, cfg: &SimConfig) -> EvalSentence {
    let gold_correct = draw(rng, cfg.class_prior_correct);
    let gold_faithful = if draw(rng, cfg.faith_correct_coupling) {
        gold_correct
    } else {
        !gold_correct
    };
    let cue_faithful = if draw(rng, cfg.cue_accuracy) {
        gold_faithful
    } else {
        !gold_faithful
    };
    let cue_correct = if draw(rng, cfg.cue_accuracy) {
        gold_correct
    } else {
        !gold_correct
    };
    EvalSentence {
        gold_faithful,
        gold_correct,
        cue_faithful,
        cue_correct,
    }
}

/// Fixed evaluation pool: 48 queries of 4 answers of 10 sentences.
fn generate_eval_set(cfg: &SimConfig) -> Vec<EvalSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let total = EVAL_QUERIES * EVAL_ANSWERS_PER_QUERY * EVAL_SENTENCES_PER_ANSWER;
    (0..total).map(|_| sample_sentence(&mut rng, cfg)).collect()
}

/// Expected-value metrics of the current logits over the evaluation set.
fn evaluate(eval: &[EvalSentence], cfg: &SimConfig, logit_faithful: f64, logit_correct: f64) -> SimStep {
    // Soft confusion counts for the incorrect (0) class of the correctness head.
    let mut true_incorrect = 0.0f64;
    let mut false_incorrect = 0.0f64;
    let mut missed_incorrect = 0.0f64;
    let mut reward_sum = 0.0f64;
    let mut answer_gold: Vec<f64> = Vec::with_capacity(EVAL_QUERIES * EVAL_ANSWERS_PER_QUERY);
    let mut answer_pred: Vec<f64> = Vec::with_capacity(EVAL_QUERIES * EVAL_ANSWERS_PER_QUERY);

    for answer in eval.chunks(EVAL_SENTENCES_PER_ANSWER) {
        let mut gold_score = 0.0f64;
        let mut pred_score = 0.0f64;
        for sentence in answer {
            let p_correct = sigmoid(logit_correct + cue_shift(sentence.cue_correct, cfg.cue_weight));
            let p_faithful =
                sigmoid(logit_faithful + cue_shift(sentence.cue_faithful, cfg.cue_weight));
            if sentence.gold_correct {
                false_incorrect += 1.0 - p_correct;
                gold_score += 1.0;
            } else {
                true_incorrect += 1.0 - p_correct;
                missed_incorrect += p_correct;
            }
            pred_score += p_correct;

            let match_correct = if sentence.gold_correct { p_correct } else { 1.0 - p_correct };
            let match_faithful = if sentence.gold_faithful { p_faithful } else { 1.0 - p_faithful };
            let bonus = if sentence.gold_correct {
                0.0
            } else {
                cfg.variant.bonus_hit * (1.0 - p_correct) + cfg.variant.penalty_miss * p_correct
            };
            reward_sum += match_correct + cfg.variant.alpha * match_faithful + bonus;
        }
        answer_gold.push(gold_score / EVAL_SENTENCES_PER_ANSWER as f64);
        answer_pred.push(pred_score / EVAL_SENTENCES_PER_ANSWER as f64);
    }

    let precision_denominator = true_incorrect + false_incorrect;
    let recall_denominator = true_incorrect + missed_incorrect;
    let f1_incorrect = if precision_denominator == 0.0 || recall_denominator == 0.0 {
        0.0
    } else {
        let precision = true_incorrect / precision_denominator;
        let recall = true_incorrect / recall_denominator;
        if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        }
    };

    let mut detected = 0usize;
    let mut eligible = 0usize;
    for query in 0..EVAL_QUERIES {
        let from = query * EVAL_ANSWERS_PER_QUERY;
        let to = from + EVAL_ANSWERS_PER_QUERY;
        match metrics::detect_worst(&answer_gold[from..to], &answer_pred[from..to]) {
            Ok(bit) => {
                eligible += 1;
                if bit.is_one() {
                    detected += 1;
                }
            }
            Err(MetricsError::DegenerateQuery) => {}
            Err(other) => unreachable!("eval answers are non-empty: {other}"),
        }
    }
    let detection_proxy = if eligible == 0 {
        0.0
    } else {
        detected as f64 / eligible as f64
    };

    SimStep {
        f1_incorrect,
        detection_proxy,
        mean_reward: reward_sum / eval.len() as f64,
    }
}

/// Run one simulation. Deterministic for a fixed config, including the seed.
pub fn run_sim(cfg: &SimConfig) -> SimTrajectory {
    assert!(cfg.steps >= 1, "simulation needs at least one step");
    assert!(cfg.batch_size >= 1, "simulation needs a non-empty batch");
    assert!(
        cfg.class_prior_correct > 0.0 && cfg.class_prior_correct < 1.0,
        "class prior must be strictly inside (0, 1)"
    );

    let eval = generate_eval_set(cfg);
    let faithful_rate = cfg.class_prior_correct * cfg.faith_correct_coupling
        + (1.0 - cfg.class_prior_correct) * (1.0 - cfg.faith_correct_coupling);
    // Start at the base rates: the untrained predictor already knows the
    // priors but nothing else.
    let mut logit_faithful = logit(faithful_rate);
    let mut logit_correct = logit(cfg.class_prior_correct);

    let mut train_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    train_rng.set_stream(0);

    let mut steps = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        steps.push(evaluate(&eval, cfg, logit_faithful, logit_correct));

        let mut gradient_faithful = 0.0f64;
        let mut gradient_correct = 0.0f64;
        for _ in 0..cfg.batch_size {
            let sentence = sample_sentence(&mut train_rng, cfg);
            let p_faithful =
                sigmoid(logit_faithful + cue_shift(sentence.cue_faithful, cfg.cue_weight));
            let p_correct =
                sigmoid(logit_correct + cue_shift(sentence.cue_correct, cfg.cue_weight));
            let pred_faithful = draw(&mut train_rng, p_faithful);
            let pred_correct = draw(&mut train_rng, p_correct);

            let verdict = TrmVerdict {
                faithfulness: Bit::from(pred_faithful),
                reason: String::new(),
                correctness: Bit::from(pred_correct),
            };
            let gold = crate::dataset::SentenceLabel {
                faithfulness: Bit::from(sentence.gold_faithful),
                correctness: Bit::from(sentence.gold_correct),
                rationale: String::new(),
            };
            let reward = trm_sentence_reward(&verdict, &gold, &cfg.variant).value;

            gradient_faithful += reward * (f64::from(u8::from(pred_faithful)) - p_faithful);
            gradient_correct += reward * (f64::from(u8::from(pred_correct)) - p_correct);
        }
        logit_faithful += cfg.learning_rate * gradient_faithful / cfg.batch_size as f64;
        logit_correct += cfg.learning_rate * gradient_correct / cfg.batch_size as f64;
    }

    SimTrajectory { steps }
}

/// Run the three presets under identical settings and rank them by final
/// minority-class F1 (descending; stable for ties).
pub fn compare_variants(cfg_base: &SimConfig) -> Vec<VariantSummary> {
    let presets = [
        RewardConfig::rl_c(),
        RewardConfig::rl_cf(),
        RewardConfig::rl_cf_plus(),
    ];
    let mut summaries: Vec<VariantSummary> = presets
        .iter()
        .map(|preset| {
            let cfg = SimConfig {
                variant: *preset,
                ..cfg_base.clone()
            };
            let trajectory = run_sim(&cfg);
            let last = *trajectory.steps.last().expect("steps >= 1");
            VariantSummary {
                variant: *preset,
                final_f1_incorrect: last.f1_incorrect,
                final_detection_proxy: last.detection_proxy,
                final_mean_reward: last.mean_reward,
            }
        })
        .collect();
    summaries.sort_by(|a, b| {
        b.final_f1_incorrect
            .partial_cmp(&a.final_f1_incorrect)
            .expect("finite metrics")
    });
    summaries
}

/// Render a trajectory as CSV for external plotting.
pub fn to_csv(trajectory: &SimTrajectory) -> String {
    let mut out = String::from("step,f1_incorrect,detection_proxy,mean_reward\n");
    for (index, step) in trajectory.steps.iter().enumerate() {
        out.push_str(&format!(
            "{index},{},{},{}\n",
            step.f1_incorrect, step.detection_proxy, step.mean_reward
        ));
    }
    out
}
