//! `reward`: score verdicts against gold labels (reward-model training
//! signal) or preference rows (policy training signal).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use frc_core::dataset::SentenceLabel;
use frc_core::reward::{policy_sentence_reward, trm_sentence_reward, Preference, ShapedReward};
use frc_core::trm::TrmVerdict;
use frc_core::Bit;

use crate::config::{self, Overlay, RewardOverlay};
use crate::ioutil;
use crate::{CmdResult, Failure};

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RewardMode {
    /// Shaped reward for a predicted verdict against its gold label.
    Trm,
    /// Combined correctness-plus-preference reward for a policy sentence.
    Policy,
}

#[derive(clap::Args)]
pub struct RewardArgs {
    /// JSONL input rows; stdin when omitted
    input: Option<PathBuf>,
    /// Write reward rows here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "trm")]
    mode: RewardMode,
    /// Shaping preset: rl_c, rl_cf, rl_cf_plus, or custom
    #[arg(long)]
    variant: Option<String>,
    /// Weight on the faithfulness match
    #[arg(long)]
    alpha: Option<f64>,
    /// Bonus when an incorrect gold sentence is predicted incorrect
    #[arg(long)]
    bonus_hit: Option<f64>,
    /// Penalty when an incorrect gold sentence is predicted correct
    #[arg(long)]
    penalty_miss: Option<f64>,
    /// Preference weight in the policy reward
    #[arg(long)]
    beta: Option<f64>,
}

impl RewardArgs {
    fn overlay(&self) -> Overlay {
        Overlay {
            reward: RewardOverlay {
                variant: self.variant.clone(),
                alpha: self.alpha,
                bonus_hit: self.bonus_hit,
                penalty_miss: self.penalty_miss,
                beta: self.beta,
            },
            ..Default::default()
        }
    }
}

/// Gold label as it appears in reward input rows; `rationale` is optional
/// here because scoring never reads it.
#[derive(Deserialize)]
struct GoldLabel {
    faithfulness: Bit,
    correctness: Bit,
    #[serde(default)]
    rationale: String,
}

#[derive(Deserialize)]
struct PredVerdict {
    faithfulness: Bit,
    #[serde(default)]
    reason: String,
    correctness: Bit,
}

#[derive(Deserialize)]
struct TrmRow {
    #[serde(default)]
    id: Option<Value>,
    pred: PredVerdict,
    gold: GoldLabel,
}

#[derive(Serialize)]
struct TrmOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<Value>,
    #[serde(flatten)]
    reward: ShapedReward,
}

#[derive(Deserialize)]
struct PolicyRow {
    #[serde(default)]
    id: Option<Value>,
    trm_bit: Bit,
    prefer: Preference,
}

#[derive(Serialize)]
struct PolicyOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<Value>,
    value: f64,
}

pub fn run(args: &RewardArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &args.overlay())?;
    let text = ioutil::read_input(args.input.as_deref())?;

    let mut rows = Vec::new();
    for (line_no, line) in ioutil::jsonl_lines(&text) {
        let row = match args.mode {
            RewardMode::Trm => {
                let input: TrmRow = serde_json::from_str(line)
                    .map_err(|e| Failure::data(format!("line {line_no}: invalid row: {e}")))?;
                let pred = TrmVerdict {
                    faithfulness: input.pred.faithfulness,
                    reason: input.pred.reason,
                    correctness: input.pred.correctness,
                };
                let gold = SentenceLabel {
                    faithfulness: input.gold.faithfulness,
                    correctness: input.gold.correctness,
                    rationale: input.gold.rationale,
                };
                let reward = trm_sentence_reward(&pred, &gold, &settings.reward);
                serde_json::to_string(&TrmOutput {
                    id: input.id,
                    reward,
                })
            }
            RewardMode::Policy => {
                let input: PolicyRow = serde_json::from_str(line)
                    .map_err(|e| Failure::data(format!("line {line_no}: invalid row: {e}")))?;
                let value = policy_sentence_reward(input.trm_bit, input.prefer, &settings.policy);
                serde_json::to_string(&PolicyOutput {
                    id: input.id,
                    value,
                })
            }
        }
        .map_err(|e| Failure::data(format!("serialize row: {e}")))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Failure::data("input holds no rows"));
    }

    let body = ioutil::to_jsonl(&rows);
    let inputs: Vec<&std::path::Path> = args.input.iter().map(PathBuf::as_path).collect();
    let summary = match args.mode {
        RewardMode::Trm => format!(
            "scored {} sentences (alpha {}, bonus {}, penalty {})",
            rows.len(),
            settings.reward.alpha,
            settings.reward.bonus_hit,
            settings.reward.penalty_miss
        ),
        RewardMode::Policy => format!(
            "scored {} sentences (beta {})",
            rows.len(),
            settings.policy.beta
        ),
    };
    ioutil::emit(
        args.out.as_deref(),
        &body,
        "reward",
        &settings,
        &inputs,
        &summary,
    )
}
