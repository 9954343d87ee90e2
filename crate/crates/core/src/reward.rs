//! Reward shaping for reward-model training and policy training.
//!
//! The reward-model side scores a predicted verdict against a gold label:
//! one point for matching the correctness bit, `alpha` points for matching
//! the faithfulness bit, plus a configurable bonus when the model correctly
//! flags a gold-incorrect sentence (and a penalty when it misses one). Three
//! named presets cover the ablation variants; anything else is `Custom`.
//!
//! The policy side combines a per-sentence correctness bit with an
//! answer-level preference signal weighted by `beta`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bit::Bit;
use crate::dataset::{QueryRecord, SentenceLabel};
use crate::trm::TrmVerdict;

/// Named shaping variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardVariant {
    RlC,
    RlCf,
    RlCfPlus,
    Custom,
}

/// Weights for the shaped reward-model reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Weight on the faithfulness match.
    pub alpha: f64,
    /// Added when the gold sentence is incorrect and the prediction agrees.
    pub bonus_hit: f64,
    /// Added when the gold sentence is incorrect but the prediction calls it
    /// correct; typically negative.
    pub penalty_miss: f64,
    pub variant: RewardVariant,
}

impl RewardConfig {
    /// Correctness match only.
    pub fn rl_c() -> Self {
        RewardConfig {
            alpha: 0.0,
            bonus_hit: 0.0,
            penalty_miss: 0.0,
            variant: RewardVariant::RlC,
        }
    }

    /// Correctness plus half-weight faithfulness.
    pub fn rl_cf() -> Self {
        RewardConfig {
            alpha: 0.5,
            bonus_hit: 0.0,
            penalty_miss: 0.0,
            variant: RewardVariant::RlCf,
        }
    }

    /// Correctness, faithfulness, and the incorrect-label bonus/penalty.
    pub fn rl_cf_plus() -> Self {
        RewardConfig {
            alpha: 0.5,
            bonus_hit: 1.0,
            penalty_miss: -1.0,
            variant: RewardVariant::RlCfPlus,
        }
    }

    pub fn custom(alpha: f64, bonus_hit: f64, penalty_miss: f64) -> Self {
        RewardConfig {
            alpha,
            bonus_hit,
            penalty_miss,
            variant: RewardVariant::Custom,
        }
    }

    pub fn preset(variant: RewardVariant) -> Option<Self> {
        match variant {
            RewardVariant::RlC => Some(Self::rl_c()),
            RewardVariant::RlCf => Some(Self::rl_cf()),
            RewardVariant::RlCfPlus => Some(Self::rl_cf_plus()),
            RewardVariant::Custom => None,
        }
    }
}

impl Default for RewardConfig {
    /// The full shaping variant; the strongest performer of the three presets.
    fn default() -> Self {
        Self::rl_cf_plus()
    }
}

/// A shaped reward together with its additive breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapedReward {
    pub value: f64,
    pub correct_match: Bit,
    pub faith_match: Bit,
    pub bonus_applied: f64,
}

/// Score one predicted verdict against its gold label.
pub fn trm_sentence_reward(pred: &TrmVerdict, gold: &SentenceLabel, cfg: &RewardConfig) -> ShapedReward {
    let correct_match = Bit::from(pred.correctness == gold.correctness);
    let faith_match = Bit::from(pred.faithfulness == gold.faithfulness);
    let bonus_applied = if gold.correctness == Bit::ZERO {
        if pred.correctness == Bit::ZERO {
            cfg.bonus_hit
        } else {
            cfg.penalty_miss
        }
    } else {
        0.0
    };
    ShapedReward {
        value: correct_match.as_f64() + cfg.alpha * faith_match.as_f64() + bonus_applied,
        correct_match,
        faith_match,
        bonus_applied,
    }
}

/// Weight of the preference signal in the combined policy reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyRewardConfig {
    pub beta: f64,
}

impl Default for PolicyRewardConfig {
    fn default() -> Self {
        PolicyRewardConfig { beta: 2.0 }
    }
}

/// Answer-level preference outcome, broadcast to each sentence.
///
/// `Tie` is an extension: the pairwise protocol can fail to reach consensus,
/// and a tie contributes nothing to the reward rather than forcing a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    Win,
    Tie,
    Lose,
}

impl Preference {
    /// The signed unit this preference contributes: +1, 0, or -1.
    pub fn signed_unit(self) -> f64 {
        match self {
            Preference::Win => 1.0,
            Preference::Tie => 0.0,
            Preference::Lose => -1.0,
        }
    }
}

/// Combined per-sentence policy reward: correctness bit plus weighted preference.
pub fn policy_sentence_reward(trm_bit: Bit, prefer: Preference, cfg: &PolicyRewardConfig) -> f64 {
    trm_bit.as_f64() + cfg.beta * prefer.signed_unit()
}

/// Pointer to the answer chosen as the fixed comparison anchor for a query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorRef {
    pub query_id: String,
    pub answer_id: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnchorError {
    #[error("query {query_id}: no answer has a perfect correctness score")]
    NoPerfectAnswer { query_id: String },
}

/// Pick the anchor answer: every sentence judged correct, most sentences wins,
/// ties broken by input order.
///
/// `trm_scores` holds one correctness-bit vector per answer, aligned with
/// `query.answers`; a longer perfect answer makes a more informative
/// comparison target, hence the tie rule.
pub fn select_anchor(query: &QueryRecord, trm_scores: &[Vec<Bit>]) -> Result<AnchorRef, AnchorError> {
    assert_eq!(
        trm_scores.len(),
        query.answers.len(),
        "one score vector per answer"
    );
    let mut best: Option<(usize, usize)> = None; // (sentence count, index)
    for (index, bits) in trm_scores.iter().enumerate() {
        if bits.is_empty() || !bits.iter().all(|b| b.is_one()) {
            continue;
        }
        let candidate = (bits.len(), index);
        best = match best {
            Some((len, at)) if len >= bits.len() => Some((len, at)),
            _ => Some(candidate),
        };
    }
    match best {
        Some((_, index)) => Ok(AnchorRef {
            query_id: query.query_id.clone(),
            answer_id: query.answers[index].answer_id.clone(),
        }),
        None => Err(AnchorError::NoPerfectAnswer {
            query_id: query.query_id.clone(),
        }),
    }
}
