//! Group-relative advantages and token-level credit for an external trainer.
//!
//! Each query yields a group of rollouts; every rollout carries per-sentence
//! rewards and the token span each sentence occupies. This module collapses
//! sentence rewards to one scalar per rollout, normalizes scalars within the
//! group to advantages, and broadcasts each advantage over the rollout's
//! tokens. Policy-gradient mechanics (ratios, clipping, KL) stay on the
//! trainer side; the KL coefficient rides along as export metadata only.
//!
//! Numerical note: deviations are computed as (G*r_i - S)/G rather than
//! r_i - S/G. For integer-valued rewards every intermediate is exact, so
//! shifting all rewards by a constant leaves the output bit-identical.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default zero-variance guard.
pub const DEFAULT_EPSILON: f64 = 1e-8;
/// KL regularization strength expected by the downstream trainer; exported in
/// the credit-file header, never used in the math here.
pub const KL_COEFFICIENT: f64 = 0.01;

/// One sampled answer: per-sentence rewards plus the token layout.
///
/// Spans are half-open `[start, end)` token index ranges, ordered and
/// disjoint, one per sentence. `token_count` covers the whole rollout;
/// tokens outside every span (markers, glue) still receive credit entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rollout {
    pub rollout_id: String,
    pub sentence_rewards: Vec<f64>,
    pub sentence_token_spans: Vec<(usize, usize)>,
    pub token_count: usize,
}

/// All rollouts sampled for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub query_id: String,
    pub rollouts: Vec<Rollout>,
}

/// How per-sentence rewards collapse to the rollout scalar.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    /// Length-normalized; answers of different lengths stay comparable.
    #[default]
    Mean,
    Sum,
}

/// How a rollout's advantage spreads over its tokens.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CreditPolicy {
    /// Every token carries the rollout advantage unchanged.
    #[default]
    Uniform,
    /// Tokens in sentence k carry advantage * (reward_k - rollout mean reward);
    /// tokens outside any sentence span carry zero.
    SentenceWeighted,
}

/// Settings written verbatim as the header line of a credit export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreditConfig {
    pub mode: AggregationMode,
    pub epsilon: f64,
    pub policy: CreditPolicy,
    pub kl_coefficient: f64,
}

impl Default for CreditConfig {
    fn default() -> Self {
        CreditConfig {
            mode: AggregationMode::default(),
            epsilon: DEFAULT_EPSILON,
            policy: CreditPolicy::default(),
            kl_coefficient: KL_COEFFICIENT,
        }
    }
}

/// Trainer-facing output for one rollout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageRecord {
    pub rollout_id: String,
    pub scalar_reward: f64,
    pub advantage: f64,
    pub token_credit: Vec<f64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrpoError {
    #[error("rollout has no sentence rewards")]
    EmptyRewards,
    #[error("group of {got} rollouts cannot be normalized (need at least 2)")]
    GroupTooSmall { got: usize },
    #[error("rollout {rollout_id}: {detail}")]
    SpanMismatch { rollout_id: String, detail: String },
}

/// Collapse per-sentence rewards to the rollout scalar.
pub fn rollout_scalar(sentence_rewards: &[f64], mode: AggregationMode) -> Result<f64, GrpoError> {
    if sentence_rewards.is_empty() {
        return Err(GrpoError::EmptyRewards);
    }
    let sum: f64 = sentence_rewards.iter().sum();
    Ok(match mode {
        AggregationMode::Mean => sum / sentence_rewards.len() as f64,
        AggregationMode::Sum => sum,
    })
}

/// Normalize group scalars to zero-mean, unit-std advantages.
///
/// Population (divide-by-G) standard deviation; groups whose std falls below
/// `epsilon` are degenerate and return all zeros.
pub fn group_advantages(scalars: &[f64], epsilon: f64) -> Result<Vec<f64>, GrpoError> {
    let g = scalars.len();
    if g < 2 {
        return Err(GrpoError::GroupTooSmall { got: g });
    }
    let g_f = g as f64;
    let sum: f64 = scalars.iter().sum();
    let deviations: Vec<f64> = scalars.iter().map(|&r| (g_f * r - sum) / g_f).collect();
    let variance = deviations.iter().map(|d| d * d).sum::<f64>() / g_f;
    let std = variance.sqrt();
    if std < epsilon {
        return Ok(vec![0.0; g]);
    }
    Ok(deviations.into_iter().map(|d| d / std).collect())
}

fn validate_rollout(rollout: &Rollout) -> Result<(), GrpoError> {
    let mismatch = |detail: String| GrpoError::SpanMismatch {
        rollout_id: rollout.rollout_id.clone(),
        detail,
    };
    if rollout.sentence_rewards.len() != rollout.sentence_token_spans.len() {
        return Err(mismatch(format!(
            "{} rewards but {} token spans",
            rollout.sentence_rewards.len(),
            rollout.sentence_token_spans.len()
        )));
    }
    let mut previous_end = 0usize;
    for &(start, end) in &rollout.sentence_token_spans {
        if start >= end {
            return Err(mismatch(format!("empty or inverted span ({start}, {end})")));
        }
        if start < previous_end {
            return Err(mismatch(format!(
                "span ({start}, {end}) overlaps or precedes the span ending at {previous_end}"
            )));
        }
        if end > rollout.token_count {
            return Err(mismatch(format!(
                "span ({start}, {end}) exceeds token count {}",
                rollout.token_count
            )));
        }
        previous_end = end;
    }
    Ok(())
}

/// Spread each rollout's advantage over its tokens.
///
/// `scalars` and `advantages` must align with `group.rollouts` (one entry
/// each); both come from `rollout_scalar` / `group_advantages` over the same
/// group, which `process_group` handles in one call.
pub fn broadcast_credit(
    group: &RolloutGroup,
    scalars: &[f64],
    advantages: &[f64],
    policy: CreditPolicy,
) -> Result<Vec<AdvantageRecord>, GrpoError> {
    assert_eq!(scalars.len(), group.rollouts.len(), "one scalar per rollout");
    assert_eq!(advantages.len(), group.rollouts.len(), "one advantage per rollout");
    let mut records = Vec::with_capacity(group.rollouts.len());
    for ((rollout, &scalar), &advantage) in group.rollouts.iter().zip(scalars).zip(advantages) {
        validate_rollout(rollout)?;
        let token_credit = match policy {
            CreditPolicy::Uniform => vec![advantage; rollout.token_count],
            CreditPolicy::SentenceWeighted => {
                let mut credit = vec![0.0; rollout.token_count];
                if !rollout.sentence_rewards.is_empty() {
                    let mean: f64 = rollout.sentence_rewards.iter().sum::<f64>()
                        / rollout.sentence_rewards.len() as f64;
                    for (&reward, &(start, end)) in rollout
                        .sentence_rewards
                        .iter()
                        .zip(&rollout.sentence_token_spans)
                    {
                        let value = advantage * (reward - mean);
                        for slot in &mut credit[start..end] {
                            *slot = value;
                        }
                    }
                }
                credit
            }
        };
        records.push(AdvantageRecord {
            rollout_id: rollout.rollout_id.clone(),
            scalar_reward: scalar,
            advantage,
            token_credit,
        });
    }
    Ok(records)
}

/// Full pipeline for one group: scalars, advantages, token credit.
pub fn process_group(group: &RolloutGroup, cfg: &CreditConfig) -> Result<Vec<AdvantageRecord>, GrpoError> {
    let scalars = group
        .rollouts
        .iter()
        .map(|r| rollout_scalar(&r.sentence_rewards, cfg.mode))
        .collect::<Result<Vec<_>, _>>()?;
    let advantages = group_advantages(&scalars, cfg.epsilon)?;
    broadcast_credit(group, &scalars, &advantages, cfg.policy)
}
