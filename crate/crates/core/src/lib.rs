//! Sentence-level reward modeling for retrieval-grounded QA.
//!
//! The crate covers the full path from raw answer text to trainer-ready
//! credit signals:
//!
//! - [`segmenter`]: rule-based sentence segmentation with `[Sentence i]`
//!   markers and a byte-exact round trip back to the source text.
//! - [`dataset`]: the annotated corpus model (queries, documents, answers,
//!   per-sentence faithfulness/correctness labels) and its JSONL form.
//! - [`trm`]: prompt assembly for the sentence-verdict judge and the policy
//!   model, plus lenient parsing of verdict lists out of model output.
//! - [`reward`]: per-sentence shaped rewards (correctness + weighted
//!   faithfulness, optional bonus/penalty on the minority class) and the
//!   anchor-preference reward for policy training.
//! - [`grpo`]: group-relative advantage normalization and token-level
//!   credit broadcast for rollout groups.
//! - [`metrics`]: label-level F1/recall, answer scores, worst-answer
//!   detection, NDCG@4, and dataset-level report compilation.
//! - [`judge`]: chat-completion judge clients (HTTP or deterministic mock),
//!   answer-level correctness analysis, and position-debiased usefulness
//!   duels.
//! - [`sim`]: a small policy-gradient simulator showing how each reward
//!   variant shapes a label predictor under class imbalance.

pub mod bit;
pub mod dataset;
pub mod grpo;
pub mod judge;
pub mod metrics;
pub mod reward;
pub mod segmenter;
pub mod sim;
pub mod trm;

pub use bit::Bit;
