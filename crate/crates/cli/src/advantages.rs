//! `advantages`: normalize rollout groups into trainer-ready token credit.
//!
//! Output layout: the first line is the credit configuration the records were
//! produced under, each following line one advantage record. A trainer can
//! verify it agrees about epsilon and the KL coefficient before consuming
//! anything.

use std::path::PathBuf;

use frc_core::grpo::{process_group, RolloutGroup};

use crate::config::{self, CreditOverlay, Overlay};
use crate::ioutil;
use crate::{CmdResult, Failure};

#[derive(clap::Args)]
pub struct AdvantagesArgs {
    /// JSONL input, one rollout group per line; stdin when omitted
    input: Option<PathBuf>,
    /// Write credit records here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Rollout scalar: mean or sum
    #[arg(long)]
    aggregation: Option<String>,
    /// Zero-variance guard on the group standard deviation
    #[arg(long)]
    epsilon: Option<f64>,
    /// Token spread: uniform or sentence_weighted
    #[arg(long)]
    credit_policy: Option<String>,
    /// KL coefficient recorded for the trainer
    #[arg(long)]
    kl_coefficient: Option<f64>,
}

impl AdvantagesArgs {
    fn overlay(&self) -> Overlay {
        Overlay {
            credit: CreditOverlay {
                aggregation: self.aggregation.clone(),
                epsilon: self.epsilon,
                policy: self.credit_policy.clone(),
                kl_coefficient: self.kl_coefficient,
            },
            ..Default::default()
        }
    }
}

pub fn run(args: &AdvantagesArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &args.overlay())?;
    let text = ioutil::read_input(args.input.as_deref())?;

    let mut rows = vec![serde_json::to_string(&settings.credit)
        .map_err(|e| Failure::data(format!("serialize credit config: {e}")))?];
    let mut groups = 0usize;
    let mut rollouts = 0usize;
    for (line_no, line) in ioutil::jsonl_lines(&text) {
        let group: RolloutGroup = serde_json::from_str(line)
            .map_err(|e| Failure::data(format!("line {line_no}: invalid group: {e}")))?;
        let records = process_group(&group, &settings.credit).map_err(|e| {
            Failure::data(format!("line {line_no} (query {}): {e}", group.query_id))
        })?;
        groups += 1;
        rollouts += records.len();
        for record in records {
            rows.push(
                serde_json::to_string(&record)
                    .map_err(|e| Failure::data(format!("serialize record: {e}")))?,
            );
        }
    }
    if groups == 0 {
        return Err(Failure::data("input holds no rollout groups"));
    }

    let body = ioutil::to_jsonl(&rows);
    let inputs: Vec<&std::path::Path> = args.input.iter().map(PathBuf::as_path).collect();
    let summary = format!("credited {rollouts} rollouts across {groups} groups");
    ioutil::emit(
        args.out.as_deref(),
        &body,
        "advantages",
        &settings,
        &inputs,
        &summary,
    )
}
