//! `simulate`: train the synthetic label predictor under a shaping variant
//! and export the trajectory, or compare all presets side by side.

use std::path::PathBuf;

use frc_core::reward::RewardVariant;
use frc_core::sim::{compare_variants, run_sim, to_csv};

use crate::config::{self, Overlay, SimOverlay};
use crate::ioutil;
use crate::{CmdResult, Failure};

#[derive(clap::Args)]
pub struct SimulateArgs {
    /// Write the trajectory CSV (or comparison JSON) here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Run all three presets under identical settings and rank them
    #[arg(long)]
    compare: bool,
    /// Shaping preset: rl_c, rl_cf, rl_cf_plus
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// P(gold correctness = 1) per sentence
    #[arg(long)]
    class_prior_correct: Option<f64>,
    /// P(gold faithfulness co-occurs with gold correctness)
    #[arg(long)]
    faith_correct_coupling: Option<f64>,
    /// P(cue bit agrees with its gold bit)
    #[arg(long)]
    cue_accuracy: Option<f64>,
    /// Logit weight of the cue channel
    #[arg(long)]
    cue_weight: Option<f64>,
}

impl SimulateArgs {
    fn overlay(&self) -> Overlay {
        Overlay {
            sim: SimOverlay {
                class_prior_correct: self.class_prior_correct,
                faith_correct_coupling: self.faith_correct_coupling,
                cue_accuracy: self.cue_accuracy,
                cue_weight: self.cue_weight,
                steps: self.steps,
                batch_size: self.batch_size,
                learning_rate: self.learning_rate,
                seed: self.seed,
                variant: self.variant.clone(),
            },
            ..Default::default()
        }
    }
}

fn variant_name(variant: RewardVariant) -> &'static str {
    match variant {
        RewardVariant::RlC => "rl_c",
        RewardVariant::RlCf => "rl_cf",
        RewardVariant::RlCfPlus => "rl_cf_plus",
        RewardVariant::Custom => "custom",
    }
}

pub fn run(args: &SimulateArgs, file_cfg: Option<&Overlay>) -> CmdResult {
    let settings = config::resolve(file_cfg, &args.overlay())?;
    let cfg = &settings.sim;

    if args.compare {
        let summaries = compare_variants(cfg);
        let mut body = serde_json::to_string_pretty(&summaries)
            .map_err(|e| Failure::data(format!("serialize comparison: {e}")))?;
        body.push('\n');
        let best = &summaries[0];
        let summary = format!(
            "best final F1(incorrect): {} at {:.4}",
            variant_name(best.variant.variant),
            best.final_f1_incorrect
        );
        return ioutil::emit(args.out.as_deref(), &body, "simulate", &settings, &[], &summary);
    }

    let trajectory = run_sim(cfg);
    let body = to_csv(&trajectory);
    let last = trajectory.steps.last().expect("steps >= 1");
    let summary = format!(
        "ran {} steps (variant {}, seed {}): final F1(incorrect) {:.4}, detection proxy {:.4}, mean reward {:.4}",
        cfg.steps,
        variant_name(cfg.variant.variant),
        cfg.seed,
        last.f1_incorrect,
        last.detection_proxy,
        last.mean_reward
    );
    ioutil::emit(args.out.as_deref(), &body, "simulate", &settings, &[], &summary)
}
