//! Layered runtime configuration.
//!
//! Four layers, strongest last: built-in defaults, the TOML config file,
//! command-line flags, `FRC_*` environment variables. Every layer is the same
//! `Overlay` shape (all fields optional); resolution folds them onto the
//! concrete core config types. Environment variables follow the file layout:
//! `FRC_<SECTION>_<KEY>`, e.g. `FRC_REWARD_ALPHA` or `FRC_JUDGE_BASE_URL`.

use std::env;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use frc_core::grpo::{AggregationMode, CreditConfig, CreditPolicy};
use frc_core::judge::ChatEndpointConfig;
use frc_core::reward::{PolicyRewardConfig, RewardConfig, RewardVariant};
use frc_core::sim::SimConfig;

use crate::Failure;

/// Fully resolved settings handed to the subcommands.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Settings {
    pub reward: RewardConfig,
    pub policy: PolicyRewardConfig,
    pub credit: CreditConfig,
    pub judge: ChatEndpointConfig,
    pub sim: SimConfig,
}

/// One configuration layer; unset fields leave the lower layers alone.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overlay {
    pub reward: RewardOverlay,
    pub credit: CreditOverlay,
    pub judge: JudgeOverlay,
    pub sim: SimOverlay,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardOverlay {
    /// Preset name: rl_c, rl_cf, rl_cf_plus, or custom (keeps current weights).
    pub variant: Option<String>,
    pub alpha: Option<f64>,
    pub bonus_hit: Option<f64>,
    pub penalty_miss: Option<f64>,
    /// Preference weight for the policy reward.
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CreditOverlay {
    /// mean or sum.
    pub aggregation: Option<String>,
    pub epsilon: Option<f64>,
    /// uniform or sentence_weighted.
    pub policy: Option<String>,
    pub kl_coefficient: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgeOverlay {
    pub base_url: Option<String>,
    pub model_name: Option<String>,
    pub api_key_env: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_retries: Option<u32>,
    pub temperature: Option<f64>,
    pub top_k: Option<u32>,
    pub retry_backoff_ms: Option<u64>,
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOverlay {
    pub class_prior_correct: Option<f64>,
    pub faith_correct_coupling: Option<f64>,
    pub cue_accuracy: Option<f64>,
    pub cue_weight: Option<f64>,
    pub steps: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub seed: Option<u64>,
    /// Preset name only; custom shaping is a reward-section concern.
    pub variant: Option<String>,
}

/// Load the config file layer from `--config`, falling back to `FRC_CONFIG`.
pub fn load_file(path: Option<&Path>) -> Result<Option<Overlay>, Failure> {
    let path: Option<PathBuf> = match path {
        Some(p) => Some(p.to_path_buf()),
        None => env::var_os("FRC_CONFIG").map(PathBuf::from),
    };
    let Some(path) = path else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
    let overlay: Overlay = toml::from_str(&text)
        .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
    Ok(Some(overlay))
}

/// Fold the layers onto the defaults: file, then flags, then environment.
pub fn resolve(file: Option<&Overlay>, flags: &Overlay) -> Result<Settings, Failure> {
    let mut settings = Settings::default();
    if let Some(overlay) = file {
        apply(&mut settings, overlay)?;
    }
    apply(&mut settings, flags)?;
    apply(&mut settings, &from_env()?)?;
    validate(&settings)?;
    Ok(settings)
}

fn apply(settings: &mut Settings, overlay: &Overlay) -> Result<(), Failure> {
    let r = &overlay.reward;
    if let Some(name) = &r.variant {
        if let Some(preset) = parse_variant(name)? {
            settings.reward = preset;
        } else {
            settings.reward.variant = RewardVariant::Custom;
        }
    }
    if let Some(alpha) = r.alpha {
        settings.reward.alpha = alpha;
    }
    if let Some(bonus) = r.bonus_hit {
        settings.reward.bonus_hit = bonus;
    }
    if let Some(penalty) = r.penalty_miss {
        settings.reward.penalty_miss = penalty;
    }
    classify_variant(&mut settings.reward);
    if let Some(beta) = r.beta {
        settings.policy.beta = beta;
    }

    let c = &overlay.credit;
    if let Some(name) = &c.aggregation {
        settings.credit.mode = parse_aggregation(name)?;
    }
    if let Some(epsilon) = c.epsilon {
        settings.credit.epsilon = epsilon;
    }
    if let Some(name) = &c.policy {
        settings.credit.policy = parse_credit_policy(name)?;
    }
    if let Some(kl) = c.kl_coefficient {
        settings.credit.kl_coefficient = kl;
    }

    let j = &overlay.judge;
    if let Some(v) = &j.base_url {
        settings.judge.base_url = v.clone();
    }
    if let Some(v) = &j.model_name {
        settings.judge.model_name = v.clone();
    }
    if let Some(v) = &j.api_key_env {
        settings.judge.api_key_env = v.clone();
    }
    if let Some(v) = j.timeout_secs {
        settings.judge.timeout_secs = v;
    }
    if let Some(v) = j.max_retries {
        settings.judge.max_retries = v;
    }
    if let Some(v) = j.temperature {
        settings.judge.temperature = v;
    }
    if let Some(v) = j.top_k {
        settings.judge.top_k = v;
    }
    if let Some(v) = j.retry_backoff_ms {
        settings.judge.retry_backoff_ms = v;
    }
    if let Some(v) = j.max_in_flight {
        settings.judge.max_in_flight = v;
    }

    let s = &overlay.sim;
    if let Some(v) = s.class_prior_correct {
        settings.sim.class_prior_correct = v;
    }
    if let Some(v) = s.faith_correct_coupling {
        settings.sim.faith_correct_coupling = v;
    }
    if let Some(v) = s.cue_accuracy {
        settings.sim.cue_accuracy = v;
    }
    if let Some(v) = s.cue_weight {
        settings.sim.cue_weight = v;
    }
    if let Some(v) = s.steps {
        settings.sim.steps = v;
    }
    if let Some(v) = s.batch_size {
        settings.sim.batch_size = v;
    }
    if let Some(v) = s.learning_rate {
        settings.sim.learning_rate = v;
    }
    if let Some(v) = s.seed {
        settings.sim.seed = v;
    }
    if let Some(name) = &s.variant {
        settings.sim.variant = parse_variant(name)?.ok_or_else(|| {
            Failure::usage("sim variant must be a preset (rl_c, rl_cf, rl_cf_plus)")
        })?;
    }
    Ok(())
}

fn from_env() -> Result<Overlay, Failure> {
    Ok(Overlay {
        reward: RewardOverlay {
            variant: env_string("FRC_REWARD_VARIANT"),
            alpha: env_parse("FRC_REWARD_ALPHA")?,
            bonus_hit: env_parse("FRC_REWARD_BONUS_HIT")?,
            penalty_miss: env_parse("FRC_REWARD_PENALTY_MISS")?,
            beta: env_parse("FRC_REWARD_BETA")?,
        },
        credit: CreditOverlay {
            aggregation: env_string("FRC_CREDIT_AGGREGATION"),
            epsilon: env_parse("FRC_CREDIT_EPSILON")?,
            policy: env_string("FRC_CREDIT_POLICY"),
            kl_coefficient: env_parse("FRC_CREDIT_KL_COEFFICIENT")?,
        },
        judge: JudgeOverlay {
            base_url: env_string("FRC_JUDGE_BASE_URL"),
            model_name: env_string("FRC_JUDGE_MODEL_NAME"),
            api_key_env: env_string("FRC_JUDGE_API_KEY_ENV"),
            timeout_secs: env_parse("FRC_JUDGE_TIMEOUT_SECS")?,
            max_retries: env_parse("FRC_JUDGE_MAX_RETRIES")?,
            temperature: env_parse("FRC_JUDGE_TEMPERATURE")?,
            top_k: env_parse("FRC_JUDGE_TOP_K")?,
            retry_backoff_ms: env_parse("FRC_JUDGE_RETRY_BACKOFF_MS")?,
            max_in_flight: env_parse("FRC_JUDGE_MAX_IN_FLIGHT")?,
        },
        sim: SimOverlay {
            class_prior_correct: env_parse("FRC_SIM_CLASS_PRIOR_CORRECT")?,
            faith_correct_coupling: env_parse("FRC_SIM_FAITH_CORRECT_COUPLING")?,
            cue_accuracy: env_parse("FRC_SIM_CUE_ACCURACY")?,
            cue_weight: env_parse("FRC_SIM_CUE_WEIGHT")?,
            steps: env_parse("FRC_SIM_STEPS")?,
            batch_size: env_parse("FRC_SIM_BATCH_SIZE")?,
            learning_rate: env_parse("FRC_SIM_LEARNING_RATE")?,
            seed: env_parse("FRC_SIM_SEED")?,
            variant: env_string("FRC_SIM_VARIANT"),
        },
    })
}

fn env_string(name: &str) -> Option<String> {
    env::var(name).ok().filter(|v| !v.is_empty())
}

fn env_parse<T: std::str::FromStr>(name: &str) -> Result<Option<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    match env_string(name) {
        None => Ok(None),
        Some(raw) => raw
            .trim()
            .parse::<T>()
            .map(Some)
            .map_err(|e| Failure::usage(format!("{name}={raw}: {e}"))),
    }
}

fn canonical(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace('-', "_")
}

/// Preset lookup; `custom` is recognized but carries no weights of its own.
fn parse_variant(name: &str) -> Result<Option<RewardConfig>, Failure> {
    match canonical(name).as_str() {
        "rl_c" => Ok(Some(RewardConfig::rl_c())),
        "rl_cf" => Ok(Some(RewardConfig::rl_cf())),
        "rl_cf_plus" => Ok(Some(RewardConfig::rl_cf_plus())),
        "custom" => Ok(None),
        other => Err(Failure::usage(format!(
            "unknown reward variant `{other}` (expected rl_c, rl_cf, rl_cf_plus, or custom)"
        ))),
    }
}

/// Keep the variant label honest after weight overrides: a triple that equals
/// a preset is that preset, anything else is custom.
fn classify_variant(cfg: &mut RewardConfig) {
    let triple = (cfg.alpha, cfg.bonus_hit, cfg.penalty_miss);
    cfg.variant = if triple == (0.0, 0.0, 0.0) {
        RewardVariant::RlC
    } else if triple == (0.5, 0.0, 0.0) {
        RewardVariant::RlCf
    } else if triple == (0.5, 1.0, -1.0) {
        RewardVariant::RlCfPlus
    } else {
        RewardVariant::Custom
    };
}

fn parse_aggregation(name: &str) -> Result<AggregationMode, Failure> {
    match canonical(name).as_str() {
        "mean" => Ok(AggregationMode::Mean),
        "sum" => Ok(AggregationMode::Sum),
        other => Err(Failure::usage(format!(
            "unknown aggregation `{other}` (expected mean or sum)"
        ))),
    }
}

fn parse_credit_policy(name: &str) -> Result<CreditPolicy, Failure> {
    match canonical(name).as_str() {
        "uniform" => Ok(CreditPolicy::Uniform),
        "sentence_weighted" => Ok(CreditPolicy::SentenceWeighted),
        other => Err(Failure::usage(format!(
            "unknown credit policy `{other}` (expected uniform or sentence_weighted)"
        ))),
    }
}

fn validate(settings: &Settings) -> Result<(), Failure> {
    let sim = &settings.sim;
    if !(sim.class_prior_correct > 0.0 && sim.class_prior_correct < 1.0) {
        return Err(Failure::usage(
            "sim class_prior_correct must be strictly inside (0, 1)",
        ));
    }
    for (name, value) in [
        ("faith_correct_coupling", sim.faith_correct_coupling),
        ("cue_accuracy", sim.cue_accuracy),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Failure::usage(format!("sim {name} must be in [0, 1]")));
        }
    }
    if sim.steps == 0 {
        return Err(Failure::usage("sim steps must be at least 1"));
    }
    if sim.batch_size == 0 {
        return Err(Failure::usage("sim batch_size must be at least 1"));
    }
    if sim.learning_rate.is_nan() || sim.learning_rate < 0.0 {
        return Err(Failure::usage("sim learning_rate must be non-negative"));
    }
    if settings.credit.epsilon.is_nan() || settings.credit.epsilon < 0.0 {
        return Err(Failure::usage("credit epsilon must be non-negative"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_core() {
        let settings = resolve(None, &Overlay::default()).unwrap();
        assert_eq!(settings.reward, RewardConfig::rl_cf_plus());
        assert_eq!(settings.policy.beta, 2.0);
        assert_eq!(settings.credit, CreditConfig::default());
        assert_eq!(settings.sim.class_prior_correct, 0.8686);
    }

    #[test]
    fn file_layer_applies_under_flags() {
        let file: Overlay = toml::from_str(
            "[reward]\nvariant = \"rl_c\"\n\n[sim]\nsteps = 7\n",
        )
        .unwrap();
        let flags = Overlay {
            sim: SimOverlay {
                steps: Some(9),
                ..Default::default()
            },
            ..Default::default()
        };
        let settings = resolve(Some(&file), &flags).unwrap();
        assert_eq!(settings.reward.variant, RewardVariant::RlC);
        assert_eq!(settings.sim.steps, 9, "flags beat the file");
    }

    #[test]
    fn weight_overrides_relabel_the_variant() {
        let flags = Overlay {
            reward: RewardOverlay {
                variant: Some("rl_cf_plus".into()),
                bonus_hit: Some(2.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let settings = resolve(None, &flags).unwrap();
        assert_eq!(settings.reward.variant, RewardVariant::Custom);
        assert_eq!(settings.reward.alpha, 0.5);
        assert_eq!(settings.reward.bonus_hit, 2.0);
    }

    #[test]
    fn unknown_names_are_usage_errors() {
        let flags = Overlay {
            reward: RewardOverlay {
                variant: Some("rl_x".into()),
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(matches!(resolve(None, &flags), Err(Failure::Usage(_))));
    }

    #[test]
    fn bad_probability_is_a_usage_error() {
        let flags = Overlay {
            sim: SimOverlay {
                class_prior_correct: Some(1.0),
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(matches!(resolve(None, &flags), Err(Failure::Usage(_))));
    }
}
