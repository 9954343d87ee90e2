//! Property-based checks for the invariants the rest of the pipeline leans
//! on: segmentation must never lose a byte, advantage normalization must stay
//! centered, and verdict serialization must survive a round trip.

mod common;

use proptest::prelude::*;

use frc_core::grpo::group_advantages;
use frc_core::reward::{trm_sentence_reward, RewardConfig};
use frc_core::segmenter::{inserted_marker_count, segment, strip_markers};
use frc_core::trm::{parse_verdicts, serialize_verdicts, TrmVerdict};
use frc_core::{dataset::SentenceLabel, Bit};

/// Answer-like text: prose mixed with the characters most likely to confuse
/// the segmenter (terminal runs, CJK punctuation, literal markers, the escape
/// character itself, decimals, newlines).
fn answer_text() -> impl Strategy<Value = String> {
    let fragment = prop_oneof![
        "[a-zA-Z0-9 ]{1,12}",
        Just("。".to_string()),
        Just("！？".to_string()),
        Just("...".to_string()),
        Just("?!".to_string()),
        Just(" [Sentence 3] ".to_string()),
        Just("\u{241B}".to_string()),
        Just("3.14".to_string()),
        Just("\n".to_string()),
        Just("\n- item one.\n".to_string()),
        Just("\n# Heading\n".to_string()),
        Just("中文句子".to_string()),
        Just("；".to_string()),
    ];
    proptest::collection::vec(fragment, 1..20).prop_map(|parts| parts.concat())
}

proptest! {
    #[test]
    fn segmentation_reconstructs_any_input(text in answer_text()) {
        match segment(&text) {
            Ok(segmented) => {
                let rejoined: String = segmented.segments.iter().map(|s| s.text.as_str()).collect();
                prop_assert_eq!(rejoined.as_bytes(), text.as_bytes());
                prop_assert_eq!(
                    inserted_marker_count(&segmented.marked_text),
                    segmented.segments.len()
                );
                let stripped = strip_markers(&segmented.marked_text);
                prop_assert_eq!(stripped.as_bytes(), text.as_bytes());
            }
            Err(_) => prop_assert!(text.trim().is_empty(), "only blank input may be rejected"),
        }
    }

    #[test]
    fn segmentation_reconstructs_arbitrary_unicode(text in "\\PC{0,60}") {
        if let Ok(segmented) = segment(&text) {
            let stripped = strip_markers(&segmented.marked_text);
            prop_assert_eq!(stripped.as_bytes(), text.as_bytes());
        }
    }

    #[test]
    fn advantages_stay_centered(
        scalars in proptest::collection::vec(-100.0f64..100.0, 2..64)
    ) {
        let advantages = group_advantages(&scalars, 1e-8).unwrap();
        prop_assert_eq!(advantages.len(), scalars.len());
        let mean = advantages.iter().sum::<f64>() / advantages.len() as f64;
        prop_assert!(mean.abs() < 1e-9, "mean {} out of tolerance", mean);
        let all_zero = advantages.iter().all(|&a| a == 0.0);
        let spread = scalars.iter().any(|&s| s != scalars[0]);
        prop_assert!(all_zero != spread || !spread, "zeroing must track degeneracy");
    }

    #[test]
    fn shaped_reward_is_bounded(
        pf in 0u8..=1, pc in 0u8..=1, gf in 0u8..=1, gc in 0u8..=1,
        alpha in 0.0f64..4.0, bonus in 0.0f64..4.0, penalty in -4.0f64..=0.0
    ) {
        let cfg = RewardConfig::custom(alpha, bonus, penalty);
        let pred = TrmVerdict {
            faithfulness: Bit::new(pf).unwrap(),
            reason: String::new(),
            correctness: Bit::new(pc).unwrap(),
        };
        let gold = SentenceLabel {
            faithfulness: Bit::new(gf).unwrap(),
            correctness: Bit::new(gc).unwrap(),
            rationale: String::new(),
        };
        let reward = trm_sentence_reward(&pred, &gold, &cfg);
        prop_assert!(reward.value <= 1.0 + alpha + bonus);
        prop_assert!(reward.value >= penalty);
        // The breakdown must re-sum to the value exactly.
        let resum = reward.correct_match.as_f64()
            + alpha * reward.faith_match.as_f64()
            + reward.bonus_applied;
        prop_assert_eq!(reward.value, resum);
    }

    #[test]
    fn verdicts_round_trip_through_canonical_form(
        entries in proptest::collection::vec(
            (0u8..=1, 0u8..=1, "\\PC{0,40}"),
            1..8
        )
    ) {
        let verdicts: Vec<TrmVerdict> = entries
            .iter()
            .map(|(f, c, reason)| TrmVerdict {
                faithfulness: Bit::new(*f).unwrap(),
                reason: reason.clone(),
                correctness: Bit::new(*c).unwrap(),
            })
            .collect();
        let rendered = serialize_verdicts(&verdicts);
        let parsed = parse_verdicts(&rendered, verdicts.len()).unwrap();
        prop_assert_eq!(parsed.verdicts, verdicts);
    }
}
