//! Brute-force reference implementations for the acceptance and property
//! suites.
//!
//! Everything here is written straight from the metric definitions with the
//! dumbest possible control flow (explicit counting loops, exhaustive
//! permutation search) and shares no code with the library. When the library
//! and these oracles agree on random instances, the fast implementations are
//! trusted.

#![allow(dead_code)]

/// Confusion-count F1 with `target` as the positive class.
pub fn oracle_f1(gold: &[u8], pred: &[u8], target: u8) -> f64 {
    assert_eq!(gold.len(), pred.len());
    let mut true_positive = 0u64;
    let mut false_positive = 0u64;
    let mut false_negative = 0u64;
    for i in 0..gold.len() {
        let gold_hit = gold[i] == target;
        let pred_hit = pred[i] == target;
        if gold_hit && pred_hit {
            true_positive += 1;
        }
        if !gold_hit && pred_hit {
            false_positive += 1;
        }
        if gold_hit && !pred_hit {
            false_negative += 1;
        }
    }
    let precision = if true_positive + false_positive == 0 {
        0.0
    } else {
        true_positive as f64 / (true_positive + false_positive) as f64
    };
    let recall = if true_positive + false_negative == 0 {
        0.0
    } else {
        true_positive as f64 / (true_positive + false_negative) as f64
    };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Gold-frequency-weighted average of the two per-class F1 scores.
pub fn oracle_f1_overall(gold: &[u8], pred: &[u8]) -> f64 {
    let mut ones = 0u64;
    for &g in gold {
        if g == 1 {
            ones += 1;
        }
    }
    let zeros = gold.len() as u64 - ones;
    let weighted = ones as f64 * oracle_f1(gold, pred, 1) + zeros as f64 * oracle_f1(gold, pred, 0);
    weighted / gold.len() as f64
}

/// Fraction of positions where prediction equals gold.
pub fn oracle_recall(gold: &[u8], pred: &[u8]) -> f64 {
    assert_eq!(gold.len(), pred.len());
    let mut hits = 0u64;
    for i in 0..gold.len() {
        if gold[i] == pred[i] {
            hits += 1;
        }
    }
    hits as f64 / gold.len() as f64
}

/// Fraction of 1 bits.
pub fn oracle_answer_score(bits: &[u8]) -> f64 {
    let mut ones = 0u64;
    for &b in bits {
        if b == 1 {
            ones += 1;
        }
    }
    ones as f64 / bits.len() as f64
}

/// Detection by explicit argmin scans. None when the gold minimum is not
/// unique or there are fewer than two answers.
pub fn oracle_detect_worst(gold_scores: &[f64], pred_scores: &[f64]) -> Option<bool> {
    if gold_scores.len() < 2 {
        return None;
    }
    let mut gold_worst = 0usize;
    for i in 1..gold_scores.len() {
        if gold_scores[i] < gold_scores[gold_worst] {
            gold_worst = i;
        }
    }
    let mut gold_min_count = 0usize;
    for &s in gold_scores {
        if s == gold_scores[gold_worst] {
            gold_min_count += 1;
        }
    }
    if gold_min_count != 1 {
        return None;
    }
    let mut pred_min = pred_scores[0];
    for &s in pred_scores {
        if s < pred_min {
            pred_min = s;
        }
    }
    Some(pred_scores[gold_worst] == pred_min)
}

/// All 24 orderings of four indices.
pub fn permutations_of_4() -> Vec<[usize; 4]> {
    let mut all = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                all.push([a, b, c, d]);
            }
        }
    }
    all
}

/// DCG of `gold` gains presented in `order`, log2(rank+1) discount with
/// ranks starting at 1.
pub fn oracle_dcg(gold: &[f64; 4], order: &[usize; 4]) -> f64 {
    let mut total = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        total += gold[idx] / ((rank + 2) as f64).log2();
    }
    total
}

/// The ranking the stable pred-descending rule realizes: repeatedly select
/// the earliest remaining index with the largest prediction.
pub fn oracle_realized_order(pred: &[f64; 4]) -> [usize; 4] {
    let mut remaining: Vec<usize> = vec![0, 1, 2, 3];
    let mut order = [0usize; 4];
    for slot in &mut order {
        let mut best = 0usize;
        for (at, &idx) in remaining.iter().enumerate() {
            if pred[idx] > pred[remaining[best]] {
                best = at;
            }
        }
        *slot = remaining.remove(best);
    }
    order
}

/// NDCG via exhaustive search: realized ranking DCG over the best DCG any
/// of the 24 orderings achieves; 1.0 when even the best is zero.
pub fn oracle_ndcg_at_4(gold: &[f64; 4], pred: &[f64; 4]) -> f64 {
    let realized = oracle_dcg(gold, &oracle_realized_order(pred));
    let mut ideal = f64::NEG_INFINITY;
    for order in permutations_of_4() {
        let dcg = oracle_dcg(gold, &order);
        if dcg > ideal {
            ideal = dcg;
        }
    }
    if ideal == 0.0 {
        1.0
    } else {
        realized / ideal
    }
}

/// Smallest DCG any ordering achieves, for minimum-attainable checks.
pub fn oracle_worst_dcg(gold: &[f64; 4]) -> f64 {
    let mut worst = f64::INFINITY;
    for order in permutations_of_4() {
        let dcg = oracle_dcg(gold, &order);
        if dcg < worst {
            worst = dcg;
        }
    }
    worst
}
