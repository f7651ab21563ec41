use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Label, ModelError};
use crate::vuln::stats::average_ranks;

/// Probability that a random fast instance scores above a random slow one,
/// ties counting one half (rank-sum formulation).
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<f64, ModelError> {
    if scores.len() != labels.len() {
        return Err(ModelError::LengthMismatch { rows: scores.len(), labels: labels.len() });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    let n_pos = labels.iter().filter(|l| **l == Label::Fast).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(ModelError::SingleClass);
    }
    let ranks = average_ranks(scores);
    let r_pos: f64 = ranks.iter().zip(labels).filter(|(_, l)| **l == Label::Fast).map(|(r, _)| r).sum();
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((r_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Threshold metrics with fast as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub threshold: f64,
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Predicts fast when `score >= threshold`. Undefined ratios are reported
/// as 0.
pub fn classification(scores: &[f64], labels: &[Label], threshold: f64) -> Classification {
    let (mut tp, mut fp, mut tn, mut fneg) = (0, 0, 0, 0);
    for (s, l) in scores.iter().zip(labels) {
        match (*s >= threshold, *l == Label::Fast) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fneg += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Classification {
        threshold,
        true_positive: tp,
        false_positive: fp,
        true_negative: tn,
        false_negative: fneg,
        precision,
        recall,
        f1,
        accuracy: ratio(tp + tn, scores.len()),
    }
}

/// Random hard predictions (1 = fast, 0 = slow) drawn with the empirical
/// class frequencies of `labels`.
pub fn stratified_baseline(labels: &[Label], seed: u64) -> Vec<f64> {
    if labels.is_empty() {
        return Vec::new();
    }
    let p_fast = labels.iter().filter(|l| **l == Label::Fast).count() as f64 / labels.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    labels.iter().map(|_| if rng.gen_bool(p_fast) { 1.0 } else { 0.0 }).collect()
}
