use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::forest::{train_forest, ForestParams};
use super::metrics::roc_auc;
use super::{Label, ModelError};
use crate::vuln::{FeatureVector, TableRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: Label,
}

impl LabeledSample {
    /// Labeled rows of a feature table; unlabeled (dead-zone) rows are dropped.
    pub fn from_table(rows: &[TableRow]) -> Vec<LabeledSample> {
        rows.iter().filter_map(|r| r.label.map(|label| LabeledSample { features: r.features, label })).collect()
    }
}

pub fn to_matrix(samples: &[LabeledSample]) -> (Vec<Vec<f64>>, Vec<Label>) {
    samples.iter().map(|s| (s.features.to_array().to_vec(), s.label)).unzip()
}

pub fn feature_names() -> Vec<String> {
    FeatureVector::NAMES.iter().map(|s| s.to_string()).collect()
}

fn shuffled_by_class(labels: &[Label], seed: u64) -> [Vec<usize>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fast: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::Fast).collect();
    let mut slow: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::Slow).collect();
    fast.shuffle(&mut rng);
    slow.shuffle(&mut rng);
    [fast, slow]
}

/// Seeded split keeping each class's share in both parts. Returns sorted
/// (train, test) row indices.
pub fn stratified_split(
    labels: &[Label],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), ModelError> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(ModelError::InvalidParams(format!("test fraction {test_fraction} must be in [0, 1)")));
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in shuffled_by_class(labels, seed) {
        let n_test = (class.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&class[..n_test]);
        train.extend_from_slice(&class[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Fold number for every row; classes are dealt round-robin after a
/// seeded shuffle.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<usize>, ModelError> {
    if k < 2 {
        return Err(ModelError::InvalidParams("need at least 2 folds".into()));
    }
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for class in shuffled_by_class(labels, seed) {
        for i in class {
            fold[i] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: usize,
    pub auc: Vec<f64>,
    pub mean_auc: f64,
    pub std_auc: f64,
}

pub fn cross_validate(
    x: &[Vec<f64>],
    y: &[Label],
    names: &[String],
    params: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<CvReport, ModelError> {
    let fold = stratified_folds(y, k, seed)?;
    let auc = (0..k)
        .into_par_iter()
        .map(|f| {
            let pick = |keep: bool| -> (Vec<Vec<f64>>, Vec<Label>) {
                (0..x.len()).filter(|&i| (fold[i] == f) != keep).map(|i| (x[i].clone(), y[i])).unzip()
            };
            let (tx, ty) = pick(true);
            let (vx, vy) = pick(false);
            let forest = train_forest(&tx, &ty, names, params, seed.wrapping_add(f as u64))?;
            roc_auc(&forest.predict_many(&vx)?, &vy)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean = auc.iter().sum::<f64>() / k as f64;
    let std = (auc.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / k as f64).sqrt();
    Ok(CvReport { folds: k, auc, mean_auc: mean, std_auc: std })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    /// Probability of flipping each label.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec { n: 2000, label_noise: 0.01, seed: 7 }
    }
}

/// Synthetic downstream packages in which only the update strategy carries
/// signal: restrictive dependents are slow, the rest fast, up to label
/// noise. Every other feature is drawn independently of the label.
pub fn synthetic(spec: &SyntheticSpec) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.n)
        .map(|_| {
            let roll: f64 = rng.gen();
            let (balanced, restrictive, permissive) = if roll < 0.35 {
                (0, 1, 0)
            } else if roll < 0.75 {
                (1, 0, 0)
            } else {
                (0, 0, 1)
            };
            let age: f64 = rng.gen_range(0.0..3000.0);
            let releases: f64 = rng.gen_range(1.0..80.0);
            let features = FeatureVector {
                package_age_days: age,
                balanced,
                restrictive,
                permissive,
                release_frequency_per_month: if age < 1.0 { 0.0 } else { releases / (age / 30.44) },
                dependency_count: rng.gen_range(0..40),
                dependent_count: rng.gen_range(0..200),
                release_status_post100: rng.gen_bool(0.6) as u8,
                dependency_modifications: rng.gen_range(0..30),
            };
            let mut label = if restrictive == 1 { Label::Slow } else { Label::Fast };
            if rng.gen_bool(spec.label_noise) {
                label = match label {
                    Label::Fast => Label::Slow,
                    Label::Slow => Label::Fast,
                };
            }
            LabeledSample { features, label }
        })
        .collect()
}

/// Synthetic samples as feature-table rows.
pub fn synthetic_rows(spec: &SyntheticSpec) -> Vec<TableRow> {
    synthetic(spec)
        .into_iter()
        .enumerate()
        .map(|(i, s)| TableRow {
            dependent: format!("synthetic-{i:05}"),
            advisory_id: "SYNTHETIC".into(),
            label: Some(s.label),
            features: s.features,
        })
        .collect()
}
