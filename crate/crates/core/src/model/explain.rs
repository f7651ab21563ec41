use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::{tree_rng, Forest};
use super::metrics::roc_auc;
use super::{Label, ModelError};
use crate::vuln::stats::mean;

pub const DEFAULT_REPEATS: usize = 10;
pub const DEFAULT_ICE_SAMPLE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureImportance {
    pub feature: usize,
    pub name: String,
    /// Baseline AUC minus the mean AUC with this column shuffled.
    pub importance: f64,
    /// Population standard deviation of the AUC drops.
    pub std: f64,
    pub drops: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceReport {
    pub baseline_auc: f64,
    pub repeats: usize,
    pub seed: u64,
    /// Sorted by importance, highest first; ties by feature index.
    pub features: Vec<FeatureImportance>,
}

/// Shuffles one column at a time and measures the drop in ROC-AUC. Column
/// `j` draws its shuffles from stream `j` of `seed`.
pub fn permutation_importance(
    f: &Forest,
    x: &[Vec<f64>],
    y: &[Label],
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport, ModelError> {
    if x.is_empty() {
        return Err(ModelError::Empty);
    }
    if repeats == 0 {
        return Err(ModelError::InvalidParams("repeats must be at least 1".into()));
    }
    let baseline_auc = roc_auc(&f.predict_many(x)?, y)?;
    let mut features = (0..f.n_features())
        .into_par_iter()
        .map(|j| {
            let mut rng = tree_rng(seed, j as u64);
            let mut column: Vec<f64> = x.iter().map(|r| r[j]).collect();
            let mut drops = Vec::with_capacity(repeats);
            let mut rows = x.to_vec();
            for _ in 0..repeats {
                column.shuffle(&mut rng);
                for (row, v) in rows.iter_mut().zip(&column) {
                    row[j] = *v;
                }
                let scores: Vec<f64> = rows.iter().map(|r| f.predict_proba(r)).collect::<Result<_, _>>()?;
                drops.push(baseline_auc - roc_auc(&scores, y)?);
            }
            let m = mean(&drops).unwrap_or(0.0);
            let var = drops.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / drops.len() as f64;
            Ok(FeatureImportance {
                feature: j,
                name: f.feature_names[j].clone(),
                importance: m,
                std: var.sqrt(),
                drops,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    features.sort_by(|a, b| b.importance.total_cmp(&a.importance).then(a.feature.cmp(&b.feature)));
    Ok(ImportanceReport { baseline_auc, repeats, seed, features })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    /// Distinct values among the 0%, 10%, ..., 100% quantiles.
    Deciles,
    /// Distinct values among `k + 1` evenly spaced quantiles.
    Quantiles(usize),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IceTrace {
    /// Row index into the data passed to `partial_dependence`.
    pub row: usize,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdpCurve {
    pub feature: usize,
    pub name: String,
    pub grid: Vec<f64>,
    pub mean_probability: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ice_traces: Option<Vec<IceTrace>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IceOptions {
    pub sample: usize,
    pub seed: u64,
}

impl Default for IceOptions {
    fn default() -> Self {
        IceOptions { sample: DEFAULT_ICE_SAMPLE, seed: 0 }
    }
}

/// Nearest-rank quantile of sorted data, so grid points are observed
/// values (a 0/1 column yields only 0 and 1).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    sorted[(q * (sorted.len() - 1) as f64).round() as usize]
}

pub fn grid_values(column: &[f64], spec: &GridSpec) -> Result<Vec<f64>, ModelError> {
    if column.is_empty() {
        return Err(ModelError::Empty);
    }
    let mut values = match spec {
        GridSpec::Values(v) => v.clone(),
        GridSpec::Deciles | GridSpec::Quantiles(_) => {
            let k = match spec {
                GridSpec::Quantiles(k) => (*k).max(1),
                _ => 10,
            };
            let mut sorted = column.to_vec();
            sorted.sort_by(f64::total_cmp);
            (0..=k).map(|i| quantile(&sorted, i as f64 / k as f64)).collect()
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

/// Average prediction with `feature` forced to each grid value. ICE traces
/// are kept for a seeded sample of rows when requested.
pub fn partial_dependence(
    f: &Forest,
    x: &[Vec<f64>],
    feature: usize,
    grid: &GridSpec,
    ice: Option<IceOptions>,
) -> Result<PdpCurve, ModelError> {
    if x.is_empty() {
        return Err(ModelError::Empty);
    }
    if feature >= f.n_features() {
        return Err(ModelError::InvalidParams(format!("feature index {feature} out of range")));
    }
    let column: Vec<f64> = x.iter().map(|r| r[feature]).collect();
    let grid = grid_values(&column, grid)?;
    // per row, probability at each grid value
    let per_row: Vec<Vec<f64>> = x
        .par_iter()
        .map(|row| {
            let mut r = row.clone();
            grid.iter()
                .map(|g| {
                    r[feature] = *g;
                    f.predict_proba(&r)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let mean_probability =
        (0..grid.len()).map(|g| per_row.iter().map(|p| p[g]).sum::<f64>() / per_row.len() as f64).collect();
    let ice_traces = ice.map(|opts| {
        let mut rng = tree_rng(opts.seed, feature as u64);
        let mut rows = index::sample(&mut rng, x.len(), opts.sample.min(x.len())).into_vec();
        rows.sort_unstable();
        rows.into_iter().map(|row| IceTrace { row, probabilities: per_row[row].clone() }).collect()
    });
    Ok(PdpCurve { feature, name: f.feature_names[feature].clone(), grid, mean_probability, ice_traces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::forest::{train_forest, ForestParams, Node, Tree, FORMAT_NAME, FORMAT_VERSION};

    fn stump(threshold: f64) -> Forest {
        Forest {
            format: FORMAT_NAME.into(),
            format_version: FORMAT_VERSION,
            params: ForestParams::default(),
            seed: 0,
            feature_names: vec!["a".into(), "b".into()],
            training: None,
            trees: vec![Tree {
                nodes: vec![
                    Node::Split { feature: 0, threshold, left: 1, right: 2 },
                    Node::Leaf { p_fast: 0.9, p_slow: 0.1, samples: 1 },
                    Node::Leaf { p_fast: 0.2, p_slow: 0.8, samples: 1 },
                ],
            }],
        }
    }

    fn data() -> Vec<Vec<f64>> {
        (0..30).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect()
    }

    #[test]
    fn deciles_dedupe() {
        assert_eq!(grid_values(&[0.0, 1.0, 1.0, 0.0, 1.0], &GridSpec::Deciles).unwrap(), vec![0.0, 1.0]);
        let g = grid_values(&(0..=100).map(f64::from).collect::<Vec<_>>(), &GridSpec::Deciles).unwrap();
        assert_eq!(g, (0..=10).map(|i| f64::from(i * 10)).collect::<Vec<_>>());
    }

    #[test]
    fn step_at_threshold() {
        let f = stump(10.5);
        let c = partial_dependence(&f, &data(), 0, &GridSpec::Values(vec![0.0, 10.0, 11.0, 20.0]), None).unwrap();
        for (got, want) in c.mean_probability.iter().zip([0.9, 0.9, 0.2, 0.2]) {
            assert!((got - want).abs() < 1e-12);
        }
        let flat = partial_dependence(&f, &data(), 1, &GridSpec::Deciles, None).unwrap();
        let first = flat.mean_probability[0];
        assert!(flat.mean_probability.iter().all(|p| *p == first));
    }

    #[test]
    fn ice_mean_equals_pdp_when_all_rows_sampled() {
        let f = stump(12.0);
        let x = data();
        let c =
            partial_dependence(&f, &x, 0, &GridSpec::Deciles, Some(IceOptions { sample: x.len(), seed: 3 })).unwrap();
        let traces = c.ice_traces.as_ref().unwrap();
        assert_eq!(traces.len(), x.len());
        for g in 0..c.grid.len() {
            let m = traces.iter().map(|t| t.probabilities[g]).sum::<f64>() / traces.len() as f64;
            assert!((m - c.mean_probability[g]).abs() < 1e-12);
        }
        let sampled = partial_dependence(&f, &x, 0, &GridSpec::Deciles, Some(IceOptions::default())).unwrap();
        assert_eq!(sampled.ice_traces.unwrap().len(), DEFAULT_ICE_SAMPLE);
    }

    #[test]
    fn unused_feature_has_no_importance() {
        let x = data();
        let y: Vec<Label> = x.iter().map(|r| if r[0] < 15.0 { Label::Fast } else { Label::Slow }).collect();
        let f = stump(14.5);
        let rep = permutation_importance(&f, &x, &y, DEFAULT_REPEATS, 4).unwrap();
        assert_eq!(rep.features[0].name, "a");
        let b = rep.features.iter().find(|fi| fi.name == "b").unwrap();
        assert_eq!(b.importance, 0.0);
        assert_eq!(rep, permutation_importance(&f, &x, &y, DEFAULT_REPEATS, 4).unwrap());
    }

    #[test]
    fn trained_forest_curve_is_probability() {
        let x = data();
        let y: Vec<Label> = x.iter().map(|r| if r[1] < 5.0 { Label::Fast } else { Label::Slow }).collect();
        let names = vec!["a".to_string(), "b".to_string()];
        let f = train_forest(&x, &y, &names, &ForestParams { n_trees: 15, ..Default::default() }, 2).unwrap();
        let c = partial_dependence(&f, &x, 1, &GridSpec::Quantiles(4), None).unwrap();
        assert!(c.grid.windows(2).all(|w| w[0] < w[1]));
        assert!(c.mean_probability.iter().all(|p| (0.0..=1.0).contains(p)));
    }
}
