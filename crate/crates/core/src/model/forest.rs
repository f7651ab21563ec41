use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Label, ModelError};

pub const FORMAT_NAME: &str = "depsmell-forest";
pub const FORMAT_VERSION: u32 = 1;

/// Size of the random feature subset tried at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// Ceiling of the square root of the feature count.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (p as f64).sqrt().ceil() as usize,
            MaxFeatures::All => p,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    /// None grows until nodes are pure or too small to split.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 1000,
            min_samples_split: 8,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_trees == 0 {
            return Err(ModelError::InvalidParams("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(ModelError::InvalidParams("min_samples_split must be at least 2".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(ModelError::InvalidParams("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        p_fast: f64,
        p_slow: f64,
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_for(&self, x: &[f64]) -> &Node {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
                leaf => return leaf,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.leaf_for(x) {
            Node::Leaf { p_fast, .. } => *p_fast,
            Node::Split { .. } => unreachable!("leaf_for stops at leaves"),
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub format: String,
    pub format_version: u32,
    pub params: ForestParams,
    pub seed: u64,
    pub feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingInfo>,
    pub trees: Vec<Tree>,
}

/// How the training rows were selected, so evaluation can rebuild the
/// held-out split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingInfo {
    /// Digest of the labeled table the split was drawn from.
    pub data_digest: String,
    pub labeled_rows: usize,
    pub test_fraction: f64,
    pub split_seed: u64,
    pub train_rows: usize,
}

/// Deterministic stream for tree `index`: independent of scheduling.
pub fn tree_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gini(fast: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = fast as f64 / n as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    fast: &'a [bool],
    params: &'a ForestParams,
    mtry: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn best_split_on(&self, rows: &mut [usize], feature: usize, fast_total: usize) -> Option<BestSplit> {
        rows.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]));
        let n = rows.len();
        let mut best: Option<BestSplit> = None;
        let mut left_fast = 0;
        for k in 1..n {
            left_fast += self.fast[rows[k - 1]] as usize;
            let lo = self.x[rows[k - 1]][feature];
            let hi = self.x[rows[k]][feature];
            if lo == hi {
                continue;
            }
            let (nl, nr) = (k, n - k);
            let score = (nl as f64 * gini(left_fast, nl) + nr as f64 * gini(fast_total - left_fast, nr)) / n as f64;
            if best.as_ref().is_none_or(|b| score < b.score) {
                let mid = lo + (hi - lo) / 2.0;
                // the midpoint can round up to `hi` for adjacent floats
                let threshold = if mid < hi { mid } else { lo };
                best = Some(BestSplit { feature, threshold, score });
            }
        }
        best
    }

    fn leaf(&mut self, fast: usize, n: usize) -> usize {
        let p_fast = fast as f64 / n as f64;
        self.nodes.push(Node::Leaf { p_fast, p_slow: 1.0 - p_fast, samples: n });
        self.nodes.len() - 1
    }

    fn grow(&mut self, mut rows: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = rows.len();
        let fast = rows.iter().filter(|&&i| self.fast[i]).count();
        let pure = fast == 0 || fast == n;
        let too_deep = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || n < self.params.min_samples_split || too_deep {
            return self.leaf(fast, n);
        }
        let p = self.x[0].len();
        let mut order: Vec<usize> = (0..p).collect();
        order.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        for (tried, &f) in order.iter().enumerate() {
            // beyond the subset only keep looking while nothing was splittable
            if tried >= self.mtry && best.is_some() {
                break;
            }
            if let Some(s) = self.best_split_on(&mut rows, f, fast) {
                if best.as_ref().is_none_or(|b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else {
            return self.leaf(fast, n);
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&i| self.x[i][split.feature] <= split.threshold);
        let id = self.nodes.len();
        self.nodes.push(Node::Split { feature: split.feature, threshold: split.threshold, left: 0, right: 0 });
        let l = self.grow(left, depth + 1, rng);
        let r = self.grow(right, depth + 1, rng);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: r };
        id
    }
}

fn check_rows(x: &[Vec<f64>], width: usize) -> Result<(), ModelError> {
    for row in x {
        if row.len() != width {
            return Err(ModelError::DimensionMismatch { expected: width, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
    }
    Ok(())
}

/// Grows one tree on the given rows (bootstrap already applied).
fn fit_tree(x: &[Vec<f64>], fast: &[bool], rows: Vec<usize>, params: &ForestParams, rng: &mut ChaCha8Rng) -> Tree {
    let mtry = params.max_features.resolve(x[0].len());
    let mut b = Builder { x, fast, params, mtry, nodes: Vec::new() };
    b.grow(rows, 0, rng);
    Tree { nodes: b.nodes }
}

/// Trains a bagged forest. Tree `i` draws its bootstrap sample and feature
/// subsets from its own seeded stream, so parallel and sequential training
/// produce the same forest.
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[Label],
    feature_names: &[String],
    params: &ForestParams,
    seed: u64,
) -> Result<Forest, ModelError> {
    params.validate()?;
    if x.is_empty() {
        return Err(ModelError::Empty);
    }
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch { rows: x.len(), labels: y.len() });
    }
    let width = feature_names.len();
    check_rows(x, width)?;
    if width == 0 {
        return Err(ModelError::InvalidParams("at least one feature is required".into()));
    }
    let fast: Vec<bool> = y.iter().map(|l| *l == Label::Fast).collect();
    let n_fast = fast.iter().filter(|f| **f).count();
    if n_fast == 0 || n_fast == fast.len() {
        return Err(ModelError::SingleClass);
    }
    let n = x.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(seed, t as u64);
            let rows: Vec<usize> =
                if params.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            fit_tree(x, &fast, rows, params, &mut rng)
        })
        .collect();
    Ok(Forest {
        format: FORMAT_NAME.into(),
        format_version: FORMAT_VERSION,
        params: *params,
        seed,
        feature_names: feature_names.to_vec(),
        training: None,
        trees,
    })
}

impl Forest {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Mean of the per-tree leaf probabilities of the fast class.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.n_features() {
            return Err(ModelError::DimensionMismatch { expected: self.n_features(), got: x.len() });
        }
        let total: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok(total / self.trees.len() as f64)
    }

    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        xs.par_iter().map(|x| self.predict_proba(x)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn from_json(text: &str) -> Result<Forest, ModelError> {
        let forest: Forest = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if forest.format != FORMAT_NAME {
            return Err(ModelError::Format(format!("not a {FORMAT_NAME} file (format {:?})", forest.format)));
        }
        if forest.format_version != FORMAT_VERSION {
            return Err(ModelError::Format(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                forest.format_version
            )));
        }
        forest.check_structure()?;
        Ok(forest)
    }

    /// Child indices point forward and stay in bounds; features exist.
    fn check_structure(&self) -> Result<(), ModelError> {
        if self.trees.is_empty() {
            return Err(ModelError::Format("forest has no trees".into()));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return Err(ModelError::Format(format!("tree {t} is empty")));
            }
            for (i, node) in tree.nodes.iter().enumerate() {
                let ok = match node {
                    Node::Split { feature, threshold, left, right } => {
                        *feature < self.n_features()
                            && threshold.is_finite()
                            && *left > i
                            && *right > i
                            && *left < tree.nodes.len()
                            && *right < tree.nodes.len()
                    }
                    Node::Leaf { p_fast, p_slow, .. } => {
                        (0.0..=1.0).contains(p_fast) && (p_fast + p_slow - 1.0).abs() < 1e-12
                    }
                };
                if !ok {
                    return Err(ModelError::Format(format!("tree {t} node {i} is invalid")));
                }
            }
        }
        Ok(())
    }
}
