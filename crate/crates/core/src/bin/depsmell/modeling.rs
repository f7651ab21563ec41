use std::fmt::Write;
use std::path::Path;

use anyhow::{bail, Context};
use depsmell::model::{
    classification, cross_validate, feature_names, partial_dependence, permutation_importance, roc_auc,
    stratified_baseline, stratified_split, synthetic_rows, train_forest, Classification, CvReport, Forest,
    ForestParams, GridSpec, IceOptions, ImportanceReport, Label, LabeledSample, MaxFeatures, PdpCurve, SyntheticSpec,
    TrainingInfo, DEFAULT_ICE_SAMPLE, DEFAULT_REPEATS, DEFAULT_THRESHOLD,
};
use depsmell::vuln::{read_feature_table, FeatureVector, TableRow};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{EvalArgs, ExplainArgs, ForestArgs, SynthArgs, TrainArgs};
use crate::config::Config;
use crate::report::{write_records, Output};

struct Labeled {
    x: Vec<Vec<f64>>,
    y: Vec<Label>,
    unlabeled: usize,
}

fn read_table(path: &Path) -> anyhow::Result<Labeled> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let rows = read_feature_table(file).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    let samples = LabeledSample::from_table(&rows);
    let (x, y) = depsmell::model::to_matrix(&samples);
    Ok(Labeled { unlabeled: rows.len() - samples.len(), x, y })
}

fn digest(data: &Labeled) -> String {
    let mut h = Sha256::new();
    for (row, label) in data.x.iter().zip(&data.y) {
        h.update([*label as u8]);
        for v in row {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn subset(data: &Labeled, idx: &[usize]) -> (Vec<Vec<f64>>, Vec<Label>) {
    idx.iter().map(|&i| (data.x[i].clone(), data.y[i])).unzip()
}

fn class_counts(y: &[Label]) -> ClassCounts {
    let fast = y.iter().filter(|l| **l == Label::Fast).count();
    ClassCounts { fast, slow: y.len() - fast }
}

#[derive(Serialize, Clone, Copy)]
struct ClassCounts {
    fast: usize,
    slow: usize,
}

fn write_model(path: &Path, forest: &Forest) -> anyhow::Result<()> {
    depsmell::ecosystem::write_atomic(path, forest.to_json().as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}

fn read_model(path: &Path) -> anyhow::Result<Forest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let forest = Forest::from_json(&text).with_context(|| format!("loading model {}", path.display()))?;
    if forest.feature_names != feature_names() {
        bail!("model {} was trained on different features: {:?}", path.display(), forest.feature_names);
    }
    Ok(forest)
}

/// Rows to evaluate on: the recorded held-out split when the table is the
/// one the model was trained from, otherwise the whole table.
fn evaluation_rows(forest: &Forest, data: &Labeled) -> anyhow::Result<(Vec<usize>, &'static str)> {
    if let Some(t) = &forest.training {
        if t.labeled_rows == data.y.len() && t.data_digest == digest(data) {
            let (_, test) = stratified_split(&data.y, t.test_fraction, t.split_seed)?;
            if test.is_empty() {
                bail!("the model was trained without a held-out split; evaluate it on another table");
            }
            return Ok((test, "held_out"));
        }
    }
    Ok(((0..data.y.len()).collect(), "full_table"))
}

#[derive(Serialize)]
struct SynthSummary {
    rows: usize,
    fast: usize,
    slow: usize,
}

#[derive(Serialize)]
struct SynthPayload {
    table: String,
    n: usize,
    label_noise: f64,
    seed: u64,
}

pub fn synth(args: &SynthArgs, seed: u64, out: &Output) -> anyhow::Result<u8> {
    if !(0.0..=1.0).contains(&args.noise) {
        bail!("--noise must be within [0, 1]");
    }
    let rows: Vec<TableRow> = synthetic_rows(&SyntheticSpec { n: args.n, label_noise: args.noise, seed });
    write_table_rows(&args.table, &rows)?;
    let y: Vec<Label> = rows.iter().filter_map(|r| r.label).collect();
    let c = class_counts(&y);
    let summary = SynthSummary { rows: rows.len(), fast: c.fast, slow: c.slow };
    let payload = SynthPayload { table: args.table.display().to_string(), n: args.n, label_noise: args.noise, seed };
    out.emit("synth", summary, payload, |s, p| {
        format!("wrote {} rows to {} ({} fast, {} slow)\n", s.rows, p.table, s.fast, s.slow)
    })?;
    Ok(0)
}

fn write_table_rows(path: &Path, rows: &[TableRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dependent", "advisory_id", "label"];
    header.extend(FeatureVector::NAMES);
    w.write_record(&header)?;
    for r in rows {
        let mut rec =
            vec![r.dependent.clone(), r.advisory_id.clone(), r.label.map(|l| l.to_string()).unwrap_or_default()];
        rec.extend(r.features.to_array().iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    let buf = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    depsmell::ecosystem::write_atomic(path, &buf).with_context(|| format!("writing {}", path.display()))
}

fn forest_params(args: &ForestArgs, cfg: &Config) -> anyhow::Result<ForestParams> {
    let d = ForestParams::default();
    let max_features = match &args.max_features {
        Some(raw) => parse_max_features(raw)?,
        None => match &cfg.forest.max_features {
            None => d.max_features,
            Some(toml::Value::String(s)) => parse_max_features(s)?,
            Some(toml::Value::Integer(k)) if *k > 0 => MaxFeatures::Count(*k as usize),
            Some(other) => bail!("forest.max_features: expected \"sqrt\", \"all\" or a positive integer, got {other}"),
        },
    };
    let params = ForestParams {
        n_trees: args.trees.or(cfg.forest.n_trees).unwrap_or(d.n_trees),
        min_samples_split: args.min_samples_split.or(cfg.forest.min_samples_split).unwrap_or(d.min_samples_split),
        max_features,
        max_depth: args.max_depth.or(cfg.forest.max_depth),
        bootstrap: true,
    };
    params.validate()?;
    Ok(params)
}

fn parse_max_features(raw: &str) -> anyhow::Result<MaxFeatures> {
    match raw {
        "sqrt" => Ok(MaxFeatures::Sqrt),
        "all" => Ok(MaxFeatures::All),
        n => match n.parse::<usize>() {
            Ok(k) if k > 0 => Ok(MaxFeatures::Count(k)),
            _ => bail!("max features must be \"sqrt\", \"all\" or a positive integer, got {n:?}"),
        },
    }
}

#[derive(Serialize)]
struct TrainSummary {
    train_rows: usize,
    test_rows: usize,
    unlabeled_dropped: usize,
    trees: usize,
}

#[derive(Serialize)]
struct TrainPayload {
    model: String,
    seed: u64,
    params: ForestParams,
    train_classes: ClassCounts,
    test_classes: ClassCounts,
    training: TrainingInfo,
}

pub fn train(args: &TrainArgs, cfg: &Config, seed: u64, out: &Output) -> anyhow::Result<u8> {
    let params = forest_params(&args.forest, cfg)?;
    let test_fraction = args.test_fraction.or(cfg.eval.test_fraction).unwrap_or(0.2);
    let data = read_table(&args.table)?;
    let (train_idx, test_idx) = stratified_split(&data.y, test_fraction, seed)?;
    let (tx, ty) = subset(&data, &train_idx);
    let mut forest = train_forest(&tx, &ty, &feature_names(), &params, seed)?;
    let training = TrainingInfo {
        data_digest: digest(&data),
        labeled_rows: data.y.len(),
        test_fraction,
        split_seed: seed,
        train_rows: train_idx.len(),
    };
    forest.training = Some(training.clone());
    write_model(&args.model, &forest)?;
    let (_, test_y) = subset(&data, &test_idx);
    let summary = TrainSummary {
        train_rows: train_idx.len(),
        test_rows: test_idx.len(),
        unlabeled_dropped: data.unlabeled,
        trees: params.n_trees,
    };
    let payload = TrainPayload {
        model: args.model.display().to_string(),
        seed,
        params,
        train_classes: class_counts(&ty),
        test_classes: class_counts(&test_y),
        training,
    };
    out.emit("train", summary, payload, |s, p| {
        format!(
            "trained {} trees on {} rows ({} held out, {} unlabeled dropped); model written to {}\n",
            s.trees, s.train_rows, s.test_rows, s.unlabeled_dropped, p.model
        )
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct Scores {
    roc_auc: f64,
    #[serde(flatten)]
    at_threshold: Classification,
}

#[derive(Serialize)]
struct EvalSummary {
    rows: usize,
    roc_auc: f64,
    baseline_roc_auc: f64,
    f1: f64,
}

#[derive(Serialize)]
struct EvalPayload {
    evaluation_set: &'static str,
    classes: ClassCounts,
    positive_class: Label,
    model: Scores,
    baseline: Scores,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_validation: Option<CvReport>,
}

pub fn eval(args: &EvalArgs, seed: u64, out: &Output) -> anyhow::Result<u8> {
    let forest = read_model(&args.model)?;
    let data = read_table(&args.table)?;
    let (rows, set) = evaluation_rows(&forest, &data)?;
    let (x, y) = subset(&data, &rows);
    let scores = forest.predict_many(&x)?;
    let base = stratified_baseline(&y, seed);
    let model = Scores { roc_auc: roc_auc(&scores, &y)?, at_threshold: classification(&scores, &y, DEFAULT_THRESHOLD) };
    let baseline = Scores { roc_auc: roc_auc(&base, &y)?, at_threshold: classification(&base, &y, DEFAULT_THRESHOLD) };
    let cross_validation = match args.cv {
        Some(k) => Some(cross_validate(&data.x, &data.y, &feature_names(), &forest.params, k, seed)?),
        None => None,
    };
    let summary = EvalSummary {
        rows: y.len(),
        roc_auc: model.roc_auc,
        baseline_roc_auc: baseline.roc_auc,
        f1: model.at_threshold.f1,
    };
    let payload = EvalPayload {
        evaluation_set: set,
        classes: class_counts(&y),
        positive_class: Label::Fast,
        model,
        baseline,
        cross_validation,
    };
    out.emit("eval", summary, payload, |s, p| {
        let mut t = String::new();
        let _ = writeln!(
            t,
            "evaluated on {} rows ({}): {} fast, {} slow",
            s.rows, p.evaluation_set, p.classes.fast, p.classes.slow
        );
        for (name, sc) in [("model", &p.model), ("baseline", &p.baseline)] {
            let c = &sc.at_threshold;
            let _ = writeln!(
                t,
                "{name:<9} ROC-AUC {:.4}  F1 {:.4}  precision {:.4}  recall {:.4}  accuracy {:.4}",
                sc.roc_auc, c.f1, c.precision, c.recall, c.accuracy
            );
        }
        if let Some(cv) = &p.cross_validation {
            let _ = writeln!(t, "{}-fold CV ROC-AUC {:.4} ± {:.4}", cv.folds, cv.mean_auc, cv.std_auc);
        }
        t
    })?;
    Ok(0)
}

fn parse_grid(raw: &str) -> anyhow::Result<GridSpec> {
    if raw == "deciles" {
        return Ok(GridSpec::Deciles);
    }
    if let Some(k) = raw.strip_prefix("quantiles:") {
        let k: usize = k.parse().with_context(|| format!("bad quantile count in {raw:?}"))?;
        if k == 0 {
            bail!("quantile count must be positive");
        }
        return Ok(GridSpec::Quantiles(k));
    }
    bail!("--grid must be \"deciles\" or \"quantiles:K\", got {raw:?}")
}

#[derive(Serialize)]
struct ExplainSummary {
    rows: usize,
    top_feature: String,
    curves: usize,
}

#[derive(Serialize)]
struct ExplainPayload {
    evaluation_set: &'static str,
    importance: ImportanceReport,
    partial_dependence: Vec<PdpCurve>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ExplainRecord<'a> {
    Importance { feature: &'a str, importance: f64, std: f64, drops: &'a [f64] },
    Pdp { feature: &'a str, value: f64, mean_probability: f64 },
    Ice { feature: &'a str, row: usize, value: f64, probability: f64 },
}

pub fn explain(args: &ExplainArgs, cfg: &Config, seed: u64, out: &Output) -> anyhow::Result<u8> {
    let repeats = args.repeats.or(cfg.explain.repeats).unwrap_or(DEFAULT_REPEATS);
    let ice_sample = args.ice_sample.or(cfg.explain.ice_sample).unwrap_or(DEFAULT_ICE_SAMPLE);
    let grid = parse_grid(&args.grid)?;
    let forest = read_model(&args.model)?;
    let data = read_table(&args.table)?;
    let (rows, set) = evaluation_rows(&forest, &data)?;
    let (x, y) = subset(&data, &rows);
    let importance = permutation_importance(&forest, &x, &y, repeats, seed)?;
    let names = feature_names();
    let selected: Vec<usize> = if args.features.is_empty() {
        (0..names.len()).collect()
    } else {
        args.features
            .iter()
            .map(|f| names.iter().position(|n| n == f).with_context(|| format!("unknown feature {f:?}")))
            .collect::<Result<_, _>>()?
    };
    let ice = (ice_sample > 0).then_some(IceOptions { sample: ice_sample, seed });
    let curves =
        selected.iter().map(|&j| partial_dependence(&forest, &x, j, &grid, ice)).collect::<Result<Vec<_>, _>>()?;

    if let Some(path) = &args.records {
        let mut recs = Vec::new();
        for f in &importance.features {
            recs.push(ExplainRecord::Importance {
                feature: &f.name,
                importance: f.importance,
                std: f.std,
                drops: &f.drops,
            });
        }
        for c in &curves {
            for (g, p) in c.grid.iter().zip(&c.mean_probability) {
                recs.push(ExplainRecord::Pdp { feature: &c.name, value: *g, mean_probability: *p });
            }
            for t in c.ice_traces.iter().flatten() {
                for (g, p) in c.grid.iter().zip(&t.probabilities) {
                    recs.push(ExplainRecord::Ice { feature: &c.name, row: rows[t.row], value: *g, probability: *p });
                }
            }
        }
        write_records(path, recs)?;
    }

    let summary =
        ExplainSummary { rows: y.len(), top_feature: importance.features[0].name.clone(), curves: curves.len() };
    let payload = ExplainPayload { evaluation_set: set, importance, partial_dependence: curves };
    out.emit("explain", summary, payload, |s, p| {
        let mut t = String::new();
        let _ = writeln!(
            t,
            "permutation importance on {} rows (baseline ROC-AUC {:.4}):",
            s.rows, p.importance.baseline_auc
        );
        for f in &p.importance.features {
            let _ = writeln!(t, "  {:<28} {:+.4} ± {:.4}", f.name, f.importance, f.std);
        }
        for c in &p.partial_dependence {
            let pts: Vec<String> =
                c.grid.iter().zip(&c.mean_probability).map(|(g, m)| format!("{g:.3}:{m:.3}")).collect();
            let _ = writeln!(t, "pdp {:<28} {}", c.name, pts.join(" "));
        }
        t
    })?;
    Ok(0)
}
