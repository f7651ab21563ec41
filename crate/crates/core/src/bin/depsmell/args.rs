use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "depsmell",
    version,
    about = "Dependency smells and vulnerability fix-adoption analysis for npm-style projects"
)]
pub struct Cli {
    /// Output format for the report.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML configuration file; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random step (splits, bagging, shuffles, sampling).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report to FILE instead of stdout.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect dependency smells S1-S7 in a project.
    Lint(LintArgs),
    /// Fix and adoption timelines for advisories in a snapshot.
    Timeline(TimelineArgs),
    /// Build the labeled feature table from a snapshot.
    Features(FeaturesArgs),
    /// Generate a synthetic labeled feature table.
    Synth(SynthArgs),
    /// Train a random forest on a feature table.
    Train(TrainArgs),
    /// Evaluate a trained model against the stratified baseline.
    Eval(EvalArgs),
    /// Permutation importance and partial dependence for a trained model.
    Explain(ExplainArgs),
    /// Download package metadata into snapshot files.
    Fetch(FetchArgs),
}

#[derive(Debug, Args)]
pub struct LintArgs {
    /// Project directory containing package.json.
    pub path: PathBuf,
    /// Also check constraints in devDependencies and optionalDependencies.
    #[arg(long)]
    pub include_dev: bool,
    /// Skip the lockfile check (S5).
    #[arg(long)]
    pub no_lockfile_check: bool,
    /// Skip the source scan (S6, S7).
    #[arg(long)]
    pub no_imports: bool,
    /// Directory to scan for imports (default: the project directory).
    #[arg(long, value_name = "DIR")]
    pub src: Option<PathBuf>,
    /// Source file extensions to scan.
    #[arg(long = "ext", value_delimiter = ',', value_name = "EXT")]
    pub extensions: Vec<String>,
    /// Smells that make the command exit with status 1 (default: all).
    #[arg(long, value_delimiter = ',', value_name = "SMELLS")]
    pub fail_on: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SnapshotArgs {
    /// Directory holding releases.jsonl, deps.jsonl and advisories.jsonl.
    #[arg(long, value_name = "DIR")]
    pub snapshot: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub releases: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub deps: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub advisories: Option<PathBuf>,
    /// Override the snapshot horizon (RFC 3339).
    #[arg(long, value_name = "TIME")]
    pub horizon: Option<String>,
    /// Only analyze advisories of these severities.
    #[arg(long, value_delimiter = ',', value_name = "LEVELS")]
    pub severity: Vec<String>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("which").required(true).args(["advisory", "all"]))]
pub struct TimelineArgs {
    #[command(flatten)]
    pub snapshot: SnapshotArgs,
    /// Analyze a single advisory.
    #[arg(long, value_name = "ID")]
    pub advisory: Option<String>,
    /// Analyze every advisory.
    #[arg(long)]
    pub all: bool,
    /// Also write exposure records as JSON lines.
    #[arg(long, value_name = "FILE")]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Delays below this many days are labeled fast.
    #[arg(long, value_name = "DAYS")]
    pub fast_below: Option<f64>,
    /// Delays above this many days are labeled slow.
    #[arg(long, value_name = "DAYS")]
    pub slow_above: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub snapshot: SnapshotArgs,
    #[command(flatten)]
    pub labels: LabelArgs,
    /// Write the feature table (CSV) here.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
    /// Also compute package version count and days since last release.
    #[arg(long)]
    pub with_dropped: bool,
    /// Report feature pairs whose |Spearman rho| exceeds this.
    #[arg(long, value_name = "RHO")]
    pub correlation_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Write the feature table (CSV) here.
    #[arg(long, value_name = "FILE")]
    pub table: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Probability of flipping each label.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct ForestArgs {
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    /// sqrt, all, or a number of features.
    #[arg(long)]
    pub max_features: Option<String>,
    #[arg(long)]
    pub max_depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled feature table (CSV).
    #[arg(long, value_name = "FILE")]
    pub table: PathBuf,
    /// Where to write the model.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Share of labeled rows held out for evaluation.
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub table: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Also run stratified k-fold cross-validation on the whole table.
    #[arg(long, value_name = "K")]
    pub cv: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long, value_name = "FILE")]
    pub table: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Shuffles per feature for permutation importance.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Rows kept as ICE traces per curve; 0 disables ICE.
    #[arg(long)]
    pub ice_sample: Option<usize>,
    /// Features to draw partial dependence for (default: all).
    #[arg(long = "feature", value_delimiter = ',', value_name = "NAMES")]
    pub features: Vec<String>,
    /// Grid: "deciles" or "quantiles:K".
    #[arg(long, default_value = "deciles")]
    pub grid: String,
    /// Also write importance, PDP and ICE rows as JSON lines.
    #[arg(long, value_name = "FILE")]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Package names.
    pub packages: Vec<String>,
    /// Registry base URL (default: $DEPSMELL_REGISTRY or the public registry).
    #[arg(long, value_name = "URL")]
    pub registry: Option<String>,
    /// Directory for releases.jsonl and deps.jsonl.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Refuse all network access.
    #[arg(long)]
    pub offline: bool,
}
