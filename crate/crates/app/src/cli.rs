//! `variant` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use variety_core::analysis::{default_splits, testcase1_curve, testcase2_curve, ClusterMethod};
use variety_core::concept::Severity;
use variety_core::tree_metrics::{score_tree, TreeMetric};

use crate::config::{ConfigLayer, ProviderKind, WeightsSpec};
use crate::io::{self, export_results, import_space, Format};
use crate::report::assess_space;

#[derive(Debug, Parser)]
#[command(name = "variant", version, about = "Variety assessment for design concept spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Import a space, embed it and write the result document.
    Assess(Box<AssessArgs>),
    /// Score a genealogy tree file with the tree metrics.
    TreeMetrics(TreeArgs),
    /// Write the two-node sensitivity curves as CSV.
    Testcase(TestcaseArgs),
    /// Partition the concepts of a result file.
    Cluster(ClusterArgs),
    /// Start the HTTP API.
    Serve(ServeArgs),
    /// Check a space file and print the report.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML config file.
    #[arg(long, env = "VARIANT_CONFIG")]
    pub config: Option<PathBuf>,
    /// hash, service or precomputed.
    #[arg(long, env = "VARIANT_PROVIDER")]
    pub provider: Option<ProviderKind>,
    /// Hashed bag-of-words dimension.
    #[arg(long, env = "VARIANT_DIMENSION")]
    pub dimension: Option<usize>,
    /// Embedding service URL.
    #[arg(long, env = "VARIANT_EMBED_URL")]
    pub endpoint: Option<String>,
    #[arg(long, env = "VARIANT_EMBED_MODEL")]
    pub model: Option<String>,
    #[arg(long, env = "VARIANT_EMBED_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
    #[arg(long, env = "VARIANT_BATCH_SIZE")]
    pub batch_size: Option<usize>,
    #[arg(long, env = "VARIANT_TIMEOUT_SECS")]
    pub timeout_secs: Option<u64>,
    /// Precomputed vectors CSV.
    #[arg(long, env = "VARIANT_VECTORS")]
    pub vectors: Option<PathBuf>,
    /// paper-default, uniform, seven comma-separated numbers or level=value pairs.
    #[arg(long, env = "VARIANT_WEIGHTS")]
    pub weights: Option<WeightsSpec>,
    /// Number of clusters to add to the result.
    #[arg(long, env = "VARIANT_K")]
    pub k: Option<usize>,
    #[arg(long, env = "VARIANT_CLUSTER_METHOD")]
    pub cluster_method: Option<ClusterMethod>,
    /// Joins the texts of a concept's instances.
    #[arg(long, env = "VARIANT_SEPARATOR")]
    pub separator: Option<String>,
    #[arg(long, env = "VARIANT_MAX_IN_FLIGHT")]
    pub max_in_flight: Option<usize>,
}

impl ConfigArgs {
    fn layer(&self, out: Option<PathBuf>, csv_out: Option<PathBuf>) -> anyhow::Result<ConfigLayer> {
        let file = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            provider: self.provider,
            dimension: self.dimension,
            endpoint: self.endpoint.clone(),
            model: self.model.clone(),
            token: self.token.clone(),
            batch_size: self.batch_size,
            timeout_secs: self.timeout_secs,
            vectors: self.vectors.clone(),
            weights: self.weights.clone(),
            k: self.k,
            cluster_method: self.cluster_method,
            separator: self.separator.clone(),
            max_in_flight: self.max_in_flight,
            out,
            csv_out,
            data_dir: None,
            bind: None,
        };
        Ok(flags.over(file))
    }
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Defaults to the input file extension.
    #[arg(long)]
    pub format: Option<FormatArg>,
    /// Result JSON path.
    #[arg(long, short, env = "VARIANT_OUT")]
    pub out: Option<PathBuf>,
    /// Result CSV path.
    #[arg(long, env = "VARIANT_CSV_OUT")]
    pub csv_out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    All,
    Svs,
    Nm,
    Ihi,
    Hhid,
    Gsid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TreeWeights {
    /// Level weights stored in the tree file.
    Tree,
    /// Each metric's published level weights.
    Preset,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value = "tree")]
    pub weights: TreeWeights,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    #[value(name = "I", alias = "i", alias = "1")]
    I,
    #[value(name = "II", alias = "ii", alias = "2")]
    II,
}

#[derive(Debug, Args)]
pub struct TestcaseArgs {
    #[arg(long, value_enum)]
    pub case: Case,
    /// Space size for case I.
    #[arg(long, default_value_t = 20)]
    pub n: u64,
    /// Largest even N for case II.
    #[arg(long, default_value_t = 40)]
    pub n_max: u64,
    /// CSV path; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Result JSON from `assess`.
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value = "medoids")]
    pub method: ClusterMethod,
    /// Write the result with the cluster section added.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "VARIANT_BIND", default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[arg(long, env = "VARIANT_DATA_DIR", default_value = "variant-data")]
    pub data_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

/// Failure that maps to exit code 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Failure(String);

/// Parses `args` and runs the command. Returns the process exit code:
/// 0 success, 1 validation or runtime failure, 2 usage error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::Assess(args) => assess(*args, out),
        Command::TreeMetrics(args) => tree_metrics(args, out),
        Command::Testcase(args) => testcase(args, out),
        Command::Cluster(args) => cluster(args, out),
        Command::Serve(args) => serve(args),
        Command::Validate(args) => validate(args, out),
    }
}

fn assess(args: AssessArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let config = args.config.layer(args.out, args.csv_out)?.resolve()?;
    let imported = import_space(&args.input, args.format.map(Into::into))?;
    if let Some(first) = imported.report.errors().next() {
        return Err(Failure(format!("{}: {}", args.input.display(), first.message)).into());
    }
    let doc = assess_space(&imported.space, &config)?;
    writeln!(out, "V(C) = {:.3}  ({} concepts, provider {})", doc.overall, doc.per_concept.len(), doc.provider_id)?;
    for (level, v) in &doc.per_level {
        writeln!(out, "  {:<12} {:.3}", level.display_name(), v)?;
    }
    for c in &doc.per_concept {
        writeln!(out, "  concept {:>3} {:<30} {:.3}", c.concept_id, c.name, c.score)?;
    }
    if let Some(best) = &doc.most_varied {
        writeln!(out, "most varied: {} ({:.3})", best.name, best.score)?;
    }
    if let Some(path) = &config.output.json {
        export_results(&doc, path, Format::Json)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    if let Some(path) = &config.output.csv {
        export_results(&doc, path, Format::Csv)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn selected(metric: MetricArg) -> Vec<TreeMetric> {
    match metric {
        MetricArg::All => TreeMetric::ALL.to_vec(),
        MetricArg::Svs => vec![TreeMetric::Svs],
        MetricArg::Nm => vec![TreeMetric::Nm],
        MetricArg::Ihi => vec![TreeMetric::Ihi],
        MetricArg::Hhid => vec![TreeMetric::Hhid],
        MetricArg::Gsid => vec![TreeMetric::Gsid],
    }
}

fn tree_metrics(args: TreeArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let tree = io::load_tree(&args.tree)?;
    let mut scores = Vec::new();
    for metric in selected(args.metric) {
        let scored_tree = match (args.weights, metric.published_weights()) {
            (TreeWeights::Preset, Some(w)) => {
                let depth = tree.levels().len();
                if depth > w.len() {
                    return Err(Failure(format!("{metric} has published weights for {} levels, tree has {depth}", w.len())).into());
                }
                tree.reweighted(&w[..depth])?
            }
            _ => tree.clone(),
        };
        scores.push(score_tree(&scored_tree, metric)?);
    }
    if args.json {
        write!(out, "{}", io::to_json(&scores))?;
        return Ok(());
    }
    writeln!(out, "metric  level  score  scaled")?;
    for s in &scores {
        for (alpha, v) in &s.per_level {
            writeln!(out, "{:<6}  {:<5}  {:?}  {:?}", s.metric.to_string(), alpha, v, s.scaled_per_level[alpha])?;
        }
        if let Some(overall) = s.overall {
            writeln!(out, "{:<6}  all    {:?}", s.metric.to_string(), overall)?;
        }
    }
    Ok(())
}

fn testcase(args: TestcaseArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let points = match args.case {
        Case::I => testcase1_curve(args.n, &default_splits(args.n))?,
        Case::II => {
            let ns: Vec<u64> = (1..=args.n_max / 2).map(|h| 2 * h).collect();
            testcase2_curve(&ns)?
        }
    };
    let csv = io::curve_to_csv(&points)?;
    match &args.out {
        Some(path) => {
            io::write_text(path, &csv)?;
            writeln!(out, "wrote {} rows to {}", points.len(), path.display())?;
        }
        None => write!(out, "{csv}")?,
    }
    Ok(())
}

fn cluster(args: ClusterArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut doc = io::read_result(&args.result)?;
    let n = doc.per_concept.len();
    if args.k == 0 || args.k > n {
        return Err(Failure(format!("k must be between 1 and {n}, got {}", args.k)).into());
    }
    let section = doc.cluster(args.k, args.method)?.clone();
    writeln!(out, "concept  cluster")?;
    for (id, label) in section.concept_ids.iter().zip(&section.labels) {
        writeln!(out, "{id:>7}  {label}")?;
    }
    if let Some(tree) = &doc.dendrogram {
        writeln!(out, "merges (left right height size):")?;
        for m in &tree.merges {
            writeln!(out, "  {} {} {:.6} {}", m.left, m.right, m.height, m.size)?;
        }
    }
    if let Some(path) = &args.out {
        export_results(&doc, path, Format::Json)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .try_init();
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(crate::service::serve(&args.bind, &args.data_dir))
}

fn validate(args: ValidateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let imported = import_space(&args.input, args.format.map(Into::into))?;
    let report = &imported.report;
    writeln!(
        out,
        "{}: {} concepts, {} errors, {} warnings",
        args.input.display(),
        imported.space.len(),
        report.errors().count(),
        report.warnings().count()
    )?;
    for issue in &report.issues {
        let tag = match issue.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        writeln!(out, "  {tag}: {}", issue.message)?;
    }
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure(format!("{} is not a valid concept space", args.input.display())).into())
    }
}
