//! Command-line front end. Every subcommand is a thin wrapper over the
//! library calls of the same name.
//!
//! Exit codes: 0 success, 1 validation or data error, 2 usage error
//! (bad flags, missing input files).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::metrics::{evaluate_run, write_evaluation_csv, Gain, MetricConfig};
use crate::pooling::{build_pool, curves_by_category, project_judgments, write_curves_csv};
use crate::rank_correlation::{TauOptions, TauVariant};
use crate::report::{write_json, ScatterExport};
use crate::reusability::{
    group_taus, run_cross_category_experiment, run_split_experiment, Baseline, CrossConfig, CrossMode,
    ExperimentConfig, GroupTaus, TestGroup,
};
use crate::synth::{generate, SynthConfig};
use crate::trec_io::{
    count_by_category, load_qrels, load_runs, Category, GradeMode, JudgmentSet, OrderingPolicy, Run, RunManifest,
    RunParseOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "poolsim",
    version,
    about = "Simulated pooling and test-collection reusability analysis"
)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, env = "POOLSIM_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a depth-k pool and write `topic<TAB>doc_id` lines.
    Pool(PoolArgs),
    /// Evaluate every run, optionally against qrels projected onto a pool.
    Eval(EvalArgs),
    /// Kendall's tau per metric and test group from a scatter CSV.
    Tau(TauArgs),
    /// Cumulative relevant-document count per category at each cutoff.
    Curve(CurveArgs),
    /// Repeated group-aware split experiment.
    Reuse(ReuseArgs),
    /// Pool one category (or one random half) and test the rest.
    Cross(CrossArgs),
    /// Generate a synthetic collection.
    Synth(SynthArgs),
    /// Load and check a manifest (and optionally qrels).
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct RunInput {
    /// Tab-separated manifest: path, run_tag, group, category.
    #[arg(long)]
    manifest: PathBuf,
    /// Order lists by the rank column instead of by score.
    #[arg(long)]
    trust_rank: bool,
    /// Truncate every run to this depth at load time.
    #[arg(long)]
    max_depth: Option<usize>,
}

#[derive(Debug, Args)]
struct QrelsInput {
    #[arg(long)]
    qrels: PathBuf,
    /// Clamp out-of-range grades instead of rejecting them.
    #[arg(long)]
    lenient_grades: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricName {
    Ndcg,
    Mrr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GainName {
    Exponential,
    Linear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantName {
    A,
    B,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineName {
    /// Qrels projected onto the all-runs pool at the experiment depth.
    Pool,
    /// Qrels as supplied.
    Raw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PoolCategory {
    Traditional,
    Neural,
}

impl From<PoolCategory> for Category {
    fn from(c: PoolCategory) -> Self {
        match c {
            PoolCategory::Traditional => Category::Traditional,
            PoolCategory::Neural => Category::Neural,
        }
    }
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Metrics to compute (repeatable); defaults to mrr and ndcg.
    #[arg(long = "metric", value_enum)]
    metrics: Vec<MetricName>,
    /// NDCG cutoff.
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum, default_value = "exponential")]
    gain: GainName,
    /// Minimum grade counted as relevant by reciprocal rank.
    #[arg(long, default_value_t = 1)]
    mrr_threshold: u8,
    /// Only look this deep for the first relevant document.
    #[arg(long)]
    mrr_cutoff: Option<usize>,
}

impl MetricArgs {
    fn configs(&self) -> Vec<MetricConfig> {
        let names = if self.metrics.is_empty() {
            vec![MetricName::Mrr, MetricName::Ndcg]
        } else {
            self.metrics.clone()
        };
        let gain = match self.gain {
            GainName::Exponential => Gain::Exponential,
            GainName::Linear => Gain::Linear,
        };
        names
            .into_iter()
            .map(|m| {
                let base = match m {
                    MetricName::Ndcg => MetricConfig::ndcg(self.k),
                    MetricName::Mrr => MetricConfig::mrr(),
                };
                base.with_gain(gain)
                    .with_mrr_threshold(self.mrr_threshold)
                    .with_mrr_cutoff(self.mrr_cutoff)
            })
            .collect()
    }
}

#[derive(Debug, Args)]
struct TauFlags {
    #[arg(long, value_enum, default_value = "b")]
    variant: VariantName,
    /// Round metric values to this many decimals before comparing.
    #[arg(long)]
    round: Option<u32>,
}

impl TauFlags {
    fn options(&self) -> TauOptions {
        TauOptions {
            variant: match self.variant {
                VariantName::A => TauVariant::TauA,
                VariantName::B => TauVariant::TauB,
            },
            round_decimals: self.round,
        }
    }
}

#[derive(Debug, Args)]
struct PoolArgs {
    #[command(flatten)]
    input: RunInput,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    /// Pool only runs of this category.
    #[arg(long)]
    category: Option<Category>,
    /// Pool only these run tags (comma-separated).
    #[arg(long, value_delimiter = ',')]
    runs: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: RunInput,
    #[command(flatten)]
    qrels: QrelsInput,
    #[command(flatten)]
    metric: MetricArgs,
    /// Project the qrels onto the pool of these runs' categories first.
    #[arg(long)]
    pool_category: Option<Category>,
    /// Depth of the projection pool (all runs unless --pool-category).
    #[arg(long)]
    pool_depth: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TauArgs {
    /// Scatter CSV: run_tag,category,metric,actual,estimated.
    #[arg(long)]
    scatter: PathBuf,
    #[command(flatten)]
    tau: TauFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    input: RunInput,
    #[command(flatten)]
    qrels: QrelsInput,
    #[arg(long, default_value_t = 100)]
    kmax: usize,
    /// Minimum grade counted as relevant.
    #[arg(long, default_value_t = 1)]
    threshold: u8,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentOutput {
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scatter CSV path.
    #[arg(long)]
    scatter: Option<PathBuf>,
    /// Directory for one SVG scatter plot per metric.
    #[arg(long)]
    svg_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReuseArgs {
    #[command(flatten)]
    input: RunInput,
    #[command(flatten)]
    qrels: QrelsInput,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    tau: TauFlags,
    #[arg(long, value_enum)]
    pool_category: PoolCategory,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "pool")]
    baseline: BaselineName,
    /// Split individual runs instead of whole groups.
    #[arg(long)]
    ignore_groups: bool,
    /// Repeat whose values go into the scatter outputs.
    #[arg(long, default_value_t = 0)]
    scatter_repeat: usize,
    #[command(flatten)]
    output: ExperimentOutput,
}

#[derive(Debug, Args)]
struct CrossArgs {
    #[command(flatten)]
    input: RunInput,
    #[command(flatten)]
    qrels: QrelsInput,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    tau: TauFlags,
    /// Pool every run of this category and test the others.
    #[arg(
        long,
        value_enum,
        conflicts_with = "random_split",
        required_unless_present = "random_split"
    )]
    pool_category: Option<PoolCategory>,
    /// Split all runs in two and test each half on the other's pool.
    #[arg(long, requires = "seed")]
    random_split: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// With --random-split, split individual runs instead of whole groups.
    #[arg(long)]
    ignore_groups: bool,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, value_enum, default_value = "pool")]
    baseline: BaselineName,
    #[command(flatten)]
    output: ExperimentOutput,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 43)]
    topics: usize,
    #[arg(long, default_value_t = 100)]
    docs: usize,
    #[arg(long, default_value_t = 20)]
    relevant: usize,
    #[arg(long, default_value_t = 4)]
    groups: usize,
    #[arg(long, default_value_t = 2)]
    runs_per_group: usize,
    #[arg(long, default_value_t = 50)]
    run_length: usize,
    #[arg(long, default_value_t = 0.0)]
    trad_exclusive: f64,
    #[arg(long, default_value_t = 0.0)]
    neural_exclusive: f64,
    #[arg(long, default_value_t = 0.5)]
    affinity_spread: f64,
    #[arg(long, default_value_t = 0.8)]
    noise: f64,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: RunInput,
    #[arg(long)]
    qrels: Option<PathBuf>,
    #[arg(long)]
    lenient_grades: bool,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{what} {} does not exist", path.display())))
    }
}

fn load_input(input: &RunInput) -> CliResult<Vec<Run>> {
    require_file(&input.manifest, "manifest")?;
    let manifest = RunManifest::from_file(&input.manifest)?;
    let options = RunParseOptions {
        ordering: if input.trust_rank {
            OrderingPolicy::TrustRank
        } else {
            OrderingPolicy::ScoreDescending
        },
        max_depth: input.max_depth,
    };
    let loaded = load_runs(&manifest, &options)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.runs)
}

fn load_judgments(path: &Path, lenient: bool) -> CliResult<JudgmentSet> {
    require_file(path, "qrels file")?;
    let mode = if lenient { GradeMode::Lenient } else { GradeMode::Strict };
    let (qrels, warnings) = load_qrels(path, mode)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(qrels)
}

fn load_both(input: &RunInput, qrels: &QrelsInput) -> CliResult<(Vec<Run>, JudgmentSet)> {
    let runs = load_input(input)?;
    let judgments = load_judgments(&qrels.qrels, qrels.lenient_grades)?;
    let flagged: usize = runs.iter().map(|r| r.topics_missing_from(&judgments).len()).sum();
    if flagged > 0 {
        eprintln!("note: {flagged} (run, topic) lists name topics absent from the qrels and are not evaluated");
    }
    Ok((runs, judgments))
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let f = File::create(p).map_err(|e| Error::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn finish(mut w: Box<dyn Write>) -> CliResult<()> {
    w.flush().map_err(Error::from)?;
    Ok(())
}

fn baseline(b: BaselineName) -> Baseline {
    match b {
        BaselineName::Pool => Baseline::AllRunsPool,
        BaselineName::Raw => Baseline::RawQrels,
    }
}

fn fmt_tau(t: Option<f64>) -> String {
    t.map_or_else(|| "undefined".to_string(), |v| format!("{v:.3}"))
}

fn svg_file_name(metric: &str, suffix: &str) -> String {
    let base: String = metric
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("{base}{suffix}.svg")
}

fn write_svgs(dir: &Path, scatter: &ScatterExport, taus: &GroupTaus, heading: &str, suffix: &str) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for metric in scatter.metrics() {
        let t = taus.get(metric);
        let get = |g| t.and_then(|m| m.get(&g).copied()).flatten();
        let title = format!(
            "{metric} {heading}: tau all {} / trad {} / neural {}",
            fmt_tau(get(TestGroup::All)),
            fmt_tau(get(TestGroup::Traditional)),
            fmt_tau(get(TestGroup::Neural)),
        );
        let path = dir.join(svg_file_name(metric, suffix));
        fs::write(&path, scatter.to_svg(metric, &title)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn cmd_pool(args: &PoolArgs) -> CliResult<()> {
    let runs = load_input(&args.input)?;
    let selected: Vec<&Run> = runs
        .iter()
        .filter(|r| args.category.is_none_or(|c| r.category == c))
        .filter(|r| args.runs.is_empty() || args.runs.contains(&r.run_tag))
        .collect();
    let pool = build_pool(selected, args.depth)?;
    for (tag, short) in &pool.shortfall {
        if *short > 0 {
            eprintln!("note: {tag} has fewer than {} docs on {short} topics", args.depth);
        }
    }
    eprintln!(
        "pooled {} documents from {} runs at depth {}",
        pool.len(),
        pool.contributing_run_tags.len(),
        args.depth
    );
    let mut out = output(args.out.as_deref())?;
    pool.write_tsv(&mut out).map_err(Error::from)?;
    finish(out)
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let (runs, mut judgments) = load_both(&args.input, &args.qrels)?;
    if args.pool_category.is_some() || args.pool_depth.is_some() {
        let depth = args.pool_depth.unwrap_or(10);
        let pool = build_pool(
            runs.iter()
                .filter(|r| args.pool_category.is_none_or(|c| r.category == c)),
            depth,
        )?;
        judgments = project_judgments(&judgments, &pool);
    }
    let configs = args.metric.configs();
    for c in &configs {
        c.validate()?;
    }
    let results: Vec<_> = configs
        .iter()
        .flat_map(|c| runs.iter().map(|r| evaluate_run(r, &judgments, c)))
        .collect();
    let mut out = output(args.out.as_deref())?;
    write_evaluation_csv(&results, &mut out).map_err(Error::from)?;
    finish(out)
}

fn cmd_tau(args: &TauArgs) -> CliResult<()> {
    require_file(&args.scatter, "scatter file")?;
    let f = File::open(&args.scatter).map_err(|e| Error::io(&args.scatter, e))?;
    let scatter = ScatterExport::read_csv(BufReader::new(f))?;
    let taus = group_taus(&scatter.rows, args.tau.options());
    let mut out = output(args.out.as_deref())?;
    write_json(&taus, &mut out)?;
    finish(out)
}

fn cmd_curve(args: &CurveArgs) -> CliResult<()> {
    let (runs, judgments) = load_both(&args.input, &args.qrels)?;
    let curves = curves_by_category(&runs, &judgments, args.kmax, args.threshold)?;
    let mut out = output(args.out.as_deref())?;
    write_curves_csv(&curves, &mut out).map_err(Error::from)?;
    finish(out)
}

fn write_scatter(path: Option<&Path>, scatter: &ScatterExport) -> CliResult<()> {
    if let Some(p) = path {
        let mut out = output(Some(p))?;
        scatter.write_csv(&mut out).map_err(Error::from)?;
        finish(out)?;
    }
    Ok(())
}

fn cmd_reuse(args: &ReuseArgs, threads: Option<usize>) -> CliResult<()> {
    let (runs, judgments) = load_both(&args.input, &args.qrels)?;
    let config = ExperimentConfig {
        pool_depth: args.depth,
        repeats: args.repeats,
        rng_seed: args.seed,
        pool_category: args.pool_category.into(),
        metrics: args.metric.configs(),
        tau: args.tau.options(),
        baseline: baseline(args.baseline),
        group_atomic: !args.ignore_groups,
        scatter_repeat: args.scatter_repeat,
        threads,
    };
    let result = run_split_experiment(&runs, &judgments, &config)?;

    eprintln!(
        "average Kendall's tau over {} repeats ({} pool):",
        config.repeats, config.pool_category
    );
    for (metric, groups) in &result.report.averages {
        let cells: Vec<String> = groups
            .iter()
            .map(|(g, s)| format!("{g} {} ({} undefined)", fmt_tau(s.mean), s.undefined))
            .collect();
        eprintln!("  {metric}: {}", cells.join(", "));
    }

    let mut out = output(args.output.out.as_deref())?;
    write_json(&result.report, &mut out)?;
    finish(out)?;
    write_scatter(args.output.scatter.as_deref(), &result.scatter)?;
    if let Some(dir) = &args.output.svg_dir {
        let taus = &result.report.per_repeat[config.scatter_repeat].taus;
        let heading = format!("{} depth-{} pool", config.pool_category, config.pool_depth);
        write_svgs(dir, &result.scatter, taus, &heading, "")?;
    }
    Ok(())
}

fn cmd_cross(args: &CrossArgs) -> CliResult<()> {
    let (runs, judgments) = load_both(&args.input, &args.qrels)?;
    let mode = match (args.pool_category, args.random_split, args.seed) {
        (Some(c), false, _) => CrossMode::Category {
            pool_category: c.into(),
        },
        (None, true, Some(seed)) => CrossMode::RandomSplit {
            seed,
            group_atomic: !args.ignore_groups,
        },
        _ => return Err(Failure::Usage("give --pool-category or --random-split --seed".into())),
    };
    let config = CrossConfig {
        pool_depth: args.depth,
        metrics: args.metric.configs(),
        tau: args.tau.options(),
        baseline: baseline(args.baseline),
        mode,
    };
    let report = run_cross_category_experiment(&runs, &judgments, &config)?;
    for d in &report.directions {
        for (metric, groups) in &d.taus {
            let cells: Vec<String> = groups.iter().map(|(g, t)| format!("{g} {}", fmt_tau(*t))).collect();
            eprintln!("{}: {metric}: {}", d.label, cells.join(", "));
        }
    }
    let mut out = output(args.output.out.as_deref())?;
    write_json(&report, &mut out)?;
    finish(out)?;
    write_scatter(args.output.scatter.as_deref(), &report.scatter())?;
    if let Some(dir) = &args.output.svg_dir {
        for (i, d) in report.directions.iter().enumerate() {
            let suffix = if report.directions.len() > 1 {
                format!("_{}", i + 1)
            } else {
                String::new()
            };
            write_svgs(dir, &d.scatter, &d.taus, &d.label, &suffix)?;
        }
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    let config = SynthConfig {
        topics: args.topics,
        docs_per_topic: args.docs,
        relevant_per_topic: args.relevant,
        groups_per_category: args.groups,
        runs_per_group: args.runs_per_group,
        run_length: args.run_length,
        traditional_exclusive_rate: args.trad_exclusive,
        neural_exclusive_rate: args.neural_exclusive,
        affinity_spread: args.affinity_spread,
        noise: args.noise,
        seed: args.seed,
        ..Default::default()
    };
    let collection = generate(&config)?;
    let manifest = collection.write_to_dir(&args.out_dir)?;
    eprintln!(
        "wrote {} runs and {} judgments; manifest {}",
        collection.runs.len(),
        collection.qrels.len(),
        manifest.display()
    );
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    let runs = load_input(&args.input)?;
    let counts = count_by_category(&runs);
    let summary: Vec<String> = counts.iter().map(|(c, n)| format!("{n} {c}")).collect();
    println!("runs: {} ({})", runs.len(), summary.join(", "));
    if let Some(path) = &args.qrels {
        let qrels = load_judgments(path, args.lenient_grades)?;
        println!(
            "qrels: {} topics, {} judgments, {} with grade >= 1",
            qrels.num_topics(),
            qrels.len(),
            qrels.count_at_least(1)
        );
        for run in &runs {
            let missing = run.topics_missing_from(&qrels);
            if !missing.is_empty() {
                println!("{}: {} topics not in qrels", run.run_tag, missing.len());
            }
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Pool(a) => cmd_pool(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Tau(a) => cmd_tau(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Reuse(a) => cmd_reuse(a, cli.threads),
        Command::Cross(a) => cmd_cross(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(n) if !matches!(cli.command, Command::Reuse(_)) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli))),
        _ => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
