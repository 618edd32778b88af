//! Simulated-pool reusability experiments.
//!
//! An experiment compares, for a set of test systems, their "actual" mean
//! metric values (judgments from the depth-k pool of every run) against
//! "estimated" values (judgments restricted to the depth-k pool of a subset
//! of runs), and summarizes agreement with Kendall's tau per test-system
//! category.
//!
//! Two families are provided:
//! - [`run_split_experiment`]: repeatedly split one category's runs in half
//!   by group, pool one half, and test on the other half plus every run of
//!   the other categories; taus are averaged over repeats.
//! - [`run_cross_category_experiment`]: pool all runs of one category and
//!   test the rest, or split all runs at random and test each half on the
//!   other half's pool.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{evaluate_run, MetricConfig};
use crate::pooling::{build_pool, project_judgments};
use crate::rank_correlation::{kendall_tau, PairedScores, TauOptions};
use crate::report::{ScatterExport, ScatterRow};
use crate::trec_io::{Category, JudgmentSet, Run};

/// Judgments that define the "actual" metric values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Qrels projected onto the pool of all runs at the experiment depth.
    #[default]
    AllRunsPool,
    /// The qrels exactly as supplied.
    RawQrels,
}

/// Subset of test systems a tau is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestGroup {
    Traditional,
    Neural,
    All,
}

impl TestGroup {
    pub const ALL: [TestGroup; 3] = [TestGroup::Traditional, TestGroup::Neural, TestGroup::All];

    pub fn includes(self, category: Category) -> bool {
        match self {
            TestGroup::Traditional => category == Category::Traditional,
            TestGroup::Neural => category == Category::Neural,
            TestGroup::All => true,
        }
    }
}

impl fmt::Display for TestGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestGroup::Traditional => "traditional",
            TestGroup::Neural => "neural",
            TestGroup::All => "all",
        })
    }
}

/// Tau per metric label, then per test group. `None` marks an undefined tau
/// (fewer than two systems, or a constant score vector under tau-b).
pub type GroupTaus = BTreeMap<String, BTreeMap<TestGroup, Option<f64>>>;

/// Computes taus between actual and estimated values for every metric and
/// test group present in `rows`.
pub fn group_taus(rows: &[ScatterRow], options: TauOptions) -> GroupTaus {
    let mut metrics: Vec<&str> = Vec::new();
    for r in rows {
        if !metrics.contains(&r.metric.as_str()) {
            metrics.push(&r.metric);
        }
    }
    let mut out = GroupTaus::new();
    for metric in metrics {
        let mut per_group = BTreeMap::new();
        for group in TestGroup::ALL {
            let selected: Vec<&ScatterRow> = rows
                .iter()
                .filter(|r| r.metric == metric && group.includes(r.category))
                .collect();
            let tau = PairedScores::new(
                selected.iter().map(|r| r.run_tag.clone()).collect(),
                selected.iter().map(|r| r.actual).collect(),
                selected.iter().map(|r| r.estimated).collect(),
            )
            .and_then(|p| kendall_tau(&p, options))
            .ok();
            per_group.insert(group, tau);
        }
        out.insert(metric.to_string(), per_group);
    }
    out
}

/// Result of evaluating a set of test runs against one simulated pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub pool_run_tags: Vec<String>,
    pub test_run_tags: Vec<String>,
    /// Pooled (topic, doc) pairs.
    pub pool_size: usize,
    pub taus: GroupTaus,
    pub scatter: ScatterExport,
}

/// Holds the inputs shared by every simulated pool of one experiment along
/// with the precomputed actual metric values.
pub struct Evaluator<'a> {
    runs: &'a [Run],
    full: &'a JudgmentSet,
    depth: usize,
    metrics: Vec<MetricConfig>,
    tau: TauOptions,
    actual_qrels: JudgmentSet,
    /// metric index -> run tag -> actual mean
    actual: Vec<BTreeMap<String, f64>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        runs: &'a [Run],
        full: &'a JudgmentSet,
        depth: usize,
        metrics: &[MetricConfig],
        tau: TauOptions,
        baseline: Baseline,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Config("pool depth must be at least 1".into()));
        }
        if metrics.is_empty() {
            return Err(Error::Config("no metrics requested".into()));
        }
        for m in metrics {
            m.validate()?;
        }
        if full.is_empty() {
            return Err(Error::Config("qrels contain no judgments".into()));
        }
        let mut tags = BTreeSet::new();
        for r in runs {
            if !tags.insert(r.run_tag.as_str()) {
                return Err(Error::Config(format!("duplicate run tag {}", r.run_tag)));
            }
        }
        let actual_qrels = match baseline {
            Baseline::AllRunsPool => project_judgments(full, &build_pool(runs, depth)?),
            Baseline::RawQrels => full.clone(),
        };
        let actual = metrics
            .iter()
            .map(|m| {
                runs.par_iter()
                    .map(|r| (r.run_tag.clone(), evaluate_run(r, &actual_qrels, m).mean))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .collect()
            })
            .collect();
        Ok(Evaluator {
            runs,
            full,
            depth,
            metrics: metrics.to_vec(),
            tau,
            actual_qrels,
            actual,
        })
    }

    pub fn runs(&self) -> &'a [Run] {
        self.runs
    }

    /// Judgments behind the actual metric values.
    pub fn actual_qrels(&self) -> &JudgmentSet {
        &self.actual_qrels
    }

    pub fn actual_mean(&self, metric_index: usize, run_tag: &str) -> Option<f64> {
        self.actual.get(metric_index)?.get(run_tag).copied()
    }

    /// Pools `pool_runs` at the experiment depth and scores `test_runs`
    /// against the projected judgments.
    pub fn compare(&self, pool_runs: &[&Run], test_runs: &[&Run]) -> Result<Comparison> {
        let pool = build_pool(pool_runs.iter().copied(), self.depth)?;
        let estimated_qrels = project_judgments(self.full, &pool);
        let mut rows = Vec::with_capacity(self.metrics.len() * test_runs.len());
        for (mi, metric) in self.metrics.iter().enumerate() {
            let estimated: Vec<f64> = test_runs
                .par_iter()
                .map(|r| evaluate_run(r, &estimated_qrels, metric).mean)
                .collect();
            for (run, est) in test_runs.iter().zip(estimated) {
                rows.push(ScatterRow {
                    run_tag: run.run_tag.clone(),
                    category: run.category,
                    metric: metric.label(),
                    actual: self.actual[mi][&run.run_tag],
                    estimated: est,
                });
            }
        }
        let taus = group_taus(&rows, self.tau);
        Ok(Comparison {
            pool_run_tags: pool_runs.iter().map(|r| r.run_tag.clone()).collect(),
            test_run_tags: test_runs.iter().map(|r| r.run_tag.clone()).collect(),
            pool_size: pool.len(),
            taus,
            scatter: ScatterExport { rows },
        })
    }
}

/// One pool/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitAssignment {
    pub pool_runs: BTreeSet<String>,
    pub test_runs: BTreeSet<String>,
    pub seed_used: u64,
    /// `ceil(n / 2)` for the `n` eligible runs.
    pub target_pool_size: usize,
    /// Pool-side run count minus the target; non-zero when group sizes
    /// force an overshoot or (to keep the test side non-empty) a shortfall.
    pub deviation: i64,
}

/// Splits `runs` into a pool side and a test side.
///
/// Units (whole groups when `group_atomic`, single runs otherwise) are
/// shuffled with a ChaCha8 generator seeded by `seed`, then moved to the pool
/// side in shuffled order until it holds at least `ceil(n/2)` runs. The last
/// unit always stays on the test side so neither side is empty.
pub fn split_runs(runs: &[&Run], group_atomic: bool, seed: u64, scope: &str) -> Result<SplitAssignment> {
    let mut units: Vec<Vec<&str>> = if group_atomic {
        let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for r in runs {
            groups.entry(r.group_id.as_str()).or_default().push(&r.run_tag);
        }
        groups.into_values().collect()
    } else {
        runs.iter().map(|r| vec![r.run_tag.as_str()]).collect()
    };
    if units.len() < 2 {
        let reason = if runs.is_empty() {
            "no eligible runs".to_string()
        } else if group_atomic {
            "all runs belong to a single group".to_string()
        } else {
            "fewer than two runs".to_string()
        };
        return Err(Error::SplitImpossible {
            scope: scope.to_string(),
            reason,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    units.shuffle(&mut rng);

    let target = runs.len().div_ceil(2);
    let mut pool_runs = BTreeSet::new();
    let mut taken = 0;
    for unit in &units[..units.len() - 1] {
        if pool_runs.len() >= target {
            break;
        }
        pool_runs.extend(unit.iter().map(|t| t.to_string()));
        taken += 1;
    }
    let test_runs = units[taken..].iter().flatten().map(|t| t.to_string()).collect();
    let deviation = pool_runs.len() as i64 - target as i64;
    if deviation != 0 {
        log::info!(
            "split of {scope}: pool side has {} runs against a target of {target}",
            pool_runs.len()
        );
    }
    Ok(SplitAssignment {
        pool_runs,
        test_runs,
        seed_used: seed,
        target_pool_size: target,
        deviation,
    })
}

/// Group-aware split of the runs of one category.
pub fn split_group_aware(runs: &[Run], category: Category, seed: u64) -> Result<SplitAssignment> {
    let eligible: Vec<&Run> = runs.iter().filter(|r| r.category == category).collect();
    split_runs(&eligible, true, seed, &format!("{category} runs"))
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for repeat `repeat` of an experiment seeded with `base`: the
/// SplitMix64 output for state `base + (repeat + 1) * 0x9E3779B97F4A7C15`.
pub fn derive_seed(base: u64, repeat: usize) -> u64 {
    mix64(base.wrapping_add((repeat as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub pool_depth: usize,
    pub repeats: usize,
    pub rng_seed: u64,
    pub pool_category: Category,
    pub metrics: Vec<MetricConfig>,
    pub tau: TauOptions,
    pub baseline: Baseline,
    /// Keep every group's runs on one side of each split.
    pub group_atomic: bool,
    /// Repeat whose per-system values go into the scatter export.
    pub scatter_repeat: usize,
    /// Worker thread cap; results do not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pool_depth: 10,
            repeats: 10,
            rng_seed: 0,
            pool_category: Category::Traditional,
            metrics: vec![MetricConfig::mrr(), MetricConfig::ndcg(10)],
            tau: TauOptions::default(),
            baseline: Baseline::AllRunsPool,
            group_atomic: true,
            scatter_repeat: 0,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.pool_depth == 0 {
            return Err(Error::Config("pool depth must be at least 1".into()));
        }
        if self.scatter_repeat >= self.repeats {
            return Err(Error::Config(format!(
                "scatter repeat {} out of range for {} repeats",
                self.scatter_repeat, self.repeats
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub seed: u64,
    pub pool_runs: Vec<String>,
    pub test_runs: Vec<String>,
    pub pool_size_deviation: i64,
    pub pooled_documents: usize,
    pub taus: GroupTaus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauSummary {
    /// Mean over repeats with a defined tau; `None` if none were defined.
    pub mean: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauReport {
    pub config: ExperimentConfig,
    pub per_repeat: Vec<RepeatRecord>,
    pub averages: BTreeMap<String, BTreeMap<TestGroup, TauSummary>>,
}

impl TauReport {
    pub fn average(&self, metric: &str, group: TestGroup) -> Option<f64> {
        self.averages.get(metric)?.get(&group)?.mean
    }
}

/// Averages per-repeat taus, excluding and counting undefined ones.
pub fn summarize(per_repeat: &[RepeatRecord]) -> BTreeMap<String, BTreeMap<TestGroup, TauSummary>> {
    let mut collected: BTreeMap<String, BTreeMap<TestGroup, Vec<Option<f64>>>> = BTreeMap::new();
    for record in per_repeat {
        for (metric, groups) in &record.taus {
            for (group, tau) in groups {
                collected
                    .entry(metric.clone())
                    .or_default()
                    .entry(*group)
                    .or_default()
                    .push(*tau);
            }
        }
    }
    collected
        .into_iter()
        .map(|(metric, groups)| {
            let groups = groups
                .into_iter()
                .map(|(group, taus)| {
                    let defined: Vec<f64> = taus.iter().flatten().copied().collect();
                    let summary = TauSummary {
                        mean: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
                        defined: defined.len(),
                        undefined: taus.len() - defined.len(),
                    };
                    (group, summary)
                })
                .collect();
            (metric, groups)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitExperiment {
    pub report: TauReport,
    /// Per-system values from `config.scatter_repeat`.
    pub scatter: ScatterExport,
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Repeated group-aware split experiment over `config.pool_category`.
///
/// Each repeat splits the pool category's runs, pools one side at
/// `config.pool_depth`, and evaluates the other side together with every run
/// of the other categories. Repeats run in parallel; the output is identical
/// for any thread count.
pub fn run_split_experiment(
    runs: &[Run],
    full_qrels: &JudgmentSet,
    config: &ExperimentConfig,
) -> Result<SplitExperiment> {
    config.validate()?;
    if !runs.iter().any(|r| r.category != config.pool_category) {
        return Err(Error::Config(format!(
            "no runs outside the {} pool category to test",
            config.pool_category
        )));
    }
    with_threads(config.threads, || {
        let evaluator = Evaluator::new(
            runs,
            full_qrels,
            config.pool_depth,
            &config.metrics,
            config.tau,
            config.baseline,
        )?;
        let outcomes = (0..config.repeats)
            .into_par_iter()
            .map(|repeat| {
                let seed = derive_seed(config.rng_seed, repeat);
                let split = split_group_aware(runs, config.pool_category, seed)?;
                let pool_side: Vec<&Run> = runs.iter().filter(|r| split.pool_runs.contains(&r.run_tag)).collect();
                let test_side: Vec<&Run> = runs.iter().filter(|r| !split.pool_runs.contains(&r.run_tag)).collect();
                let cmp = evaluator.compare(&pool_side, &test_side)?;
                let record = RepeatRecord {
                    repeat,
                    seed,
                    pool_runs: cmp.pool_run_tags,
                    test_runs: cmp.test_run_tags,
                    pool_size_deviation: split.deviation,
                    pooled_documents: cmp.pool_size,
                    taus: cmp.taus,
                };
                Ok((record, cmp.scatter))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut scatter = ScatterExport::default();
        let mut per_repeat = Vec::with_capacity(outcomes.len());
        for (record, rows) in outcomes {
            if record.repeat == config.scatter_repeat {
                scatter = rows;
            }
            per_repeat.push(record);
        }
        let averages = summarize(&per_repeat);
        Ok(SplitExperiment {
            report: TauReport {
                config: config.clone(),
                per_repeat,
                averages,
            },
            scatter,
        })
    })?
}

/// Which pools a cross experiment builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossMode {
    /// Pool every run of `pool_category`; test every other run.
    Category { pool_category: Category },
    /// Split all runs regardless of category; test each half on the other
    /// half's pool.
    RandomSplit { seed: u64, group_atomic: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossConfig {
    pub pool_depth: usize,
    pub metrics: Vec<MetricConfig>,
    pub tau: TauOptions,
    pub baseline: Baseline,
    pub mode: CrossMode,
}

impl Default for CrossConfig {
    fn default() -> Self {
        CrossConfig {
            pool_depth: 10,
            metrics: vec![MetricConfig::mrr(), MetricConfig::ndcg(10)],
            tau: TauOptions::default(),
            baseline: Baseline::AllRunsPool,
            mode: CrossMode::Category {
                pool_category: Category::Traditional,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossDirection {
    /// e.g. `neural on traditional pool` or `split 1 on split 2 pool`.
    pub label: String,
    pub pool_runs: Vec<String>,
    pub test_runs: Vec<String>,
    pub pooled_documents: usize,
    pub taus: GroupTaus,
    #[serde(skip)]
    pub scatter: ScatterExport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossReport {
    pub config: CrossConfig,
    pub directions: Vec<CrossDirection>,
}

impl CrossReport {
    /// All directions' scatter rows, in direction order.
    pub fn scatter(&self) -> ScatterExport {
        ScatterExport {
            rows: self
                .directions
                .iter()
                .flat_map(|d| d.scatter.rows.iter().cloned())
                .collect(),
        }
    }
}

fn direction(evaluator: &Evaluator<'_>, label: String, pool: &[&Run], test: &[&Run]) -> Result<CrossDirection> {
    let cmp = evaluator.compare(pool, test)?;
    Ok(CrossDirection {
        label,
        pool_runs: cmp.pool_run_tags,
        test_runs: cmp.test_run_tags,
        pooled_documents: cmp.pool_size,
        taus: cmp.taus,
        scatter: cmp.scatter,
    })
}

/// Pools one category and tests the other, or tests each half of a random
/// split on the other half's pool.
pub fn run_cross_category_experiment(
    runs: &[Run],
    full_qrels: &JudgmentSet,
    config: &CrossConfig,
) -> Result<CrossReport> {
    let evaluator = Evaluator::new(
        runs,
        full_qrels,
        config.pool_depth,
        &config.metrics,
        config.tau,
        config.baseline,
    )?;
    let directions = match config.mode {
        CrossMode::Category { pool_category } => {
            let (pool, test): (Vec<&Run>, Vec<&Run>) = runs.iter().partition(|r| r.category == pool_category);
            if pool.is_empty() || test.is_empty() {
                return Err(Error::Config(format!(
                    "cross-category pooling needs {pool_category} runs and runs of another category"
                )));
            }
            let tested: BTreeSet<Category> = test.iter().map(|r| r.category).collect();
            let tested = tested.iter().map(|c| c.as_str()).collect::<Vec<_>>().join("+");
            vec![direction(
                &evaluator,
                format!("{tested} on {pool_category} pool"),
                &pool,
                &test,
            )?]
        }
        CrossMode::RandomSplit { seed, group_atomic } => {
            let all: Vec<&Run> = runs.iter().collect();
            let split = split_runs(&all, group_atomic, seed, "all runs")?;
            let (one, two): (Vec<&Run>, Vec<&Run>) = runs.iter().partition(|r| split.pool_runs.contains(&r.run_tag));
            vec![
                direction(&evaluator, "split 1 on split 2 pool".into(), &two, &one)?,
                direction(&evaluator, "split 2 on split 1 pool".into(), &one, &two)?,
            ]
        }
    };
    Ok(CrossReport {
        config: config.clone(),
        directions,
    })
}
