//! Simulated test-collection construction by depth-k pooling, and
//! measurement of how faithfully the resulting collections rank systems
//! that did not contribute to the pool.
//!
//! The pipeline:
//!
//! 1. [`trec_io`] reads runs, qrels and a manifest tagging each run with a
//!    submitting group and a [`Category`] (traditional, neural, other).
//! 2. [`pooling`] builds depth-k pools from run subsets and projects the
//!    judgments onto them.
//! 3. [`metrics`] scores runs with NDCG@k and reciprocal rank.
//! 4. [`rank_correlation`] compares system orderings with Kendall's tau.
//! 5. [`reusability`] runs the repeated group-aware split experiment and the
//!    cross-category experiment.
//! 6. [`synth`] generates collections with controllable category bias.
//!
//! ```
//! use poolsim::{generate, run_split_experiment, Category, ExperimentConfig, SynthConfig};
//!
//! let data = generate(&SynthConfig { topics: 5, neural_exclusive_rate: 0.5, ..Default::default() })?;
//! let config = ExperimentConfig { repeats: 2, rng_seed: 7, scatter_repeat: 0, ..Default::default() };
//! let result = run_split_experiment(&data.runs, &data.qrels, &config)?;
//! assert_eq!(result.report.per_repeat.len(), 2);
//! # Ok::<(), poolsim::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod metrics;
pub mod pooling;
pub mod rank_correlation;
pub mod report;
pub mod reusability;
pub mod synth;
pub mod trec_io;

pub use error::{Error, Result};
pub use metrics::{evaluate_run, mrr, ndcg_at_k, EvaluationResult, Gain, Metric, MetricConfig};
pub use pooling::{build_pool, cumulative_relevant_curve, project_judgments, Pool, RelevantCountCurve};
pub use rank_correlation::{kendall_tau, PairedScores, TauOptions, TauVariant};
pub use report::{ScatterExport, ScatterRow};
pub use reusability::{
    run_cross_category_experiment, run_split_experiment, split_group_aware, Baseline, CrossConfig, CrossMode,
    CrossReport, ExperimentConfig, SplitAssignment, TauReport, TestGroup,
};
pub use synth::{generate, SynthCollection, SynthConfig};
pub use trec_io::{
    load_manifest, parse_qrels, parse_run, Category, GradeMode, JudgmentSet, OrderingPolicy, Run, RunManifest,
    RunParseOptions,
};
