//! NDCG@k and reciprocal rank over graded judgments.
//!
//! Conventions, none of which are fixed by the track data itself:
//! - gain is `2^g - 1` by default, `g` with [`Gain::Linear`];
//! - the discount at 1-based position `i` is `1 / log2(i + 1)`;
//! - a topic with no relevant judgment (IDCG = 0, or no grade at or above
//!   the MRR threshold) scores 0 and is listed in
//!   [`EvaluationResult::no_relevant_topics`];
//! - reciprocal rank binarizes at grade >= 1 and looks at the full list unless
//!   `mrr_cutoff` is set.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trec_io::{JudgmentSet, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gain {
    Exponential,
    Linear,
}

impl Gain {
    pub fn value(self, grade: u8) -> f64 {
        match self {
            Gain::Exponential => f64::from((1u32 << grade) - 1),
            Gain::Linear => f64::from(grade),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "ndcg")]
    NdcgAtK,
    #[serde(rename = "mrr")]
    Mrr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricConfig {
    pub metric: Metric,
    /// NDCG cutoff.
    pub k: usize,
    pub gain: Gain,
    pub mrr_threshold: u8,
    pub mrr_cutoff: Option<usize>,
}

impl MetricConfig {
    pub fn ndcg(k: usize) -> Self {
        MetricConfig {
            metric: Metric::NdcgAtK,
            k,
            gain: Gain::Exponential,
            mrr_threshold: 1,
            mrr_cutoff: None,
        }
    }

    pub fn mrr() -> Self {
        MetricConfig {
            metric: Metric::Mrr,
            k: 10,
            gain: Gain::Exponential,
            mrr_threshold: 1,
            mrr_cutoff: None,
        }
    }

    pub fn with_gain(mut self, gain: Gain) -> Self {
        self.gain = gain;
        self
    }

    pub fn with_mrr_threshold(mut self, threshold: u8) -> Self {
        self.mrr_threshold = threshold;
        self
    }

    pub fn with_mrr_cutoff(mut self, cutoff: Option<usize>) -> Self {
        self.mrr_cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("metric cutoff k must be at least 1".into()));
        }
        if !(1..=3).contains(&self.mrr_threshold) {
            return Err(Error::Config(format!(
                "mrr threshold {} outside 1..=3",
                self.mrr_threshold
            )));
        }
        if self.mrr_cutoff == Some(0) {
            return Err(Error::Config("mrr cutoff must be at least 1".into()));
        }
        Ok(())
    }

    /// Short name used in reports, e.g. `ndcg@10`, `mrr`, `mrr@10`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Deepest rank this metric can look at, if bounded.
    pub fn max_depth(&self) -> Option<usize> {
        match self.metric {
            Metric::NdcgAtK => Some(self.k),
            Metric::Mrr => self.mrr_cutoff,
        }
    }
}

impl fmt::Display for MetricConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.metric {
            Metric::NdcgAtK => write!(f, "ndcg@{}", self.k),
            Metric::Mrr => match self.mrr_cutoff {
                Some(c) => write!(f, "mrr@{c}"),
                None => f.write_str("mrr"),
            },
        }
    }
}

#[inline]
fn discount(position: usize) -> f64 {
    // position is 1-based
    1.0 / ((position + 1) as f64).log2()
}

/// Unnormalized DCG of the first `k` documents; unjudged docs gain nothing.
pub fn dcg_at_k<S: AsRef<str>>(ranking: &[S], judgments: &BTreeMap<String, u8>, k: usize, gain: Gain) -> f64 {
    ranking
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, doc)| {
            let g = judgments.get(doc.as_ref()).copied().unwrap_or(0);
            gain.value(g) * discount(i + 1)
        })
        .sum()
}

/// DCG of the best possible ordering of the judged documents.
pub fn ideal_dcg_at_k(judgments: &BTreeMap<String, u8>, k: usize, gain: Gain) -> f64 {
    let mut grades: Vec<u8> = judgments.values().copied().filter(|&g| g > 0).collect();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    grades
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| gain.value(g) * discount(i + 1))
        .sum()
}

/// NDCG at `config.k`. Returns 0 when the topic has no relevant judgment.
pub fn ndcg_at_k<S: AsRef<str>>(ranking: &[S], judgments: &BTreeMap<String, u8>, config: &MetricConfig) -> f64 {
    let ideal = ideal_dcg_at_k(judgments, config.k, config.gain);
    if ideal == 0.0 {
        return 0.0;
    }
    dcg_at_k(ranking, judgments, config.k, config.gain) / ideal
}

/// Reciprocal rank of the first document graded at least
/// `config.mrr_threshold`, within `config.mrr_cutoff` if set.
pub fn mrr<S: AsRef<str>>(ranking: &[S], judgments: &BTreeMap<String, u8>, config: &MetricConfig) -> f64 {
    let limit = config.mrr_cutoff.unwrap_or(usize::MAX);
    ranking
        .iter()
        .take(limit)
        .position(|doc| judgments.get(doc.as_ref()).is_some_and(|&g| g >= config.mrr_threshold))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Scores one topic under `config`.
pub fn score_topic<S: AsRef<str>>(ranking: &[S], judgments: &BTreeMap<String, u8>, config: &MetricConfig) -> f64 {
    match config.metric {
        Metric::NdcgAtK => ndcg_at_k(ranking, judgments, config),
        Metric::Mrr => mrr(ranking, judgments, config),
    }
}

fn has_relevant(judgments: &BTreeMap<String, u8>, config: &MetricConfig) -> bool {
    let threshold = match config.metric {
        Metric::NdcgAtK => 1,
        Metric::Mrr => config.mrr_threshold,
    };
    judgments.values().any(|&g| g >= threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationResult {
    pub run_tag: String,
    pub metric: String,
    pub per_topic: BTreeMap<String, f64>,
    pub mean: f64,
    /// Topics with nothing relevant to find; they score 0.
    pub no_relevant_topics: Vec<String>,
}

/// Scores `run` on every topic in `judgments`. Topics the run did not answer
/// score 0; topics the run answered but which are not judged are ignored.
pub fn evaluate_run(run: &Run, judgments: &JudgmentSet, config: &MetricConfig) -> EvaluationResult {
    let mut per_topic = BTreeMap::new();
    let mut no_relevant_topics = Vec::new();
    for (topic, judged) in judgments.iter() {
        if !has_relevant(judged, config) {
            no_relevant_topics.push(topic.to_string());
        }
        per_topic.insert(topic.to_string(), score_topic(run.ranking(topic), judged, config));
    }
    let mean = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.values().sum::<f64>() / per_topic.len() as f64
    };
    EvaluationResult {
        run_tag: run.run_tag.clone(),
        metric: config.label(),
        per_topic,
        mean,
        no_relevant_topics,
    }
}

/// Writes `run_tag,topic,metric,value` rows plus one `run_tag,all,metric,mean`
/// summary row per result.
pub fn write_evaluation_csv<W: Write>(results: &[EvaluationResult], mut out: W) -> std::io::Result<()> {
    writeln!(out, "run_tag,topic,metric,value")?;
    for r in results {
        for (topic, value) in &r.per_topic {
            writeln!(out, "{},{},{},{}", r.run_tag, topic, r.metric, value)?;
        }
        writeln!(out, "{},all,{},{}", r.run_tag, r.metric, r.mean)?;
    }
    Ok(())
}
