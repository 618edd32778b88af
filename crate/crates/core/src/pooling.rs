//! Depth-k pooling over run subsets, projection of judgments onto a pool,
//! and cumulative relevant-document curves.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trec_io::{Category, JudgmentSet, Run};

/// Default grade at or above which a document counts as relevant.
pub const DEFAULT_RELEVANT_THRESHOLD: u8 = 1;

/// Per-topic union of the top-k documents of a set of runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pool {
    pub depth: usize,
    pub contributing_run_tags: BTreeSet<String>,
    pub members: BTreeMap<String, BTreeSet<String>>,
    /// For each run, the number of topics where its list was shorter than
    /// `depth`. Such runs contribute their whole list.
    pub shortfall: BTreeMap<String, usize>,
    /// Which runs contributed each (topic, doc), when requested.
    pub provenance: Option<BTreeMap<String, BTreeMap<String, BTreeSet<String>>>>,
}

impl Pool {
    pub fn topic(&self, topic: &str) -> Option<&BTreeSet<String>> {
        self.members.get(topic)
    }

    pub fn contains(&self, topic: &str, doc: &str) -> bool {
        self.members.get(topic).is_some_and(|m| m.contains(doc))
    }

    /// Total pooled (topic, doc) pairs.
    pub fn len(&self) -> usize {
        self.members.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes `topic<TAB>doc_id` lines sorted by topic then doc id.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (topic, docs) in &self.members {
            for doc in docs {
                writeln!(out, "{topic}\t{doc}")?;
            }
        }
        Ok(())
    }
}

fn pool_impl<'a, I>(runs: I, depth: usize, with_provenance: bool) -> Result<Pool>
where
    I: IntoIterator<Item = &'a Run>,
{
    if depth == 0 {
        return Err(Error::Config("pool depth must be at least 1".into()));
    }
    let mut pool = Pool {
        depth,
        contributing_run_tags: BTreeSet::new(),
        members: BTreeMap::new(),
        shortfall: BTreeMap::new(),
        provenance: with_provenance.then(BTreeMap::new),
    };
    for run in runs {
        pool.contributing_run_tags.insert(run.run_tag.clone());
        let mut short = 0;
        for (topic, docs) in run.rankings() {
            if docs.len() < depth {
                short += 1;
            }
            let members = pool.members.entry(topic.clone()).or_default();
            for doc in docs.iter().take(depth) {
                members.insert(doc.clone());
                if let Some(prov) = pool.provenance.as_mut() {
                    prov.entry(topic.clone())
                        .or_default()
                        .entry(doc.clone())
                        .or_default()
                        .insert(run.run_tag.clone());
                }
            }
        }
        pool.shortfall.insert(run.run_tag.clone(), short);
    }
    if pool.contributing_run_tags.is_empty() {
        return Err(Error::EmptyRunSet);
    }
    Ok(pool)
}

/// Builds the depth-`depth` pool of `runs`.
pub fn build_pool<'a, I>(runs: I, depth: usize) -> Result<Pool>
where
    I: IntoIterator<Item = &'a Run>,
{
    pool_impl(runs, depth, false)
}

/// Like [`build_pool`], also recording which runs contributed each document.
pub fn build_pool_with_provenance<'a, I>(runs: I, depth: usize) -> Result<Pool>
where
    I: IntoIterator<Item = &'a Run>,
{
    pool_impl(runs, depth, true)
}

/// Keeps only the judgments whose document is in the pool for its topic.
/// The topic universe of `full` is preserved, so topics whose pooled docs were
/// all unjudged stay present with no judgments.
pub fn project_judgments(full: &JudgmentSet, pool: &Pool) -> JudgmentSet {
    let mut out = JudgmentSet::new();
    for (topic, docs) in full.iter() {
        out.add_topic(topic);
        let Some(members) = pool.topic(topic) else {
            continue;
        };
        for (doc, &grade) in docs {
            if members.contains(doc) {
                out.insert(topic, doc.as_str(), grade);
            }
        }
    }
    out
}

/// Cumulative number of distinct relevant documents found by pooling a run
/// set to each cutoff, summed over topics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelevantCountCurve {
    pub category_label: String,
    /// `counts[k - 1]` is the count at cutoff `k`.
    pub counts: Vec<usize>,
}

impl RelevantCountCurve {
    pub fn at(&self, cutoff: usize) -> usize {
        self.counts[cutoff - 1]
    }
}

/// Computes the relevant-count curve for cutoffs `1..=k_max`. Only topics in
/// `full` count; unjudged documents are not relevant.
pub fn cumulative_relevant_curve<'a, I>(
    runs: I,
    full: &JudgmentSet,
    k_max: usize,
    relevant_threshold: u8,
    label: impl Into<String>,
) -> Result<RelevantCountCurve>
where
    I: IntoIterator<Item = &'a Run>,
{
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let runs: Vec<&Run> = runs.into_iter().collect();
    let mut counts = vec![0usize; k_max];
    for (topic, judged) in full.iter() {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut found = 0usize;
        for (k, slot) in counts.iter_mut().enumerate() {
            for run in &runs {
                if let Some(doc) = run.ranking(topic).get(k) {
                    if seen.insert(doc.as_str()) && judged.get(doc).is_some_and(|&g| g >= relevant_threshold) {
                        found += 1;
                    }
                }
            }
            *slot += found;
        }
    }
    Ok(RelevantCountCurve {
        category_label: label.into(),
        counts,
    })
}

/// One curve per category present in `runs`, in category order.
pub fn curves_by_category(
    runs: &[Run],
    full: &JudgmentSet,
    k_max: usize,
    relevant_threshold: u8,
) -> Result<Vec<RelevantCountCurve>> {
    Category::ALL
        .iter()
        .filter(|c| runs.iter().any(|r| r.category == **c))
        .map(|&c| {
            cumulative_relevant_curve(
                runs.iter().filter(|r| r.category == c),
                full,
                k_max,
                relevant_threshold,
                c.as_str(),
            )
        })
        .collect()
}

/// Writes `cutoff,category,count` rows.
pub fn write_curves_csv<W: Write>(curves: &[RelevantCountCurve], mut out: W) -> std::io::Result<()> {
    writeln!(out, "cutoff,category,count")?;
    for curve in curves {
        for (i, count) in curve.counts.iter().enumerate() {
            writeln!(out, "{},{},{}", i + 1, curve.category_label, count)?;
        }
    }
    Ok(())
}
