//! Reading and writing the TREC run and qrels text formats, plus the run
//! manifest that attaches group and category metadata to each run file.
//!
//! Run lines have six whitespace-separated columns:
//!
//! ```text
//! <topic> Q0 <doc_id> <rank> <score> <tag>
//! ```
//!
//! Qrels lines have four: `<topic> <iteration> <doc_id> <grade>`, with grades
//! on the four-point scale 3 = perfectly relevant, 2 = highly relevant,
//! 1 = relevant, 0 = irrelevant. Documents that were never judged are absent
//! from a [`JudgmentSet`] rather than stored as grade 0.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest grade on the judgment scale.
pub const MAX_GRADE: u8 = 3;

/// System type used to split runs into pools and test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Traditional,
    Neural,
    Other,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Traditional, Category::Neural, Category::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Traditional => "traditional",
            Category::Neural => "neural",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "traditional" => Ok(Category::Traditional),
            "neural" => Ok(Category::Neural),
            "other" => Ok(Category::Other),
            other => Err(Error::Manifest(format!(
                "unknown category {other:?} (expected traditional, neural or other)"
            ))),
        }
    }
}

/// One line of a run file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub topic_id: String,
    /// The second column, conventionally the literal `Q0`.
    pub iteration: String,
    pub doc_id: String,
    pub rank: u32,
    pub score: f64,
    pub run_tag: String,
    /// 1-based line number in the source.
    pub line: usize,
}

/// How the within-topic order of a run is established.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OrderingPolicy {
    /// Score descending, ties broken by doc id descending; the rank column is
    /// ignored. This is the reference evaluator's convention.
    #[default]
    ScoreDescending,
    /// Trust the rank column. Duplicate ranks, or a higher score sitting at a
    /// worse rank, are rejected.
    TrustRank,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunParseOptions {
    pub ordering: OrderingPolicy,
    /// Truncate every topic's list to this many documents after ordering.
    pub max_depth: Option<usize>,
}

/// One system's ranked lists over all topics it answered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub run_tag: String,
    pub group_id: String,
    pub category: Category,
    rankings: BTreeMap<String, Vec<String>>,
}

impl Run {
    /// Builds a run from already-ordered lists, rejecting duplicate or
    /// malformed doc ids within a topic.
    pub fn new(
        run_tag: impl Into<String>,
        group_id: impl Into<String>,
        category: Category,
        rankings: BTreeMap<String, Vec<String>>,
    ) -> Result<Self> {
        let run_tag = run_tag.into();
        for (topic, docs) in &rankings {
            let mut seen = BTreeSet::new();
            for doc in docs {
                if doc.is_empty() || doc.chars().any(char::is_whitespace) {
                    return Err(Error::Validation {
                        source_name: run_tag.clone(),
                        line: 0,
                        message: format!("invalid doc id {doc:?} in topic {topic}"),
                    });
                }
                if !seen.insert(doc.as_str()) {
                    return Err(Error::Validation {
                        source_name: run_tag.clone(),
                        line: 0,
                        message: format!("duplicate doc {doc} in topic {topic}"),
                    });
                }
            }
        }
        Ok(Run {
            run_tag,
            group_id: group_id.into(),
            category,
            rankings,
        })
    }

    /// The ordered list for `topic`, empty when the run did not answer it.
    pub fn ranking(&self, topic: &str) -> &[String] {
        self.rankings.get(topic).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rankings(&self) -> &BTreeMap<String, Vec<String>> {
        &self.rankings
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.rankings.keys().map(String::as_str)
    }

    /// Topics this run answered that have no entry in `qrels`. They are kept
    /// on the run but never evaluated.
    pub fn topics_missing_from<'a>(&'a self, qrels: &JudgmentSet) -> Vec<&'a str> {
        self.topics().filter(|t| !qrels.contains_topic(t)).collect()
    }

    /// A copy with every list cut to at most `depth` documents.
    pub fn truncated(&self, depth: usize) -> Run {
        let rankings = self
            .rankings
            .iter()
            .map(|(t, docs)| (t.clone(), docs.iter().take(depth).cloned().collect()))
            .collect();
        Run {
            rankings,
            ..self.clone()
        }
    }
}

fn parse_err(source_name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn validation_err(source_name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Validation {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

/// Reads the raw six-column entries of a run file. Blank lines and lines
/// starting with `#` are skipped.
pub fn read_run_entries<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<RunEntry>> {
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(parse_err(
                source_name,
                line_no,
                format!("expected 6 columns, found {}: {trimmed:?}", cols.len()),
            ));
        }
        let rank: i64 = cols[3]
            .parse()
            .map_err(|_| parse_err(source_name, line_no, format!("unparsable rank {:?}", cols[3])))?;
        if rank < 1 || rank > u32::MAX as i64 {
            return Err(validation_err(
                source_name,
                line_no,
                format!("rank {rank} out of range (must be >= 1)"),
            ));
        }
        let score: f64 = cols[4]
            .parse()
            .map_err(|_| parse_err(source_name, line_no, format!("unparsable score {:?}", cols[4])))?;
        if !score.is_finite() {
            return Err(validation_err(
                source_name,
                line_no,
                format!("score {:?} is not finite", cols[4]),
            ));
        }
        entries.push(RunEntry {
            topic_id: cols[0].to_string(),
            iteration: cols[1].to_string(),
            doc_id: cols[2].to_string(),
            rank: rank as u32,
            score,
            run_tag: cols[5].to_string(),
            line: line_no,
        });
    }
    Ok(entries)
}

/// Reference-evaluator order: score descending, then doc id descending.
fn score_order(a: &RunEntry, b: &RunEntry) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| b.doc_id.cmp(&a.doc_id))
}

fn order_topic(entries: &mut [RunEntry], policy: OrderingPolicy, source_name: &str) -> Result<()> {
    match policy {
        OrderingPolicy::ScoreDescending => entries.sort_by(score_order),
        OrderingPolicy::TrustRank => {
            entries.sort_by_key(|e| e.rank);
            for pair in entries.windows(2) {
                let (prev, next) = (&pair[0], &pair[1]);
                if prev.rank == next.rank {
                    return Err(validation_err(
                        source_name,
                        next.line,
                        format!("duplicate rank {} in topic {}", next.rank, next.topic_id),
                    ));
                }
                if next.score > prev.score {
                    return Err(validation_err(
                        source_name,
                        next.line,
                        format!(
                            "rank/score disagreement in topic {}: rank {} has score {} above rank {} score {}",
                            next.topic_id, next.rank, next.score, prev.rank, prev.score
                        ),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Parses a run file into canonical per-topic lists.
///
/// `run_tag`, `group_id` and `category` come from the manifest; the tag
/// column inside the file is not checked against `run_tag`.
pub fn parse_run<R: BufRead>(
    reader: R,
    run_tag: &str,
    group_id: &str,
    category: Category,
    options: &RunParseOptions,
) -> Result<Run> {
    parse_run_named(reader, run_tag, run_tag, group_id, category, options)
}

fn parse_run_named<R: BufRead>(
    reader: R,
    source_name: &str,
    run_tag: &str,
    group_id: &str,
    category: Category,
    options: &RunParseOptions,
) -> Result<Run> {
    let entries = read_run_entries(reader, source_name)?;

    let mut by_topic: BTreeMap<String, Vec<RunEntry>> = BTreeMap::new();
    for entry in entries {
        by_topic.entry(entry.topic_id.clone()).or_default().push(entry);
    }

    let mut rankings = BTreeMap::new();
    for (topic, mut list) in by_topic {
        let mut seen = BTreeSet::new();
        for e in &list {
            if !seen.insert(e.doc_id.as_str()) {
                return Err(validation_err(
                    source_name,
                    e.line,
                    format!("duplicate doc {} in topic {topic}", e.doc_id),
                ));
            }
        }
        order_topic(&mut list, options.ordering, source_name)?;
        let depth = options.max_depth.unwrap_or(usize::MAX);
        let docs: Vec<String> = list.into_iter().take(depth).map(|e| e.doc_id).collect();
        rankings.insert(topic, docs);
    }

    Ok(Run {
        run_tag: run_tag.to_string(),
        group_id: group_id.to_string(),
        category,
        rankings,
    })
}

/// Writes a run in the six-column format. Ranks are 1-based positions and
/// scores are strictly decreasing, so re-parsing yields the same lists under
/// either ordering policy.
pub fn write_run<W: Write>(run: &Run, mut out: W) -> std::io::Result<()> {
    for (topic, docs) in &run.rankings {
        let n = docs.len();
        for (i, doc) in docs.iter().enumerate() {
            writeln!(out, "{topic} Q0 {doc} {} {} {}", i + 1, n - i, run.run_tag)?;
        }
    }
    Ok(())
}

/// Per-topic graded judgments. Topics may be present with no judgments, e.g.
/// after projecting onto a pool that found nothing judged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentSet {
    judgments: BTreeMap<String, BTreeMap<String, u8>>,
}

impl JudgmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a topic in the universe even if it has no judgments.
    pub fn add_topic(&mut self, topic: impl Into<String>) {
        self.judgments.entry(topic.into()).or_default();
    }

    /// Inserts a judgment, returning the previous grade if one existed.
    ///
    /// Panics if `grade` exceeds [`MAX_GRADE`].
    pub fn insert(&mut self, topic: impl Into<String>, doc: impl Into<String>, grade: u8) -> Option<u8> {
        assert!(grade <= MAX_GRADE, "grade {grade} outside 0..=3");
        self.judgments
            .entry(topic.into())
            .or_default()
            .insert(doc.into(), grade)
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn num_topics(&self) -> usize {
        self.judgments.len()
    }

    pub fn contains_topic(&self, topic: &str) -> bool {
        self.judgments.contains_key(topic)
    }

    pub fn topic(&self, topic: &str) -> Option<&BTreeMap<String, u8>> {
        self.judgments.get(topic)
    }

    pub fn grade(&self, topic: &str, doc: &str) -> Option<u8> {
        self.judgments.get(topic)?.get(doc).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeMap<String, u8>)> {
        self.judgments.iter().map(|(t, m)| (t.as_str(), m))
    }

    /// Total number of (topic, doc) judgments.
    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of judgments with grade at or above `threshold`.
    pub fn count_at_least(&self, threshold: u8) -> usize {
        self.judgments
            .values()
            .flat_map(BTreeMap::values)
            .filter(|&&g| g >= threshold)
            .count()
    }
}

/// What to do with grades outside 0..=3.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum GradeMode {
    #[default]
    Strict,
    /// Clamp into 0..=3 and record a warning.
    Lenient,
}

/// Parses qrels. Returns the judgments and any warnings (clamped grades,
/// repeated identical lines).
pub fn parse_qrels<R: BufRead>(reader: R, mode: GradeMode) -> Result<(JudgmentSet, Vec<String>)> {
    parse_qrels_named(reader, "qrels", mode)
}

fn parse_qrels_named<R: BufRead>(reader: R, source_name: &str, mode: GradeMode) -> Result<(JudgmentSet, Vec<String>)> {
    let mut set = JudgmentSet::new();
    let mut warnings = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(parse_err(
                source_name,
                line_no,
                format!("expected 4 columns, found {}: {trimmed:?}", cols.len()),
            ));
        }
        let raw: i64 = cols[3]
            .parse()
            .map_err(|_| parse_err(source_name, line_no, format!("unparsable grade {:?}", cols[3])))?;
        let grade = if (0..=MAX_GRADE as i64).contains(&raw) {
            raw as u8
        } else {
            match mode {
                GradeMode::Strict => {
                    return Err(Error::GradeRange {
                        source_name: source_name.to_string(),
                        line: line_no,
                        grade: raw,
                    })
                }
                GradeMode::Lenient => {
                    let clamped = raw.clamp(0, MAX_GRADE as i64) as u8;
                    let msg = format!("{source_name}:{line_no}: grade {raw} clamped to {clamped}");
                    log::warn!("{msg}");
                    warnings.push(msg);
                    clamped
                }
            }
        };
        let (topic, doc) = (cols[0], cols[2]);
        match set.grade(topic, doc) {
            Some(prev) if prev != grade => {
                return Err(validation_err(
                    source_name,
                    line_no,
                    format!("conflicting grades {prev} and {grade} for doc {doc} in topic {topic}"),
                ));
            }
            Some(_) => warnings.push(format!(
                "{source_name}:{line_no}: repeated judgment for doc {doc} in topic {topic}"
            )),
            None => {
                set.insert(topic, doc, grade);
            }
        }
    }
    Ok((set, warnings))
}

/// Writes qrels in the four-column format with iteration `0`.
pub fn write_qrels<W: Write>(qrels: &JudgmentSet, mut out: W) -> std::io::Result<()> {
    for (topic, docs) in qrels.iter() {
        for (doc, grade) in docs {
            writeln!(out, "{topic} 0 {doc} {grade}")?;
        }
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn load_qrels(path: &Path, mode: GradeMode) -> Result<(JudgmentSet, Vec<String>)> {
    parse_qrels_named(open(path)?, &path.display().to_string(), mode)
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub run_tag: String,
    pub group_id: String,
    pub category: Category,
}

/// Tab-separated list of run files with their tag, group and category.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunManifest {
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_HEADER: [&str; 4] = ["path", "run_tag", "group", "category"];

impl RunManifest {
    /// Parses manifest text. Relative paths are resolved against `base_dir`.
    /// File existence is checked when runs are loaded, not here.
    pub fn parse<R: BufRead>(reader: R, base_dir: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut header_seen = false;
        let mut tags = BTreeSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if !header_seen {
                let header: Vec<String> = cols.iter().map(|c| c.to_ascii_lowercase()).collect();
                if header != MANIFEST_HEADER {
                    return Err(Error::Manifest(format!(
                        "line {line_no}: expected header `path\\trun_tag\\tgroup\\tcategory`"
                    )));
                }
                header_seen = true;
                continue;
            }
            if cols.len() != 4 {
                return Err(Error::Manifest(format!(
                    "line {line_no}: expected 4 tab-separated columns, found {}",
                    cols.len()
                )));
            }
            if cols.iter().any(|c| c.is_empty()) {
                return Err(Error::Manifest(format!("line {line_no}: empty column")));
            }
            let category = cols[3]
                .parse::<Category>()
                .map_err(|e| Error::Manifest(format!("line {line_no}: {e}")))?;
            if !tags.insert(cols[1].to_string()) {
                return Err(Error::Manifest(format!(
                    "line {line_no}: duplicate run_tag {:?}",
                    cols[1]
                )));
            }
            let path = Path::new(cols[0]);
            entries.push(ManifestEntry {
                path: if path.is_absolute() {
                    path.to_path_buf()
                } else {
                    base_dir.join(path)
                },
                run_tag: cols[1].to_string(),
                group_id: cols[2].to_string(),
                category,
            });
        }
        Ok(RunManifest { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(open(path)?, base)
    }

    /// Writes the manifest with paths relative to nothing (as stored).
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", MANIFEST_HEADER.join("\t"))?;
        for e in &self.entries {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                e.path.display(),
                e.run_tag,
                e.group_id,
                e.category
            )?;
        }
        Ok(())
    }
}

/// Runs loaded from a manifest, in manifest order.
#[derive(Debug, Clone, Default)]
pub struct LoadedRuns {
    pub runs: Vec<Run>,
    pub warnings: Vec<String>,
}

impl LoadedRuns {
    pub fn counts_by_category(&self) -> BTreeMap<Category, usize> {
        count_by_category(&self.runs)
    }
}

pub fn count_by_category(runs: &[Run]) -> BTreeMap<Category, usize> {
    let mut counts = BTreeMap::new();
    for run in runs {
        *counts.entry(run.category).or_insert(0) += 1;
    }
    counts
}

/// Loads every run named by the manifest. Files are parsed concurrently;
/// the result keeps manifest order.
pub fn load_runs(manifest: &RunManifest, options: &RunParseOptions) -> Result<LoadedRuns> {
    let mut warnings = Vec::new();
    if manifest.entries.is_empty() {
        let msg = "manifest lists no runs".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    for e in &manifest.entries {
        if !e.path.is_file() {
            return Err(Error::Manifest(format!(
                "run file {} for {} does not exist",
                e.path.display(),
                e.run_tag
            )));
        }
    }
    let runs = manifest
        .entries
        .par_iter()
        .map(|e| {
            let reader = open(&e.path)?;
            parse_run_named(
                reader,
                &e.path.display().to_string(),
                &e.run_tag,
                &e.group_id,
                e.category,
                options,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let loaded = LoadedRuns { runs, warnings };
    log::info!(
        "loaded {} runs: {}",
        loaded.runs.len(),
        loaded
            .counts_by_category()
            .iter()
            .map(|(c, n)| format!("{n} {c}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(loaded)
}

/// Reads a manifest file and loads all of its runs.
pub fn load_manifest(path: &Path, options: &RunParseOptions) -> Result<LoadedRuns> {
    load_runs(&RunManifest::from_file(path)?, options)
}
