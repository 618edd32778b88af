//! Synthetic runs and judgments with controllable per-category access to
//! relevant documents.
//!
//! Each topic's relevant documents are partitioned into a shared portion and
//! two category-exclusive portions (traditional-only, neural-only) sized by
//! the category's exclusive rate. A run finds roughly `skill * relevant`
//! relevant documents, each drawn from its category's exclusive portion with
//! probability equal to the run's exclusive affinity and from the shared
//! portion otherwise. Found documents get a score boost scaled by
//! `1 - noise`; everything else (non-relevant documents and relevant ones the
//! run cannot see) is ranked by uniform noise.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reusability::derive_seed;
use crate::trec_io::{write_qrels, write_run, Category, JudgmentSet, ManifestEntry, Run, RunManifest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub topics: usize,
    pub docs_per_topic: usize,
    pub relevant_per_topic: usize,
    pub groups_per_category: usize,
    pub runs_per_group: usize,
    /// Documents returned per topic by each run.
    pub run_length: usize,
    /// Fraction of each topic's relevant documents only traditional runs can find.
    pub traditional_exclusive_rate: f64,
    /// Fraction of each topic's relevant documents only neural runs can find.
    pub neural_exclusive_rate: f64,
    /// Per-run exclusive affinity is the category rate times a factor drawn
    /// uniformly from `1 ± affinity_spread`, clamped to [0, 1].
    pub affinity_spread: f64,
    /// Per-run recall skill is drawn uniformly from this range.
    pub skill_range: (f64, f64),
    /// 0 ranks every found relevant document above all others; 1 makes
    /// relevance invisible to the ranker.
    pub noise: f64,
    /// Relative weights of grades 1, 2, 3 among relevant documents.
    pub grade_weights: [f64; 3],
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            topics: 43,
            docs_per_topic: 100,
            relevant_per_topic: 20,
            groups_per_category: 4,
            runs_per_group: 2,
            run_length: 50,
            traditional_exclusive_rate: 0.0,
            neural_exclusive_rate: 0.0,
            affinity_spread: 0.5,
            skill_range: (0.3, 0.9),
            noise: 0.8,
            grade_weights: [0.6, 0.3, 0.1],
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.topics == 0 || self.docs_per_topic == 0 {
            return fail("topics and docs_per_topic must be positive".into());
        }
        if self.relevant_per_topic > self.docs_per_topic {
            return fail(format!(
                "relevant_per_topic {} exceeds docs_per_topic {}",
                self.relevant_per_topic, self.docs_per_topic
            ));
        }
        if self.groups_per_category == 0 || self.runs_per_group == 0 {
            return fail("groups_per_category and runs_per_group must be positive".into());
        }
        if self.run_length == 0 || self.run_length > self.docs_per_topic {
            return fail(format!("run_length must be in 1..={}", self.docs_per_topic));
        }
        for (name, v) in [
            ("traditional_exclusive_rate", self.traditional_exclusive_rate),
            ("neural_exclusive_rate", self.neural_exclusive_rate),
            ("noise", self.noise),
            ("affinity_spread", self.affinity_spread),
            ("skill_range.0", self.skill_range.0),
            ("skill_range.1", self.skill_range.1),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.skill_range.0 > self.skill_range.1 {
            return fail("skill_range lower bound above upper bound".into());
        }
        let (trad, neural) = self.exclusive_counts();
        if trad + neural > self.relevant_per_topic {
            return fail(format!(
                "exclusive portions ({trad} traditional + {neural} neural) exceed {} relevant per topic",
                self.relevant_per_topic
            ));
        }
        if self.grade_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || self.grade_weights.iter().sum::<f64>() <= 0.0
        {
            return fail("grade_weights must be non-negative with a positive sum".into());
        }
        Ok(())
    }

    /// Sizes of the traditional-only and neural-only relevant portions.
    pub fn exclusive_counts(&self) -> (usize, usize) {
        let r = self.relevant_per_topic as f64;
        (
            (self.traditional_exclusive_rate * r).round() as usize,
            (self.neural_exclusive_rate * r).round() as usize,
        )
    }

    fn rate(&self, category: Category) -> f64 {
        match category {
            Category::Traditional => self.traditional_exclusive_rate,
            Category::Neural => self.neural_exclusive_rate,
            Category::Other => 0.0,
        }
    }
}

/// Generated runs and their full judgments.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCollection {
    pub runs: Vec<Run>,
    pub qrels: JudgmentSet,
}

pub fn topic_id(t: usize) -> String {
    (t + 1).to_string()
}

pub fn doc_id(t: usize, d: usize) -> String {
    format!("t{}-d{d:04}", t + 1)
}

/// Per-topic partition of relevant document indices.
struct TopicLayout {
    shared: Vec<usize>,
    traditional: Vec<usize>,
    neural: Vec<usize>,
    grades: Vec<u8>,
}

fn layout(config: &SynthConfig, topic: usize) -> TopicLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(config.seed, 0), topic));
    let mut docs: Vec<usize> = (0..config.docs_per_topic).collect();
    docs.shuffle(&mut rng);
    let relevant = &docs[..config.relevant_per_topic];
    let (n_trad, n_neural) = config.exclusive_counts();
    let n_shared = relevant.len() - n_trad - n_neural;

    let total: f64 = config.grade_weights.iter().sum();
    let mut grades = vec![0u8; config.docs_per_topic];
    for &d in relevant {
        let mut u = rng.gen::<f64>() * total;
        let mut g = 3u8;
        for (i, w) in config.grade_weights.iter().enumerate() {
            if u < *w {
                g = i as u8 + 1;
                break;
            }
            u -= w;
        }
        grades[d] = g;
    }
    TopicLayout {
        shared: relevant[..n_shared].to_vec(),
        traditional: relevant[n_shared..n_shared + n_trad].to_vec(),
        neural: relevant[n_shared + n_trad..].to_vec(),
        grades,
    }
}

struct RunSpec {
    tag: String,
    group: String,
    category: Category,
    skill: f64,
    affinity: f64,
    index: usize,
}

fn run_specs(config: &SynthConfig) -> Vec<RunSpec> {
    let mut specs = Vec::new();
    for category in [Category::Traditional, Category::Neural] {
        let prefix = match category {
            Category::Traditional => "trad",
            _ => "neural",
        };
        for g in 0..config.groups_per_category {
            for r in 0..config.runs_per_group {
                let index = specs.len();
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(config.seed, 1), index));
                let (lo, hi) = config.skill_range;
                let skill = lo + (hi - lo) * rng.gen::<f64>();
                let factor = 1.0 + config.affinity_spread * (2.0 * rng.gen::<f64>() - 1.0);
                let affinity = (config.rate(category) * factor).clamp(0.0, 1.0);
                specs.push(RunSpec {
                    tag: format!("{prefix}-g{}-r{}", g + 1, r + 1),
                    group: format!("{prefix}-g{}", g + 1),
                    category,
                    skill,
                    affinity,
                    index,
                });
            }
        }
    }
    specs
}

fn rank_topic(config: &SynthConfig, spec: &RunSpec, topic: usize, layout: &TopicLayout) -> Vec<String> {
    let seed = derive_seed(derive_seed(derive_seed(config.seed, 2), spec.index), topic);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut exclusive = match spec.category {
        Category::Traditional => layout.traditional.clone(),
        Category::Neural => layout.neural.clone(),
        Category::Other => Vec::new(),
    };
    let mut shared = layout.shared.clone();
    exclusive.shuffle(&mut rng);
    shared.shuffle(&mut rng);

    let wanted = (0..config.relevant_per_topic)
        .filter(|_| rng.gen_bool(spec.skill))
        .count();
    let mut found = vec![false; config.docs_per_topic];
    for _ in 0..wanted {
        let from_exclusive = !exclusive.is_empty() && (shared.is_empty() || rng.gen_bool(spec.affinity));
        let next = if from_exclusive { exclusive.pop() } else { shared.pop() };
        match next {
            Some(d) => found[d] = true,
            None => break,
        }
    }

    let signal = 1.0 - config.noise;
    let mut scored: Vec<(f64, usize)> = (0..config.docs_per_topic)
        .map(|d| {
            let boost = if found[d] {
                signal * (1.0 + 0.25 * f64::from(layout.grades[d]))
            } else {
                0.0
            };
            (boost + rng.gen::<f64>(), d)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored
        .into_iter()
        .take(config.run_length)
        .map(|(_, d)| doc_id(topic, d))
        .collect()
}

/// Generates a collection. Output depends only on `config`.
pub fn generate(config: &SynthConfig) -> Result<SynthCollection> {
    config.validate()?;
    let layouts: Vec<TopicLayout> = (0..config.topics).into_par_iter().map(|t| layout(config, t)).collect();

    let mut qrels = JudgmentSet::new();
    for (t, l) in layouts.iter().enumerate() {
        for (d, &g) in l.grades.iter().enumerate() {
            qrels.insert(topic_id(t), doc_id(t, d), g);
        }
    }

    let runs = run_specs(config)
        .par_iter()
        .map(|spec| {
            let rankings: BTreeMap<String, Vec<String>> = layouts
                .iter()
                .enumerate()
                .map(|(t, l)| (topic_id(t), rank_topic(config, spec, t, l)))
                .collect();
            Run::new(spec.tag.clone(), spec.group.clone(), spec.category, rankings)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SynthCollection { runs, qrels })
}

impl SynthCollection {
    /// Writes `runs/<tag>.txt`, `qrels.txt` and `manifest.tsv` under `dir`.
    /// Returns the manifest path.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf> {
        let runs_dir = dir.join("runs");
        fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
        let mut manifest = RunManifest::default();
        for run in &self.runs {
            let rel = PathBuf::from("runs").join(format!("{}.txt", run.run_tag));
            let path = dir.join(&rel);
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_run(run, BufWriter::new(file)).map_err(|e| Error::io(&path, e))?;
            manifest.entries.push(ManifestEntry {
                path: rel,
                run_tag: run.run_tag.clone(),
                group_id: run.group_id.clone(),
                category: run.category,
            });
        }
        let qrels_path = dir.join("qrels.txt");
        let file = fs::File::create(&qrels_path).map_err(|e| Error::io(&qrels_path, e))?;
        write_qrels(&self.qrels, BufWriter::new(file)).map_err(|e| Error::io(&qrels_path, e))?;

        let manifest_path = dir.join("manifest.tsv");
        let file = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        manifest
            .write(BufWriter::new(file))
            .map_err(|e| Error::io(&manifest_path, e))?;
        Ok(manifest_path)
    }
}
