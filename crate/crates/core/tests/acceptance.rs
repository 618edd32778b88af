//! Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any check fails.
//!
//! Criterion 6 needs real shared-task data: set `POOLSIM_TREC_DL_DIR` to a
//! directory holding `doc/` and `passage/`, each with `manifest.tsv` and
//! `qrels.txt`.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use poolsim::metrics::dcg_at_k;
use poolsim::pooling::curves_by_category;
use poolsim::rank_correlation::tau_of;
use poolsim::reusability::{split_group_aware, Evaluator, TestGroup};
use poolsim::trec_io::{count_by_category, load_qrels, GradeMode};
use poolsim::{
    build_pool, evaluate_run, generate, load_manifest, mrr, ndcg_at_k, project_judgments, run_split_experiment,
    Baseline, Category, ExperimentConfig, Gain, JudgmentSet, MetricConfig, Run, RunParseOptions, SynthConfig,
    TauOptions, TauVariant,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    match result {
        Err(msg) => Outcome::Fail(format!("{msg} ({elapsed:.2?})")),
        Ok(msg) => match limit {
            Some(l) if elapsed >= l => Outcome::Fail(format!("{msg}; took {elapsed:.2?}, limit {l:?}")),
            _ => Outcome::Pass(format!("{msg} ({elapsed:.2?})")),
        },
    }
}

fn metric_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2019);
    let ndcg = MetricConfig::ndcg(10);
    let rr = MetricConfig::mrr();
    let mut worst = 0.0f64;
    let topics = 500;
    for case in 0..topics {
        let n = rng.gen_range(1..=15);
        let mut docs: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let mut judged = BTreeMap::new();
        for d in &docs {
            if rng.gen_bool(0.85) {
                judged.insert(d.clone(), rng.gen_range(0..=3u8));
            }
        }
        docs.shuffle(&mut rng);
        let keep = rng.gen_range(1..=n);
        docs.truncate(keep);
        let pairs = [
            (
                ndcg_at_k(&docs, &judged, &ndcg),
                common::ndcg_oracle(&docs, &judged, 10, true),
            ),
            (mrr(&docs, &judged, &rr), common::rr_oracle(&docs, &judged, 1, None)),
        ];
        for (got, want) in pairs {
            let diff = (got - want).abs();
            worst = worst.max(diff);
            if diff > 1e-12 {
                return Err(format!("case {case}: {got} vs oracle {want}"));
            }
        }
    }
    Ok(format!("{topics} topics, max |diff| {worst:e}"))
}

fn tau_exactness() -> Result<String, String> {
    let mut pairs = 0usize;
    for n in 1..=6 {
        let vectors = common::ternary_vectors(n);
        for x in &vectors {
            for y in &vectors {
                if n < 2 {
                    if tau_of(x, y, TauVariant::TauB).is_ok() {
                        return Err("tau defined for a single system".into());
                    }
                    continue;
                }
                pairs += 1;
                let a = tau_of(x, y, TauVariant::TauA).map_err(|e| e.to_string())?;
                if a != common::tau_a_oracle(x, y) {
                    return Err(format!("tau-a {x:?} {y:?}: {a}"));
                }
                let b = tau_of(x, y, TauVariant::TauB).ok();
                if b != common::tau_b_oracle(x, y) {
                    return Err(format!("tau-b {x:?} {y:?}: {b:?}"));
                }
            }
        }
    }
    Ok(format!("{pairs} vector pairs, exact"))
}

fn pooling_identities() -> Result<String, String> {
    let c = generate(&SynthConfig {
        topics: 20,
        seed: 3,
        ..SynthConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let pairs = |runs: &[Run], k| common::pool_pairs(&build_pool(runs, k).unwrap());
    for k in 1..20 {
        if !pairs(&c.runs, k).is_subset(&pairs(&c.runs, k + 1)) {
            return Err(format!("pool at depth {k} not contained in depth {}", k + 1));
        }
    }
    for n in 1..c.runs.len() {
        if !pairs(&c.runs[..n], 10).is_subset(&pairs(&c.runs[..n + 1], 10)) {
            return Err(format!("pool of {n} runs not contained in pool of {}", n + 1));
        }
    }
    let metrics = [MetricConfig::ndcg(10), MetricConfig::mrr().with_mrr_cutoff(Some(10))];
    let ev = Evaluator::new(
        &c.runs,
        &c.qrels,
        10,
        &metrics,
        TauOptions::default(),
        Baseline::AllRunsPool,
    )
    .map_err(|e| e.to_string())?;
    let all: Vec<&Run> = c.runs.iter().collect();
    let cmp = ev.compare(&all, &all).map_err(|e| e.to_string())?;
    if let Some(r) = cmp.scatter.rows.iter().find(|r| r.actual != r.estimated) {
        return Err(format!(
            "{} {}: actual {} estimated {}",
            r.run_tag, r.metric, r.actual, r.estimated
        ));
    }
    for (metric, groups) in &cmp.taus {
        for (group, tau) in groups {
            if *tau != Some(1.0) {
                return Err(format!("{metric} {group:?}: tau {tau:?}"));
            }
        }
    }
    Ok(format!(
        "{} runs, depth 1..=20 and run prefixes; identity holds",
        c.runs.len()
    ))
}

fn projection_monotonicity() -> Result<String, String> {
    let mut checks = 0usize;
    let configs = 60u64;
    let rr = MetricConfig::mrr();
    for i in 0..configs {
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let config = SynthConfig {
            topics: rng.gen_range(3..=12),
            docs_per_topic: rng.gen_range(40..=120),
            relevant_per_topic: rng.gen_range(5..=25),
            groups_per_category: rng.gen_range(2..=5),
            runs_per_group: rng.gen_range(1..=3),
            run_length: rng.gen_range(10..=40),
            traditional_exclusive_rate: rng.gen_range(0.0..0.4),
            neural_exclusive_rate: rng.gen_range(0.0..0.4),
            noise: rng.gen_range(0.1..1.0),
            seed: i,
            ..SynthConfig::default()
        };
        let c = generate(&config).map_err(|e| format!("config {i}: {e}"))?;
        let depth = rng.gen_range(1..=15);
        let actual = project_judgments(&c.qrels, &build_pool(&c.runs, depth).unwrap());
        let mut pools: Vec<Vec<&Run>> = Vec::new();
        for cat in [Category::Traditional, Category::Neural] {
            pools.push(c.runs.iter().filter(|r| r.category == cat).collect());
            let split = split_group_aware(&c.runs, cat, i).map_err(|e| e.to_string())?;
            pools.push(c.runs.iter().filter(|r| split.pool_runs.contains(&r.run_tag)).collect());
        }
        for pool_runs in pools {
            let est = project_judgments(&c.qrels, &build_pool(pool_runs, depth).unwrap());
            for run in &c.runs {
                let (ra, re) = (evaluate_run(run, &actual, &rr), evaluate_run(run, &est, &rr));
                for (topic, a) in &ra.per_topic {
                    checks += 1;
                    if re.per_topic[topic] > *a {
                        return Err(format!(
                            "config {i} {} topic {topic}: MRR {} > {a}",
                            run.run_tag, re.per_topic[topic]
                        ));
                    }
                }
                for topic in actual.topic_ids() {
                    let empty = BTreeMap::new();
                    let a = dcg_at_k(
                        run.ranking(topic),
                        actual.topic(topic).unwrap_or(&empty),
                        10,
                        Gain::Exponential,
                    );
                    let e = dcg_at_k(
                        run.ranking(topic),
                        est.topic(topic).unwrap_or(&empty),
                        10,
                        Gain::Exponential,
                    );
                    checks += 1;
                    if e > a {
                        return Err(format!("config {i} {} topic {topic}: DCG {e} > {a}", run.run_tag));
                    }
                }
            }
        }
    }
    Ok(format!(
        "{configs} configurations, {checks} per-topic checks, 0 violations"
    ))
}

fn neural_tau(config: &SynthConfig, pool_category: Category) -> Result<f64, String> {
    let c = generate(config).map_err(|e| e.to_string())?;
    let exp = run_split_experiment(
        &c.runs,
        &c.qrels,
        &ExperimentConfig {
            rng_seed: config.seed,
            pool_category,
            metrics: vec![MetricConfig::ndcg(10)],
            ..ExperimentConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    exp.report
        .average("ndcg@10", TestGroup::Neural)
        .ok_or_else(|| format!("seed {}: neural tau undefined in every repeat", config.seed))
}

fn bias_direction() -> Result<String, String> {
    let seeds = 20u64;
    let (mut under_trad, mut under_neural) = (0.0, 0.0);
    for seed in 0..seeds {
        let config = SynthConfig {
            traditional_exclusive_rate: 0.0,
            neural_exclusive_rate: 0.5,
            seed,
            ..SynthConfig::default()
        };
        under_trad += neural_tau(&config, Category::Traditional)?;
        under_neural += neural_tau(&config, Category::Neural)?;
    }
    under_trad /= seeds as f64;
    under_neural /= seeds as f64;
    let msg = format!(
        "neural-system NDCG@10 tau: {under_trad:.3} under traditional pools, {under_neural:.3} under neural pools"
    );
    if under_trad < under_neural {
        Ok(msg)
    } else {
        Err(msg)
    }
}

struct TaskExpectation {
    name: &'static str,
    runs: usize,
    neural: usize,
    traditional: usize,
    /// (pool category, metric, [traditional, neural, all])
    taus: [(Category, &'static str, [f64; 3]); 4],
}

const TASKS: [TaskExpectation; 2] = [
    TaskExpectation {
        name: "doc",
        runs: 38,
        neural: 27,
        traditional: 11,
        taus: [
            (Category::Traditional, "mrr", [0.436, -0.12, -0.19]),
            (Category::Traditional, "ndcg@10", [0.772, 0.68, 0.676]),
            (Category::Neural, "mrr", [0.769, 0.635, 0.842]),
            (Category::Neural, "ndcg@10", [0.774, 0.836, 0.852]),
        ],
    },
    TaskExpectation {
        name: "passage",
        runs: 37,
        neural: 26,
        traditional: 11,
        taus: [
            (Category::Traditional, "mrr", [0.63, 0.004, 0.0]),
            (Category::Traditional, "ndcg@10", [0.789, 0.574, 0.612]),
            (Category::Neural, "mrr", [0.7, 0.81, 0.875]),
            (Category::Neural, "ndcg@10", [0.89, 0.874, 0.881]),
        ],
    },
];

fn check_task(dir: &Path, task: &TaskExpectation) -> Result<Vec<String>, String> {
    let base = dir.join(task.name);
    let loaded = load_manifest(&base.join("manifest.tsv"), &RunParseOptions::default()).map_err(|e| e.to_string())?;
    let (qrels, _) = load_qrels(&base.join("qrels.txt"), GradeMode::Lenient).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    let counts = count_by_category(&loaded.runs);
    let count = |c| counts.get(&c).copied().unwrap_or(0);
    if qrels.num_topics() != 43
        || loaded.runs.len() != task.runs
        || count(Category::Neural) != task.neural
        || count(Category::Traditional) != task.traditional
    {
        return Err(format!(
            "{}: {} topics, {} runs ({} neural, {} traditional)",
            task.name,
            qrels.num_topics(),
            loaded.runs.len(),
            count(Category::Neural),
            count(Category::Traditional)
        ));
    }
    if task.name == "passage" {
        let curves = curves_by_category(&loaded.runs, &qrels, 100, 1).map_err(|e| e.to_string())?;
        let get = |label: &str| curves.iter().find(|c| c.category_label == label).cloned();
        let (Some(trad), Some(neural)) = (get("traditional"), get("neural")) else {
            return Err("passage curves missing a category".into());
        };
        if let Some(k) = (1..=100).find(|&k| neural.at(k) < trad.at(k)) {
            return Err(format!("passage curve: neural below traditional at k={k}"));
        }
    }
    check_taus(&loaded.runs, &qrels, task, &mut notes)?;
    Ok(notes)
}

fn check_taus(
    runs: &[Run],
    qrels: &JudgmentSet,
    task: &TaskExpectation,
    notes: &mut Vec<String>,
) -> Result<(), String> {
    for pool_category in [Category::Traditional, Category::Neural] {
        let exp = run_split_experiment(
            runs,
            qrels,
            &ExperimentConfig {
                pool_category,
                ..ExperimentConfig::default()
            },
        )
        .map_err(|e| e.to_string())?;
        for (cat, metric, want) in task.taus.iter().filter(|t| t.0 == pool_category) {
            for (group, expected) in TestGroup::ALL.iter().zip(want) {
                let got = exp.report.average(metric, *group);
                let ok = got.is_some_and(|g| (g - expected).abs() <= 0.15);
                let line = format!("{} {cat} pool {metric} {group:?}: {got:?} vs {expected}", task.name);
                if !ok {
                    return Err(line);
                }
                notes.push(line);
            }
        }
    }
    Ok(())
}

fn shared_task_reproduction() -> Outcome {
    let Some(dir) = std::env::var_os("POOLSIM_TREC_DL_DIR") else {
        return Outcome::Skip("POOLSIM_TREC_DL_DIR not set; shared-task runs are not bundled".into());
    };
    let dir = Path::new(&dir);
    let mut checked = 0;
    for task in &TASKS {
        match check_task(dir, task) {
            Ok(notes) => checked += notes.len(),
            Err(e) => return Outcome::Fail(e),
        }
    }
    Outcome::Pass(format!("counts, passage curve and {checked} taus within 0.15"))
}

fn thread_determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let d = root.to_str().unwrap();
    if poolsim::cli::run(["poolsim", "synth", "--out-dir", d, "--seed", "8", "--topics", "20"]) != 0 {
        return Err("synth failed".into());
    }
    let manifest = root.join("manifest.tsv");
    let qrels = root.join("qrels.txt");
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = root.join(format!("report-{threads}.json"));
        let code = poolsim::cli::run([
            "poolsim",
            "--threads",
            threads,
            "reuse",
            "--manifest",
            manifest.to_str().unwrap(),
            "--qrels",
            qrels.to_str().unwrap(),
            "--pool-category",
            "neural",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
        if code != 0 {
            return Err(format!("reuse exited {code} with {threads} threads"));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    if outputs[0] == outputs[1] {
        Ok(format!("{} bytes identical for 1 and 4 threads", outputs[0].len()))
    } else {
        Err("reports differ between thread counts".into())
    }
}

type Check = (&'static str, Box<dyn FnOnce() -> Outcome>);

fn main() {
    let checks: Vec<Check> = vec![
        (
            "1 metric oracle equivalence",
            Box::new(|| timed(Some(Duration::from_secs(1)), metric_oracle)),
        ),
        (
            "2 kendall tau exactness",
            Box::new(|| timed(Some(Duration::from_secs(10)), tau_exactness)),
        ),
        (
            "3 pooling identities",
            Box::new(|| timed(Some(Duration::from_secs(1)), pooling_identities)),
        ),
        (
            "4 projection monotonicity",
            Box::new(|| timed(None, projection_monotonicity)),
        ),
        (
            "5 bias direction",
            Box::new(|| timed(Some(Duration::from_secs(60)), bias_direction)),
        ),
        ("6 shared-task reproduction", Box::new(shared_task_reproduction)),
        (
            "7 thread-count determinism",
            Box::new(|| timed(None, thread_determinism)),
        ),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Outcome::Pass(msg) => println!("PASS  criterion {name}: {msg}"),
            Outcome::Skip(msg) => println!("SKIP  criterion {name}: {msg}"),
            Outcome::Fail(msg) => {
                failed += 1;
                println!("FAIL  criterion {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
