//! Brute-force reference implementations shared by the integration tests.
//! These deliberately avoid calling into the library's metric, tau and
//! pooling code.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use poolsim::Run;

/// DCG@k by direct summation, gain 2^g - 1 or g.
pub fn dcg_oracle(ranking: &[String], judged: &BTreeMap<String, u8>, k: usize, exponential: bool) -> f64 {
    let mut total = 0.0;
    for i in 0..ranking.len().min(k) {
        let g = *judged.get(&ranking[i]).unwrap_or(&0) as i32;
        let gain = if exponential { 2f64.powi(g) - 1.0 } else { g as f64 };
        total += gain / ((i + 2) as f64).log2();
    }
    total
}

/// NDCG@k with IDCG from sorting every judged grade.
pub fn ndcg_oracle(ranking: &[String], judged: &BTreeMap<String, u8>, k: usize, exponential: bool) -> f64 {
    let mut grades: Vec<u8> = judged.values().copied().collect();
    grades.sort_by(|a, b| b.cmp(a));
    let ideal_docs: Vec<String> = (0..grades.len()).map(|i| format!("__ideal{i}")).collect();
    let ideal_judged: BTreeMap<String, u8> = ideal_docs.iter().cloned().zip(grades).collect();
    let ideal = dcg_oracle(&ideal_docs, &ideal_judged, k, exponential);
    if ideal == 0.0 {
        0.0
    } else {
        dcg_oracle(ranking, judged, k, exponential) / ideal
    }
}

/// Reciprocal rank by linear scan.
pub fn rr_oracle(ranking: &[String], judged: &BTreeMap<String, u8>, threshold: u8, cutoff: Option<usize>) -> f64 {
    for (i, doc) in ranking.iter().enumerate() {
        if cutoff.is_some_and(|c| i >= c) {
            break;
        }
        if judged.get(doc).is_some_and(|&g| g >= threshold) {
            return 1.0 / (i + 1) as f64;
        }
    }
    0.0
}

/// All-pairs counting of (concordant, discordant, tied_x, tied_y), where the
/// tie counts include pairs tied on both sides.
pub fn pair_counts_oracle(x: &[f64], y: &[f64]) -> (i64, i64, i64, i64) {
    let (mut c, mut d, mut tx, mut ty) = (0, 0, 0, 0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = (x[i] - x[j]).signum() as i64 * (x[i] != x[j]) as i64;
            let dy = (y[i] - y[j]).signum() as i64 * (y[i] != y[j]) as i64;
            if dx == 0 {
                tx += 1;
            }
            if dy == 0 {
                ty += 1;
            }
            if dx != 0 && dy != 0 {
                if dx == dy {
                    c += 1;
                } else {
                    d += 1;
                }
            }
        }
    }
    (c, d, tx, ty)
}

pub fn tau_a_oracle(x: &[f64], y: &[f64]) -> f64 {
    let (c, d, _, _) = pair_counts_oracle(x, y);
    let n0 = (x.len() * (x.len() - 1) / 2) as i64;
    (c - d) as f64 / n0 as f64
}

/// `None` when a side is constant.
pub fn tau_b_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let (c, d, tx, ty) = pair_counts_oracle(x, y);
    let n0 = (x.len() * (x.len() - 1) / 2) as i64;
    let denom = (n0 - tx) * (n0 - ty);
    (denom != 0).then(|| (c - d) as f64 / (denom as f64).sqrt())
}

/// Depth-k pool as the set of all (topic, doc) with some run ranking the doc
/// within the top k.
pub fn pool_oracle(runs: &[&Run], k: usize) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for run in runs {
        for (topic, docs) in run.rankings() {
            for (rank, doc) in docs.iter().enumerate() {
                if rank < k {
                    out.insert((topic.clone(), doc.clone()));
                }
            }
        }
    }
    out
}

pub fn pool_pairs(pool: &poolsim::Pool) -> BTreeSet<(String, String)> {
    pool.members
        .iter()
        .flat_map(|(t, docs)| docs.iter().map(move |d| (t.clone(), d.clone())))
        .collect()
}

/// Every vector in {0, 1, 2}^n.
pub fn ternary_vectors(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            v.push((c % 3) as f64);
            c /= 3;
        }
        out.push(v);
    }
    out
}

/// Random runs over `topics` topics with doc ids drawn from a small shared
/// vocabulary so pools overlap.
pub fn random_runs(seed: u64, n_runs: usize, topics: usize, max_len: usize) -> Vec<Run> {
    use poolsim::Category;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n_runs)
        .map(|r| {
            let rankings = (0..topics)
                .map(|t| {
                    let mut docs: Vec<String> = (0..max_len * 2).map(|d| format!("t{t}d{d}")).collect();
                    docs.shuffle(&mut rng);
                    docs.truncate(rng.gen_range(1..=max_len));
                    (format!("{t}"), docs)
                })
                .collect();
            let category = if r % 2 == 0 {
                Category::Traditional
            } else {
                Category::Neural
            };
            Run::new(format!("run{r}"), format!("g{}", r / 2), category, rankings).unwrap()
        })
        .collect()
}
