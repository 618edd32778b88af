//! Kendall's tau between the system orderings induced by two score vectors.
//!
//! Uses Knight's O(n log n) algorithm: sort by (x, y), count x ties and joint
//! ties, then merge-sort on y counting exchanges (the discordant pairs) and
//! finally count y ties.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TauVariant {
    #[serde(rename = "tau_a")]
    TauA,
    #[default]
    #[serde(rename = "tau_b")]
    TauB,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauOptions {
    pub variant: TauVariant,
    /// Round both vectors to this many decimals before comparing.
    pub round_decimals: Option<u32>,
}

/// Labelled parallel score vectors for the same systems.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedScores {
    labels: Vec<String>,
    actual: Vec<f64>,
    estimated: Vec<f64>,
}

impl PairedScores {
    pub fn new(labels: Vec<String>, actual: Vec<f64>, estimated: Vec<f64>) -> Result<Self> {
        if labels.len() != actual.len() || actual.len() != estimated.len() {
            return Err(Error::PairedScores(format!(
                "length mismatch: {} labels, {} actual, {} estimated",
                labels.len(),
                actual.len(),
                estimated.len()
            )));
        }
        if labels.len() < 2 {
            return Err(Error::PairedScores(format!(
                "need at least 2 systems, got {}",
                labels.len()
            )));
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::PairedScores(format!("duplicate label {}", w[0])));
        }
        if actual.iter().chain(&estimated).any(|v| !v.is_finite()) {
            return Err(Error::PairedScores("non-finite score".into()));
        }
        Ok(PairedScores {
            labels,
            actual,
            estimated,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    pub fn estimated(&self) -> &[f64] {
        &self.estimated
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Kendall's tau between `paired.actual` and `paired.estimated`.
pub fn kendall_tau(paired: &PairedScores, options: TauOptions) -> Result<f64> {
    match options.round_decimals {
        None => tau_of(&paired.actual, &paired.estimated, options.variant),
        Some(d) => {
            let r = |v: &[f64]| v.iter().map(|&x| round_to(x, d)).collect::<Vec<_>>();
            tau_of(&r(&paired.actual), &r(&paired.estimated), options.variant)
        }
    }
}

fn round_to(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round() / scale
}

/// Pair counts underlying both tau variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub n: usize,
    /// `n(n-1)/2`
    pub total_pairs: u64,
    pub tied_x: u64,
    pub tied_y: u64,
    pub tied_both: u64,
    pub discordant: u64,
}

impl PairCounts {
    pub fn concordant(&self) -> u64 {
        self.total_pairs + self.tied_both - self.tied_x - self.tied_y - self.discordant
    }

    /// Concordant minus discordant.
    pub fn score(&self) -> i64 {
        self.concordant() as i64 - self.discordant as i64
    }
}

fn tie_pairs<T, F: Fn(&T, &T) -> bool>(sorted: &[T], same: F) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if same(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` ascending and returns the number of exchanges a bubble sort
/// would perform, i.e. the count of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Counts concordance statistics in O(n log n). Inputs must be finite and of
/// equal length.
pub fn pair_counts(x: &[f64], y: &[f64]) -> PairCounts {
    assert_eq!(x.len(), y.len(), "vectors must have equal length");
    let n = x.len();
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let tied_x = tie_pairs(&pairs, |a, b| a.0 == b.0);
    let tied_both = tie_pairs(&pairs, |a, b| a.0 == b.0 && a.1 == b.1);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let discordant = merge_count(&mut ys, &mut buf);
    let tied_y = tie_pairs(&ys, |a, b| a.partial_cmp(b) == Some(Ordering::Equal));

    PairCounts {
        n,
        total_pairs: (n as u64) * (n as u64).saturating_sub(1) / 2,
        tied_x,
        tied_y,
        tied_both,
        discordant,
    }
}

/// Kendall's tau of two finite vectors. TauB is undefined (error) when either
/// vector is constant.
pub fn tau_of(x: &[f64], y: &[f64], variant: TauVariant) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::PairedScores("length mismatch".into()));
    }
    if x.len() < 2 {
        return Err(Error::PairedScores("need at least 2 values".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::PairedScores("non-finite score".into()));
    }
    let c = pair_counts(x, y);
    let score = c.score() as f64;
    match variant {
        TauVariant::TauA => Ok(score / c.total_pairs as f64),
        TauVariant::TauB => {
            let denom = (c.total_pairs - c.tied_x) * (c.total_pairs - c.tied_y);
            if denom == 0 {
                return Err(Error::UndefinedCorrelation("tau-b with a constant vector"));
            }
            Ok(score / (denom as f64).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paired(a: &[f64], e: &[f64]) -> PairedScores {
        let labels = (0..a.len()).map(|i| format!("s{i}")).collect();
        PairedScores::new(labels, a.to_vec(), e.to_vec()).unwrap()
    }

    #[test]
    fn identical_order() {
        let p = paired(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]);
        assert_eq!(kendall_tau(&p, TauOptions::default()).unwrap(), 1.0);
    }

    #[test]
    fn reversed_order() {
        let p = paired(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]);
        assert_eq!(kendall_tau(&p, TauOptions::default()).unwrap(), -1.0);
        let a = TauOptions {
            variant: TauVariant::TauA,
            round_decimals: None,
        };
        assert_eq!(kendall_tau(&p, a).unwrap(), -1.0);
    }

    #[test]
    fn constant_vector_is_undefined_for_tau_b() {
        let p = paired(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]);
        assert!(matches!(
            kendall_tau(&p, TauOptions::default()),
            Err(Error::UndefinedCorrelation(_))
        ));
        let a = TauOptions {
            variant: TauVariant::TauA,
            round_decimals: None,
        };
        assert_eq!(kendall_tau(&p, a).unwrap(), 0.0);
    }

    #[test]
    fn known_tau_b_with_ties() {
        // x = [1,2,2,3], y = [1,3,2,2]: C=3, D=1, Tx=1, Ty=1, n0=6
        // tau_b = 2 / sqrt(5 * 5) = 0.4
        let v = tau_of(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 2.0], TauVariant::TauB).unwrap();
        assert!((v - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rounding_creates_ties() {
        let p = paired(&[0.501, 0.502, 0.9], &[0.3, 0.2, 0.8]);
        let full = kendall_tau(&p, TauOptions::default()).unwrap();
        let rounded = kendall_tau(
            &p,
            TauOptions {
                variant: TauVariant::TauB,
                round_decimals: Some(2),
            },
        )
        .unwrap();
        assert!((full - 1.0 / 3.0).abs() < 1e-15);
        assert!((rounded - 2.0 / 6f64.sqrt()).abs() < 1e-12, "{rounded}");
    }

    #[test]
    fn paired_scores_validation() {
        assert!(PairedScores::new(vec!["a".into()], vec![1.0], vec![1.0]).is_err());
        assert!(PairedScores::new(vec!["a".into(), "a".into()], vec![1.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(PairedScores::new(vec!["a".into(), "b".into()], vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(PairedScores::new(vec!["a".into(), "b".into()], vec![f64::NAN, 1.0], vec![1.0, 2.0]).is_err());
    }
}
