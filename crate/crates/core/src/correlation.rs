//! Rank agreement between two score vectors over the same documents:
//! Kendall's tau-b, Spearman's rho and rank-biased overlap.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorrelationError {
    #[error("score vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 documents, got {0}")]
    TooShort(usize),
    #[error("score {index} is not finite")]
    NotFinite { index: usize },
    #[error("correlation undefined: one score vector is constant")]
    Undefined,
    #[error("RBO persistence must lie in (0, 1), got {0}")]
    BadPersistence(f64),
    #[error("RBO depth {depth} outside 1..={max}")]
    BadDepth { depth: usize, max: usize },
}

fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(CorrelationError::TooShort(x.len()));
    }
    for v in [x, y] {
        if let Some(index) = v.iter().position(|s| !s.is_finite()) {
            return Err(CorrelationError::NotFinite { index });
        }
    }
    Ok(())
}

/// Pair counts behind tau-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieCounts {
    pub pairs: u64,
    /// Pairs tied in x (including joint ties).
    pub tied_x: u64,
    /// Pairs tied in y (including joint ties).
    pub tied_y: u64,
    pub tied_both: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KendallResult {
    /// `None` when either vector is constant.
    pub tau_b: Option<f64>,
    /// Concordant minus discordant pairs.
    pub score: i64,
    pub ties: TieCounts,
}

fn tied_pairs_in_runs<T>(items: &[T], same: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in items.windows(2) {
        if same(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Stable merge sort of `v`, returning the number of strictly inverted pairs.
fn sort_counting_inversions(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_counting_inversions(&mut v[..mid], buf) + sort_counting_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Tau-b by sorting on `(x, y)` and counting inversions in `y`; O(N log N).
pub fn kendall(x: &[f64], y: &[f64]) -> Result<KendallResult, CorrelationError> {
    check_pair(x, y)?;
    let n = x.len() as u64;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| cmp_f64(&x[a], &x[b]).then(cmp_f64(&y[a], &y[b])));

    let pairs = n * (n - 1) / 2;
    let tied_x = tied_pairs_in_runs(&order, |&a, &b| x[a] == x[b]);
    let tied_both = tied_pairs_in_runs(&order, |&a, &b| x[a] == x[b] && y[a] == y[b]);

    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let swaps = sort_counting_inversions(&mut ys, &mut buf);
    let tied_y = tied_pairs_in_runs(&ys, |a, b| a == b);

    let score = pairs as i64 - tied_x as i64 - tied_y as i64 + tied_both as i64 - 2 * swaps as i64;
    let denom = ((pairs - tied_x) as f64) * ((pairs - tied_y) as f64);
    let tau_b = (denom > 0.0).then(|| score as f64 / denom.sqrt());
    Ok(KendallResult {
        tau_b,
        score,
        ties: TieCounts {
            pairs,
            tied_x,
            tied_y,
            tied_both,
        },
    })
}

pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    kendall(x, y)?.tau_b.ok_or(CorrelationError::Undefined)
}

/// 1-based ranks with tied values sharing their mean rank.
pub fn mid_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| cmp_f64(&v[a], &v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && v[order[j]] == v[order[i]] {
            j += 1;
        }
        // Positions i..j hold 1-based ranks i+1..=j.
        let mean = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mean;
        }
        i = j;
    }
    ranks
}

/// Pearson correlation of mid-ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    check_pair(x, y)?;
    let rx = mid_ranks(x);
    let ry = mid_ranks(y);
    // Mid-ranks always average (n + 1) / 2.
    let mean = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mean, b - mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::Undefined);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Document ordinals by descending score, ties by ascending ordinal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub order: Vec<u32>,
}

impl Ranking {
    pub fn from_scores(scores: &[f64]) -> Self {
        let mut order: Vec<u32> = (0..scores.len() as u32).collect();
        order.sort_by(|&a, &b| cmp_f64(&scores[b as usize], &scores[a as usize]).then(a.cmp(&b)));
        Self { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RboResult {
    pub p: f64,
    pub depth: usize,
    /// `(1 - p) * sum_{d=1..k} p^(d-1) * A_d`
    pub truncated: f64,
    /// Point estimate assuming the agreement at depth k continues.
    pub extrapolated: f64,
}

/// Rank-biased overlap of two rankings evaluated to `depth`.
pub fn rbo(a: &[u32], b: &[u32], p: f64, depth: usize) -> Result<RboResult, CorrelationError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CorrelationError::BadPersistence(p));
    }
    let max = a.len().min(b.len());
    if depth == 0 || depth > max {
        return Err(CorrelationError::BadDepth { depth, max });
    }
    let universe = a[..depth].iter().chain(&b[..depth]).copied().max().unwrap_or(0) as usize + 1;
    let mut in_a = vec![false; universe];
    let mut in_b = vec![false; universe];
    let mut overlap = 0usize;
    let mut weight = 1.0; // p^(d-1)
    let mut sum = 0.0; // sum_d p^(d-1) * A_d
    let mut agreement = 0.0;
    for d in 1..=depth {
        let (x, y) = (a[d - 1] as usize, b[d - 1] as usize);
        if x == y {
            overlap += 1;
        } else {
            overlap += usize::from(in_b[x]) + usize::from(in_a[y]);
        }
        in_a[x] = true;
        in_b[y] = true;
        agreement = overlap as f64 / d as f64;
        sum += weight * agreement;
        weight *= p;
    }
    // After the loop `weight` is p^depth.
    let truncated = (1.0 - p) * sum;
    let extrapolated = agreement * weight + (1.0 - p) * sum;
    Ok(RboResult {
        p,
        depth,
        truncated,
        extrapolated,
    })
}

/// Both measures of one persistence setting plus tau-b and rho.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub kendall_tau: Option<f64>,
    pub spearman_rho: Option<f64>,
    /// Extrapolated RBO at the primary persistence `rbo_p`, full depth.
    pub rbo: f64,
    pub rbo_p: f64,
    pub rbo_all: Vec<RboResult>,
    pub tie_counts: TieCounts,
}

/// Compares `x` and `y`; RBO is evaluated at full depth for each persistence
/// value, the first being the primary one.
pub fn correlate(x: &[f64], y: &[f64], rbo_ps: &[f64]) -> Result<CorrelationReport, CorrelationError> {
    let k = kendall(x, y)?;
    let rho = match spearman_rho(x, y) {
        Ok(v) => Some(v),
        Err(CorrelationError::Undefined) => None,
        Err(e) => return Err(e),
    };
    let ra = Ranking::from_scores(x);
    let rb = Ranking::from_scores(y);
    let rbo_all = rbo_ps
        .iter()
        .map(|&p| rbo(&ra.order, &rb.order, p, x.len()))
        .collect::<Result<Vec<_>, _>>()?;
    let primary = rbo_all.first().copied().ok_or(CorrelationError::BadPersistence(f64::NAN))?;
    Ok(CorrelationReport {
        kendall_tau: k.tau_b,
        spearman_rho: rho,
        rbo: primary.extrapolated,
        rbo_p: primary.p,
        rbo_all,
        tie_counts: k.ties,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_owned(), |x| x.to_string())
}

impl CorrelationReport {
    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kendall_tau={}", opt(self.kendall_tau));
        let _ = writeln!(s, "spearman_rho={}", opt(self.spearman_rho));
        let _ = writeln!(s, "rbo={}", self.rbo);
        let _ = writeln!(s, "rbo_p={}", self.rbo_p);
        for r in &self.rbo_all {
            let _ = writeln!(s, "rbo_truncated@p={}={}", r.p, r.truncated);
            let _ = writeln!(s, "rbo_extrapolated@p={}={}", r.p, r.extrapolated);
        }
        let t = &self.tie_counts;
        let _ = writeln!(s, "pairs={}", t.pairs);
        let _ = writeln!(s, "tied_x={}", t.tied_x);
        let _ = writeln!(s, "tied_y={}", t.tied_y);
        let _ = writeln!(s, "tied_both={}", t.tied_both);
        s
    }

    pub fn csv_header() -> &'static str {
        "kendall_tau,spearman_rho,rbo,rbo_p,pairs,tied_x,tied_y,tied_both"
    }

    pub fn to_csv_row(&self) -> String {
        let t = &self.tie_counts;
        format!(
            "{},{},{},{},{},{},{},{}",
            opt(self.kendall_tau),
            opt(self.spearman_rho),
            self.rbo,
            self.rbo_p,
            t.pairs,
            t.tied_x,
            t.tied_y,
            t.tied_both
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_reversed() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let rev: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall_tau(&x, &rev).unwrap(), -1.0);
        assert_eq!(spearman_rho(&x, &x).unwrap(), 1.0);
        let cubed: Vec<f64> = x.iter().map(|v| v * v * v + 7.0).collect();
        assert_eq!(spearman_rho(&x, &cubed).unwrap(), 1.0);
    }

    #[test]
    fn constant_vector_is_undefined() {
        let x = [1.0, 2.0, 3.0];
        let c = [4.0, 4.0, 4.0];
        assert_eq!(kendall_tau(&x, &c), Err(CorrelationError::Undefined));
        assert_eq!(spearman_rho(&c, &x), Err(CorrelationError::Undefined));
        let r = correlate(&x, &c, &[0.9]).unwrap();
        assert_eq!(r.kendall_tau, None);
        assert_eq!(r.spearman_rho, None);
        assert!(r.to_key_values().contains("kendall_tau=undefined"));
    }

    #[test]
    fn input_errors() {
        assert_eq!(kendall_tau(&[1.0], &[1.0]), Err(CorrelationError::TooShort(1)));
        assert_eq!(kendall_tau(&[1.0, 2.0], &[1.0]), Err(CorrelationError::LengthMismatch(2, 1)));
        assert_eq!(rbo(&[0, 1], &[0, 1], 1.0, 2), Err(CorrelationError::BadPersistence(1.0)));
        assert_eq!(rbo(&[0, 1], &[0, 1], 0.9, 3), Err(CorrelationError::BadDepth { depth: 3, max: 2 }));
    }

    #[test]
    fn mid_ranks_average_ties() {
        assert_eq!(mid_ranks(&[10.0, 0.0, 10.0, 5.0]), [3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn rbo_identical_and_disjoint() {
        let a: Vec<u32> = (0..10).collect();
        let r = rbo(&a, &a, 0.9, 10).unwrap();
        assert!((r.truncated - (1.0 - 0.9f64.powi(10))).abs() < 1e-12);
        assert!((r.extrapolated - 1.0).abs() < 1e-12);
        let b: Vec<u32> = (10..20).collect();
        let r = rbo(&a, &b, 0.9, 10).unwrap();
        assert_eq!((r.truncated, r.extrapolated), (0.0, 0.0));
    }

    #[test]
    fn ranking_ties_by_ordinal() {
        assert_eq!(Ranking::from_scores(&[1.0, 3.0, 1.0, 3.0]).order, [1, 3, 0, 2]);
    }
}
