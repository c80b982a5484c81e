//! Slow, definition-level reference computations. Nothing here calls into
//! the library's scoring, ranking or statistics code.
#![allow(dead_code, clippy::needless_range_loop, clippy::type_complexity)]

use std::collections::{BTreeMap, HashMap, HashSet};

/// BM25 (k1 = 1.2, b = 0.75) for every document, from raw token lists.
pub fn bm25_all(docs: &[Vec<String>], query: &[String]) -> Vec<f64> {
    let (k1, b) = (1.2f64, 0.75f64);
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|d| d.len()).sum::<usize>() as f64 / n;
    let df = |t: &str| docs.iter().filter(|d| d.iter().any(|x| x == t)).count() as f64;
    docs.iter()
        .map(|d| {
            let dl = d.len() as f64;
            let mut s = 0.0;
            for t in query {
                let tf = d.iter().filter(|x| *x == t).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let dfv = df(t);
                let idf = (1.0 + (n - dfv + 0.5) / (dfv + 0.5)).ln();
                s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
            }
            s
        })
        .collect()
}

/// Ordinals with positive score sorted by (score desc, ordinal asc), cut at k.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] > 0.0).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Score every document for every query, sort, count top-c membership.
pub fn retrievability(docs: &[Vec<String>], queries: &[Vec<String>], c: usize) -> Vec<f64> {
    let mut r = vec![0.0; docs.len()];
    for q in queries {
        let scores = bm25_all(docs, q);
        for d in top_k(&scores, c) {
            r[d] += 1.0;
        }
    }
    r
}

/// Dense power iteration of `PR = (1-d) + d * M PR` with uniform dangling columns.
pub fn dense_pagerank(n: usize, edges: &[(usize, usize)], d: f64, iterations: usize) -> Vec<f64> {
    let set: HashSet<(usize, usize)> = edges.iter().copied().filter(|(s, t)| s != t).collect();
    let mut outdeg = vec![0usize; n];
    for &(s, _) in &set {
        outdeg[s] += 1;
    }
    let mut m = vec![vec![0.0f64; n]; n];
    for t in 0..n {
        for a in 0..n {
            m[a][t] = if outdeg[t] == 0 {
                1.0 / n as f64
            } else if set.contains(&(t, a)) {
                1.0 / outdeg[t] as f64
            } else {
                0.0
            };
        }
    }
    let mut pr = vec![1.0; n];
    for _ in 0..iterations {
        pr = (0..n)
            .map(|a| (1.0 - d) + d * (0..n).map(|t| m[a][t] * pr[t]).sum::<f64>())
            .collect();
    }
    pr
}

/// Tau-b by enumerating all pairs.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = (x[i] - x[j]).signum() * f64::from(x[i] != x[j]);
            let dy = (y[i] - y[j]).signum() * f64::from(y[i] != y[j]);
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if dx == dy {
                c += 1;
            } else {
                d += 1;
            }
        }
    }
    let denom = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
    (denom > 0.0).then(|| (c - d) as f64 / denom)
}

/// Rank = #smaller + (#equal + 1) / 2, then textbook Pearson.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let less = v.iter().filter(|b| *b < a).count() as f64;
                let eq = v.iter().filter(|b| *b == a).count() as f64;
                less + (eq + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// Literal prefix-overlap series: (truncated, extrapolated).
pub fn rbo(a: &[u32], b: &[u32], p: f64, k: usize) -> (f64, f64) {
    let mut trunc = 0.0;
    let mut tail = 0.0;
    let mut last = 0.0;
    for d in 1..=k {
        let sa: HashSet<u32> = a[..d].iter().copied().collect();
        let sb: HashSet<u32> = b[..d].iter().copied().collect();
        let agree = sa.intersection(&sb).count() as f64 / d as f64;
        trunc += p.powi(d as i32 - 1) * agree;
        tail += agree * p.powi(d as i32);
        last = agree;
    }
    ((1.0 - p) * trunc, last * p.powi(k as i32) + (1.0 - p) / p * tail)
}

/// Mean-absolute-difference form of the Gini coefficient.
pub fn gini(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    let mut diff = 0.0;
    for a in x {
        for b in x {
            diff += (a - b).abs();
        }
    }
    diff / (2.0 * n * total)
}

/// Term -> (document frequency, collection frequency) by a single raw pass.
pub fn term_tally(docs: &[Vec<String>]) -> BTreeMap<String, (u64, u64)> {
    let mut m: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for d in docs {
        let mut seen = HashSet::new();
        for t in d {
            let e = m.entry(t.clone()).or_default();
            e.1 += 1;
            if seen.insert(t) {
                e.0 += 1;
            }
        }
    }
    m
}

/// Ordered adjacent-pair counts where both terms have cf >= threshold,
/// ranked by count desc then lexicographically, cut at `max`.
pub fn ranked_bigrams(docs: &[Vec<String>], cf_threshold: u64, max: usize) -> Vec<(String, String)> {
    let cf: HashMap<String, u64> = term_tally(docs).into_iter().map(|(t, (_, c))| (t, c)).collect();
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for d in docs {
        for i in 1..d.len() {
            let (a, b) = (&d[i - 1], &d[i]);
            if cf[a] >= cf_threshold && cf[b] >= cf_threshold {
                *counts.entry((a.clone(), b.clone())).or_default() += 1;
            }
        }
    }
    let mut v: Vec<_> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().take(max).map(|(k, _)| k).collect()
}

/// Ten small hand-built graphs: `(name, node_count, edges)`.
pub fn fixed_graphs() -> Vec<(&'static str, usize, Vec<(usize, usize)>)> {
    let chain = |n: usize| (0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>();
    let cycle = |n: usize| (0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>();
    vec![
        ("chain-5", 5, chain(5)),
        ("chain-12", 12, chain(12)),
        ("star-in-6", 6, (1..6).map(|i| (i, 0)).collect()),
        ("star-out-6", 6, (1..6).map(|i| (0, i)).collect()),
        ("star-both-8", 8, (1..8).flat_map(|i| [(i, 0), (0, i)]).collect()),
        ("cycle-3", 3, cycle(3)),
        ("cycle-9", 9, cycle(9)),
        ("dangling-sink", 4, vec![(0, 1), (1, 2), (2, 0), (2, 3)]),
        ("two-components", 7, vec![(0, 1), (1, 0), (2, 3), (3, 4), (4, 2), (5, 6)]),
        ("complete-4-with-isolate", 5, (0..4).flat_map(|a| (0..4).filter(move |&b| b != a).map(move |b| (a, b))).collect()),
    ]
}
