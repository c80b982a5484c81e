//! Acceptance checks, one PASS/FAIL line each.
//!
//! Run a subset by number: `cargo test --test acceptance -- 1 5 7`.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use accessrank::bias::{gini, lorenz};
use accessrank::corpus::{save_corpus, Document};
use accessrank::correlation::{kendall_tau, rbo, spearman_rho, Ranking};
use accessrank::index::{Bm25, Bm25Params, InvertedIndex};
use accessrank::pagerank::{compute_pagerank_with, LinkGraph, PageRankParams};
use accessrank::querygen::{generate_bigrams, generate_query_set, generate_unigrams, read_query_set, Query, QueryGenParams};
use accessrank::retrievability::{compute_retrievability, utility};
use accessrank::scores::read_score_csv;
use accessrank::synth::{self, Coupling, SynthParams};
use accessrank_cli::manifest::{sha256_file, Manifest};
use accessrank_cli::stage::{artifact, Stage};
use accessrank_cli::{run_pipeline, run_stage, RunConfig, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

const QUIET: RunOptions = RunOptions { force: false, quiet: true };

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 8] = [
        (1, "retrievability matches exhaustive scoring", retrievability_exact),
        (2, "pagerank matches dense iteration", pagerank_exact),
        (3, "gini values, scale invariance and bounds", gini_checks),
        (4, "tau-b, rho and rbo match definitions", correlation_checks),
        (5, "query and utility boundaries", boundaries),
        (6, "pipeline output independent of workers", determinism),
        (7, "planted coupling is recovered", planted_coupling),
        (8, "50k documents, 100k queries, c=100", scale_run),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| (*s).to_owned()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn mixed_queries(docs: &[Document], wanted: usize) -> Vec<Query> {
    let idx = InvertedIndex::build(docs).unwrap();
    let mut unigrams = generate_query_set(docs, &idx, QueryGenParams::default(), "acc").queries;
    let split = unigrams.iter().position(|q| q.terms.len() == 2).unwrap_or(unigrams.len());
    let bigrams = unigrams.split_off(split);
    let (mut u, mut b) = (unigrams.into_iter(), bigrams.into_iter());
    let mut out = Vec::new();
    while out.len() < wanted {
        match (u.next(), b.next()) {
            (None, None) => break,
            (x, y) => out.extend(x.into_iter().chain(y)),
        }
    }
    out.truncate(wanted);
    out
}

fn retrievability_exact() -> Check {
    let docs = synth::generate(&SynthParams {
        docs: 100,
        vocab: 1500,
        seed: 11,
        ..Default::default()
    })
    .unwrap();
    let queries = mixed_queries(&docs, 200);
    ensure!(queries.len() == 200, "only {} queries available", queries.len());
    let bigrams = queries.iter().filter(|q| q.terms.len() == 2).count();

    let (got, took) = timed(|| {
        let idx = InvertedIndex::build(&docs).unwrap();
        let bm = Bm25::new(&idx, Bm25Params::default());
        compute_retrievability(&bm, &queries, 10).unwrap().scores.values
    });
    let raw: Vec<Vec<String>> = docs.iter().map(Document::analyzed_terms).collect();
    let qs: Vec<Vec<String>> = queries.iter().map(|q| q.terms.clone()).collect();
    let expected = oracles::retrievability(&raw, &qs, 10);
    let mismatched = got.iter().zip(&expected).filter(|(a, b)| a != b).count();
    ensure!(mismatched == 0, "{mismatched} of 100 documents differ from the oracle");
    ensure!(took < Duration::from_secs(10), "took {took:?}");
    Ok(format!("100 docs, 200 queries ({bigrams} bigrams), exact, {:.3}s", took.as_secs_f64()))
}

fn pagerank_exact() -> Check {
    let params = PageRankParams::default();
    let mut worst_diff = 0.0f64;
    let mut worst_drift = 0.0f64;
    let mut total = Duration::ZERO;
    let graphs = oracles::fixed_graphs();
    for (name, n, edges) in &graphs {
        let g = LinkGraph::from_edges(*n, edges.iter().map(|&(s, t)| (s as u32, t as u32)));
        let mut drift = 0.0f64;
        let (r, took) = timed(|| {
            compute_pagerank_with(&g, &params, 0, |_, v| {
                drift = drift.max((v.iter().sum::<f64>() - *n as f64).abs());
            })
        });
        total += took;
        let r = r.map_err(|e| format!("{name}: {e}"))?;
        ensure!(r.converged, "{name} did not converge");
        let expected = oracles::dense_pagerank(*n, edges, params.damping, 1000);
        let diff = r.scores.values.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure!(diff <= 1e-8, "{name}: max difference {diff:e}");
        ensure!(drift <= 1e-9, "{name}: mass drift {drift:e}");
        worst_diff = worst_diff.max(diff);
        worst_drift = worst_drift.max(drift);
    }
    ensure!(total < Duration::from_secs(1), "took {total:?}");
    Ok(format!(
        "{} graphs, max diff {worst_diff:.1e}, max mass drift {worst_drift:.1e}, {:.4}s",
        graphs.len(),
        total.as_secs_f64()
    ))
}

fn gini_checks() -> Check {
    let g = |v: &[f64]| gini(v).map_err(|e| e.to_string());
    ensure!(g(&[1.0, 2.0, 3.0, 4.0])? == 0.25, "gini([1,2,3,4]) = {}", g(&[1.0, 2.0, 3.0, 4.0])?);
    ensure!(g(&[5.0; 4])? == 0.0, "equal vector is not 0");
    let conc = g(&[0.0, 0.0, 0.0, 9.0])?;
    ensure!((conc - 0.75).abs() <= 1e-12, "concentrated vector gives {conc}");

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_scale = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..300);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1000.0)).collect();
        let base = g(&v)?;
        for k in [1e-3, 7.5, 1e6] {
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            worst_scale = worst_scale.max((g(&scaled)? - base).abs());
        }
    }
    ensure!(worst_scale <= 1e-12, "scale changed gini by {worst_scale:e}");

    for i in 0..1000 {
        let n = rng.random_range(1..200);
        let mut v: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..50.0f64).floor() })
            .collect();
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        let x = g(&v)?;
        let upper = 1.0 - 1.0 / n as f64;
        ensure!((0.0..=upper + 1e-12).contains(&x), "vector {i}: gini {x} outside [0, {upper}]");
    }
    Ok(format!("exact values ok, max scale deviation {worst_scale:.1e}, 1000 bounded vectors"))
}

fn tied_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let levels = rng.random_range(2..12);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|v| if rng.random_bool(0.5) { *v } else { rng.random_range(0..levels) as f64 })
        .collect();
    (x, y)
}

fn correlation_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let (x, y) = tied_pair(&mut rng, 50);
        let pair = |name: &str, got: Option<f64>, want: Option<f64>| -> Result<f64, String> {
            match (got, want) {
                (Some(a), Some(b)) => Ok((a - b).abs()),
                (None, None) => Ok(0.0),
                _ => Err(format!("pair {i}: {name} defined on one side only")),
            }
        };
        worst = worst.max(pair("tau-b", kendall_tau(&x, &y).ok(), oracles::kendall_tau_b(&x, &y))?);
        worst = worst.max(pair("rho", spearman_rho(&x, &y).ok(), oracles::spearman(&x, &y))?);
        let (a, b) = (Ranking::from_scores(&x).order, Ranking::from_scores(&y).order);
        for p in [0.9, 0.98] {
            let r = rbo(&a, &b, p, 50).map_err(|e| e.to_string())?;
            let (trunc, ext) = oracles::rbo(&a, &b, p, 50);
            worst = worst.max((r.truncated - trunc).abs()).max((r.extrapolated - ext).abs());
        }
    }
    ensure!(worst <= 1e-12, "max deviation {worst:e}");

    let x: Vec<f64> = (0..50).map(f64::from).collect();
    let rev: Vec<f64> = x.iter().map(|v| -v).collect();
    let t = |a: &[f64], b: &[f64]| kendall_tau(a, b).map_err(|e| e.to_string());
    ensure!(t(&x, &x)? == 1.0, "identical tau {}", t(&x, &x)?);
    ensure!(t(&x, &rev)? == -1.0, "reversed tau {}", t(&x, &rev)?);
    let ids: Vec<u32> = (0..50).collect();
    let other: Vec<u32> = (50..100).collect();
    let same = rbo(&ids, &ids, 0.9, 50).map_err(|e| e.to_string())?.extrapolated;
    let disjoint = rbo(&ids, &other, 0.9, 50).map_err(|e| e.to_string())?.extrapolated;
    ensure!((same - 1.0).abs() <= 1e-12, "identical rbo {same}");
    ensure!(disjoint == 0.0, "disjoint rbo {disjoint}");
    Ok(format!("100 tied pairs, max deviation {worst:.1e}; extremes exact"))
}

fn boundaries() -> Check {
    let doc = |i: usize, body: &str| Document {
        id: format!("b{i}"),
        title: None,
        body: body.to_owned(),
        outlinks: vec![],
    };
    let docs = vec![
        doc(0, "kaba kaba kaba boda boda"),
        doc(1, "kaba kaba kaba boda boda boda"),
        doc(2, "mota"),
    ];
    let idx = InvertedIndex::build(&docs).unwrap();
    let terms: Vec<String> = generate_unigrams(&idx, 5).into_iter().flat_map(|q| q.terms).collect();
    ensure!(terms.iter().any(|t| t == "kaba"), "cf 6 term missing: {terms:?}");
    ensure!(!terms.iter().any(|t| t == "boda"), "cf 5 term present: {terms:?}");

    ensure!(utility(100, 100) == 1, "utility(100, 100) = {}", utility(100, 100));
    ensure!(utility(101, 100) == 0, "utility(101, 100) = {}", utility(101, 100));

    let corpus = synth::generate(&SynthParams {
        docs: 300,
        vocab: 2000,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let idx = InvertedIndex::build(&corpus).unwrap();
    let bigrams = |max: usize| {
        let p = QueryGenParams { bigram_max: max, ..Default::default() };
        generate_bigrams(&corpus, &idx, &p)
    };
    let sizes = [10, 100, 1000, 5000];
    let lists: Vec<Vec<Query>> = sizes.iter().map(|&m| bigrams(m)).collect();
    for w in lists.windows(2) {
        ensure!(w[1].starts_with(&w[0]), "bigram list of {} is not a prefix of {}", w[0].len(), w[1].len());
    }
    ensure!(lists[1].len() == 100, "expected at least 100 bigrams, got {}", lists[1].len());
    Ok(format!("cf 6 in / cf 5 out, utility cutoff, bigram prefixes at {sizes:?}"))
}

fn config(corpus: &Path, work: &Path, workers: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.corpus.path = Some(corpus.to_owned());
    cfg.runtime.work_dir = Some(work.to_owned());
    cfg.runtime.workers = workers;
    cfg
}

fn read_json(path: &Path) -> Result<Value, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_slice(&bytes).map_err(|e| e.to_string())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("synth500.jsonl");
    save_corpus(&corpus, &synth::generate(&SynthParams::default()).unwrap()).unwrap();
    let mut runs = Vec::new();
    for workers in [1, 8] {
        let work = dir.path().join(format!("w{workers}"));
        let (r, took) = timed(|| run_pipeline(&config(&corpus, &work, workers), QUIET));
        r.map_err(|e| format!("workers={workers}: {e}"))?;
        ensure!(took < Duration::from_secs(120), "workers={workers} took {took:?}");
        runs.push((work, took));
    }
    for name in [artifact::RETRIEVABILITY, artifact::PAGERANK, artifact::REPORT] {
        let a = fs::read(runs[0].0.join(name)).unwrap();
        let b = fs::read(runs[1].0.join(name)).unwrap();
        ensure!(a == b, "{name} differs between 1 and 8 workers");
    }
    Ok(format!(
        "scores and report byte-identical; {:.1}s with 1 worker, {:.1}s with 8",
        runs[0].1.as_secs_f64(),
        runs[1].1.as_secs_f64()
    ))
}

fn coupled_run(dir: &Path, coupling: Coupling) -> Result<(f64, f64), String> {
    let corpus = dir.join(format!("{coupling}.jsonl"));
    let docs = synth::generate(&SynthParams { coupling, ..Default::default() }).map_err(|e| e.to_string())?;
    save_corpus(&corpus, &docs).map_err(|e| e.to_string())?;
    let work = dir.join(coupling.to_string());
    run_pipeline(&config(&corpus, &work, 0), QUIET).map_err(|e| e.to_string())?;
    let r = read_json(&work.join(artifact::REPORT))?;
    let c = &r["correlation"];
    let tau = c["kendall_tau"].as_f64().ok_or("tau undefined")?;
    let rbo = c["rbo"].as_f64().ok_or("rbo missing")?;
    Ok((tau, rbo))
}

fn planted_coupling() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let (tau_pos, rbo_pos) = coupled_run(dir.path(), Coupling::Positive)?;
    let (tau_anti, rbo_anti) = coupled_run(dir.path(), Coupling::Anti)?;
    let detail = format!("positive tau {tau_pos:.3} rbo {rbo_pos:.3}; anti tau {tau_anti:.3} rbo {rbo_anti:.3}");
    ensure!(tau_pos > 0.0 && rbo_pos > 0.5, "{detail}");
    ensure!(tau_anti < 0.0, "{detail}");
    Ok(detail)
}

fn peak_rss_bytes() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn scores(path: &Path) -> Result<Vec<f64>, String> {
    let f = fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(read_score_csv(f).map_err(|e| e.to_string())?.into_iter().map(|(_, s)| s).collect())
}

fn scale_run() -> Check {
    const DOCS: usize = 50_000;
    const QUERIES: usize = 100_000;
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("synth50k.jsonl");
    let docs = synth::generate(&SynthParams {
        docs: DOCS,
        vocab: 20_000,
        seed: 50,
        ..Default::default()
    })
    .unwrap();
    save_corpus(&corpus, &docs).unwrap();
    drop(docs);

    let start = Instant::now();
    let mut cfg = config(&corpus, &dir.path().join("run"), 0);
    cfg.retrievability.c = 100;
    cfg.querygen.bigram_max = QUERIES;
    for s in [Stage::Ingest, Stage::Index, Stage::Queries] {
        run_stage(s, &cfg, QUIET).map_err(|e| format!("{s}: {e}"))?;
    }
    // Size the bigram list so unigrams plus bigrams come to exactly QUERIES.
    let work = dir.path().join("run");
    let read_queries = || -> Result<Vec<Query>, String> {
        let f = fs::File::open(work.join(artifact::QUERIES)).map_err(|e| e.to_string())?;
        Ok(read_query_set(std::io::BufReader::new(f)).map_err(|e| e.to_string())?.queries)
    };
    let unigrams = read_queries()?.iter().filter(|q| q.terms.len() == 1).count();
    ensure!(unigrams < QUERIES, "{unigrams} unigrams already exceed the query budget");
    cfg.querygen.bigram_max = QUERIES - unigrams;
    run_pipeline(&cfg, QUIET).map_err(|e| e.to_string())?;
    let took = start.elapsed();

    let q = read_queries()?.len();
    ensure!(q == QUERIES, "{q} queries generated");
    let r = scores(&work.join(artifact::RETRIEVABILITY))?;
    let pr = scores(&work.join(artifact::PAGERANK))?;
    ensure!(r.len() == DOCS && pr.len() == DOCS, "score files have {} and {} rows", r.len(), pr.len());
    let mass: f64 = r.iter().sum();
    ensure!(
        r.iter().all(|&v| v >= 0.0 && v <= q as f64 && v.fract() == 0.0),
        "retrievability outside [0, |Q|] or fractional"
    );
    ensure!(mass <= 100.0 * q as f64, "retrievability mass {mass} exceeds c|Q|");
    let pr_sum: f64 = pr.iter().sum();
    ensure!((pr_sum - DOCS as f64).abs() <= 1e-6 * DOCS as f64, "pagerank sums to {pr_sum}");
    ensure!(pr.iter().all(|&v| v >= 0.15 - 1e-12), "pagerank below 1 - d");

    let report = read_json(&work.join(artifact::REPORT))?;
    let gr = report["gini_retrievability"].as_f64().ok_or("no retrievability gini")?;
    let gp = report["gini_pagerank"].as_f64().ok_or("no pagerank gini")?;
    ensure!(gr == gini(&r).map_err(|e| e.to_string())?, "report gini differs from score file");
    ensure!(gp == gini(&pr).map_err(|e| e.to_string())?, "report pagerank gini differs from score file");
    let bound = 1.0 - 1.0 / DOCS as f64;
    ensure!((0.0..=bound).contains(&gr) && (0.0..=bound).contains(&gp), "gini out of range");
    let curve = lorenz(&r, 100).map_err(|e| e.to_string())?;
    ensure!(
        curve.points.windows(2).all(|w| w[0].population_fraction <= w[1].population_fraction && w[0].cumulative_share <= w[1].cumulative_share),
        "lorenz curve not monotone"
    );
    let corr = &report["correlation"];
    for key in ["kendall_tau", "spearman_rho", "rbo"] {
        let v = corr[key].as_f64().ok_or(format!("{key} missing"))?;
        ensure!((-1.0..=1.0).contains(&v), "{key} = {v}");
    }
    let m = Manifest::load(&work).map_err(|e| e.to_string())?;
    for rec in m.stages.values() {
        for (name, hash) in &rec.outputs {
            ensure!(sha256_file(&work.join(name)).ok().as_ref() == Some(hash), "{name} hash mismatch");
        }
    }

    let peak = peak_rss_bytes().ok_or("VmHWM unavailable")?;
    let gib = peak as f64 / (1u64 << 30) as f64;
    ensure!(took < Duration::from_secs(30 * 60), "took {took:?}");
    ensure!(peak < 8 << 30, "peak resident memory {gib:.2} GiB");
    Ok(format!(
        "{q} queries, gini r {gr:.4} pr {gp:.4}, {:.0}s, peak RSS {gib:.2} GiB",
        took.as_secs_f64()
    ))
}
