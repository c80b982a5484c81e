//! Metrics and the final comparison report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use accessrank::bias::LorenzSeries;
use accessrank::corpus::CorpusStats;
use accessrank::correlation::CorrelationReport;
use accessrank::pagerank::GraphBuildStats;
use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub id: String,
    #[serde(flatten)]
    pub stats: CorpusStats,
    pub malformed_records: usize,
    /// Present when the graph stage has run.
    pub links: Option<GraphBuildStats>,
    pub dangling_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySummary {
    pub total: usize,
    pub unigrams: usize,
    pub bigrams: usize,
    pub zero_match: usize,
    pub unknown_term: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievabilitySummary {
    pub c: usize,
    pub mean: f64,
    pub max: f64,
    /// Documents no query retrieved within the cutoff.
    pub never_retrieved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRankSummary {
    pub damping: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub max: f64,
}

/// Everything the metrics stage computes from the persisted score files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub corpus: CorpusSummary,
    pub queries: QuerySummary,
    pub retrievability: RetrievabilitySummary,
    pub pagerank: Option<PageRankSummary>,
    pub gini_retrievability: f64,
    pub gini_pagerank: Option<f64>,
    pub correlation: Option<CorrelationReport>,
    pub lorenz_retrievability: LorenzSeries,
    pub lorenz_pagerank: Option<LorenzSeries>,
    /// Human-readable notices for sections left out.
    pub omitted: Vec<String>,
}

/// The study result for one corpus run. Stage timings are kept out so the
/// report is identical across machines and worker counts; they live in the
/// manifest and the printed summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    #[serde(flatten)]
    pub metrics: Metrics,
    /// Canonical TOML of the effective configuration.
    pub config: String,
    pub config_hash: String,
    /// Content hash of every artifact the numbers above were computed from.
    pub artifacts: BTreeMap<String, String>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined (ties)".to_owned(), |x| format!("{x:.4}"))
}

/// The printable Gini and correlation tables, plus timings when given.
pub fn render_summary(report: &MetricsReport, timings: &[(String, f64)]) -> String {
    let m = &report.metrics;
    let mut s = String::new();
    let c = &m.corpus;
    let _ = writeln!(s, "corpus {}", c.id);
    let _ = writeln!(
        s,
        "  documents {}  terms {}  tokens {}  malformed records {}",
        c.stats.doc_count, c.stats.term_count, c.stats.total_tokens, c.malformed_records
    );
    if let Some(l) = &c.links {
        let _ = writeln!(
            s,
            "  links {}  dropped (outside corpus) {}  dangling documents {}",
            l.edges,
            l.dropped_missing_target,
            c.dangling_nodes.unwrap_or(0)
        );
    }
    let q = &m.queries;
    let _ = writeln!(
        s,
        "  queries {} ({} unigram, {} bigram), {} retrieved nothing",
        q.total, q.unigrams, q.bigrams, q.zero_match
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "Gini coefficient");
    let label = format!("retrievability (c={})", m.retrievability.c);
    let _ = writeln!(s, "  {label:<26} {:.4}", m.gini_retrievability);
    match (&m.pagerank, m.gini_pagerank) {
        (Some(p), Some(g)) => {
            let label = format!("pagerank (d={})", p.damping);
            let _ = writeln!(s, "  {label:<26} {g:.4}");
        }
        _ => {
            let _ = writeln!(s, "  {:<26} omitted", "pagerank");
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Correlation, retrievability vs pagerank");
    match &m.correlation {
        Some(r) => {
            let _ = writeln!(s, "  {:<26} {}", "kendall tau-b", opt(r.kendall_tau));
            let _ = writeln!(s, "  {:<26} {}", "spearman rho", opt(r.spearman_rho));
            for x in &r.rbo_all {
                let label = format!("rbo (p={}, depth {})", x.p, x.depth);
                let _ = writeln!(s, "  {label:<26} {:.4} (truncated {:.4})", x.extrapolated, x.truncated);
            }
        }
        None => {
            let _ = writeln!(s, "  omitted");
        }
    }
    if !m.omitted.is_empty() {
        let _ = writeln!(s);
        for o in &m.omitted {
            let _ = writeln!(s, "note: {o}");
        }
    }
    if !timings.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "Stage timings");
        for (stage, secs) in timings {
            let _ = writeln!(s, "  {stage:<16} {secs:>9.3}s");
        }
    }
    s
}
