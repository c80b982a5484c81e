use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Index,
    Queries,
    Retrievability,
    Graph,
    Pagerank,
    Metrics,
    Report,
}

impl Stage {
    /// Execution order of a full pipeline.
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Index,
        Stage::Queries,
        Stage::Retrievability,
        Stage::Graph,
        Stage::Pagerank,
        Stage::Metrics,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Index => "index",
            Stage::Queries => "queries",
            Stage::Retrievability => "retrievability",
            Stage::Graph => "graph",
            Stage::Pagerank => "pagerank",
            Stage::Metrics => "metrics",
            Stage::Report => "report",
        }
    }

    /// Subcommand that runs this stage.
    pub fn command(self) -> &'static str {
        match self {
            Stage::Queries => "gen-queries",
            s => s.name(),
        }
    }

    /// Stages whose artifacts must exist.
    pub fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Index => &[Stage::Ingest],
            Stage::Queries => &[Stage::Ingest, Stage::Index],
            Stage::Retrievability => &[Stage::Index, Stage::Queries],
            Stage::Graph => &[Stage::Ingest],
            Stage::Pagerank => &[Stage::Ingest, Stage::Graph],
            Stage::Metrics => &[Stage::Ingest, Stage::Queries, Stage::Retrievability],
            Stage::Report => &[Stage::Metrics],
        }
    }

    /// Stages used when present; their absence degrades the output instead of failing.
    pub fn optional(self) -> &'static [Stage] {
        match self {
            Stage::Metrics => &[Stage::Graph, Stage::Pagerank],
            _ => &[],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s || st.command() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

/// File names inside the work directory.
pub mod artifact {
    pub const DOCUMENTS: &str = "documents.jsonl";
    pub const CORPUS_STATS: &str = "corpus_stats.json";
    pub const INDEX: &str = "index.caix";
    pub const QUERIES: &str = "queries.tsv";
    pub const RETRIEVABILITY: &str = "retrievability.csv";
    pub const RETRIEVABILITY_META: &str = "retrievability.meta.json";
    pub const RETRIEVABILITY_CHECKPOINT: &str = "retrievability.checkpoint.json";
    pub const GRAPH: &str = "graph.tsv";
    pub const GRAPH_STATS: &str = "graph_stats.json";
    pub const PAGERANK: &str = "pagerank.csv";
    pub const PAGERANK_META: &str = "pagerank.meta.json";
    pub const METRICS: &str = "metrics.json";
    pub const REPORT: &str = "report.json";
    pub const SUMMARY: &str = "summary.txt";
    pub const CORRELATION_TXT: &str = "correlation.txt";
    pub const CORRELATION_CSV: &str = "correlation.csv";
    pub const LORENZ_RETRIEVABILITY: &str = "lorenz_retrievability.csv";
    pub const LORENZ_PAGERANK: &str = "lorenz_pagerank.csv";
    pub const MANIFEST: &str = "manifest.json";
    pub const LOCK: &str = ".accessrank.lock";
}
