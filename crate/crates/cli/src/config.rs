//! Run configuration: one versioned TOML file with a section per stage.
//!
//! ```toml
//! version = 1
//!
//! [corpus]
//! path = "corpus.jsonl"
//!
//! [retrievability]
//! c = 100
//!
//! [runtime]
//! work_dir = "run"
//! workers = 8
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use accessrank::index::Bm25Params;
use accessrank::pagerank::PageRankParams;
use accessrank::querygen::{QueryGenParams, ThresholdMode};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::stage::Stage;

pub const CONFIG_VERSION: u32 = 1;

/// Name of the effective configuration saved in the work directory.
pub const SAVED_CONFIG: &str = "run.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub corpus: CorpusSection,
    pub querygen: QueryGenSection,
    pub bm25: Bm25Section,
    pub retrievability: RetrievabilitySection,
    pub pagerank: PageRankSection,
    pub metrics: MetricsSection,
    pub runtime: RuntimeSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Defaults to the corpus file stem.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryGenSection {
    pub unigram_cf_threshold: u64,
    pub bigram_cf_threshold: u64,
    pub bigram_max: usize,
    pub threshold_mode: ThresholdMode,
}

impl Default for QueryGenSection {
    fn default() -> Self {
        let p = QueryGenParams::default();
        Self {
            unigram_cf_threshold: p.unigram_cf_threshold,
            bigram_cf_threshold: p.bigram_cf_threshold,
            bigram_max: p.bigram_max,
            threshold_mode: p.threshold_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bm25Section {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Section {
    fn default() -> Self {
        let p = Bm25Params::default();
        Self { k1: p.k1, b: p.b }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievabilitySection {
    pub c: usize,
}

impl Default for RetrievabilitySection {
    fn default() -> Self {
        Self { c: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankSection {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankSection {
    fn default() -> Self {
        let p = PageRankParams::default();
        Self {
            damping: p.damping,
            tolerance: p.tolerance,
            max_iterations: p.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    /// RBO persistence values; the first is the headline one.
    pub rbo_p: Vec<f64>,
    pub lorenz_resolution: usize,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            rbo_p: vec![0.9, 0.98],
            lorenz_resolution: 100,
        }
    }
}

/// Settings that affect how a run executes but never what it produces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub work_dir: Option<PathBuf>,
    /// 0 means one worker per available core.
    pub workers: usize,
    /// Retrievability checkpoint interval in queries; 0 disables checkpoints.
    pub checkpoint_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            corpus: CorpusSection::default(),
            querygen: QueryGenSection::default(),
            bm25: Bm25Section::default(),
            retrievability: RetrievabilitySection::default(),
            pagerank: PageRankSection::default(),
            metrics: MetricsSection::default(),
            runtime: RuntimeSection::default(),
        }
    }
}

/// Everything that determines results, in echo order.
#[derive(Serialize)]
struct Study<'a> {
    version: u32,
    corpus_id: String,
    querygen: &'a QueryGenSection,
    bm25: &'a Bm25Section,
    retrievability: &'a RetrievabilitySection,
    pagerank: &'a PageRankSection,
    metrics: &'a MetricsSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Validation(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn work_dir(&self) -> Result<&Path, CliError> {
        self.runtime
            .work_dir
            .as_deref()
            .ok_or_else(|| CliError::Validation("no work directory given (--work-dir or [runtime] work_dir)".into()))
    }

    pub fn corpus_id(&self) -> String {
        if let Some(id) = &self.corpus.id {
            return id.clone();
        }
        self.corpus
            .path
            .as_deref()
            .and_then(Path::file_stem)
            .map_or_else(|| "corpus".to_owned(), |s| s.to_string_lossy().into_owned())
    }

    pub fn querygen_params(&self) -> QueryGenParams {
        QueryGenParams {
            unigram_cf_threshold: self.querygen.unigram_cf_threshold,
            bigram_cf_threshold: self.querygen.bigram_cf_threshold,
            bigram_max: self.querygen.bigram_max,
            threshold_mode: self.querygen.threshold_mode,
        }
    }

    pub fn bm25_params(&self) -> Bm25Params {
        Bm25Params {
            k1: self.bm25.k1,
            b: self.bm25.b,
        }
    }

    pub fn pagerank_params(&self) -> PageRankParams {
        PageRankParams {
            damping: self.pagerank.damping,
            tolerance: self.pagerank.tolerance,
            max_iterations: self.pagerank.max_iterations,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let mut problems = Vec::new();
        let q = &self.querygen;
        if q.unigram_cf_threshold == 0 {
            problems.push("querygen.unigram_cf_threshold must be positive".to_owned());
        }
        if q.bigram_cf_threshold == 0 {
            problems.push("querygen.bigram_cf_threshold must be positive".to_owned());
        }
        if self.retrievability.c == 0 {
            problems.push("retrievability.c must be positive".to_owned());
        }
        if !(self.bm25.k1 >= 0.0 && self.bm25.k1.is_finite()) {
            problems.push(format!("bm25.k1 must be a non-negative number, got {}", self.bm25.k1));
        }
        if !(0.0..=1.0).contains(&self.bm25.b) {
            problems.push(format!("bm25.b must lie in [0, 1], got {}", self.bm25.b));
        }
        if let Err(e) = self.pagerank_params().validate() {
            problems.push(format!("pagerank: {e}"));
        }
        if self.pagerank.max_iterations == 0 {
            problems.push("pagerank.max_iterations must be positive".to_owned());
        }
        if self.metrics.rbo_p.is_empty() {
            problems.push("metrics.rbo_p needs at least one value".to_owned());
        }
        for p in &self.metrics.rbo_p {
            if !(*p > 0.0 && *p < 1.0) {
                problems.push(format!("metrics.rbo_p values must lie in (0, 1), got {p}"));
            }
        }
        if self.metrics.lorenz_resolution < 2 {
            problems.push("metrics.lorenz_resolution must be at least 2".to_owned());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(problems.join("; ")))
        }
    }

    /// Canonical TOML of every result-determining setting. Paths and
    /// runtime settings are left out so the echo is identical wherever and
    /// however the run executes.
    pub fn echo(&self) -> String {
        toml::to_string(&self.study()).expect("config serializes")
    }

    fn study(&self) -> Study<'_> {
        Study {
            version: self.version,
            corpus_id: self.corpus_id(),
            querygen: &self.querygen,
            bm25: &self.bm25,
            retrievability: &self.retrievability,
            pagerank: &self.pagerank,
            metrics: &self.metrics,
        }
    }

    /// Settings that influence `stage`'s own output.
    pub fn stage_params(&self, stage: Stage) -> serde_json::Value {
        match stage {
            Stage::Ingest => json!({ "corpus_id": self.corpus_id() }),
            Stage::Index => json!({ "analysis": "lucene-english-stopwords+porter" }),
            Stage::Queries => json!({ "querygen": self.querygen, "corpus_id": self.corpus_id() }),
            Stage::Retrievability => json!({ "bm25": self.bm25, "c": self.retrievability.c }),
            Stage::Graph => json!({}),
            Stage::Pagerank => json!({ "pagerank": self.pagerank }),
            Stage::Metrics => json!({ "metrics": self.metrics }),
            Stage::Report => json!({ "echo": self.echo() }),
        }
    }

    pub fn stage_hash(&self, stage: Stage) -> String {
        let v = json!({ "stage": stage.name(), "config_version": CONFIG_VERSION, "params": self.stage_params(stage) });
        hex::encode(Sha256::digest(serde_json::to_vec(&v).expect("json")))
    }

    pub fn echo_hash(&self) -> String {
        hex::encode(Sha256::digest(self.echo().as_bytes()))
    }
}
