//! Command-line surface. Stage flags mirror the config keys and override
//! the config file.

use std::path::PathBuf;

use accessrank::querygen::ThresholdMode;
use accessrank::synth::Coupling;
use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, SAVED_CONFIG};
use crate::error::CliError;
use crate::stage::Stage;

#[derive(Debug, Parser)]
#[command(name = "accessrank", version, about = "Compare retrievability and PageRank over a linked corpus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate the corpus.
    Ingest(StageArgs),
    /// Build the inverted index.
    Index(StageArgs),
    /// Generate the unigram and bigram query set.
    GenQueries(StageArgs),
    /// Run every query and accumulate retrievability scores.
    Retrievability(StageArgs),
    /// Resolve outlinks into the link graph.
    Graph(StageArgs),
    /// Compute PageRank over the link graph.
    Pagerank(StageArgs),
    /// Gini, Lorenz curves and rank correlations from the score files.
    Metrics(StageArgs),
    /// Write the report and print the summary tables.
    Report(StageArgs),
    /// Run every stage in order.
    Pipeline(StageArgs),
    /// Write a seeded synthetic corpus.
    Synth(SynthArgs),
}

impl Command {
    pub fn stage(&self) -> Option<Stage> {
        Some(match self {
            Command::Ingest(_) => Stage::Ingest,
            Command::Index(_) => Stage::Index,
            Command::GenQueries(_) => Stage::Queries,
            Command::Retrievability(_) => Stage::Retrievability,
            Command::Graph(_) => Stage::Graph,
            Command::Pagerank(_) => Stage::Pagerank,
            Command::Metrics(_) => Stage::Metrics,
            Command::Report(_) => Stage::Report,
            Command::Pipeline(_) | Command::Synth(_) => return None,
        })
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct StageArgs {
    /// Config file; without it, the work directory's saved config (if any) is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Re-run even if up to date and accept upstream artifacts built with other settings.
    #[arg(long)]
    pub force: bool,

    #[arg(long, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub corpus_id: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub work_dir: Option<PathBuf>,

    #[arg(long)]
    pub unigram_cf_threshold: Option<u64>,
    #[arg(long)]
    pub bigram_cf_threshold: Option<u64>,
    #[arg(long)]
    pub bigram_max: Option<usize>,
    #[arg(long)]
    pub threshold_mode: Option<ThresholdMode>,

    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,

    /// Rank cutoff c of the utility function.
    #[arg(long = "c", alias = "cutoff")]
    pub c: Option<usize>,

    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,

    /// RBO persistence values, comma separated; the first is the headline value.
    #[arg(long, value_delimiter = ',')]
    pub rbo_p: Option<Vec<f64>>,
    #[arg(long)]
    pub lorenz_resolution: Option<usize>,

    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
}

impl StageArgs {
    /// Config file, else the work directory's saved config, else defaults;
    /// flags applied last.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => {
                let saved = self.work_dir.as_ref().map(|w| w.join(SAVED_CONFIG)).filter(|p| p.is_file());
                match saved {
                    Some(p) => RunConfig::load(&p)?,
                    None => RunConfig::default(),
                }
            }
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        if self.corpus.is_some() {
            cfg.corpus.path = self.corpus.clone();
        }
        if self.corpus_id.is_some() {
            cfg.corpus.id = self.corpus_id.clone();
        }
        if self.work_dir.is_some() {
            cfg.runtime.work_dir = self.work_dir.clone();
        }
        set(&mut cfg.querygen.unigram_cf_threshold, &self.unigram_cf_threshold);
        set(&mut cfg.querygen.bigram_cf_threshold, &self.bigram_cf_threshold);
        set(&mut cfg.querygen.bigram_max, &self.bigram_max);
        set(&mut cfg.querygen.threshold_mode, &self.threshold_mode);
        set(&mut cfg.bm25.k1, &self.k1);
        set(&mut cfg.bm25.b, &self.b);
        set(&mut cfg.retrievability.c, &self.c);
        set(&mut cfg.pagerank.damping, &self.damping);
        set(&mut cfg.pagerank.tolerance, &self.tolerance);
        set(&mut cfg.pagerank.max_iterations, &self.max_iterations);
        set(&mut cfg.metrics.rbo_p, &self.rbo_p);
        set(&mut cfg.metrics.lorenz_resolution, &self.lorenz_resolution);
        set(&mut cfg.runtime.workers, &self.workers);
        set(&mut cfg.runtime.checkpoint_every, &self.checkpoint_every);
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Output corpus file (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub docs: usize,
    #[arg(long, default_value_t = 5000)]
    pub vocab: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.07)]
    pub zipf_exponent: f64,
    #[arg(long, default_value_t = 40)]
    pub min_len: usize,
    #[arg(long, default_value_t = 400)]
    pub max_len: usize,
    #[arg(long, default_value_t = 6.0)]
    pub mean_outlinks: f64,
    #[arg(long, default_value_t = 1.0)]
    pub link_exponent: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dangling_fraction: f64,
    #[arg(long, default_value_t = 0.02)]
    pub external_link_rate: f64,
    /// How term richness follows link prominence: none, positive or anti.
    #[arg(long, default_value_t = Coupling::None)]
    pub coupling: Coupling,
}
