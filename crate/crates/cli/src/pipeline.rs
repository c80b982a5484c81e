//! Stage execution: dependency checks, up-to-date detection, artifact
//! writing and manifest updates.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use accessrank::bias::{gini, lorenz};
use accessrank::corpus::{load_corpus, write_corpus, Corpus, CorpusError, CorpusReader, CorpusStats, Document, MalformedRecord};
use accessrank::correlation::correlate;
use accessrank::index::{read_snapshot, write_snapshot, Bm25, InvertedIndex};
use accessrank::pagerank::{build_graph, compute_pagerank, read_edge_list, write_edge_list, GraphBuildStats};
use accessrank::querygen::{generate_query_set, read_query_set, write_query_set, QuerySet};
use accessrank::retrievability::{Retrievability, Tally};
use accessrank::scores::{read_score_csv, write_score_csv};
use anyhow::{anyhow, Context};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SAVED_CONFIG};
use crate::error::CliError;
use crate::manifest::{changed_outputs, sha256_file, write_atomic, Manifest, PipelineLock, StageRecord};
use crate::report::{
    render_summary, CorpusSummary, Metrics, MetricsReport, PageRankSummary, QuerySummary, RetrievabilitySummary,
    REPORT_VERSION,
};
use crate::stage::{artifact, Stage};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Re-run even when up to date, and accept upstream artifacts produced
    /// under different settings.
    pub force: bool,
    /// Suppress per-stage progress lines and the printed summary.
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StageOutcome {
    Ran { duration: Duration },
    UpToDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IngestStats {
    corpus_id: String,
    #[serde(flatten)]
    stats: CorpusStats,
    malformed: Vec<MalformedRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RetrievabilityMeta {
    corpus_id: String,
    c: usize,
    query_count: usize,
    k1: f64,
    b: f64,
    zero_match_queries: usize,
    unknown_term_queries: usize,
    wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GraphStats {
    node_count: usize,
    dangling_nodes: usize,
    #[serde(flatten)]
    build: GraphBuildStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PageRankMeta {
    corpus_id: String,
    damping: f64,
    tolerance: f64,
    max_iterations: usize,
    iterations: usize,
    residual: f64,
    converged: bool,
    wall_time_secs: f64,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    config_hash: String,
    inputs: BTreeMap<String, String>,
    tally: Tally,
}

/// Runs one stage under the work-directory lock.
pub fn run_stage(stage: Stage, cfg: &RunConfig, opts: RunOptions) -> Result<StageOutcome, CliError> {
    let ctx = Runner::open(cfg, opts)?;
    let _lock = PipelineLock::acquire(&ctx.work_dir)?;
    ctx.in_pool(|| ctx.run(stage))
}

/// Runs every stage in order under one lock.
pub fn run_pipeline(cfg: &RunConfig, opts: RunOptions) -> Result<Vec<(Stage, StageOutcome)>, CliError> {
    let ctx = Runner::open(cfg, opts)?;
    let _lock = PipelineLock::acquire(&ctx.work_dir)?;
    ctx.in_pool(|| {
        Stage::ALL
            .into_iter()
            .map(|s| ctx.run(s).map(|o| (s, o)))
            .collect()
    })
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    opts: RunOptions,
    work_dir: PathBuf,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serializable");
    b.push(b'\n');
    b
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

impl<'a> Runner<'a> {
    fn open(cfg: &'a RunConfig, opts: RunOptions) -> Result<Self, CliError> {
        cfg.validate()?;
        let work_dir = cfg.work_dir()?.to_path_buf();
        fs::create_dir_all(&work_dir)
            .map_err(|e| CliError::Validation(format!("work directory {} is not writable: {e}", work_dir.display())))?;
        Ok(Self { cfg, opts, work_dir })
    }

    fn in_pool<T: Send>(&self, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.runtime.workers)
            .build()
            .map_err(|e| CliError::Other(anyhow!("cannot start worker pool: {e}")))?;
        pool.install(f)
    }

    fn say(&self, line: std::fmt::Arguments<'_>) {
        if !self.opts.quiet {
            println!("{line}");
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.work_dir.join(name)
    }

    /// Checks one upstream stage and returns its recorded outputs.
    fn upstream(
        &self,
        manifest: &Manifest,
        stage: Stage,
        up: Stage,
    ) -> Result<Option<BTreeMap<String, String>>, CliError> {
        let Some(rec) = manifest.get(up.name()) else {
            return Ok(None);
        };
        let changed = changed_outputs(&self.work_dir, rec);
        if !changed.is_empty() {
            return Err(CliError::StaleDependency {
                stage: stage.name(),
                needs: up.name(),
                command: up.command(),
                detail: format!("{} no longer matches the manifest", changed.join(", ")),
            });
        }
        if rec.config_hash != self.cfg.stage_hash(up) && !self.opts.force {
            return Err(CliError::ConfigMismatch {
                stage: stage.name(),
                upstream: up.name(),
                command: up.command(),
            });
        }
        Ok(Some(rec.outputs.clone()))
    }

    fn inputs(&self, manifest: &Manifest, stage: Stage) -> Result<BTreeMap<String, String>, CliError> {
        let mut inputs = BTreeMap::new();
        if stage == Stage::Ingest {
            let path = self.corpus_path()?;
            let hash = sha256_file(path).map_err(|e| CliError::Other(anyhow!("corpus {}: {e}", path.display())))?;
            inputs.insert("corpus".to_owned(), hash);
        }
        for &up in stage.requires() {
            match self.upstream(manifest, stage, up)? {
                Some(outs) => inputs.extend(outs),
                None => {
                    return Err(CliError::MissingDependency {
                        stage: stage.name(),
                        needs: up.name(),
                        command: up.command(),
                    })
                }
            }
        }
        for &up in stage.optional() {
            if let Some(outs) = self.upstream(manifest, stage, up)? {
                inputs.extend(outs);
            }
        }
        Ok(inputs)
    }

    fn corpus_path(&self) -> Result<&Path, CliError> {
        self.cfg
            .corpus
            .path
            .as_deref()
            .ok_or_else(|| CliError::Validation("no corpus given (--corpus or [corpus] path)".into()))
    }

    fn run(&self, stage: Stage) -> Result<StageOutcome, CliError> {
        let mut manifest = Manifest::load(&self.work_dir)?;
        let inputs = self.inputs(&manifest, stage)?;
        let config_hash = self.cfg.stage_hash(stage);
        if let Some(rec) = manifest.get(stage.name()) {
            let current = rec.config_hash == config_hash
                && rec.inputs == inputs
                && changed_outputs(&self.work_dir, rec).is_empty();
            if current && !self.opts.force {
                self.say(format_args!("{stage}: up to date"));
                return Ok(StageOutcome::UpToDate);
            }
        }

        info!("{stage}: running");
        let start = Instant::now();
        let (written, message) = match stage {
            Stage::Ingest => self.ingest()?,
            Stage::Index => self.index()?,
            Stage::Queries => self.queries()?,
            Stage::Retrievability => self.retrievability(&config_hash, &inputs)?,
            Stage::Graph => self.graph()?,
            Stage::Pagerank => self.pagerank()?,
            Stage::Metrics => self.metrics(&inputs)?,
            Stage::Report => self.report(&manifest)?,
        };
        let duration = start.elapsed();

        let mut outputs = BTreeMap::new();
        for name in written {
            let hash = sha256_file(&self.path(&name))?;
            outputs.insert(name, hash);
        }
        if let Some(old) = manifest.get(stage.name()) {
            for name in old.outputs.keys().filter(|n| !outputs.contains_key(*n)) {
                let _ = fs::remove_file(self.path(name));
            }
        }
        manifest.record(
            stage.name(),
            StageRecord {
                config_hash,
                inputs,
                outputs,
                duration_secs: duration.as_secs_f64(),
                finished_unix: unix_now(),
            },
        );
        manifest.save(&self.work_dir)?;
        let mut saved = self.cfg.clone();
        saved.runtime = Default::default();
        write_atomic(&self.path(SAVED_CONFIG), saved.to_toml().as_bytes())?;
        self.say(format_args!("{stage}: {message} ({:.2}s)", duration.as_secs_f64()));
        Ok(StageOutcome::Ran { duration })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> anyhow::Result<String> {
        write_atomic(&self.path(name), bytes).with_context(|| format!("writing {name}"))?;
        Ok(name.to_owned())
    }

    fn documents(&self) -> anyhow::Result<Vec<Document>> {
        Ok(load_corpus(self.path(artifact::DOCUMENTS))?.documents)
    }

    fn load_index(&self) -> anyhow::Result<InvertedIndex> {
        let f = File::open(self.path(artifact::INDEX)).context("opening index snapshot")?;
        Ok(read_snapshot(BufReader::new(f))?)
    }

    fn load_queries(&self) -> anyhow::Result<QuerySet> {
        let f = File::open(self.path(artifact::QUERIES)).context("opening query file")?;
        Ok(read_query_set(BufReader::new(f))?)
    }

    fn ingest(&self) -> Result<(Vec<String>, String), CliError> {
        let path = self.corpus_path()?;
        let mut reader = CorpusReader::open(path).map_err(|e| CliError::Other(e.into()))?;
        let documents = match reader.by_ref().collect::<Result<Vec<_>, _>>() {
            Ok(d) => d,
            Err(e @ CorpusError::DuplicateId { .. }) => return Err(CliError::Validation(e.to_string())),
            Err(e) => return Err(CliError::Other(e.into())),
        };
        let corpus = Corpus {
            documents,
            malformed: reader.malformed().to_vec(),
        };
        let stats = corpus.stats();
        let mut docs = Vec::new();
        write_corpus(&mut docs, &corpus.documents)?;
        let record = IngestStats {
            corpus_id: self.cfg.corpus_id(),
            stats,
            malformed: corpus.malformed,
        };
        let written = vec![
            self.write(artifact::DOCUMENTS, &docs)?,
            self.write(artifact::CORPUS_STATS, &json_bytes(&record))?,
        ];
        let msg = format!(
            "{} documents, {} terms, {} tokens, {} malformed records skipped",
            stats.doc_count,
            stats.term_count,
            stats.total_tokens,
            record.malformed.len()
        );
        Ok((written, msg))
    }

    fn index(&self) -> Result<(Vec<String>, String), CliError> {
        let docs = self.documents()?;
        let idx = InvertedIndex::build(&docs).map_err(anyhow::Error::from)?;
        let mut bytes = Vec::new();
        write_snapshot(&idx, &mut bytes)?;
        let written = vec![self.write(artifact::INDEX, &bytes)?];
        Ok((written, format!("{} documents, {} terms", idx.doc_count(), idx.term_count())))
    }

    fn queries(&self) -> Result<(Vec<String>, String), CliError> {
        let docs = self.documents()?;
        let idx = self.load_index()?;
        let set = generate_query_set(&docs, &idx, self.cfg.querygen_params(), &self.cfg.corpus_id());
        let mut bytes = Vec::new();
        write_query_set(&set, &mut bytes)?;
        let bigrams = set.queries.iter().filter(|q| q.terms.len() == 2).count();
        let written = vec![self.write(artifact::QUERIES, &bytes)?];
        Ok((
            written,
            format!("{} queries ({} unigram, {bigrams} bigram)", set.len(), set.len() - bigrams),
        ))
    }

    fn retrievability(
        &self,
        config_hash: &str,
        inputs: &BTreeMap<String, String>,
    ) -> Result<(Vec<String>, String), CliError> {
        let start = Instant::now();
        let idx = self.load_index()?;
        let set = self.load_queries()?;
        let bm25 = Bm25::new(&idx, self.cfg.bm25_params());
        let c = self.cfg.retrievability.c;
        let every = self.cfg.runtime.checkpoint_every;
        let ckpt_path = self.path(artifact::RETRIEVABILITY_CHECKPOINT);

        let mut tally = Tally::new(idx.doc_count());
        if every > 0 && !self.opts.force {
            if let Ok(ck) = read_json::<Checkpoint>(&ckpt_path) {
                if ck.config_hash == config_hash && &ck.inputs == inputs {
                    info!("retrievability: resuming after {} of {} queries", ck.tally.next_query, set.len());
                    tally = ck.tally;
                } else {
                    warn!("retrievability: ignoring checkpoint from a different run");
                }
            }
        }
        let total = set.len();
        let mut save_error = None;
        let result = Retrievability::new(&bm25, &set.queries, c)
            .checkpoint_every(every)
            .resume(tally, |t| {
                info!("retrievability: {} / {total} queries", t.next_query);
                let ck = Checkpoint {
                    config_hash: config_hash.to_owned(),
                    inputs: inputs.clone(),
                    tally: t.clone(),
                };
                if let Err(e) = write_atomic(&ckpt_path, &serde_json::to_vec(&ck).expect("json")) {
                    save_error.get_or_insert(e);
                }
            })
            .map_err(anyhow::Error::from)?;
        if let Some(e) = save_error {
            return Err(CliError::Other(anyhow!("writing checkpoint: {e}")));
        }

        let mut csv = Vec::new();
        write_score_csv(&mut csv, idx.doc_ids(), &result.scores.values).map_err(anyhow::Error::from)?;
        let meta = RetrievabilityMeta {
            corpus_id: self.cfg.corpus_id(),
            c,
            query_count: total,
            k1: self.cfg.bm25.k1,
            b: self.cfg.bm25.b,
            zero_match_queries: result.zero_match_queries,
            unknown_term_queries: result.unknown_term_queries,
            wall_time_secs: start.elapsed().as_secs_f64(),
        };
        let written = vec![
            self.write(artifact::RETRIEVABILITY, &csv)?,
            self.write(artifact::RETRIEVABILITY_META, &json_bytes(&meta))?,
        ];
        let _ = fs::remove_file(&ckpt_path);
        Ok((
            written,
            format!(
                "{total} queries at c={c}, {} retrieved nothing",
                result.zero_match_queries
            ),
        ))
    }

    fn graph(&self) -> Result<(Vec<String>, String), CliError> {
        let docs = self.documents()?;
        let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
        let ordinals: HashMap<&str, u32> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i as u32)).collect();
        let (graph, build) = build_graph(&docs, docs.len(), |id| ordinals.get(id).copied());
        let mut bytes = Vec::new();
        write_edge_list(&graph, &ids, &mut bytes)?;
        let dangling = (0..graph.node_count() as u32).filter(|&v| graph.out_degree(v) == 0).count();
        let stats = GraphStats {
            node_count: graph.node_count(),
            dangling_nodes: dangling,
            build,
        };
        let written = vec![
            self.write(artifact::GRAPH, &bytes)?,
            self.write(artifact::GRAPH_STATS, &json_bytes(&stats))?,
        ];
        Ok((
            written,
            format!(
                "{} nodes, {} edges, {} links outside the corpus dropped",
                stats.node_count, build.edges, build.dropped_missing_target
            ),
        ))
    }

    fn pagerank(&self) -> Result<(Vec<String>, String), CliError> {
        let start = Instant::now();
        let docs = self.documents()?;
        let ids: Vec<String> = docs.into_iter().map(|d| d.id).collect();
        let ordinals: HashMap<&str, u32> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i as u32)).collect();
        let f = File::open(self.path(artifact::GRAPH)).context("opening graph")?;
        let graph = read_edge_list(BufReader::new(f), ids.len(), |id| ordinals.get(id).copied())?;
        let params = self.cfg.pagerank_params();
        let r = compute_pagerank(&graph, &params).map_err(anyhow::Error::from)?;
        let mut csv = Vec::new();
        write_score_csv(&mut csv, &ids, &r.scores.values).map_err(anyhow::Error::from)?;
        let meta = PageRankMeta {
            corpus_id: self.cfg.corpus_id(),
            damping: params.damping,
            tolerance: params.tolerance,
            max_iterations: params.max_iterations,
            iterations: r.iterations,
            residual: r.residual,
            converged: r.converged,
            wall_time_secs: start.elapsed().as_secs_f64(),
        };
        let written = vec![
            self.write(artifact::PAGERANK, &csv)?,
            self.write(artifact::PAGERANK_META, &json_bytes(&meta))?,
        ];
        let status = if r.converged { "converged" } else { "did not converge" };
        Ok((written, format!("{status} after {} iterations", r.iterations)))
    }

    fn read_scores(&self, name: &str) -> anyhow::Result<Vec<(String, f64)>> {
        let f = File::open(self.path(name)).with_context(|| format!("opening {name}"))?;
        read_score_csv(BufReader::new(f)).with_context(|| format!("reading {name}"))
    }

    fn metrics(&self, inputs: &BTreeMap<String, String>) -> Result<(Vec<String>, String), CliError> {
        let m = self.compute_metrics(inputs)?;
        let msg = match m.gini_pagerank {
            Some(g) => format!("gini retrievability {:.4}, pagerank {g:.4}", m.gini_retrievability),
            None => format!("gini retrievability {:.4}, pagerank omitted", m.gini_retrievability),
        };
        Ok((vec![self.write(artifact::METRICS, &json_bytes(&m))?], msg))
    }

    fn compute_metrics(&self, inputs: &BTreeMap<String, String>) -> anyhow::Result<Metrics> {
        let ingest: IngestStats = read_json(&self.path(artifact::CORPUS_STATS))?;
        let set = self.load_queries()?;
        let rmeta: RetrievabilityMeta = read_json(&self.path(artifact::RETRIEVABILITY_META))?;
        let r_rows = self.read_scores(artifact::RETRIEVABILITY)?;
        let r: Vec<f64> = r_rows.iter().map(|(_, v)| *v).collect();
        let res = self.cfg.metrics.lorenz_resolution;

        let mut omitted = Vec::new();
        let graph: Option<GraphStats> = if inputs.contains_key(artifact::GRAPH_STATS) {
            Some(read_json(&self.path(artifact::GRAPH_STATS))?)
        } else {
            None
        };
        let mut pagerank = None;
        let mut gini_pagerank = None;
        let mut lorenz_pagerank = None;
        let mut correlation = None;
        if inputs.contains_key(artifact::PAGERANK) {
            let pmeta: PageRankMeta = read_json(&self.path(artifact::PAGERANK_META))?;
            let p_rows = self.read_scores(artifact::PAGERANK)?;
            let by_id: HashMap<&str, f64> = p_rows.iter().map(|(id, v)| (id.as_str(), *v)).collect();
            if by_id.len() != r_rows.len() {
                return Err(anyhow!(
                    "score files disagree: {} retrievability rows, {} pagerank rows",
                    r_rows.len(),
                    by_id.len()
                ));
            }
            let p: Vec<f64> = r_rows
                .iter()
                .map(|(id, _)| by_id.get(id.as_str()).copied().ok_or_else(|| anyhow!("{id} has no pagerank score")))
                .collect::<anyhow::Result<_>>()?;
            gini_pagerank = Some(gini(&p).context("pagerank gini")?);
            lorenz_pagerank = Some(lorenz(&p, res).context("pagerank lorenz curve")?);
            if p.len() >= 2 {
                correlation = Some(correlate(&r, &p, &self.cfg.metrics.rbo_p).context("correlation")?);
            } else {
                omitted.push("correlation: fewer than two documents".to_owned());
            }
            pagerank = Some(PageRankSummary {
                damping: pmeta.damping,
                iterations: pmeta.iterations,
                residual: pmeta.residual,
                converged: pmeta.converged,
                max: p.iter().copied().fold(0.0, f64::max),
            });
        } else {
            omitted.push(
                "pagerank: no pagerank artifact; PageRank Gini, Lorenz curve and correlation omitted \
                 (run `accessrank graph` and `accessrank pagerank`, then metrics and report)"
                    .to_owned(),
            );
        }

        let bigrams = set.queries.iter().filter(|q| q.terms.len() == 2).count();
        Ok(Metrics {
            corpus: CorpusSummary {
                id: ingest.corpus_id,
                stats: ingest.stats,
                malformed_records: ingest.malformed.len(),
                links: graph.as_ref().map(|g| g.build),
                dangling_nodes: graph.as_ref().map(|g| g.dangling_nodes),
            },
            queries: QuerySummary {
                total: set.len(),
                unigrams: set.len() - bigrams,
                bigrams,
                zero_match: rmeta.zero_match_queries,
                unknown_term: rmeta.unknown_term_queries,
            },
            retrievability: RetrievabilitySummary {
                c: rmeta.c,
                mean: if r.is_empty() { 0.0 } else { r.iter().sum::<f64>() / r.len() as f64 },
                max: r.iter().copied().fold(0.0, f64::max),
                never_retrieved: r.iter().filter(|&&v| v == 0.0).count(),
            },
            pagerank,
            gini_retrievability: gini(&r).context("retrievability gini")?,
            gini_pagerank,
            correlation,
            lorenz_retrievability: lorenz(&r, res).context("retrievability lorenz curve")?,
            lorenz_pagerank,
            omitted,
        })
    }

    fn report(&self, manifest: &Manifest) -> Result<(Vec<String>, String), CliError> {
        let report = build_report(&self.work_dir, self.cfg, manifest)?;
        let m = &report.metrics;
        let mut written = vec![self.write(artifact::REPORT, &json_bytes(&report))?];
        let mut buf = Vec::new();
        m.lorenz_retrievability.write_csv(&mut buf)?;
        written.push(self.write(artifact::LORENZ_RETRIEVABILITY, &buf)?);
        if let Some(l) = &m.lorenz_pagerank {
            let mut buf = Vec::new();
            l.write_csv(&mut buf)?;
            written.push(self.write(artifact::LORENZ_PAGERANK, &buf)?);
        }
        if let Some(c) = &m.correlation {
            written.push(self.write(artifact::CORRELATION_TXT, c.to_key_values().as_bytes())?);
            let row = format!("{}\n{}\n", accessrank::CorrelationReport::csv_header(), c.to_csv_row());
            written.push(self.write(artifact::CORRELATION_CSV, row.as_bytes())?);
        }
        let timings: Vec<(String, f64)> = Stage::ALL
            .iter()
            .filter_map(|s| manifest.get(s.name()).map(|r| (s.name().to_owned(), r.duration_secs)))
            .collect();
        let summary = render_summary(&report, &timings);
        written.push(self.write(artifact::SUMMARY, summary.as_bytes())?);
        if !self.opts.quiet {
            print!("{summary}");
        }
        Ok((written, format!("wrote {}", artifact::REPORT)))
    }
}

/// Assembles the report from `metrics.json`, refusing to cite any artifact
/// whose content no longer matches its manifest hash.
pub fn build_report(work_dir: &Path, cfg: &RunConfig, manifest: &Manifest) -> Result<MetricsReport, CliError> {
    let metrics: Metrics = read_json(&work_dir.join(artifact::METRICS))?;
    let mut cited = vec![
        artifact::DOCUMENTS,
        artifact::CORPUS_STATS,
        artifact::QUERIES,
        artifact::RETRIEVABILITY,
        artifact::METRICS,
    ];
    if metrics.corpus.links.is_some() {
        cited.push(artifact::GRAPH);
    }
    if metrics.pagerank.is_some() {
        cited.push(artifact::PAGERANK);
    }
    let mut artifacts = BTreeMap::new();
    for name in cited {
        let recorded = manifest.output_hash(name).ok_or_else(|| {
            CliError::Validation(format!("{name} is not listed in the manifest; refusing to cite it"))
        })?;
        let actual = sha256_file(&work_dir.join(name))?;
        if actual != recorded {
            return Err(CliError::Validation(format!(
                "{name} changed since it was recorded in the manifest; refusing to cite it"
            )));
        }
        artifacts.insert(name.to_owned(), actual);
    }
    Ok(MetricsReport {
        format_version: REPORT_VERSION,
        metrics,
        config: cfg.echo(),
        config_hash: cfg.echo_hash(),
        artifacts,
    })
}

/// Rebuilds the report for a finished work directory without writing anything.
pub fn emit_report(work_dir: &Path, cfg: &RunConfig) -> Result<MetricsReport, CliError> {
    let manifest = Manifest::load(work_dir)?;
    if manifest.get(Stage::Metrics.name()).is_none() {
        return Err(CliError::MissingDependency {
            stage: Stage::Report.name(),
            needs: Stage::Metrics.name(),
            command: Stage::Metrics.command(),
        });
    }
    build_report(work_dir, cfg, &manifest)
}
