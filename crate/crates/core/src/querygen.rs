//! Simulated query universe: frequent single terms plus frequent
//! consecutive term pairs, drawn from the collection itself.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::index::InvertedIndex;

/// Which frequency the bigram threshold applies to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Both constituent terms need collection frequency >= threshold.
    #[default]
    TermCf,
    /// The pair itself must occur >= threshold times.
    PairCf,
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::TermCf => "term_cf",
            ThresholdMode::PairCf => "pair_cf",
        })
    }
}

impl FromStr for ThresholdMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "term_cf" => Ok(ThresholdMode::TermCf),
            "pair_cf" => Ok(ThresholdMode::PairCf),
            other => Err(format!("unknown threshold mode {other:?} (expected term_cf or pair_cf)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryGenParams {
    /// Unigrams need collection frequency strictly above this.
    pub unigram_cf_threshold: u64,
    /// Bigram threshold, inclusive; see [`ThresholdMode`].
    pub bigram_cf_threshold: u64,
    pub bigram_max: usize,
    pub threshold_mode: ThresholdMode,
}

impl Default for QueryGenParams {
    fn default() -> Self {
        Self {
            unigram_cf_threshold: 5,
            bigram_cf_threshold: 20,
            bigram_max: 2_000_000,
            threshold_mode: ThresholdMode::TermCf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub terms: Vec<String>,
    pub weight: f64,
}

impl Query {
    pub fn new(terms: Vec<String>) -> Self {
        Self { terms, weight: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    pub queries: Vec<Query>,
    pub source_corpus_id: String,
    pub params: QueryGenParams,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.queries.iter().map(|q| q.weight).sum()
    }
}

/// Every term with collection frequency above the threshold, in lexicographic order.
pub fn generate_unigrams(index: &InvertedIndex, cf_threshold: u64) -> Vec<Query> {
    index
        .terms()
        .iter()
        .enumerate()
        .filter(|(id, _)| index.stats_by_id(*id as u32).collection_frequency > cf_threshold)
        .map(|(_, t)| Query::new(vec![t.clone()]))
        .collect()
}

type PairCounts = HashMap<(u32, u32), u64>;

/// Counts ordered adjacent pairs within each document. With
/// [`ThresholdMode::TermCf`] only pairs whose terms both pass the threshold are kept.
pub fn count_pairs(docs: &[Document], index: &InvertedIndex, params: &QueryGenParams) -> PairCounts {
    let eligible = |id: u32| match params.threshold_mode {
        ThresholdMode::TermCf => index.stats_by_id(id).collection_frequency >= params.bigram_cf_threshold,
        ThresholdMode::PairCf => true,
    };
    docs.par_iter()
        .fold(PairCounts::new, |mut acc, doc| {
            let ids: Vec<Option<u32>> = doc.analyzed_terms().iter().map(|t| index.term_id(t)).collect();
            for w in ids.windows(2) {
                if let [Some(a), Some(b)] = *w {
                    if eligible(a) && eligible(b) {
                        *acc.entry((a, b)).or_insert(0) += 1;
                    }
                }
            }
            acc
        })
        .reduce(PairCounts::new, |a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
            for (k, v) in small {
                *big.entry(k).or_insert(0) += v;
            }
            big
        })
}

/// Two-term queries ranked by pair frequency (ties lexicographic), truncated to `bigram_max`.
pub fn generate_bigrams(docs: &[Document], index: &InvertedIndex, params: &QueryGenParams) -> Vec<Query> {
    let counts = count_pairs(docs, index, params);
    let mut ranked: Vec<((u32, u32), u64)> = counts
        .into_iter()
        .filter(|(_, n)| params.threshold_mode == ThresholdMode::TermCf || *n >= params.bigram_cf_threshold)
        .collect();
    // Term ids are assigned in lexicographic order, so id order is term order.
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(params.bigram_max);
    let terms = index.terms();
    ranked
        .into_iter()
        .map(|((a, b), _)| Query::new(vec![terms[a as usize].clone(), terms[b as usize].clone()]))
        .collect()
}

/// Unigrams followed by bigrams.
pub fn generate_query_set(
    docs: &[Document],
    index: &InvertedIndex,
    params: QueryGenParams,
    source_corpus_id: &str,
) -> QuerySet {
    let mut queries = generate_unigrams(index, params.unigram_cf_threshold);
    queries.extend(generate_bigrams(docs, index, &params));
    QuerySet {
        queries,
        source_corpus_id: source_corpus_id.to_owned(),
        params,
    }
}

#[derive(Debug, Error)]
pub enum QuerySetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("query file line {line}: {message}")]
    Parse { line: usize, message: String },
}

const HEADER_TAG: &str = "#queryset";

/// Header line with generation parameters, then `weight<TAB>term1[<TAB>term2]` per query.
pub fn write_query_set(set: &QuerySet, out: impl Write) -> io::Result<()> {
    let mut w = io::BufWriter::new(out);
    let p = &set.params;
    writeln!(
        w,
        "{HEADER_TAG}\tversion=1\tsource={}\tunigram_cf_threshold={}\tbigram_cf_threshold={}\tbigram_max={}\tthreshold_mode={}",
        set.source_corpus_id, p.unigram_cf_threshold, p.bigram_cf_threshold, p.bigram_max, p.threshold_mode
    )?;
    for q in &set.queries {
        write!(w, "{}", q.weight)?;
        for t in &q.terms {
            write!(w, "\t{t}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn read_query_set(input: impl BufRead) -> Result<QuerySet, QuerySetError> {
    let mut lines = input.lines();
    let err = |line: usize, message: String| QuerySetError::Parse { line, message };
    let header = lines.next().ok_or_else(|| err(1, "missing header".into()))??;
    let mut fields = header.split('\t');
    if fields.next() != Some(HEADER_TAG) {
        return Err(err(1, format!("header must start with {HEADER_TAG}")));
    }
    let mut params = QueryGenParams::default();
    let mut source = String::new();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| err(1, format!("bad header field {f:?}")))?;
        let bad = |e: String| err(1, format!("{k}: {e}"));
        match k {
            "version" if v == "1" => {}
            "version" => return Err(err(1, format!("unsupported query file version {v}"))),
            "source" => source = v.to_owned(),
            "unigram_cf_threshold" => params.unigram_cf_threshold = v.parse().map_err(|e| bad(format!("{e}")))?,
            "bigram_cf_threshold" => params.bigram_cf_threshold = v.parse().map_err(|e| bad(format!("{e}")))?,
            "bigram_max" => params.bigram_max = v.parse().map_err(|e| bad(format!("{e}")))?,
            "threshold_mode" => params.threshold_mode = v.parse().map_err(bad)?,
            _ => return Err(err(1, format!("unknown header field {k:?}"))),
        }
    }
    let mut queries = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let weight: f64 = parts
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e| err(n, format!("bad weight: {e}")))?;
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(err(n, format!("weight must be positive, got {weight}")));
        }
        let terms: Vec<String> = parts.map(str::to_owned).collect();
        if terms.is_empty() || terms.len() > 2 || terms.iter().any(|t| t.is_empty()) {
            return Err(err(n, "expected one or two non-empty terms".into()));
        }
        queries.push(Query { terms, weight });
    }
    Ok(QuerySet {
        queries,
        source_corpus_id: source,
        params,
    })
}
