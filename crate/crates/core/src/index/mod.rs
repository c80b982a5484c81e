//! In-memory inverted index with BM25 top-k retrieval.

mod snapshot;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;

pub use snapshot::{read_snapshot, write_snapshot, SnapshotError, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("document ordinal {ordinal} out of range (index holds {doc_count} documents)")]
    OrdinalOutOfRange { ordinal: u32, doc_count: usize },
    #[error("rank cutoff must be at least 1")]
    ZeroCutoff,
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TermStats {
    pub document_frequency: u64,
    pub collection_frequency: u64,
}

/// Immutable inverted index. Term ids follow lexicographic term order and
/// document ordinals follow ingestion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvertedIndex {
    terms: Vec<String>,
    term_ids: HashMap<String, u32>,
    postings: Vec<Vec<Posting>>,
    stats: Vec<TermStats>,
    doc_ids: Vec<String>,
    ordinals: HashMap<String, u32>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
    total_tokens: u64,
}

impl InvertedIndex {
    /// Indexes documents in order; ordinal `i` is the `i`-th document.
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Result<Self, IndexError> {
        let mut b = IndexBuilder::default();
        for d in docs {
            b.add(&d.id, &d.analyzed_terms())?;
        }
        Ok(b.finish())
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    pub fn doc_id(&self, ordinal: u32) -> Option<&str> {
        self.doc_ids.get(ordinal as usize).map(String::as_str)
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn ordinal(&self, doc_id: &str) -> Option<u32> {
        self.ordinals.get(doc_id).copied()
    }

    /// Terms in lexicographic order; position equals term id.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.term_ids.get(term).copied()
    }

    pub fn term_stats(&self, term: &str) -> Option<TermStats> {
        self.term_id(term).map(|id| self.stats[id as usize])
    }

    pub fn stats_by_id(&self, id: u32) -> TermStats {
        self.stats[id as usize]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        match self.term_id(term) {
            Some(id) => &self.postings[id as usize],
            None => &[],
        }
    }

    pub fn postings_by_id(&self, id: u32) -> &[Posting] {
        &self.postings[id as usize]
    }

    /// Assembles an index from already-validated parts.
    fn from_parts(
        doc_ids: Vec<String>,
        doc_lengths: Vec<u32>,
        terms: Vec<String>,
        postings: Vec<Vec<Posting>>,
    ) -> Self {
        let stats = postings
            .iter()
            .map(|p| TermStats {
                document_frequency: p.len() as u64,
                collection_frequency: p.iter().map(|x| x.tf as u64).sum(),
            })
            .collect();
        let total_tokens: u64 = doc_lengths.iter().map(|&l| l as u64).sum();
        let avg_doc_length = if doc_lengths.is_empty() {
            0.0
        } else {
            total_tokens as f64 / doc_lengths.len() as f64
        };
        Self {
            term_ids: terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect(),
            ordinals: doc_ids.iter().enumerate().map(|(i, d)| (d.clone(), i as u32)).collect(),
            terms,
            postings,
            stats,
            doc_ids,
            doc_lengths,
            avg_doc_length,
            total_tokens,
        }
    }
}

/// Incremental construction; documents must be added in ordinal order.
#[derive(Debug, Default)]
pub struct IndexBuilder {
    vocab: HashMap<String, u32>,
    terms: Vec<String>,
    postings: Vec<Vec<Posting>>,
    doc_ids: Vec<String>,
    seen: HashMap<String, u32>,
    doc_lengths: Vec<u32>,
}

impl IndexBuilder {
    pub fn add(&mut self, doc_id: &str, terms: &[impl AsRef<str>]) -> Result<u32, IndexError> {
        let ordinal = self.doc_ids.len() as u32;
        if self.seen.insert(doc_id.to_owned(), ordinal).is_some() {
            return Err(IndexError::DuplicateId(doc_id.to_owned()));
        }
        self.doc_ids.push(doc_id.to_owned());
        self.doc_lengths.push(terms.len() as u32);
        for t in terms {
            let t = t.as_ref();
            let id = match self.vocab.get(t) {
                Some(&id) => id,
                None => {
                    let id = self.terms.len() as u32;
                    self.vocab.insert(t.to_owned(), id);
                    self.terms.push(t.to_owned());
                    self.postings.push(Vec::new());
                    id
                }
            };
            let list = &mut self.postings[id as usize];
            match list.last_mut() {
                Some(p) if p.doc == ordinal => p.tf += 1,
                _ => list.push(Posting { doc: ordinal, tf: 1 }),
            }
        }
        Ok(ordinal)
    }

    pub fn finish(self) -> InvertedIndex {
        let mut order: Vec<u32> = (0..self.terms.len() as u32).collect();
        order.sort_by(|&a, &b| self.terms[a as usize].cmp(&self.terms[b as usize]));
        let mut terms = self.terms;
        let mut postings = self.postings;
        let sorted_terms = order.iter().map(|&i| std::mem::take(&mut terms[i as usize])).collect();
        let sorted_postings = order.iter().map(|&i| std::mem::take(&mut postings[i as usize])).collect();
        InvertedIndex::from_parts(self.doc_ids, self.doc_lengths, sorted_terms, sorted_postings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredDoc {
    pub doc: u32,
    pub score: f64,
}

/// Descending score, then ascending ordinal.
pub fn rank_order(a: &ScoredDoc, b: &ScoredDoc) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.doc.cmp(&b.doc))
}

/// Top-k result list, strictly ordered by [`rank_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub entries: Vec<ScoredDoc>,
    pub cutoff: usize,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn docs(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.doc)
    }
}

/// BM25 scorer over an index, with per-document length normalization
/// precomputed once.
#[derive(Debug, Clone)]
pub struct Bm25<'a> {
    index: &'a InvertedIndex,
    params: Bm25Params,
    norms: Vec<f64>,
}

/// Reusable per-worker accumulator for [`Bm25::retrieve_topk_with`].
#[derive(Debug, Default)]
pub struct Scratch {
    acc: Vec<f64>,
    touched: Vec<u32>,
    candidates: Vec<ScoredDoc>,
}

impl<'a> Bm25<'a> {
    pub fn new(index: &'a InvertedIndex, params: Bm25Params) -> Self {
        let avgdl = index.avg_doc_length;
        let norms = index
            .doc_lengths
            .iter()
            .map(|&dl| params.k1 * (1.0 - params.b + params.b * dl as f64 / avgdl))
            .collect();
        Self { index, params, norms }
    }

    pub fn index(&self) -> &'a InvertedIndex {
        self.index
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`
    pub fn idf(&self, document_frequency: u64) -> f64 {
        let n = self.index.doc_count() as f64;
        let df = document_frequency as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn term_weight(&self, idf: f64, tf: u32, doc: u32) -> f64 {
        let tf = tf as f64;
        idf * (tf * (self.params.k1 + 1.0)) / (tf + self.norms[doc as usize])
    }

    /// Maps query terms to term ids; unknown terms become `None`.
    pub fn resolve<S: AsRef<str>>(&self, query: &[S]) -> Vec<Option<u32>> {
        query.iter().map(|t| self.index.term_id(t.as_ref())).collect()
    }

    /// Bag-of-words BM25 score of one document. Terms missing from the index contribute 0.
    pub fn score<S: AsRef<str>>(&self, query: &[S], doc: u32) -> Result<f64, IndexError> {
        if doc as usize >= self.index.doc_count() {
            return Err(IndexError::OrdinalOutOfRange {
                ordinal: doc,
                doc_count: self.index.doc_count(),
            });
        }
        let mut sum = 0.0;
        for id in self.resolve(query).into_iter().flatten() {
            let list = &self.index.postings[id as usize];
            if let Ok(pos) = list.binary_search_by_key(&doc, |p| p.doc) {
                let idf = self.idf(self.index.stats[id as usize].document_frequency);
                sum += self.term_weight(idf, list[pos].tf, doc);
            }
        }
        Ok(sum)
    }

    pub fn retrieve_topk<S: AsRef<str>>(&self, query: &[S], k: usize) -> Result<RankedList, IndexError> {
        let ids = self.resolve(query);
        self.retrieve_topk_with(&mut Scratch::default(), &ids, k)
    }

    /// Term-at-a-time retrieval over resolved term ids. Per-document sums are
    /// accumulated in query-term order, so scores are bit-identical to [`Bm25::score`].
    pub fn retrieve_topk_with(
        &self,
        scratch: &mut Scratch,
        query: &[Option<u32>],
        k: usize,
    ) -> Result<RankedList, IndexError> {
        if k == 0 {
            return Err(IndexError::ZeroCutoff);
        }
        let n = self.index.doc_count();
        if scratch.acc.len() != n {
            scratch.acc.clear();
            scratch.acc.resize(n, 0.0);
        }
        for id in query.iter().flatten() {
            let idf = self.idf(self.index.stats[*id as usize].document_frequency);
            for p in &self.index.postings[*id as usize] {
                let slot = &mut scratch.acc[p.doc as usize];
                if *slot == 0.0 {
                    scratch.touched.push(p.doc);
                }
                *slot += self.term_weight(idf, p.tf, p.doc);
            }
        }
        scratch.candidates.clear();
        for &d in &scratch.touched {
            let score = std::mem::replace(&mut scratch.acc[d as usize], 0.0);
            if score > 0.0 {
                scratch.candidates.push(ScoredDoc { doc: d, score });
            }
        }
        scratch.touched.clear();

        let cands = &mut scratch.candidates;
        if cands.len() > k {
            cands.select_nth_unstable_by(k - 1, rank_order);
            cands.truncate(k);
        }
        cands.sort_unstable_by(rank_order);
        Ok(RankedList {
            entries: cands.clone(),
            cutoff: k,
        })
    }
}
