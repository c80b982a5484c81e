//! Cumulative retrievability: `r(d) = sum_q o_q * f(k_dq, c)` with
//! `f = 1` when d ranks within the top c for q.
//!
//! Queries are processed in fixed-size blocks on a worker pool. Each block
//! records its hits in query order and blocks are folded into the tally in
//! block order, so every document's sum is accumulated in query order no
//! matter how many workers run. A run can be checkpointed and resumed at any
//! query boundary.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{Bm25, Scratch};
use crate::querygen::Query;
use crate::scores::{ScoreKind, ScoreParams, ScoreVector};

/// Cumulative utility: 1 iff `rank <= cutoff` (ranks are 1-based).
pub fn utility(rank: usize, cutoff: usize) -> u32 {
    u32::from(rank <= cutoff)
}

#[derive(Debug, Error, PartialEq)]
pub enum RetrievabilityError {
    #[error("rank cutoff must be at least 1")]
    ZeroCutoff,
    #[error("query {0} has a non-positive weight")]
    BadWeight(usize),
    #[error("checkpoint does not match this run: {0}")]
    CheckpointMismatch(String),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

/// Accumulated state after the first `next_query` queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub next_query: usize,
    pub values: Vec<f64>,
    /// Queries that retrieved nothing (all terms absent or unmatched).
    pub zero_match_queries: usize,
    /// Queries with at least one term missing from the vocabulary.
    pub unknown_term_queries: usize,
}

impl Tally {
    pub fn new(doc_count: usize) -> Self {
        Self {
            next_query: 0,
            values: vec![0.0; doc_count],
            zero_match_queries: 0,
            unknown_term_queries: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievabilityResult {
    pub scores: ScoreVector,
    pub zero_match_queries: usize,
    pub unknown_term_queries: usize,
}

/// Configurable retrievability computation over one query list.
pub struct Retrievability<'a> {
    bm25: &'a Bm25<'a>,
    queries: &'a [Query],
    cutoff: usize,
    workers: usize,
    block_size: usize,
    checkpoint_every: usize,
}

impl<'a> Retrievability<'a> {
    pub fn new(bm25: &'a Bm25<'a>, queries: &'a [Query], cutoff: usize) -> Self {
        Self {
            bm25,
            queries,
            cutoff,
            workers: 0,
            block_size: 256,
            checkpoint_every: 0,
        }
    }

    /// Worker threads; 0 uses the global pool.
    pub fn workers(mut self, n: usize) -> Self {
        self.workers = n;
        self
    }

    pub fn block_size(mut self, n: usize) -> Self {
        self.block_size = n.max(1);
        self
    }

    /// Invoke the checkpoint callback every `n` queries; 0 disables it.
    pub fn checkpoint_every(mut self, n: usize) -> Self {
        self.checkpoint_every = n;
        self
    }

    pub fn run(&self) -> Result<RetrievabilityResult, RetrievabilityError> {
        self.resume(Tally::new(self.bm25.index().doc_count()), |_| {})
    }

    /// Continues from `tally`, calling `on_checkpoint` at each checkpoint boundary.
    pub fn resume(
        &self,
        mut tally: Tally,
        mut on_checkpoint: impl FnMut(&Tally),
    ) -> Result<RetrievabilityResult, RetrievabilityError> {
        if self.cutoff == 0 {
            return Err(RetrievabilityError::ZeroCutoff);
        }
        if let Some(i) = self.queries.iter().position(|q| q.weight.is_nan() || q.weight <= 0.0) {
            return Err(RetrievabilityError::BadWeight(i));
        }
        if tally.values.len() != self.bm25.index().doc_count() || tally.next_query > self.queries.len() {
            return Err(RetrievabilityError::CheckpointMismatch(format!(
                "tally covers {} documents / {} queries, run has {} / {}",
                tally.values.len(),
                tally.next_query,
                self.bm25.index().doc_count(),
                self.queries.len()
            )));
        }
        let pool = match self.workers {
            0 => None,
            n => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| RetrievabilityError::Pool(e.to_string()))?,
            ),
        };
        let threads = pool.as_ref().map_or_else(rayon::current_num_threads, |p| p.current_num_threads());
        let group = self.block_size * threads.max(1) * 4;

        while tally.next_query < self.queries.len() {
            let start = tally.next_query;
            let mut end = (start + group).min(self.queries.len());
            if let Some(done) = start.checked_div(self.checkpoint_every) {
                end = end.min((done + 1) * self.checkpoint_every);
            }
            let slice = &self.queries[start..end];
            let work = || {
                slice
                    .par_chunks(self.block_size)
                    .map_init(Scratch::default, |scratch, block| self.run_block(scratch, block))
                    .collect::<Vec<_>>()
            };
            let blocks = match &pool {
                Some(p) => p.install(work),
                None => work(),
            };
            for b in blocks {
                for (doc, w) in b.hits {
                    tally.values[doc as usize] += w;
                }
                tally.zero_match_queries += b.zero_match;
                tally.unknown_term_queries += b.unknown_terms;
            }
            tally.next_query = end;
            if self.checkpoint_every > 0 && end % self.checkpoint_every == 0 && end < self.queries.len() {
                on_checkpoint(&tally);
            }
        }

        Ok(RetrievabilityResult {
            scores: ScoreVector {
                values: tally.values,
                kind: ScoreKind::Retrievability,
                params: ScoreParams::Retrievability {
                    cutoff: self.cutoff,
                    query_count: self.queries.len(),
                },
            },
            zero_match_queries: tally.zero_match_queries,
            unknown_term_queries: tally.unknown_term_queries,
        })
    }

    fn run_block(&self, scratch: &mut Scratch, block: &[Query]) -> BlockHits {
        let mut out = BlockHits::default();
        for q in block {
            let ids = self.bm25.resolve(&q.terms);
            if ids.iter().any(Option::is_none) {
                out.unknown_terms += 1;
            }
            let ranked = self
                .bm25
                .retrieve_topk_with(scratch, &ids, self.cutoff)
                .expect("cutoff validated");
            if ranked.is_empty() {
                out.zero_match += 1;
            }
            for (i, e) in ranked.entries.iter().enumerate() {
                if utility(i + 1, self.cutoff) == 1 {
                    out.hits.push((e.doc, q.weight));
                }
            }
        }
        out
    }
}

#[derive(Default)]
struct BlockHits {
    hits: Vec<(u32, f64)>,
    zero_match: usize,
    unknown_terms: usize,
}

/// Retrievability with default worker settings.
pub fn compute_retrievability(
    bm25: &Bm25<'_>,
    queries: &[Query],
    cutoff: usize,
) -> Result<RetrievabilityResult, RetrievabilityError> {
    Retrievability::new(bm25, queries, cutoff).run()
}
