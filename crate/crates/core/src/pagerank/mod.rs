//! PageRank over the intra-corpus link graph, in the non-normalized form
//! `PR(A) = (1 - d) + d * sum_{T -> A} PR(T) / C(T)` where scores average 1.
//!
//! Dangling nodes spread their score uniformly over all nodes, which keeps
//! `sum PR = node_count` at every iteration. Each node's incoming
//! contributions are summed in ascending source order, so results do not
//! depend on the worker count.

mod graph;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scores::{ScoreKind, ScoreParams, ScoreVector};

pub use graph::{build_graph, read_edge_list, write_edge_list, GraphBuildStats, LinkGraph};

#[derive(Debug, Error, PartialEq)]
pub enum PageRankError {
    #[error("damping factor must lie in (0, 1), got {0}")]
    BadDamping(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

impl PageRankParams {
    pub fn validate(&self) -> Result<(), PageRankError> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(PageRankError::BadDamping(self.damping));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(PageRankError::BadTolerance(self.tolerance));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    pub scores: ScoreVector,
    pub iterations: usize,
    /// L1 change of the last update.
    pub residual: f64,
    /// False when `max_iterations` was reached first.
    pub converged: bool,
}

/// One synchronous update from `prev` into `next`; returns the L1 change.
pub fn pagerank_step(graph: &LinkGraph, damping: f64, prev: &[f64], next: &mut [f64]) -> f64 {
    let n = graph.node_count();
    let mut dangling = 0.0;
    for v in 0..n as u32 {
        if graph.out_degree(v) == 0 {
            dangling += prev[v as usize];
        }
    }
    let spread = dangling / n as f64;
    let share: Vec<f64> = (0..n as u32)
        .into_par_iter()
        .map(|v| match graph.out_degree(v) {
            0 => 0.0,
            c => prev[v as usize] / c as f64,
        })
        .collect();
    next.par_iter_mut().enumerate().for_each(|(a, out)| {
        let mut votes = 0.0;
        for &t in graph.in_edges(a as u32) {
            votes += share[t as usize];
        }
        *out = (1.0 - damping) + damping * (votes + spread);
    });
    prev.iter().zip(next.iter()).map(|(p, q)| (p - q).abs()).sum()
}

pub fn compute_pagerank(graph: &LinkGraph, params: &PageRankParams) -> Result<PageRankResult, PageRankError> {
    compute_pagerank_with(graph, params, 0, |_, _| {})
}

/// Runs the iteration from `PR = 1` everywhere. `observe(iteration, vector)`
/// sees the vector after every update; `workers = 0` uses the global pool.
pub fn compute_pagerank_with(
    graph: &LinkGraph,
    params: &PageRankParams,
    workers: usize,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<PageRankResult, PageRankError> {
    params.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(PageRankError::EmptyGraph);
    }
    let pool = match workers {
        0 => None,
        w => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| PageRankError::Pool(e.to_string()))?,
        ),
    };
    let mut prev = vec![1.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < params.max_iterations {
        residual = match &pool {
            Some(p) => p.install(|| pagerank_step(graph, params.damping, &prev, &mut next)),
            None => pagerank_step(graph, params.damping, &prev, &mut next),
        };
        iterations += 1;
        std::mem::swap(&mut prev, &mut next);
        observe(iterations, &prev);
        if residual < params.tolerance {
            break;
        }
    }
    let converged = residual < params.tolerance;
    if !converged {
        log::warn!(
            "pagerank did not converge: residual {residual:e} after {iterations} iterations (tolerance {:e})",
            params.tolerance
        );
    }
    Ok(PageRankResult {
        scores: ScoreVector {
            values: prev,
            kind: ScoreKind::Pagerank,
            params: ScoreParams::Pagerank {
                damping: params.damping,
                tolerance: params.tolerance,
                max_iterations: params.max_iterations,
            },
        },
        iterations,
        residual,
        converged,
    })
}
