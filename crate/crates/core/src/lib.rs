//! Document accessibility measurement over linked corpora.
//!
//! Two views of how reachable each document is are computed and compared:
//! retrievability under BM25 for a simulated query universe, and PageRank
//! over the corpus link graph. Both score populations are summarized with
//! Gini coefficients and Lorenz curves and compared with Kendall's tau-b,
//! Spearman's rho and rank-biased overlap.
//!
//! ```
//! use accessrank::{analysis::analyze, bias::gini};
//!
//! let terms: Vec<String> = analyze("Cats running quickly").into_iter().map(|t| t.into_string()).collect();
//! assert_eq!(terms, ["cat", "run", "quickli"]);
//! assert_eq!(gini(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 0.25);
//! ```

pub mod analysis;
pub mod bias;
pub mod corpus;
pub mod correlation;
pub mod index;
pub mod pagerank;
pub mod querygen;
pub mod retrievability;
pub mod scores;
pub mod synth;

pub use analysis::{analyze, Token};
pub use bias::{gini, lorenz, BiasError, LorenzPoint, LorenzSeries};
pub use corpus::{load_corpus, Corpus, CorpusError, CorpusStats, Document};
pub use correlation::{correlate, kendall_tau, rbo, spearman_rho, CorrelationError, CorrelationReport, Ranking};
pub use index::{Bm25, Bm25Params, IndexError, InvertedIndex, RankedList, ScoredDoc};
pub use pagerank::{build_graph, compute_pagerank, LinkGraph, PageRankParams, PageRankResult};
pub use querygen::{generate_query_set, Query, QueryGenParams, QuerySet, ThresholdMode};
pub use retrievability::{compute_retrievability, utility, Retrievability, RetrievabilityResult};
pub use scores::{ScoreKind, ScoreParams, ScoreVector};
