//! Seeded fixtures shared by the benchmarks.

use accessrank::corpus::Document;
use accessrank::index::InvertedIndex;
use accessrank::pagerank::{build_graph, LinkGraph};
use accessrank::querygen::{generate_query_set, Query, QueryGenParams};
use accessrank::synth::{self, SynthParams};

pub struct Fixture {
    pub docs: Vec<Document>,
    pub index: InvertedIndex,
    pub queries: Vec<Query>,
    pub graph: LinkGraph,
}

/// Synthetic corpus of `docs` documents with its index, query set and link graph.
pub fn fixture(docs: usize) -> Fixture {
    let docs = synth::generate(&SynthParams {
        docs,
        vocab: 10_000,
        seed: 7,
        ..Default::default()
    })
    .expect("valid synthetic parameters");
    let index = InvertedIndex::build(&docs).expect("unique ids");
    let queries = generate_query_set(&docs, &index, QueryGenParams::default(), "bench").queries;
    let (graph, _) = build_graph(&docs, index.doc_count(), |id| index.ordinal(id));
    Fixture {
        docs,
        index,
        queries,
        graph,
    }
}
