use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::Document;

/// Deduplicated, self-loop-free directed graph in compressed adjacency form,
/// holding both directions. Neighbour lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkGraph {
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
}

/// Counters collected while resolving outlinks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphBuildStats {
    pub links_seen: u64,
    pub edges: u64,
    pub dropped_missing_target: u64,
    pub dropped_self_loops: u64,
    pub collapsed_duplicates: u64,
    pub unknown_sources: u64,
}

impl LinkGraph {
    /// Builds from raw `(src, dst)` pairs; duplicates and self-loops are discarded.
    pub fn from_edges(node_count: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut stats = GraphBuildStats::default();
        Self::from_edges_counted(node_count, edges, &mut stats)
    }

    fn from_edges_counted(
        node_count: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
        stats: &mut GraphBuildStats,
    ) -> Self {
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (s, t) in edges {
            assert!((s as usize) < node_count && (t as usize) < node_count, "edge out of range");
            if s == t {
                stats.dropped_self_loops += 1;
            } else {
                pairs.push((s, t));
            }
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        stats.collapsed_duplicates += (before - pairs.len()) as u64;
        stats.edges = pairs.len() as u64;

        let (out_offsets, out_targets) = csr(node_count, pairs.iter().copied());
        let mut rev: Vec<(u32, u32)> = pairs.iter().map(|&(s, t)| (t, s)).collect();
        rev.sort_unstable();
        let (in_offsets, in_sources) = csr(node_count, rev.into_iter());
        Self {
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        }
    }

    pub fn node_count(&self) -> usize {
        self.out_offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn out_edges(&self, node: u32) -> &[u32] {
        let n = node as usize;
        &self.out_targets[self.out_offsets[n]..self.out_offsets[n + 1]]
    }

    pub fn in_edges(&self, node: u32) -> &[u32] {
        let n = node as usize;
        &self.in_sources[self.in_offsets[n]..self.in_offsets[n + 1]]
    }

    pub fn out_degree(&self, node: u32) -> usize {
        let n = node as usize;
        self.out_offsets[n + 1] - self.out_offsets[n]
    }

    pub fn in_degree(&self, node: u32) -> usize {
        let n = node as usize;
        self.in_offsets[n + 1] - self.in_offsets[n]
    }

    /// All edges in ascending `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count() as u32).flat_map(move |s| self.out_edges(s).iter().map(move |&t| (s, t)))
    }

    /// Relabels nodes: node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[u32]) -> Self {
        assert_eq!(perm.len(), self.node_count());
        Self::from_edges(self.node_count(), self.edges().map(|(s, t)| (perm[s as usize], perm[t as usize])))
    }
}

fn csr(node_count: usize, sorted: impl Iterator<Item = (u32, u32)>) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; node_count + 1];
    let mut targets = Vec::new();
    for (s, t) in sorted {
        offsets[s as usize + 1] += 1;
        targets.push(t);
    }
    for i in 0..node_count {
        offsets[i + 1] += offsets[i];
    }
    (offsets, targets)
}

/// Resolves document outlinks through `ordinal_of`. Links to unknown ids are
/// dropped and counted, as are self-loops and repeated links.
pub fn build_graph<'a>(
    docs: impl IntoIterator<Item = &'a Document>,
    node_count: usize,
    ordinal_of: impl Fn(&str) -> Option<u32>,
) -> (LinkGraph, GraphBuildStats) {
    let mut stats = GraphBuildStats::default();
    let mut edges = Vec::new();
    for doc in docs {
        let Some(src) = ordinal_of(&doc.id) else {
            stats.unknown_sources += 1;
            continue;
        };
        for link in &doc.outlinks {
            stats.links_seen += 1;
            match ordinal_of(link) {
                Some(dst) => edges.push((src, dst)),
                None => stats.dropped_missing_target += 1,
            }
        }
    }
    let graph = LinkGraph::from_edges_counted(node_count, edges, &mut stats);
    (graph, stats)
}

/// Writes `src_id<TAB>dst_id` lines in ordinal order.
pub fn write_edge_list(graph: &LinkGraph, doc_ids: &[String], out: impl Write) -> io::Result<()> {
    let mut w = io::BufWriter::new(out);
    for (s, t) in graph.edges() {
        writeln!(w, "{}\t{}", doc_ids[s as usize], doc_ids[t as usize])?;
    }
    w.flush()
}

/// Reads an edge list written by [`write_edge_list`].
pub fn read_edge_list(
    input: impl BufRead,
    node_count: usize,
    ordinal_of: impl Fn(&str) -> Option<u32>,
) -> io::Result<LinkGraph> {
    let mut edges = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, format!("edge list line {}: {msg}", i + 1));
        let (s, t) = line.split_once('\t').ok_or_else(|| bad("expected src<TAB>dst"))?;
        let s = ordinal_of(s).ok_or_else(|| bad("unknown source id"))?;
        let t = ordinal_of(t).ok_or_else(|| bad("unknown target id"))?;
        edges.push((s, t));
    }
    Ok(LinkGraph::from_edges(node_count, edges))
}
