//! Immutable undirected simple graphs in compressed adjacency form, plus the
//! subgraph constructions the pipeline needs (induced, edge-sampled).

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Undirected simple graph with dense vertex ids `0..n` and dense edge ids
/// `0..m`. Edges are stored with `u < v`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    /// `(neighbor, edge)` pairs, sorted by neighbor within each vertex.
    adj: Vec<(u32, u32)>,
    edges: Vec<(u32, u32)>,
    labels: Option<Vec<u64>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unique(n, Vec::new())
    }

    /// Build a graph from arbitrary pairs. Duplicates (in either orientation)
    /// collapse to one edge; self-loops and out-of-range endpoints are errors.
    pub fn from_edges<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut normalized = Vec::new();
        for (u, v) in pairs {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::Config(format!("self-loop on vertex {u}")));
            }
            normalized.push((u.min(v) as u32, u.max(v) as u32));
        }
        Ok(Self::from_normalized(n, normalized))
    }

    /// Pairs must satisfy `u < v < n`; duplicates are removed.
    pub(crate) fn from_normalized(n: usize, pairs: Vec<(u32, u32)>) -> Self {
        assert!(n <= u32::MAX as usize, "vertex count exceeds u32 range");
        // Bucket by the smaller endpoint, then sort and dedup each bucket.
        let mut start = vec![0usize; n + 1];
        for &(u, _) in &pairs {
            start[u as usize + 1] += 1;
        }
        for i in 0..n {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut bucket = vec![0u32; pairs.len()];
        for &(u, v) in &pairs {
            bucket[fill[u as usize]] = v;
            fill[u as usize] += 1;
        }
        drop(pairs);
        drop(fill);
        let mut edges = Vec::with_capacity(bucket.len());
        for u in 0..n {
            let slot = &mut bucket[start[u]..start[u + 1]];
            slot.sort_unstable();
            let mut last = None;
            for &v in slot.iter() {
                if last != Some(v) {
                    edges.push((u as u32, v));
                    last = Some(v);
                }
            }
        }
        drop(bucket);
        Self::from_sorted_unique(n, edges)
    }

    /// `edges` must be strictly lexicographically increasing with `u < v < n`.
    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<(u32, u32)>) -> Self {
        assert!(edges.len() <= u32::MAX as usize, "edge count exceeds u32 range");
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|&(u, v)| u < v && (v as usize) < n));
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in &edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0u32, 0u32); 2 * edges.len()];
        // Lexicographic edge order makes each adjacency list come out sorted:
        // smaller neighbors arrive first (as the `v` side), then larger ones.
        for (e, &(u, v)) in edges.iter().enumerate() {
            adj[fill[u as usize]] = (v, e as u32);
            fill[u as usize] += 1;
            adj[fill[v as usize]] = (u, e as u32);
            fill[v as usize] += 1;
        }
        Graph {
            offsets,
            adj,
            edges,
            labels: None,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Raw `(neighbor, edge)` slice for `v`, sorted by neighbor.
    #[inline]
    pub fn adjacency(&self, v: usize) -> &[(u32, u32)] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbor, edge-id)` pairs of `v`.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency(v).iter().map(|&(w, e)| (w as usize, e as usize))
    }

    #[inline]
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let (u, v) = self.edges[e];
        (u as usize, v as usize)
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let adj = self.adjacency(u);
        adj.binary_search_by_key(&(v as u32), |&(w, _)| w)
            .ok()
            .map(|i| adj[i].1 as usize)
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    pub fn check_edge(&self, e: usize) -> Result<()> {
        if e < self.m() {
            Ok(())
        } else {
            Err(Error::UnknownEdge { edge: e, m: self.m() })
        }
    }

    /// Original vertex labels, present for graphs read from text.
    pub fn labels(&self) -> Option<&[u64]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels.as_ref().map_or(v as u64, |l| l[v])
    }

    pub fn with_labels(mut self, labels: Vec<u64>) -> Self {
        assert_eq!(labels.len(), self.n());
        self.labels = Some(labels);
        self
    }

    /// Serialize as an edge list using original labels where known.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.m() * 12 + 32);
        let _ = writeln!(out, "# n={} m={}", self.n(), self.m());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {}", self.label(u), self.label(v));
        }
        out
    }

    /// Number of unordered pairs of distinct edges that share an endpoint.
    pub fn intersecting_pair_count(&self) -> u64 {
        (0..self.n())
            .map(|v| {
                let d = self.degree(v) as u64;
                d * d.saturating_sub(1) / 2
            })
            .sum()
    }

    /// Keep the edges whose ids are listed in ascending order, on the same
    /// vertex set.
    pub fn edge_subgraph(&self, sorted_ids: &[usize]) -> Subgraph {
        debug_assert!(sorted_ids.windows(2).all(|w| w[0] < w[1]));
        let edges = sorted_ids.iter().map(|&e| self.edges[e]).collect();
        Subgraph {
            graph: Graph::from_sorted_unique(self.n(), edges),
            vertex_map: (0..self.n() as u32).collect(),
            edge_map: sorted_ids.iter().map(|&e| e as u32).collect(),
        }
    }

    /// `G[S]`. Local vertex ids follow ascending parent ids.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Subgraph> {
        let mut mask = vec![false; self.n()];
        for &v in vertices {
            self.check_vertex(v)?;
            mask[v] = true;
        }
        Ok(self.induced_by_mask(&mask))
    }

    pub fn induced_by_mask(&self, keep: &[bool]) -> Subgraph {
        assert_eq!(keep.len(), self.n());
        let mut local = vec![u32::MAX; self.n()];
        let mut vertex_map = Vec::new();
        for (v, &k) in keep.iter().enumerate() {
            if k {
                local[v] = vertex_map.len() as u32;
                vertex_map.push(v as u32);
            }
        }
        let mut edges = Vec::new();
        let mut edge_map = Vec::new();
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if keep[u as usize] && keep[v as usize] {
                edges.push((local[u as usize], local[v as usize]));
                edge_map.push(e as u32);
            }
        }
        Subgraph {
            graph: Graph::from_sorted_unique(vertex_map.len(), edges),
            vertex_map,
            edge_map,
        }
    }

    /// Independent Bernoulli(`p`) edge sample on the same vertex set.
    pub fn edge_sample(&self, p: f64, seed: u64) -> Result<Subgraph> {
        let ids = sample_indices(self.m(), p, seed)?;
        Ok(self.edge_subgraph(&ids))
    }
}

/// Ascending indices in `0..len`, each kept independently with probability
/// `p`, drawn by geometric skipping so the cost is proportional to the output.
pub fn sample_indices(len: usize, p: f64, seed: u64) -> Result<Vec<usize>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if p == 1.0 {
        return Ok((0..len).collect());
    }
    let mut rng = seed::rng(seed);
    let log_q = (-p).ln_1p();
    let mut out = Vec::with_capacity(((len as f64) * p * 1.1) as usize + 8);
    let mut i = 0usize;
    while i < len {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        let skip = (u.ln() / log_q).floor();
        if skip >= (len - i) as f64 {
            break;
        }
        i += skip as usize;
        out.push(i);
        i += 1;
    }
    Ok(out)
}

/// A graph derived from a parent, with local-to-parent id maps.
#[derive(Clone, Debug)]
pub struct Subgraph {
    pub graph: Graph,
    pub vertex_map: Vec<u32>,
    pub edge_map: Vec<u32>,
}

impl Subgraph {
    pub fn identity(graph: Graph) -> Self {
        Subgraph {
            vertex_map: (0..graph.n() as u32).collect(),
            edge_map: (0..graph.m() as u32).collect(),
            graph,
        }
    }

    #[inline]
    pub fn parent_vertex(&self, v: usize) -> usize {
        self.vertex_map[v] as usize
    }

    #[inline]
    pub fn parent_edge(&self, e: usize) -> usize {
        self.edge_map[e] as usize
    }

    /// Re-express a subgraph of `self.graph` relative to `self`'s parent.
    pub fn compose(&self, child: Subgraph) -> Subgraph {
        Subgraph {
            vertex_map: child.vertex_map.iter().map(|&v| self.vertex_map[v as usize]).collect(),
            edge_map: child.edge_map.iter().map(|&e| self.edge_map[e as usize]).collect(),
            graph: child.graph,
        }
    }
}

/// Parse a whitespace-separated edge list. `#` starts a comment; blank lines
/// are skipped; duplicate edges collapse. Vertex labels are compacted to
/// `0..n` in ascending label order and retained on the graph.
pub fn load_graph(source: &str) -> Result<Graph> {
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let mut next = |what: &str| -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("missing {what} endpoint"),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid vertex id {tok:?}"),
            })
        };
        let u = next("first")?;
        let v = next("second")?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("unexpected token {extra:?}"),
            });
        }
        if u == v {
            return Err(Error::SelfLoop {
                line: lineno,
                vertex: u,
            });
        }
        raw.push((u, v));
    }
    let mut labels: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() > u32::MAX as usize {
        return Err(Error::TooLarge(format!("{} vertices", labels.len())));
    }
    let index: HashMap<u64, u32> = labels.iter().enumerate().map(|(i, &l)| (l, i as u32)).collect();
    let pairs = raw
        .into_iter()
        .map(|(u, v)| {
            let (a, b) = (index[&u], index[&v]);
            (a.min(b), a.max(b))
        })
        .collect();
    Ok(Graph::from_normalized(labels.len(), pairs).with_labels(labels))
}
