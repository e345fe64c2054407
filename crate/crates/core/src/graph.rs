//! Vertex-labelled graphs with edges directed from later to earlier births.
//!
//! Vertices are stored by survivor rank (index into the sorted label list), so
//! "earlier birth" and "smaller rank" coincide. Adjacency is a CSR array of
//! undirected neighbour ranks, sorted within each row.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub params: ModelParams,
    pub n: usize,
    pub seed: u64,
    labels: Vec<u32>,
    offsets: Vec<usize>,
    adj: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    params: ModelParams,
    n: usize,
    seed: u64,
    vertices: usize,
    edges: usize,
    labels: Vec<u32>,
}

impl LabeledGraph {
    /// Builds a graph from edges given as `(later_rank, earlier_rank)` pairs.
    /// Panics on self-loops or out-of-range ranks; duplicates are rejected in
    /// debug builds.
    pub(crate) fn from_rank_edges(
        params: ModelParams,
        n: usize,
        seed: u64,
        labels: Vec<u32>,
        edges: &[(u32, u32)],
    ) -> Self {
        let v = labels.len();
        let mut deg = vec![0usize; v + 1];
        for &(a, b) in edges {
            assert!(a != b && (a as usize) < v && (b as usize) < v);
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = vec![0usize; v + 1];
        for i in 0..v {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![0u32; offsets[v]];
        for &(a, b) in edges {
            adj[fill[a as usize]] = b;
            fill[a as usize] += 1;
            adj[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for i in 0..v {
            let row = &mut adj[offsets[i]..offsets[i + 1]];
            row.sort_unstable();
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]), "parallel edge");
        }
        Self {
            params,
            n,
            seed,
            labels,
            offsets,
            adj,
        }
    }

    /// Builds a graph from labelled edges `(from, to)`, checking every invariant.
    pub fn from_label_edges(
        params: ModelParams,
        n: usize,
        seed: u64,
        mut labels: Vec<u32>,
        edges: &[(u32, u32)],
    ) -> Result<Self> {
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Malformed("duplicate vertex label".into()));
        }
        if labels.last().is_some_and(|&l| l as usize > n) || labels.first() == Some(&0) {
            return Err(Error::Malformed("vertex label outside 1..=n".into()));
        }
        let rank = |l: u32| {
            labels
                .binary_search(&l)
                .map(|r| r as u32)
                .map_err(|_| Error::Malformed(format!("edge endpoint {l} is not a vertex")))
        };
        let mut rank_edges = Vec::with_capacity(edges.len());
        for &(from, to) in edges {
            if from <= to {
                return Err(Error::Malformed(format!(
                    "edge {from} -> {to} does not point to an earlier label"
                )));
            }
            rank_edges.push((rank(from)?, rank(to)?));
        }
        let mut sorted = rank_edges.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Malformed("parallel edge".into()));
        }
        Ok(Self::from_rank_edges(params, n, seed, labels, &rank_edges))
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.len() / 2
    }

    /// Birth labels in increasing order; index = rank.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, rank: usize) -> u32 {
        self.labels[rank]
    }

    pub fn rank_of(&self, label: u32) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    /// Neighbour ranks, increasing.
    pub fn neighbors(&self, rank: usize) -> &[u32] {
        &self.adj[self.offsets[rank]..self.offsets[rank + 1]]
    }

    /// Total degree `d^s`.
    pub fn degree(&self, rank: usize) -> usize {
        self.offsets[rank + 1] - self.offsets[rank]
    }

    /// Out-degree `d^-`: edges to earlier-born vertices.
    pub fn out_degree(&self, rank: usize) -> usize {
        self.neighbors(rank).partition_point(|&u| (u as usize) < rank)
    }

    /// In-degree `d^+`: edges from later-born vertices.
    pub fn in_degree(&self, rank: usize) -> usize {
        self.degree(rank) - self.out_degree(rank)
    }

    /// Edges as `(later_rank, earlier_rank)`, ordered by later rank then earlier rank.
    pub fn rank_edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertex_count()).flat_map(move |r| {
            let out = self.out_degree(r);
            self.neighbors(r)[..out].iter().map(move |&u| (r as u32, u))
        })
    }

    /// Edges as `(from_label, to_label)` with `from_label > to_label`.
    pub fn label_edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rank_edges()
            .map(|(a, b)| (self.labels[a as usize], self.labels[b as usize]))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// Whether every edge of `self` is an edge of `other` (same vertex set assumed).
    pub fn is_edge_subset_of(&self, other: &LabeledGraph) -> bool {
        self.labels == other.labels && self.rank_edges().all(|(a, b)| other.has_edge(a as usize, b as usize))
    }

    /// Induced subgraph on the vertices whose rank satisfies `keep`.
    pub fn induced(&self, mut keep: impl FnMut(usize) -> bool) -> LabeledGraph {
        let mut new_rank = vec![u32::MAX; self.vertex_count()];
        let mut labels = Vec::new();
        for (r, slot) in new_rank.iter_mut().enumerate() {
            if keep(r) {
                *slot = labels.len() as u32;
                labels.push(self.labels[r]);
            }
        }
        let edges: Vec<(u32, u32)> = self
            .rank_edges()
            .filter_map(|(a, b)| {
                let (na, nb) = (new_rank[a as usize], new_rank[b as usize]);
                (na != u32::MAX && nb != u32::MAX).then_some((na, nb))
            })
            .collect();
        LabeledGraph::from_rank_edges(self.params, self.n, self.seed, labels, &edges)
    }

    /// Writes a `# {json header}` line followed by one `from<TAB>to` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            params: self.params,
            n: self.n,
            seed: self.seed,
            vertices: self.vertex_count(),
            edges: self.edge_count(),
            labels: self.labels.clone(),
        };
        writeln!(w, "# {}", serde_json::to_string(&header)?)?;
        for (from, to) in self.label_edges() {
            writeln!(w, "{from}\t{to}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Malformed("empty input".into()))??;
        let json = first
            .strip_prefix("# ")
            .ok_or_else(|| Error::Malformed("missing header line".into()))?;
        let header: Header = serde_json::from_str(json)?;
        let mut edges = Vec::with_capacity(header.edges);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let mut field = || -> Result<u32> {
                parts
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Malformed(format!("bad edge line `{line}`")))
            };
            let from = field()?;
            let to = field()?;
            edges.push((from, to));
        }
        if edges.len() != header.edges || header.labels.len() != header.vertices {
            return Err(Error::Malformed("header counts do not match body".into()));
        }
        Self::from_label_edges(header.params, header.n, header.seed, header.labels, &edges)
    }
}
