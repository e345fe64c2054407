use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::LabeledGraph;

/// Disjoint sets with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    /// Component sizes, largest first.
    pub sizes: Vec<usize>,
    pub c1: usize,
    pub c2: usize,
    pub vertices: usize,
    pub n: usize,
    /// `c1 / n`, with `n` the number of steps (not vertices).
    pub giant_fraction: f64,
}

impl ComponentReport {
    fn from_sizes(mut sizes: Vec<usize>, vertices: usize, n: usize) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let c1 = sizes.first().copied().unwrap_or(0);
        let c2 = sizes.get(1).copied().unwrap_or(0);
        Self {
            sizes,
            c1,
            c2,
            vertices,
            n,
            giant_fraction: if n == 0 { 0.0 } else { c1 as f64 / n as f64 },
        }
    }

    /// `c1 / |V_n|`.
    pub fn giant_share_of_vertices(&self) -> f64 {
        if self.vertices == 0 {
            0.0
        } else {
            self.c1 as f64 / self.vertices as f64
        }
    }
}

/// Connected components by union-find.
pub fn components(graph: &LabeledGraph) -> ComponentReport {
    let v = graph.vertex_count();
    let mut uf = UnionFind::new(v);
    for (a, b) in graph.rank_edges() {
        uf.union(a as usize, b as usize);
    }
    let mut sizes = Vec::new();
    for x in 0..v {
        if uf.find(x) == x {
            sizes.push(uf.set_size(x));
        }
    }
    ComponentReport::from_sizes(sizes, v, graph.n)
}

/// Component label per vertex (smallest rank in the component) by iterative
/// depth-first search; a reference implementation for checking [`components`].
pub fn components_dfs(graph: &LabeledGraph) -> Vec<usize> {
    let v = graph.vertex_count();
    let mut label = vec![usize::MAX; v];
    let mut stack = Vec::new();
    for s in 0..v {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = s;
        stack.push(s);
        while let Some(x) = stack.pop() {
            for &y in graph.neighbors(x) {
                let y = y as usize;
                if label[y] == usize::MAX {
                    label[y] = s;
                    stack.push(y);
                }
            }
        }
    }
    label
}

/// Induced subgraph on survivors born after step `lambda * n`.
pub fn prune(graph: &LabeledGraph, lambda: f64) -> Result<LabeledGraph> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid("lambda", format!("must lie in (0,1), got {lambda}")));
    }
    let cut = lambda * graph.n as f64;
    Ok(graph.induced(|r| graph.label(r) as f64 > cut))
}
