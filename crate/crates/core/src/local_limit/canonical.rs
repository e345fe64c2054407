use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::LabeledGraph;

use super::tree::BranchingTree;

/// Canonical code of a rooted ball: equal codes iff the balls are isomorphic
/// as rooted trees. Balls containing a cycle get a code starting with `C`,
/// which never equals a tree code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalBall {
    pub code: Vec<u8>,
    pub r: usize,
}

impl CanonicalBall {
    pub fn is_tree(&self) -> bool {
        self.code.first() == Some(&b'(')
    }
}

/// AHU code from child lists, given nodes in breadth-first order (node 0 is the root).
fn ahu(children: &[Vec<usize>]) -> Vec<u8> {
    let mut codes: Vec<Vec<u8>> = vec![Vec::new(); children.len()];
    for v in (0..children.len()).rev() {
        let mut kids: Vec<Vec<u8>> = children[v].iter().map(|&c| std::mem::take(&mut codes[c])).collect();
        kids.sort_unstable();
        let mut code = Vec::with_capacity(2 + kids.iter().map(Vec::len).sum::<usize>());
        code.push(b'(');
        for k in kids {
            code.extend_from_slice(&k);
        }
        code.push(b')');
        codes[v] = code;
    }
    std::mem::take(&mut codes[0])
}

fn cycle_code(vertices: usize, edges: usize) -> Vec<u8> {
    format!("C{vertices}:{edges}").into_bytes()
}

/// Canonical code of the radius-`r` ball around `root` in a graph given by
/// adjacency lists. The ball is the subgraph induced by vertices within
/// distance `r`.
pub fn canonicalize_adjacency(adj: &[Vec<usize>], root: usize, r: usize) -> CanonicalBall {
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut order = vec![root];
    let mut depth = vec![0usize];
    local.insert(root, 0);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        if depth[head] < r {
            for &u in &adj[v] {
                if !local.contains_key(&u) {
                    local.insert(u, order.len());
                    order.push(u);
                    depth.push(depth[head] + 1);
                }
            }
        }
        head += 1;
    }
    encode_ball(&order, &depth, r, |v| adj[v].iter().copied(), |u| local.get(&u).copied())
}

fn encode_ball<N, I>(
    order: &[usize],
    depth: &[usize],
    r: usize,
    neighbors: N,
    local: impl Fn(usize) -> Option<usize>,
) -> CanonicalBall
where
    N: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    let mut children = vec![Vec::new(); order.len()];
    let mut degree_sum = 0usize;
    for (i, &v) in order.iter().enumerate() {
        for u in neighbors(v) {
            if let Some(j) = local(u) {
                degree_sum += 1;
                if depth[j] == depth[i] + 1 {
                    children[i].push(j);
                }
            }
        }
    }
    let edges = degree_sum / 2;
    let code = if edges + 1 == order.len() {
        ahu(&children)
    } else {
        cycle_code(order.len(), edges)
    };
    CanonicalBall { code, r }
}

/// Canonical code of the radius-`r` ball around survivor rank `root`.
pub fn canonicalize_graph_ball(graph: &LabeledGraph, root: usize, r: usize) -> CanonicalBall {
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut order = vec![root];
    let mut depth = vec![0usize];
    local.insert(root, 0);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        if depth[head] < r {
            for &u in graph.neighbors(v) {
                let u = u as usize;
                if !local.contains_key(&u) {
                    local.insert(u, order.len());
                    order.push(u);
                    depth.push(depth[head] + 1);
                }
            }
        }
        head += 1;
    }
    encode_ball(
        &order,
        &depth,
        r,
        |v| graph.neighbors(v).iter().map(|&u| u as usize),
        |u| local.get(&u).copied(),
    )
}

/// Canonical code of the tree restricted to depth `r`.
pub fn canonicalize_tree(tree: &BranchingTree, r: usize) -> CanonicalBall {
    // Nodes are stored breadth-first, so the depth-r prefix is contiguous.
    let keep = tree.nodes.partition_point(|v| (v.depth as usize) <= r);
    let children: Vec<Vec<usize>> = tree.nodes[..keep]
        .iter()
        .map(|v| {
            v.children
                .iter()
                .map(|&c| c as usize)
                .filter(|&c| c < keep)
                .collect()
        })
        .collect();
    CanonicalBall {
        code: ahu(&children),
        r,
    }
}
