use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::params::ModelParams;
use crate::rng::{stream, Purpose, StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// Type `a_v ∈ (0,1]`: the node's birth time as a fraction of the horizon.
    pub a: f64,
    pub parent: Option<u32>,
    pub depth: u32,
    /// Index of this node among its parent's children (children sorted by type).
    pub child_index: u32,
    pub children: Vec<u32>,
    /// Number of children with type below `a` (they come first).
    pub left_children: u32,
}

/// A realization of the birth-death branching tree, stored in breadth-first order.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingTree {
    pub nodes: Vec<TreeNode>,
    pub max_depth: usize,
    pub max_nodes: usize,
    /// The node cap was reached before the depth limit; the tree is incomplete.
    pub truncated: bool,
}

impl BranchingTree {
    pub fn root_type(&self) -> f64 {
        self.nodes[0].a
    }

    /// Ulam–Harris address `(u_1, ..., u_r)` of a node (the root is empty).
    pub fn address(&self, node: usize) -> Vec<u32> {
        let mut path = Vec::new();
        let mut v = node;
        while let Some(parent) = self.nodes[v].parent {
            path.push(self.nodes[v].child_index);
            v = parent as usize;
        }
        path.reverse();
        path
    }

    pub fn find(&self, address: &[u32]) -> Option<usize> {
        let mut v = 0usize;
        for &i in address {
            v = *self.nodes[v].children.get(i as usize)? as usize;
        }
        Some(v)
    }

    /// Type of the node at `address`.
    pub fn type_at(&self, address: &[u32]) -> Option<f64> {
        self.find(address).map(|v| self.nodes[v].a)
    }
}

/// Means of the L- and R-offspring counts of a node of type `a`.
pub fn offspring_means(params: ModelParams, a: f64) -> (f64, f64) {
    let beta = params.beta();
    if params.is_dubins() {
        return (beta, beta * (1.0 / a).ln());
    }
    let ac = a.powf(params.survival_exponent());
    (beta * ac, params.offspring_bound() * (1.0 - ac))
}

struct ChildSampler {
    params: ModelParams,
    c: f64,
    l_shape: f64,
}

impl ChildSampler {
    fn new(params: ModelParams) -> Self {
        Self {
            params,
            c: params.survival_exponent(),
            l_shape: params.kernel_exponent(),
        }
    }

    fn root(&self, rng: &mut StreamRng) -> f64 {
        let u: f64 = rng.random();
        // Beta(p/2eps, 1) by inversion; 1 - u keeps the type away from 0.
        (1.0 - u).powf(self.l_shape)
    }

    /// Appends the sorted child types of a node of type `a`; returns the L-count.
    fn children(&self, a: f64, rng: &mut StreamRng, out: &mut Vec<f64>) -> usize {
        out.clear();
        let (lm, rm) = offspring_means(self.params, a);
        let nl = poisson(lm, rng);
        let nr = poisson(rm, rng);
        for _ in 0..nl {
            let u: f64 = 1.0 - rng.random::<f64>();
            out.push(a * u.powf(self.l_shape));
        }
        for _ in 0..nr {
            let u: f64 = rng.random();
            let x = if self.params.is_dubins() {
                a.powf(1.0 - u)
            } else {
                let ac = a.powf(self.c);
                ((ac + u * (1.0 - ac)).ln() / self.c).exp()
            };
            out.push(x.min(1.0));
        }
        out.sort_unstable_by(f64::total_cmp);
        nl
    }
}

fn poisson(mean: f64, rng: &mut StreamRng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

/// Samples the tree breadth-first down to `max_depth`, stopping early if more
/// than `max_nodes` nodes would be created.
pub fn sample_tree(params: ModelParams, max_depth: usize, max_nodes: usize, seed: u64) -> BranchingTree {
    let mut rng = stream(seed, Purpose::Tree, 0);
    sample_tree_with(params, max_depth, max_nodes.max(1), &mut rng)
}

pub(crate) fn sample_tree_with(
    params: ModelParams,
    max_depth: usize,
    max_nodes: usize,
    rng: &mut StreamRng,
) -> BranchingTree {
    let sampler = ChildSampler::new(params);
    let mut nodes = vec![TreeNode {
        a: sampler.root(rng),
        parent: None,
        depth: 0,
        child_index: 0,
        children: Vec::new(),
        left_children: 0,
    }];
    let mut truncated = false;
    let mut types = Vec::new();
    let mut head = 0;
    while head < nodes.len() {
        let depth = nodes[head].depth;
        if depth as usize >= max_depth {
            head += 1;
            continue;
        }
        let left = sampler.children(nodes[head].a, rng, &mut types);
        if nodes.len() + types.len() > max_nodes {
            truncated = true;
            break;
        }
        let first = nodes.len() as u32;
        for (i, &a) in types.iter().enumerate() {
            nodes.push(TreeNode {
                a,
                parent: Some(head as u32),
                depth: depth + 1,
                child_index: i as u32,
                children: Vec::new(),
                left_children: 0,
            });
        }
        nodes[head].children = (first..first + types.len() as u32).collect();
        nodes[head].left_children = left as u32;
        head += 1;
    }
    BranchingTree {
        nodes,
        max_depth,
        max_nodes,
        truncated,
    }
}

/// Fraction of `trials` trees whose generation count reaches `max_nodes`
/// before dying out; only the node types are simulated.
pub fn survival_frequency(params: ModelParams, max_nodes: usize, trials: usize, seed: u64) -> f64 {
    use rayon::prelude::*;
    let sampler = ChildSampler::new(params);
    let survived = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = stream(seed, Purpose::Tree, t as u64);
            let mut queue = vec![sampler.root(&mut rng)];
            let mut made = 1usize;
            let mut types = Vec::new();
            while let Some(a) = queue.pop() {
                sampler.children(a, &mut rng, &mut types);
                made += types.len();
                if made >= max_nodes {
                    return true;
                }
                queue.extend_from_slice(&types);
            }
            false
        })
        .count();
    survived as f64 / trials as f64
}
