//! The local weak limit: the birth-death branching tree, the limiting degree
//! law, canonical codes for rooted balls and total-variation estimates between
//! graph and tree neighbourhoods.

mod canonical;
mod mixture;
mod tree;
mod tv;

pub use canonical::{canonicalize_adjacency, canonicalize_graph_ball, canonicalize_tree, CanonicalBall};
pub use mixture::{
    degree_mixture_mean, degree_mixture_pmf, degree_mixture_table, sample_degree_mixture,
    sample_degree_mixture_many,
};
pub use tree::{offspring_means, sample_tree, survival_frequency, BranchingTree, TreeNode};
pub use tv::{compare_code_samples, estimate_tv, TvEstimate, TvOptions};
