//! Simulation and numerics for the dynamic random graph with vertex removal:
//! at every step a vertex is born with probability `p = 1/2 + eps` and links to
//! each alive vertex with probability `min{beta/|V|, 1}`, otherwise a uniformly
//! chosen alive vertex is deleted.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod graph_models;
pub mod local_limit;
pub mod params;
pub mod rng;
pub mod spectral;
pub mod vertex_process;

pub use error::{Error, Result};
pub use graph::LabeledGraph;
pub use params::ModelParams;
