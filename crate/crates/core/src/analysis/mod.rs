//! Graph statistics: components, pruning, typical distances, degree extremes
//! and conditional concentration.

mod components;
mod degrees;
mod distance;
mod resample;

pub use components::{components, components_dfs, prune, ComponentReport, UnionFind};
pub use degrees::{lambert_w0, max_degree_report, predict_max_degree, DegreeKind, LambertPredictor, MaxDegreeReport};
pub use distance::{typical_distance, zeta_estimates, DistanceReport, ZetaEstimates};
pub use resample::{
    concentration_experiment, concentration_on, conditional_resample, edge_count_in_label_range,
    greedy_matching_size, triangle_count_capped, ConcentrationReport, Statistic, TailRow,
    TRIANGLE_DEGREE_CAP,
};
