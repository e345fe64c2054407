use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::LabeledGraph;
use crate::params::ModelParams;
use crate::rng::{stream, Purpose};
use crate::spectral::operator_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub pairs: usize,
    pub connected: usize,
    pub disconnected_fraction: f64,
    /// Mean distance over connected pairs (NaN if none).
    pub mean_distance: f64,
    /// `histogram[d]` = number of connected pairs at distance `d`.
    pub histogram: Vec<usize>,
}

/// Distances between `pairs` uniformly sampled vertex pairs, by breadth-first
/// search from the first vertex stopped at the second.
pub fn typical_distance(graph: &LabeledGraph, pairs: usize, seed: u64) -> Result<DistanceReport> {
    if pairs < 100 {
        return Err(invalid("pairs", format!("need at least 100 pairs, got {pairs}")));
    }
    let v = graph.vertex_count();
    if v == 0 {
        return Err(invalid("graph", "cannot sample pairs from an empty graph"));
    }
    let mut rng = stream(seed, Purpose::Sampling, 0);
    let mut stamp = vec![0u32; v];
    let mut dist = vec![0u32; v];
    let mut queue = Vec::with_capacity(v);
    let mut histogram = Vec::new();
    let mut connected = 0;
    let mut total = 0u64;
    for k in 0..pairs {
        let mark = k as u32 + 1;
        let (s, t) = (rng.random_range(0..v), rng.random_range(0..v));
        queue.clear();
        queue.push(s);
        stamp[s] = mark;
        dist[s] = 0;
        let mut found = (s == t).then_some(0u32);
        let mut head = 0;
        while found.is_none() && head < queue.len() {
            let x = queue[head];
            head += 1;
            for &y in graph.neighbors(x) {
                let y = y as usize;
                if stamp[y] != mark {
                    stamp[y] = mark;
                    dist[y] = dist[x] + 1;
                    if y == t {
                        found = Some(dist[y]);
                        break;
                    }
                    queue.push(y);
                }
            }
        }
        if let Some(d) = found {
            let d = d as usize;
            if histogram.len() <= d {
                histogram.resize(d + 1, 0);
            }
            histogram[d] += 1;
            connected += 1;
            total += d as u64;
        }
    }
    Ok(DistanceReport {
        pairs,
        connected,
        disconnected_fraction: (pairs - connected) as f64 / pairs as f64,
        mean_distance: if connected == 0 {
            f64::NAN
        } else {
            total as f64 / connected as f64
        },
        histogram,
    })
}

/// Two candidate constants for typical distances `zeta ln n`: `1/ln ||T||`
/// (the form for inhomogeneous random graphs) and `1/||T||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaEstimates {
    pub operator_norm: f64,
    pub zeta_log: f64,
    pub zeta_inverse: f64,
}

pub fn zeta_estimates(params: ModelParams, m: usize) -> Result<ZetaEstimates> {
    let norm = operator_norm(params, m)?;
    Ok(ZetaEstimates {
        operator_norm: norm,
        zeta_log: 1.0 / norm.ln(),
        zeta_inverse: 1.0 / norm,
    })
}
