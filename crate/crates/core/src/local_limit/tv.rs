use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph_models::generate_drgvr;
use crate::params::ModelParams;
use crate::rng::{derive_seed, stream, Purpose};

use super::canonical::{canonicalize_graph_ball, canonicalize_tree, CanonicalBall};
use super::tree::sample_tree_with;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    /// Plug-in distance `(1/2) Σ |p̂ - q̂|` over observed codes.
    pub tv: f64,
    /// Half the width of `[ci_low, ci_high]`.
    pub ci_halfwidth: f64,
    /// Confidence interval for the true distance. The lower limit subtracts
    /// the permutation-null quantile of the plug-in distance (its bias at zero
    /// distance); the upper limit is the bootstrap percentile.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean plug-in distance between random splits of the pooled sample.
    pub bias_estimate: f64,
    pub samples_graph: usize,
    pub samples_tree: usize,
    pub support_size: usize,
    /// Graph balls that contained a cycle.
    pub cycle_fraction: f64,
    pub discarded_trees: usize,
    pub discard_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvOptions {
    pub bootstrap: usize,
    pub confidence: f64,
    /// Node cap per tree; trees hitting it are discarded.
    pub max_nodes: usize,
}

impl Default for TvOptions {
    fn default() -> Self {
        Self {
            bootstrap: 400,
            confidence: 0.95,
            max_nodes: 100_000,
        }
    }
}

fn plug_in(counts_a: &[u32], counts_b: &[u32], ma: f64, mb: f64) -> f64 {
    0.5 * counts_a
        .iter()
        .zip(counts_b)
        .map(|(&a, &b)| (a as f64 / ma - b as f64 / mb).abs())
        .sum::<f64>()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Plug-in total variation between two samples of canonical codes, with a
/// bootstrap confidence interval.
pub fn compare_code_samples(
    a: &[CanonicalBall],
    b: &[CanonicalBall],
    opts: &TvOptions,
    seed: u64,
) -> TvEstimate {
    let mut ids: HashMap<&[u8], usize> = HashMap::new();
    let mut ia = Vec::with_capacity(a.len());
    let mut ib = Vec::with_capacity(b.len());
    for (src, dst) in [(a, &mut ia), (b, &mut ib)] {
        for c in src {
            let next = ids.len();
            dst.push(*ids.entry(c.code.as_slice()).or_insert(next));
        }
    }
    let support = ids.len();
    let count = |xs: &[usize]| {
        let mut c = vec![0u32; support];
        for &x in xs {
            c[x] += 1;
        }
        c
    };
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    let tv = if a.is_empty() || b.is_empty() {
        0.0
    } else {
        plug_in(&count(&ia), &count(&ib), ma, mb)
    };

    if a.is_empty() || b.is_empty() || opts.bootstrap == 0 {
        return TvEstimate {
            tv,
            ci_halfwidth: 0.0,
            ci_low: tv,
            ci_high: tv,
            bias_estimate: 0.0,
            samples_graph: a.len(),
            samples_tree: b.len(),
            support_size: support,
            cycle_fraction: a.iter().filter(|c| !c.is_tree()).count() as f64 / ma.max(1.0),
            discarded_trees: 0,
            discard_rate: 0.0,
        };
    }

    // Upper limit: percentile bootstrap, resampling each side with replacement.
    let mut boot: Vec<f64> = (0..opts.bootstrap)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Purpose::Bootstrap, k as u64);
            let mut ca = vec![0u32; support];
            let mut cb = vec![0u32; support];
            for _ in 0..ia.len() {
                ca[ia[rng.random_range(0..ia.len())]] += 1;
            }
            for _ in 0..ib.len() {
                cb[ib[rng.random_range(0..ib.len())]] += 1;
            }
            plug_in(&ca, &cb, ma, mb)
        })
        .collect();
    // Lower limit: the plug-in distance is biased upward, most strongly when the
    // two laws coincide. Permuting the pooled sample gives the distance's law
    // under equality, whose upper quantile bounds that bias.
    let pooled: Vec<usize> = ia.iter().chain(&ib).copied().collect();
    let mut null: Vec<f64> = (0..opts.bootstrap)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Purpose::Bootstrap, (opts.bootstrap + k) as u64);
            let mut perm = pooled.clone();
            let mut ca = vec![0u32; support];
            // Partial Fisher-Yates: the first |a| slots form a uniform subset.
            for i in 0..ia.len() {
                let j = rng.random_range(i..perm.len());
                perm.swap(i, j);
                ca[perm[i]] += 1;
            }
            let mut cb = vec![0u32; support];
            for &x in &perm[ia.len()..] {
                cb[x] += 1;
            }
            plug_in(&ca, &cb, ma, mb)
        })
        .collect();
    boot.sort_unstable_by(f64::total_cmp);
    null.sort_unstable_by(f64::total_cmp);
    let alpha = (1.0 - opts.confidence) / 2.0;
    let ci_low = (tv - quantile(&null, 1.0 - alpha)).max(0.0);
    let ci_high = quantile(&boot, 1.0 - alpha).max(tv).min(1.0);
    let bias = null.iter().sum::<f64>() / null.len() as f64;
    TvEstimate {
        tv,
        ci_halfwidth: (ci_high - ci_low) / 2.0,
        ci_low,
        ci_high,
        bias_estimate: bias,
        samples_graph: a.len(),
        samples_tree: b.len(),
        support_size: support,
        cycle_fraction: a.iter().filter(|c| !c.is_tree()).count() as f64 / ma.max(1.0),
        discarded_trees: 0,
        discard_rate: 0.0,
    }
}

/// Radius-`r` balls around a uniform root of `count` independent graphs.
pub(crate) fn graph_ball_sample(
    params: ModelParams,
    n: usize,
    r: usize,
    count: usize,
    seed: u64,
) -> Vec<CanonicalBall> {
    (0..count)
        .into_par_iter()
        .filter_map(|i| {
            let g = generate_drgvr(params, n, derive_seed(seed, i as u64));
            if g.vertex_count() == 0 {
                return None;
            }
            let root = stream(seed, Purpose::Sampling, i as u64).random_range(0..g.vertex_count());
            Some(canonicalize_graph_ball(&g, root, r))
        })
        .collect()
}

/// Radius-`r` balls of `count` trees; returns the kept codes and the number
/// of trees discarded for hitting the node cap.
pub(crate) fn tree_ball_sample(
    params: ModelParams,
    r: usize,
    count: usize,
    max_nodes: usize,
    seed: u64,
) -> (Vec<CanonicalBall>, usize) {
    let codes: Vec<Option<CanonicalBall>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Tree, i as u64);
            let t = sample_tree_with(params, r, max_nodes, &mut rng);
            (!t.truncated).then(|| canonicalize_tree(&t, r))
        })
        .collect();
    let discarded = codes.iter().filter(|c| c.is_none()).count();
    (codes.into_iter().flatten().collect(), discarded)
}

/// Estimates the total variation distance between the radius-`r` ball around
/// a uniform vertex of `G_n` and the radius-`r` ball of the limiting tree.
/// Each graph sample uses a fresh realization.
pub fn estimate_tv(
    params: ModelParams,
    n: usize,
    r: usize,
    m_graph: usize,
    m_tree: usize,
    seed: u64,
    opts: &TvOptions,
) -> Result<TvEstimate> {
    if r < 1 {
        return Err(invalid("r", "radius must be at least 1"));
    }
    if m_graph < 1000 || m_tree < 1000 {
        return Err(invalid("m_graph", "need at least 1000 graph and tree samples"));
    }
    let graph_seed = derive_seed(seed, 1);
    let tree_seed = derive_seed(seed, 2);
    let graphs = graph_ball_sample(params, n, r, m_graph, graph_seed);
    let (trees, discarded) = tree_ball_sample(params, r, m_tree, opts.max_nodes, tree_seed);
    let mut est = compare_code_samples(&graphs, &trees, opts, derive_seed(seed, 3));
    est.discarded_trees = discarded;
    est.discard_rate = discarded as f64 / m_tree as f64;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_distance() {
        let m = ModelParams::new(1.0, 0.25).unwrap();
        let (a, _) = tree_ball_sample(m, 2, 2000, 100_000, 1);
        let est = compare_code_samples(&a, &a, &TvOptions::default(), 0);
        assert_eq!(est.tv, 0.0);
        assert_eq!(est.ci_low, 0.0);
    }

    #[test]
    fn tree_self_distance_within_ci_of_zero() {
        let m = ModelParams::new(1.0, 0.25).unwrap();
        let (a, da) = tree_ball_sample(m, 2, 4000, 100_000, 1);
        let (b, db) = tree_ball_sample(m, 2, 4000, 100_000, 2);
        assert_eq!(da + db, 0);
        let est = compare_code_samples(&a, &b, &TvOptions::default(), 7);
        assert!(est.tv > 0.0 && est.tv <= 1.0);
        assert!(est.ci_low <= 0.0 + 1e-12, "{est:?}");
        assert!(est.bias_estimate > 0.0);
        assert_eq!(est.cycle_fraction, 0.0);
    }

    #[test]
    fn disjoint_supports_have_distance_one() {
        let leaf = CanonicalBall { code: b"()".to_vec(), r: 1 };
        let edge = CanonicalBall { code: b"(())".to_vec(), r: 1 };
        let est = compare_code_samples(&vec![leaf; 50], &vec![edge; 70], &TvOptions::default(), 0);
        assert_eq!(est.tv, 1.0);
        assert_eq!(est.support_size, 2);
    }

    #[test]
    fn rejects_small_inputs() {
        let m = ModelParams::new(1.0, 0.25).unwrap();
        let o = TvOptions::default();
        assert!(estimate_tv(m, 100, 0, 1000, 1000, 0, &o).is_err());
        assert!(estimate_tv(m, 100, 1, 999, 1000, 0, &o).is_err());
    }
}
