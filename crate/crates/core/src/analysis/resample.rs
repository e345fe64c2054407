use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::LabeledGraph;
use crate::graph_models::generate_drgvr;
use crate::params::ModelParams;
use crate::rng::{derive_seed, stream, Purpose};

/// Attempts per half-edge before a completion is declared infeasible.
const RETRY_CAP: usize = 10_000;

/// Redraws every out-going half-edge uniformly among earlier survivors,
/// keeping each vertex's out-degree and avoiding parallel edges. Each
/// vertex's new out-neighbourhood is a uniform subset of the right size.
pub fn conditional_resample(graph: &LabeledGraph, seed: u64) -> Result<LabeledGraph> {
    let v = graph.vertex_count();
    for j in 0..v {
        if graph.out_degree(j) > j {
            return Err(Error::Infeasible(format!(
                "label {} has out-degree {} but only {j} earlier survivors",
                graph.label(j),
                graph.out_degree(j)
            )));
        }
    }
    let mut rng = stream(seed, Purpose::Resample, 0);
    let mut edges = Vec::with_capacity(graph.edge_count());
    let mut chosen: Vec<u32> = Vec::new();
    for j in 0..v {
        let k = graph.out_degree(j);
        chosen.clear();
        for _ in 0..k {
            let mut tries = 0;
            let target = loop {
                let t = rng.random_range(0..j) as u32;
                if !chosen.contains(&t) {
                    break t;
                }
                tries += 1;
                if tries >= RETRY_CAP {
                    return Err(Error::Infeasible(format!(
                        "no free endpoint for label {} after {RETRY_CAP} attempts",
                        graph.label(j)
                    )));
                }
            };
            chosen.push(target);
            edges.push((j as u32, target));
        }
    }
    Ok(LabeledGraph::from_rank_edges(
        graph.params,
        graph.n,
        graph.seed,
        graph.labels().to_vec(),
        &edges,
    ))
}

/// Edges with both endpoint labels in `(n/4, 3n/4]`. Changing one edge
/// changes it by at most 1.
pub fn edge_count_in_label_range(graph: &LabeledGraph) -> f64 {
    let n = graph.n as f64;
    let inside = |l: u32| (l as f64) > n / 4.0 && (l as f64) <= 3.0 * n / 4.0;
    graph
        .label_edges()
        .filter(|&(a, b)| inside(a) && inside(b))
        .count() as f64
}

/// Size of the greedy maximal matching scanning edges in rank order. One
/// edge insertion or deletion changes the greedy matching along a single
/// alternating path, so the size moves by at most 1.
pub fn greedy_matching_size(graph: &LabeledGraph) -> f64 {
    let mut used = vec![false; graph.vertex_count()];
    let mut size = 0usize;
    for (a, b) in graph.rank_edges() {
        let (a, b) = (a as usize, b as usize);
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            size += 1;
        }
    }
    size as f64
}

/// Degree cap used by [`triangle_count_capped`].
pub const TRIANGLE_DEGREE_CAP: usize = 4;

/// Triangles among vertices of degree at most `TRIANGLE_DEGREE_CAP`. One edge
/// change can drop or add at most its two endpoints, each carrying at most
/// `C(D,2)` triangles, so the statistic is `D(D-1)`-Lipschitz.
pub fn triangle_count_capped(graph: &LabeledGraph) -> f64 {
    let d = TRIANGLE_DEGREE_CAP;
    let keep = |r: usize| graph.degree(r) <= d;
    let mut count = 0usize;
    for a in 0..graph.vertex_count() {
        if !keep(a) {
            continue;
        }
        let nb = graph.neighbors(a);
        for (i, &b) in nb.iter().enumerate() {
            let b = b as usize;
            if b <= a || !keep(b) {
                continue;
            }
            for &c in &nb[i + 1..] {
                let c = c as usize;
                if keep(c) && graph.has_edge(b, c) {
                    count += 1;
                }
            }
        }
    }
    count as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    EdgeCountInLabelRange,
    MaxMatchingGreedy,
    TriangleCountCapped,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [
        Statistic::EdgeCountInLabelRange,
        Statistic::MaxMatchingGreedy,
        Statistic::TriangleCountCapped,
    ];

    pub fn lipschitz(self) -> f64 {
        match self {
            Statistic::EdgeCountInLabelRange | Statistic::MaxMatchingGreedy => 1.0,
            Statistic::TriangleCountCapped => (TRIANGLE_DEGREE_CAP * (TRIANGLE_DEGREE_CAP - 1)) as f64,
        }
    }

    pub fn eval(self, graph: &LabeledGraph) -> f64 {
        match self {
            Statistic::EdgeCountInLabelRange => edge_count_in_label_range(graph),
            Statistic::MaxMatchingGreedy => greedy_matching_size(graph),
            Statistic::TriangleCountCapped => triangle_count_capped(graph),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistic::EdgeCountInLabelRange => "edge_count_in_label_range",
            Statistic::MaxMatchingGreedy => "max_matching_greedy",
            Statistic::TriangleCountCapped => "triangle_count_capped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// Fraction of replicas with `|f - mean| >= t`.
    pub empirical: f64,
    /// `2 exp(-t^2 / (8 |E| L^2))`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub lipschitz: f64,
    pub edges: usize,
    pub vertices: usize,
    pub replicas: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub max_deviation: f64,
    pub tails: Vec<TailRow>,
    pub within_bound: bool,
}

/// Tail frequencies of `f` over conditional resamples of `base`, compared
/// with the Azuma-type bound.
pub fn concentration_on<F>(
    base: &LabeledGraph,
    f: F,
    lipschitz: f64,
    replicas: usize,
    seed: u64,
) -> Result<ConcentrationReport>
where
    F: Fn(&LabeledGraph) -> f64 + Sync,
{
    if replicas == 0 {
        return Err(invalid("replicas", "need at least one replica"));
    }
    let values: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|i| conditional_resample(base, derive_seed(seed, i as u64)).map(|g| f(&g)))
        .collect::<Result<_>>()?;
    let mean = values.iter().sum::<f64>() / replicas as f64;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / replicas as f64;
    let mut devs: Vec<f64> = values.iter().map(|x| (x - mean).abs()).collect();
    devs.sort_unstable_by(f64::total_cmp);
    let max_deviation = devs.last().copied().unwrap_or(0.0);
    let edges = base.edge_count();
    let scale = 8.0 * edges as f64 * lipschitz * lipschitz;
    let step = max_deviation.max(1.0) / 20.0;
    let tails: Vec<TailRow> = (0..=40)
        .map(|k| {
            let t = k as f64 * step;
            let above = devs.len() - devs.partition_point(|&d| d < t);
            TailRow {
                t,
                empirical: above as f64 / replicas as f64,
                bound: if scale > 0.0 { 2.0 * (-t * t / scale).exp() } else if t > 0.0 { 0.0 } else { 2.0 },
            }
        })
        .collect();
    let within_bound = tails.iter().all(|r| r.empirical <= r.bound);
    Ok(ConcentrationReport {
        lipschitz,
        edges,
        vertices: base.vertex_count(),
        replicas,
        mean,
        std_dev: var.sqrt(),
        max_deviation,
        tails,
        within_bound,
    })
}

/// Generates one graph, then measures the concentration of a built-in
/// statistic under resampling with its vertex set and out-degrees fixed.
pub fn concentration_experiment(
    params: ModelParams,
    n: usize,
    statistic: Statistic,
    replicas: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let base = generate_drgvr(params, n, seed);
    concentration_on(&base, |g| statistic.eval(g), statistic.lipschitz(), replicas, derive_seed(seed, 0xC0))
}
