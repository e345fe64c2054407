//! Generators: the dynamic graph itself, the birth-death inhomogeneous
//! Erdős–Rényi graph, and the three-way coupling between them.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::LabeledGraph;
use crate::params::ModelParams;
use crate::rng::{stream, Purpose, StreamRng};
use crate::vertex_process::{simulate, MarkLedger};

/// Simulates `n` steps of the dynamic graph and returns the graph on `V_n`.
pub fn generate_drgvr(params: ModelParams, n: usize, seed: u64) -> LabeledGraph {
    generate_drgvr_with_ledger(params, n, seed).1
}

/// As [`generate_drgvr`], also returning the vertex-process ledger (identical
/// to `run_vertex_process(params, n, seed)`).
pub fn generate_drgvr_with_ledger(
    params: ModelParams,
    n: usize,
    seed: u64,
) -> (MarkLedger, LabeledGraph) {
    let mut rng = stream(seed, Purpose::BirthEdges, 0);
    let beta = params.beta();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let ledger = simulate(params, n, seed, |label, alive| {
        let size = alive.len();
        if size == 0 {
            return;
        }
        let q = (beta / size as f64).min(1.0);
        let k = Binomial::new(size as u64, q)
            .expect("probability in [0,1]")
            .sample(&mut rng) as usize;
        let alive = alive.as_slice();
        for slot in sample(&mut rng, size, k) {
            edges.push((label, alive[slot]));
        }
    });

    let mut rank = vec![u32::MAX; n + 1];
    for (r, &l) in ledger.alive_final.iter().enumerate() {
        rank[l as usize] = r as u32;
    }
    let rank_edges: Vec<(u32, u32)> = edges
        .into_iter()
        .filter_map(|(a, b)| {
            let (ra, rb) = (rank[a as usize], rank[b as usize]);
            (ra != u32::MAX && rb != u32::MAX).then_some((ra, rb))
        })
        .collect();
    let graph =
        LabeledGraph::from_rank_edges(params, n, seed, ledger.alive_final.clone(), &rank_edges);
    (ledger, graph)
}

/// Connection probability between the `i`-th and `j`-th survivor (`i < j`,
/// both 1-based) in the birth-death inhomogeneous random graph, before capping at 1.
pub fn gbd_edge_probability(params: ModelParams, delta: f64, j: usize, n: usize) -> f64 {
    let p = params.p();
    let two_eps = 2.0 * params.eps();
    let nf = n as f64;
    delta * params.beta() * two_eps.powf(-(1.0 - p) / p) / nf
        * (j as f64 / nf).powf(-params.kernel_exponent())
}

/// Edge uniforms between survivor rank `j` and all earlier ranks, revealed in
/// increasing order. The edges present at threshold `q` are exactly the prefix
/// with uniform `<= q`, so every threshold reads the same underlying uniforms.
struct RankUniforms {
    rng: StreamRng,
    candidates: usize,
    last: f64,
    pending: Option<f64>,
    revealed: Vec<(f64, u32)>,
}

impl RankUniforms {
    fn new(seed: u64, rank: usize) -> Self {
        Self {
            rng: stream(seed, Purpose::PairUniforms, rank as u64),
            candidates: rank,
            last: 0.0,
            pending: None,
            revealed: Vec::new(),
        }
    }

    /// Reveals uniforms up to `q`; returns the `(u, earlier_rank)` pairs with `u <= q`.
    fn below(&mut self, q: f64) -> &[(f64, u32)] {
        while self.revealed.len() < self.candidates {
            let u = match self.pending {
                Some(u) => u,
                None => {
                    // Minimum of the remaining uniforms on (last, 1].
                    let remaining = (self.candidates - self.revealed.len()) as f64;
                    let v: f64 = self.rng.random();
                    let u = self.last + (1.0 - self.last) * -((-v).ln_1p() / remaining).exp_m1();
                    self.pending = Some(u);
                    u
                }
            };
            if u > q {
                break;
            }
            let target = loop {
                let t = self.rng.random_range(0..self.candidates) as u32;
                if !self.revealed.iter().any(|&(_, r)| r == t) {
                    break t;
                }
            };
            self.revealed.push((u, target));
            self.last = u;
            self.pending = None;
        }
        let end = self.revealed.partition_point(|&(u, _)| u <= q);
        &self.revealed[..end]
    }
}

fn check_ledger(ledger: &MarkLedger, n: usize) -> Result<()> {
    if ledger.n != n {
        return Err(invalid("ledger", format!("horizon {} does not match n = {n}", ledger.n)));
    }
    Ok(())
}

/// Birth-death inhomogeneous random graph on the survivors of `ledger`.
pub fn generate_gbd(
    params: ModelParams,
    delta: f64,
    n: usize,
    seed: u64,
    ledger: &MarkLedger,
) -> Result<LabeledGraph> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    check_ledger(ledger, n)?;
    let mut edges = Vec::new();
    for j in 1..ledger.alive_count() {
        let q = gbd_edge_probability(params, delta, j + 1, n).min(1.0);
        let mut u = RankUniforms::new(seed, j);
        edges.extend(u.below(q).iter().map(|&(_, i)| (j as u32, i)));
    }
    Ok(LabeledGraph::from_rank_edges(
        params,
        n,
        seed,
        ledger.alive_final.clone(),
        &edges,
    ))
}

/// Default coupling slack `max{n^{-1/10}, 3/ln n}`; a calibration, not a derived constant.
pub fn default_delta_hat(n: usize) -> f64 {
    let nf = (n.max(3)) as f64;
    nf.powf(-0.1).max(3.0 / nf.ln()).min(0.99)
}

#[derive(Debug, Clone)]
pub struct SandwichTriple {
    pub lower: LabeledGraph,
    pub middle: LabeledGraph,
    pub upper: LabeledGraph,
    pub delta_hat: f64,
    /// Whether `lower ⊆ middle ⊆ upper` held on this realization.
    pub chain_holds: bool,
    /// Number of edges breaking the chain.
    pub violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichSummary {
    pub delta_hat: f64,
    pub chain_holds: bool,
    pub violations: usize,
    pub lower_edges: usize,
    pub middle_edges: usize,
    pub upper_edges: usize,
}

impl SandwichTriple {
    pub fn summary(&self) -> SandwichSummary {
        SandwichSummary {
            delta_hat: self.delta_hat,
            chain_holds: self.chain_holds,
            violations: self.violations,
            lower_edges: self.lower.edge_count(),
            middle_edges: self.middle.edge_count(),
            upper_edges: self.upper.edge_count(),
        }
    }
}

/// Couples `G_BD(1 - delta_hat) ⊆ G_n ⊆ G_BD(1 + delta_hat)` on shared uniforms.
/// The middle graph uses the probability `min{beta/|V_{t-1}|, 1}` realized at
/// the birth step `t` of the later endpoint, which is its exact law given the
/// vertex trace.
pub fn generate_sandwich(
    params: ModelParams,
    n: usize,
    seed: u64,
    delta_hat: f64,
) -> Result<SandwichTriple> {
    if !(delta_hat > 0.0 && delta_hat < 1.0) {
        return Err(invalid("delta_hat", format!("must lie in (0,1), got {delta_hat}")));
    }
    let ledger = crate::vertex_process::run_vertex_process(params, n, seed);
    let counts = ledger.replay_counts();
    let mut lower = Vec::new();
    let mut middle = Vec::new();
    let mut upper = Vec::new();
    for j in 1..ledger.alive_count() {
        let base = gbd_edge_probability(params, 1.0, j + 1, n);
        let q_lo = (base * (1.0 - delta_hat)).min(1.0);
        let q_hi = (base * (1.0 + delta_hat)).min(1.0);
        let born = ledger.alive_final[j] as usize;
        let q_mid = (params.beta() / counts[born - 1] as f64).min(1.0);
        let mut u = RankUniforms::new(seed, j);
        let all = u.below(q_hi.max(q_mid));
        for &(x, i) in all {
            let e = (j as u32, i);
            if x <= q_lo {
                lower.push(e);
            }
            if x <= q_mid {
                middle.push(e);
            }
            if x <= q_hi {
                upper.push(e);
            }
        }
    }
    let build = |edges: &[(u32, u32)]| {
        LabeledGraph::from_rank_edges(params, n, seed, ledger.alive_final.clone(), edges)
    };
    let (lower, middle, upper) = (build(&lower), build(&middle), build(&upper));
    let violations = lower
        .rank_edges()
        .filter(|&(a, b)| !middle.has_edge(a as usize, b as usize))
        .count()
        + middle
            .rank_edges()
            .filter(|&(a, b)| !upper.has_edge(a as usize, b as usize))
            .count();
    Ok(SandwichTriple {
        lower,
        middle,
        upper,
        delta_hat,
        chain_holds: violations == 0,
        violations,
    })
}
