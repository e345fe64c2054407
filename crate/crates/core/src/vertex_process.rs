//! The birth-death process behind the vertex sets `V_t`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::ModelParams;
use crate::rng::{stream, Purpose, StreamRng};

/// Above this horizon the `|V_t|` trace is stored every `ceil(n / MAX_TRACE)` steps.
pub const MAX_TRACE: usize = 1_000_000;

/// Full history of one run of the vertex process up to step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkLedger {
    pub params: ModelParams,
    pub n: usize,
    pub seed: u64,
    /// `xi[t-1]` is the birth flag of step `t`.
    pub xi: Vec<bool>,
    /// `removal_target[t-1]` is the label removed at step `t`, if any.
    pub removal_target: Vec<Option<u32>>,
    /// Labels alive after step `n`, increasing.
    pub alive_final: Vec<u32>,
    /// `|V_t|` for `t = 0, s, 2s, ...` (and `t = n`) with stride `s = trace_stride`.
    pub alive_count_trace: Vec<u32>,
    pub trace_stride: usize,
}

/// O(1) uniform removal: labels live in a dense array, `pos` maps label to slot.
pub(crate) struct AliveSet {
    dense: Vec<u32>,
    pos: Vec<u32>,
}

impl AliveSet {
    fn new(n: usize) -> Self {
        Self {
            dense: Vec::new(),
            pos: vec![u32::MAX; n + 1],
        }
    }

    fn insert(&mut self, label: u32) {
        self.pos[label as usize] = self.dense.len() as u32;
        self.dense.push(label);
    }

    fn remove_at(&mut self, slot: usize) -> u32 {
        let label = self.dense.swap_remove(slot);
        if slot < self.dense.len() {
            self.pos[self.dense[slot] as usize] = slot as u32;
        }
        self.pos[label as usize] = u32::MAX;
        label
    }

    pub(crate) fn as_slice(&self) -> &[u32] {
        &self.dense
    }

    pub(crate) fn len(&self) -> usize {
        self.dense.len()
    }
}

/// Runs the process, calling `on_birth(label, alive_before)` at every birth.
/// `alive_before` is `V_{t-1}` in arbitrary order.
pub(crate) fn simulate<F>(params: ModelParams, n: usize, seed: u64, mut on_birth: F) -> MarkLedger
where
    F: FnMut(u32, &AliveSet),
{
    assert!(n < u32::MAX as usize, "horizon must fit in u32 labels");
    let mut rng: StreamRng = stream(seed, Purpose::VertexProcess, 0);
    let p = params.p();
    let stride = n.div_ceil(MAX_TRACE).max(1);

    let mut alive = AliveSet::new(n);
    let mut xi = Vec::with_capacity(n);
    let mut removal_target = Vec::with_capacity(n);
    let mut trace = Vec::with_capacity(n / stride + 2);
    trace.push(0);

    for t in 1..=n {
        let birth = params.is_dubins() || rng.random_bool(p);
        xi.push(birth);
        if birth {
            let label = t as u32;
            on_birth(label, &alive);
            alive.insert(label);
            removal_target.push(None);
        } else if alive.len() > 0 {
            let slot = rng.random_range(0..alive.len());
            removal_target.push(Some(alive.remove_at(slot)));
        } else {
            removal_target.push(None);
        }
        if t % stride == 0 || t == n {
            trace.push(alive.len() as u32);
        }
    }

    let mut alive_final = alive.dense;
    alive_final.sort_unstable();
    MarkLedger {
        params,
        n,
        seed,
        xi,
        removal_target,
        alive_final,
        alive_count_trace: trace,
        trace_stride: stride,
    }
}

/// Simulates `n` steps of the birth-death process.
pub fn run_vertex_process(params: ModelParams, n: usize, seed: u64) -> MarkLedger {
    simulate(params, n, seed, |_, _| {})
}

impl MarkLedger {
    pub fn alive_count(&self) -> usize {
        self.alive_final.len()
    }

    pub fn births(&self) -> usize {
        self.xi.iter().filter(|&&b| b).count()
    }

    pub fn removals(&self) -> usize {
        self.removal_target.iter().filter(|r| r.is_some()).count()
    }

    /// `|V_t|` for every `t = 0..=n`, recomputed from the birth flags.
    pub fn replay_counts(&self) -> Vec<u32> {
        let mut counts = Vec::with_capacity(self.n + 1);
        let mut size = 0u32;
        counts.push(0);
        for (birth, removed) in self.xi.iter().zip(&self.removal_target) {
            if *birth {
                size += 1;
            } else if removed.is_some() {
                size -= 1;
            }
            counts.push(size);
        }
        counts
    }

    /// Alive set obtained by replaying births and removals; equals `alive_final`
    /// on a consistent ledger.
    pub fn replay_alive(&self) -> Vec<u32> {
        let mut alive = vec![false; self.n + 1];
        for (i, (birth, removed)) in self.xi.iter().zip(&self.removal_target).enumerate() {
            if *birth {
                alive[i + 1] = true;
            } else if let Some(label) = removed {
                alive[*label as usize] = false;
            }
        }
        (1..=self.n as u32).filter(|&l| alive[l as usize]).collect()
    }

    /// Whether `label` is in `V_n`.
    pub fn is_alive(&self, label: u32) -> bool {
        self.alive_final.binary_search(&label).is_ok()
    }

    pub fn record(&self) -> LedgerRecord {
        LedgerRecord {
            params: self.params,
            n: self.n,
            seed: self.seed,
            alive_final: self.alive_final.clone(),
            summary: LedgerSummary {
                alive: self.alive_count(),
                births: self.births(),
                removals: self.removals(),
                idle_steps: self.n - self.births() - self.removals(),
            },
        }
    }
}

/// Serialized form of a ledger consumed by graph tooling and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub params: ModelParams,
    pub n: usize,
    pub seed: u64,
    pub alive_final: Vec<u32>,
    pub summary: LedgerSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub alive: usize,
    pub births: usize,
    pub removals: usize,
    pub idle_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPrediction {
    pub j: usize,
    pub n: usize,
    pub prob: f64,
}

/// Limiting probability that a vertex born at step `j` is still alive at `n`.
pub fn survival_probability_prediction(
    params: ModelParams,
    j: usize,
    n: usize,
) -> Result<SurvivalPrediction> {
    if j < 1 || j > n {
        return Err(invalid("j", format!("need 1 <= j <= n, got j={j}, n={n}")));
    }
    let prob = (j as f64 / n as f64).powf(params.survival_exponent());
    Ok(SurvivalPrediction { j, n, prob })
}

/// Limiting fraction of survivors with birth label at most `x n`.
pub fn survivor_age_cdf_prediction(params: ModelParams, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(invalid("x", format!("need 0 < x <= 1, got {x}")));
    }
    Ok(x.powf(params.age_exponent()))
}

/// Predicted birth step of the `j`-th oldest survivor at horizon `n`.
pub fn expected_survivor_rank_position(params: ModelParams, j: usize, n: usize) -> f64 {
    let p = params.p();
    let two_eps = 2.0 * params.eps();
    (n as f64).powf((1.0 - p) / p) * (j as f64 / two_eps).powf(two_eps / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mp(eps: f64) -> ModelParams {
        ModelParams::new(1.0, eps).unwrap()
    }

    #[test]
    fn empty_horizon() {
        let l = run_vertex_process(mp(0.25), 0, 1);
        assert!(l.alive_final.is_empty());
        assert_eq!(l.alive_count_trace, vec![0]);
        assert_eq!(l.replay_counts(), vec![0]);
    }

    #[test]
    fn dubins_never_removes() {
        let l = run_vertex_process(mp(0.5), 1000, 3);
        assert_eq!(l.alive_count(), 1000);
        assert_eq!(l.removals(), 0);
        assert_eq!(l.alive_final, (1..=1000).collect::<Vec<u32>>());
    }

    #[test]
    fn removal_on_empty_set_is_idle() {
        // Low p makes early idle steps likely.
        let l = run_vertex_process(mp(0.01), 200, 11);
        let counts = l.replay_counts();
        for t in 1..=l.n {
            let d = counts[t] as i64 - counts[t - 1] as i64;
            match (l.xi[t - 1], l.removal_target[t - 1]) {
                (true, None) => assert_eq!(d, 1),
                (false, Some(_)) => assert_eq!(d, -1),
                (false, None) => {
                    assert_eq!(d, 0);
                    assert_eq!(counts[t - 1], 0);
                }
                (true, Some(_)) => panic!("birth with removal"),
            }
        }
    }

    #[test]
    fn removal_targets_alive_label() {
        let l = run_vertex_process(mp(0.1), 2000, 5);
        let mut alive = vec![false; l.n + 1];
        for t in 1..=l.n {
            if l.xi[t - 1] {
                alive[t] = true;
            } else if let Some(lab) = l.removal_target[t - 1] {
                assert!((lab as usize) < t && alive[lab as usize]);
                alive[lab as usize] = false;
            }
        }
    }

    #[test]
    fn trace_is_thinned_beyond_cap() {
        let l = run_vertex_process(mp(0.25), 2_500_001, 9);
        assert_eq!(l.trace_stride, 3);
        assert_eq!(*l.alive_count_trace.last().unwrap() as usize, l.alive_count());
        let full = l.replay_counts();
        assert_eq!(l.alive_count_trace[1], full[3]);
    }

    #[test]
    fn record_roundtrips_through_json() {
        let l = run_vertex_process(mp(0.25), 500, 2);
        let rec = l.record();
        let back: LedgerRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
        assert_eq!(rec, back);
        assert_eq!(rec.summary.births - rec.summary.removals, rec.summary.alive);
    }

    #[test]
    fn predictions_edge_cases() {
        let m = mp(0.25);
        assert_eq!(survival_probability_prediction(m, 10, 10).unwrap().prob, 1.0);
        assert_eq!(survival_probability_prediction(mp(0.5), 3, 10).unwrap().prob, 1.0);
        assert!(survival_probability_prediction(m, 0, 10).is_err());
        assert!(survival_probability_prediction(m, 11, 10).is_err());
        let half = survival_probability_prediction(m, 5000, 10000).unwrap().prob;
        assert!((half - 0.5f64.sqrt()).abs() < 1e-12);

        assert_eq!(survivor_age_cdf_prediction(m, 1.0).unwrap(), 1.0);
        assert!((survivor_age_cdf_prediction(mp(0.5), 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((survivor_age_cdf_prediction(m, 0.5).unwrap() - 0.5f64.powf(1.5)).abs() < 1e-15);
        assert!(survivor_age_cdf_prediction(m, 0.0).is_err());
        assert!(survivor_age_cdf_prediction(m, 1.5).is_err());

        assert!((expected_survivor_rank_position(mp(0.5), 17, 1000) - 17.0).abs() < 1e-9);
        assert!((expected_survivor_rank_position(m, 5000, 10000) - 10000.0).abs() < 1e-6);
        let v = expected_survivor_rank_position(m, 1000, 100_000);
        let expect = 1e5f64.powf(1.0 / 3.0) * 2000f64.powf(2.0 / 3.0);
        assert!((v - expect).abs() < 1e-9 && (v - 7368.06).abs() < 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn replay_is_consistent(seed in any::<u64>(), eps in 0.01f64..=0.5, n in 0usize..3000) {
            let l = run_vertex_process(mp(eps), n, seed);
            prop_assert_eq!(l.replay_alive(), l.alive_final.clone());
            let counts = l.replay_counts();
            prop_assert_eq!(counts[n] as usize, l.alive_count());
            prop_assert_eq!(&l.alive_count_trace, &counts);
            prop_assert_eq!(l.births() - l.removals(), l.alive_count());
            prop_assert_eq!(run_vertex_process(mp(eps), n, seed), l);
        }
    }
}
