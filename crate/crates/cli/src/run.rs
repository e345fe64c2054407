use std::collections::BTreeMap;
use std::time::Instant;

use drgvr_core::analysis::{
    components, concentration_experiment, max_degree_report, predict_max_degree, prune,
    typical_distance, zeta_estimates, DegreeKind, Statistic,
};
use drgvr_core::graph_models::{default_delta_hat, generate_drgvr, generate_drgvr_with_ledger, generate_sandwich};
use drgvr_core::local_limit::{degree_mixture_mean, degree_mixture_table, estimate_tv, TvOptions};
use drgvr_core::spectral::{figure1_table, survival_gamma};
use drgvr_core::{LabeledGraph, ModelParams};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{
    Experiment, ExperimentConfig, StatisticChoice, DEFAULT_M_SAMPLES, DEFAULT_PAIRS, DEFAULT_REPLICAS,
};
use crate::validate::{validate, FieldError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid config: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldError>),
    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: drgvr_core::Error,
    },
    #[error(transparent)]
    Core(#[from] drgvr_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Rows of JSON scalars under named columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| match v {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                other => other.to_string(),
            }))?;
        }
        w.into_inner().map_err(|e| RunError::Io(e.into_error()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub version: String,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub wall_clock_secs: f64,
    pub results: Table,
    pub aggregates: BTreeMap<String, Value>,
    pub metadata: BTreeMap<String, Value>,
}

/// A finished run: the record plus optional plot data and extra files.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub plot: Option<Table>,
    pub files: Vec<(String, Vec<u8>)>,
}

struct Partial {
    results: Table,
    aggregates: BTreeMap<String, Value>,
    metadata: BTreeMap<String, Value>,
    plot: Option<Table>,
    files: Vec<(String, Vec<u8>)>,
}

impl Partial {
    fn new(results: Table) -> Self {
        Self {
            results,
            aggregates: BTreeMap::new(),
            metadata: BTreeMap::new(),
            plot: None,
            files: Vec::new(),
        }
    }

    fn agg(&mut self, key: &str, value: impl Into<Value>) {
        self.aggregates.insert(key.to_string(), value.into());
    }
}

/// Runs `f` for every seed in parallel. Results come back in seed-list order;
/// the first failing seed in that order aborts the run.
fn per_seed<T, F>(seeds: &[u64], f: F) -> Result<Vec<T>, RunError>
where
    T: Send,
    F: Fn(u64) -> drgvr_core::Result<T> + Sync,
{
    let out: Vec<_> = seeds.par_iter().map(|&s| (s, f(s))).collect();
    out.into_iter()
        .map(|(seed, r)| r.map_err(|source| RunError::Seed { seed, source }))
        .collect()
}

fn params_of(c: &ExperimentConfig) -> drgvr_core::Result<ModelParams> {
    let beta = c.beta.unwrap_or(f64::NAN);
    match (c.eps, c.p) {
        (Some(eps), _) => ModelParams::new(beta, eps),
        (None, Some(p)) => ModelParams::from_p(beta, p),
        (None, None) => ModelParams::new(beta, f64::NAN),
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, k) = xs.into_iter().fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        f64::NAN
    } else {
        s / k as f64
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_unstable_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn degree_histogram(g: &LabeledGraph) -> Vec<u64> {
    let mut h = Vec::new();
    for r in 0..g.vertex_count() {
        let d = g.degree(r);
        if d >= h.len() {
            h.resize(d + 1, 0);
        }
        h[d] += 1;
    }
    h
}

fn add_histogram(into: &mut Vec<u64>, h: &[u64]) {
    if h.len() > into.len() {
        into.resize(h.len(), 0);
    }
    for (k, &c) in h.iter().enumerate() {
        into[k] += c;
    }
}

/// Total variation between an empirical histogram and a pmf table; mass of
/// the pmf beyond the table counts as disagreement.
fn histogram_tv(h: &[u64], pmf: &[f64]) -> f64 {
    let total = h.iter().sum::<u64>() as f64;
    if total == 0.0 {
        return f64::NAN;
    }
    let mut tv = 0.0;
    for k in 0..h.len().max(pmf.len()) {
        let e = h.get(k).copied().unwrap_or(0) as f64 / total;
        tv += (e - pmf.get(k).copied().unwrap_or(0.0)).abs();
    }
    0.5 * (tv + (1.0 - pmf.iter().sum::<f64>()).max(0.0))
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn generate(c: &ExperimentConfig, m: ModelParams, seeds: &[u64]) -> Result<Partial, RunError> {
    let n = c.n.unwrap_or(0);
    let write = c.write_graphs.unwrap_or(false);
    let runs = per_seed(seeds, |s| {
        let (ledger, g) = generate_drgvr_with_ledger(m, n, s);
        let mut file = Vec::new();
        if write {
            g.write_edge_list(&mut file)?;
        }
        Ok((ledger.births(), ledger.removals(), degree_histogram(&g), g.vertex_count(), g.edge_count(), file))
    })?;
    let mut out = Partial::new(Table::new(&["seed", "vertices", "edges", "births", "removals", "mean_degree"]));
    let mut pooled = Vec::new();
    for (&s, (births, removals, hist, v, e, file)) in seeds.iter().zip(runs) {
        let md = if v == 0 { 0.0 } else { 2.0 * e as f64 / v as f64 };
        out.results.push(vec![json!(s), json!(v), json!(e), json!(births), json!(removals), num(md)]);
        add_histogram(&mut pooled, &hist);
        if write {
            out.files.push((format!("graph_seed{s}.tsv"), file));
        }
    }
    out.agg("mean_vertices_over_n", num(mean(out.results.rows.iter().map(|r| r[1].as_f64().unwrap_or(0.0) / n.max(1) as f64))));
    out.agg("expected_vertices_over_n", num(2.0 * m.eps()));
    let total = pooled.iter().sum::<u64>() as f64;
    let mut plot = Table::new(&["degree", "count", "fraction"]);
    for (k, &cnt) in pooled.iter().enumerate() {
        plot.push(vec![json!(k), json!(cnt), num(cnt as f64 / total)]);
    }
    out.plot = Some(plot);
    Ok(out)
}

fn degree_dist(c: &ExperimentConfig, m: ModelParams, seeds: &[u64]) -> Result<Partial, RunError> {
    let n = c.n.unwrap_or(0);
    let pmf = degree_mixture_table(m)?;
    let hists = per_seed(seeds, |s| Ok(degree_histogram(&generate_drgvr(m, n, s))))?;
    let mut out = Partial::new(Table::new(&["seed", "vertices", "mean_degree", "tv"]));
    let mut pooled = Vec::new();
    for (&s, h) in seeds.iter().zip(&hists) {
        let v: u64 = h.iter().sum();
        let md = h.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>() / v.max(1) as f64;
        out.results.push(vec![json!(s), json!(v), num(md), num(histogram_tv(h, &pmf))]);
        add_histogram(&mut pooled, h);
    }
    let total = pooled.iter().sum::<u64>() as f64;
    out.agg("pooled_tv", num(histogram_tv(&pooled, &pmf)));
    out.agg("pooled_mean_degree", num(pooled.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>() / total));
    out.agg("mixture_mean", num(degree_mixture_mean(m)?));
    let mut plot = Table::new(&["degree", "empirical", "mixture"]);
    for k in 0..pooled.len().max(pmf.len()) {
        let e = pooled.get(k).copied().unwrap_or(0) as f64 / total;
        plot.push(vec![json!(k), num(e), num(pmf.get(k).copied().unwrap_or(0.0))]);
    }
    out.plot = Some(plot);
    Ok(out)
}

fn giant(c: &ExperimentConfig, m: ModelParams, seeds: &[u64]) -> Result<Partial, RunError> {
    let n = c.n.unwrap_or(0);
    let lambda = c.lambda;
    let runs = per_seed(seeds, |s| {
        let g = generate_drgvr(m, n, s);
        let full = components(&g);
        let pruned = lambda.map(|l| prune(&g, l).map(|h| components(&h))).transpose()?;
        Ok((full, pruned))
    })?;
    let mut cols = vec!["seed", "vertices", "c1", "c2", "giant_fraction"];
    if lambda.is_some() {
        cols.extend(["pruned_vertices", "pruned_c1", "pruned_c2"]);
    }
    let mut out = Partial::new(Table::new(&cols));
    for (&s, (full, pruned)) in seeds.iter().zip(&runs) {
        let mut row = vec![json!(s), json!(full.vertices), json!(full.c1), json!(full.c2), num(full.giant_fraction)];
        if let Some(p) = pruned {
            row.extend([json!(p.vertices), json!(p.c1), json!(p.c2)]);
        }
        out.results.push(row);
    }
    let gamma = survival_gamma(m, c.grid_m(), c.tol())?;
    out.agg("mean_giant_fraction", num(mean(runs.iter().map(|r| r.0.giant_fraction))));
    out.agg("survival_gamma", num(gamma));
    out.agg("predicted_giant_fraction", num(2.0 * m.eps() * gamma));
    out.agg("max_c2", json!(runs.iter().map(|r| r.0.c2).max().unwrap_or(0)));
    Ok(out)
}

fn betac(c: &ExperimentConfig) -> Result<Partial, RunError> {
    let rows = figure1_table(&c.p_values(), c.grid_m())?;
    let mut t = Table::new(&["p", "lower", "empirical", "upper_opt", "upper_simple"]);
    for r in &rows {
        t.push(vec![num(r.p), num(r.lower), num(r.empirical), num(r.upper_opt), num(r.upper_simple)]);
    }
    let mut out = Partial::new(t.clone());
    out.agg("points", json!(rows.len()));
    out.agg(
        "ordering_holds",
        json!(rows.iter().all(|r| r.lower <= r.empirical && r.empirical <= r.upper_opt && r.upper_opt <= r.upper_simple)),
    );
    out.plot = Some(t);
    Ok(out)
}

fn maxdeg(c: &ExperimentConfig, m: ModelParams, seeds: &[u64]) -> Result<Partial, RunError> {
    let n = c.n.unwrap_or(0);
    let reports = per_seed(seeds, |s| max_degree_report(&generate_drgvr(m, n, s)))?;
    let mut out = Partial::new(Table::new(&[
        "seed", "max_s", "max_plus", "max_minus", "min_label_s", "min_label_plus", "min_label_minus",
    ]));
    for (&s, r) in seeds.iter().zip(&reports) {
        out.results.push(vec![
            json!(s),
            json!(r.max_s),
            json!(r.max_plus),
            json!(r.max_minus),
            json!(r.min_label(DegreeKind::Total)),
            json!(r.min_label(DegreeKind::In)),
            json!(r.min_label(DegreeKind::Out)),
        ]);
    }
    for (kind, key) in [(DegreeKind::Total, "s"), (DegreeKind::In, "plus"), (DegreeKind::Out, "minus")] {
        if let Ok(pred) = predict_max_degree(m, n, kind) {
            out.agg(&format!("predicted_max_{key}"), num(pred.value));
        }
    }
    let ln_n = (n as f64).ln();
    out.agg("median_min_label_minus_over_n", num(median(reports.iter().map(|r| r.min_label(DegreeKind::Out) as f64 / n as f64).collect())));
    out.agg("median_log_min_label_plus_over_log_n", num(median(reports.iter().map(|r| (r.min_label(DegreeKind::In) as f64).ln() / ln_n).collect())));
    out.agg("mean_max_plus", num(mean(reports.iter().map(|r| r.max_plus as f64))));
    Ok(out)
}

fn local_tv(c: &ExperimentConfig, m: ModelParams, seeds: &[u64]) -> Result<Partial, RunError> {
    let n = c.n.unwrap_or(0);
    let r = c.r.unwrap_or(1);
    let mut opts = TvOptions::default();
    if let Some(b) = c.bootstrap {
        opts.bootstrap = b;
    }
    let (mg, mt) = (c.m_graph.unwrap_or(DEFAULT_M_SAMPLES), c.m_tree.unwrap_or(DEFAULT_M_SAMPLES));
    // Each estimate is parallel internally, so seeds run in order.
    let mut out = Partial::new(Table::new(&[
        "seed", "tv", "ci_low", "ci_high", "bias_estimate", "support_size", "cycle_fraction", "discard_rate",
    ]));
    let mut tvs = Vec::new();
    for &s in seeds {
        let e = estimate_tv(m, n, r, mg, mt, s, &opts).map_err(|source| RunError::Seed { seed: s, source })?;
        out.results.push(vec![
            json!(s),
            num(e.tv),
            num(e.ci_low),
            num(e.ci_high),
            num(e.bias_estimate),
            json!(e.support_size),
            num(e.cycle_fraction),
            num(e.discard_rate),
        ]);
        tvs.push(e.tv);
    }
    out.agg("mean_tv", num(mean(tvs)));
    Ok(out)
}

fn sandwich(c: &ExperimentConfig, m: ModelParams, seeds: &[u64]) -> Result<Partial, RunError> {
    let n = c.n.unwrap_or(0);
    let dh = c.delta_hat.unwrap_or_else(|| default_delta_hat(n));
    let runs = per_seed(seeds, |s| generate_sandwich(m, n, s, dh).map(|t| t.summary()))?;
    let mut out = Partial::new(Table::new(&[
        "seed", "chain_holds", "violations", "lower_edges", "middle_edges", "upper_edges",
    ]));
    for (&s, r) in seeds.iter().zip(&runs) {
        out.results.push(vec![
            json!(s),
            json!(r.chain_holds),
            json!(r.violations),
            json!(r.lower_edges),
            json!(r.middle_edges),
            json!(r.upper_edges),
        ]);
    }
    out.agg("fraction_chain_holds", num(mean(runs.iter().map(|r| r.chain_holds as u8 as f64))));
    out.metadata.insert("delta_hat".into(), num(dh));
    out.metadata.insert("delta_hat_is_calibrated_default".into(), json!(c.delta_hat.is_none()));
    Ok(out)
}

fn concentration(c: &ExperimentConfig, m: ModelParams, seeds: &[u64]) -> Result<Partial, RunError> {
    let n = c.n.unwrap_or(0);
    let replicas = c.replicas.unwrap_or(DEFAULT_REPLICAS);
    let stats: Vec<Statistic> = match c.statistic.unwrap_or(StatisticChoice::All) {
        StatisticChoice::All => Statistic::ALL.to_vec(),
        StatisticChoice::EdgeCountInLabelRange => vec![Statistic::EdgeCountInLabelRange],
        StatisticChoice::MaxMatchingGreedy => vec![Statistic::MaxMatchingGreedy],
        StatisticChoice::TriangleCountCapped => vec![Statistic::TriangleCountCapped],
    };
    let mut out = Partial::new(Table::new(&[
        "seed", "statistic", "lipschitz", "edges", "mean", "std_dev", "max_deviation", "within_bound",
    ]));
    let mut plot = Table::new(&["seed", "statistic", "t", "empirical", "bound"]);
    let mut all_within = true;
    for &s in seeds {
        for &stat in &stats {
            let rep = concentration_experiment(m, n, stat, replicas, s).map_err(|source| RunError::Seed { seed: s, source })?;
            all_within &= rep.within_bound;
            out.results.push(vec![
                json!(s),
                json!(stat.name()),
                num(rep.lipschitz),
                json!(rep.edges),
                num(rep.mean),
                num(rep.std_dev),
                num(rep.max_deviation),
                json!(rep.within_bound),
            ]);
            for t in &rep.tails {
                plot.push(vec![json!(s), json!(stat.name()), num(t.t), num(t.empirical), num(t.bound)]);
            }
        }
    }
    out.agg("all_within_bound", json!(all_within));
    out.agg("replicas", json!(replicas));
    out.plot = Some(plot);
    Ok(out)
}

fn distances(c: &ExperimentConfig, m: ModelParams, seeds: &[u64]) -> Result<Partial, RunError> {
    let n = c.n.unwrap_or(0);
    let pairs = c.pairs.unwrap_or(DEFAULT_PAIRS);
    let lambda = c.lambda;
    let runs = per_seed(seeds, |s| {
        let g = generate_drgvr(m, n, s);
        let g = match lambda {
            Some(l) => prune(&g, l)?,
            None => g,
        };
        let d = typical_distance(&g, pairs, s)?;
        Ok((g.vertex_count(), d))
    })?;
    let ln_n = (n as f64).ln();
    let mut out = Partial::new(Table::new(&[
        "seed", "vertices", "pairs", "connected", "mean_distance", "mean_distance_over_ln_n",
    ]));
    for (&s, (v, d)) in seeds.iter().zip(&runs) {
        out.results.push(vec![
            json!(s),
            json!(v),
            json!(d.pairs),
            json!(d.connected),
            num(d.mean_distance),
            num(d.mean_distance / ln_n),
        ]);
    }
    let z = zeta_estimates(m, c.grid_m())?;
    out.agg("operator_norm", num(z.operator_norm));
    out.agg("zeta_log", num(z.zeta_log));
    out.agg("zeta_inverse", num(z.zeta_inverse));
    out.agg("mean_distance_over_ln_n", num(mean(runs.iter().map(|r| r.1.mean_distance / ln_n))));
    Ok(out)
}

/// Validates and runs one experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let errors = validate(config);
    if !errors.is_empty() {
        return Err(RunError::Invalid(errors));
    }
    let exp = config.experiment.expect("validated");
    let start = Instant::now();
    let seeds = config.seed_list();
    let partial = if exp.is_seeded() {
        let m = params_of(config)?;
        match exp {
            Experiment::Generate => generate(config, m, &seeds)?,
            Experiment::DegreeDist => degree_dist(config, m, &seeds)?,
            Experiment::Giant => giant(config, m, &seeds)?,
            Experiment::Maxdeg => maxdeg(config, m, &seeds)?,
            Experiment::LocalTv => local_tv(config, m, &seeds)?,
            Experiment::Sandwich => sandwich(config, m, &seeds)?,
            Experiment::Concentration => concentration(config, m, &seeds)?,
            Experiment::Distances => distances(config, m, &seeds)?,
            Experiment::Betac | Experiment::Figure1 => unreachable!(),
        }
    } else {
        betac(config)?
    };
    let mut metadata = partial.metadata;
    if exp.is_seeded() {
        metadata.insert("seeds".into(), json!(seeds));
    }
    let record = RunRecord {
        version: VERSION.to_string(),
        experiment: exp,
        config: config.clone(),
        config_hash: config.hash(),
        wall_clock_secs: start.elapsed().as_secs_f64(),
        results: partial.results,
        aggregates: partial.aggregates,
        metadata,
    };
    Ok(RunOutput {
        record,
        plot: partial.plot,
        files: partial.files,
    })
}
