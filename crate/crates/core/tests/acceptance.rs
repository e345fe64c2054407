//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::time::Instant;

use drgvr_core::analysis::{
    components, components_dfs, concentration_experiment, conditional_resample, max_degree_report,
    predict_max_degree, prune, DegreeKind, Statistic, UnionFind,
};
use drgvr_core::graph_models::{default_delta_hat, generate_drgvr, generate_sandwich};
use drgvr_core::local_limit::{degree_mixture_mean, degree_mixture_table, estimate_tv, TvOptions};
use drgvr_core::spectral::{betac_bounds, betac_empirical, figure1_table, survival_gamma};
use drgvr_core::vertex_process::run_vertex_process;
use drgvr_core::{LabeledGraph, ModelParams};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn standard() -> ModelParams {
    ModelParams::from_p(1.0, 0.75).unwrap()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn betac_endpoint() -> Outcome {
    let bounds = betac_bounds(1.0).unwrap();
    let emp = betac_empirical(1.0, 2048, 1e-8).unwrap();
    let pass = bounds.lower == 0.25 && (emp - 0.25).abs() <= 0.01;
    outcome(pass, format!("lower = {}, empirical = {emp:.5}", bounds.lower))
}

fn figure_one() -> Outcome {
    let grid = [0.51, 0.6, 0.7, 0.8, 0.9, 1.0];
    let rows = figure1_table(&grid, 2048).unwrap();
    let slack = 0.01;
    let mut problems = Vec::new();
    for r in &rows {
        if !(r.lower <= r.empirical + slack
            && r.empirical <= r.upper_opt + slack
            && r.upper_opt <= r.upper_simple + slack)
        {
            problems.push(format!("ordering at p={}", r.p));
        }
        if !(r.upper_opt < r.upper_simple) {
            problems.push(format!("upper_opt not strictly below upper_simple at p={}", r.p));
        }
    }
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.lower > a.lower || b.empirical > a.empirical || b.upper_opt > a.upper_opt || b.upper_simple > a.upper_simple {
            problems.push(format!("increase between p={} and p={}", a.p, b.p));
        }
    }
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("p={}: {:.4} <= {:.4} <= {:.4} <= {:.4}", r.p, r.lower, r.empirical, r.upper_opt, r.upper_simple))
        .collect();
    let mut detail = table.join("; ");
    if !problems.is_empty() {
        detail = format!("{}; problems: {}", detail, problems.join(", "));
    }
    outcome(problems.is_empty(), detail)
}

fn vertex_count_law() -> Outcome {
    let m = standard();
    let n = 10_000usize;
    let two_eps = 2.0 * m.eps();
    let counts: Vec<usize> = (0..200u64)
        .into_par_iter()
        .map(|s| run_vertex_process(m, n, s).alive_count())
        .collect();
    let mean = counts.iter().sum::<usize>() as f64 / (counts.len() * n) as f64;
    let window = (n as f64).powf(2.0 / 3.0);
    let inside = counts
        .iter()
        .filter(|&&c| (c as f64 - two_eps * n as f64).abs() <= window)
        .count() as f64
        / counts.len() as f64;
    let pass = (mean - two_eps).abs() <= 0.005 && inside >= 0.99;
    outcome(pass, format!("mean |V|/n = {mean:.5}, fraction within n^(2/3) = {inside:.3}"))
}

fn survivor_age_law() -> Outcome {
    let m = standard();
    let n = 100_000usize;
    let shape = m.age_exponent();
    let ks: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|s| {
            let ledger = run_vertex_process(m, n, s);
            let v = ledger.alive_final.len() as f64;
            let mut d: f64 = 0.0;
            for (i, &label) in ledger.alive_final.iter().enumerate() {
                let f = (label as f64 / n as f64).powf(shape);
                d = d.max((f - i as f64 / v).abs()).max(((i + 1) as f64 / v - f).abs());
            }
            d
        })
        .collect();
    let avg = ks.iter().sum::<f64>() / ks.len() as f64;
    outcome(avg <= 0.02, format!("mean Kolmogorov distance = {avg:.5}"))
}

/// Pooled total variation between survivor degrees and the mixture law.
fn pooled_degree_tv() -> (f64, f64) {
    let m = standard();
    let n = 100_000usize;
    let hists: Vec<Vec<u64>> = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let g = generate_drgvr(m, n, s);
            let mut h = Vec::new();
            for r in 0..g.vertex_count() {
                let d = g.degree(r);
                if d >= h.len() {
                    h.resize(d + 1, 0);
                }
                h[d] += 1;
            }
            h
        })
        .collect();
    let mut pooled: Vec<u64> = Vec::new();
    for h in hists {
        if h.len() > pooled.len() {
            pooled.resize(h.len(), 0);
        }
        for (k, c) in h.into_iter().enumerate() {
            pooled[k] += c;
        }
    }
    let total = pooled.iter().sum::<u64>() as f64;
    let table = degree_mixture_table(m).unwrap();
    let len = table.len().max(pooled.len());
    let mut tv = 0.0;
    let mut mass = 0.0;
    for k in 0..len {
        let e = pooled.get(k).copied().unwrap_or(0) as f64 / total;
        let q = table.get(k).copied().unwrap_or(0.0);
        mass += q;
        tv += (e - q).abs();
    }
    // Mixture mass beyond the table counts as disagreement.
    tv += (1.0 - mass).max(0.0);
    (0.5 * tv, total)
}

fn degree_mixture(tv: f64, samples: f64) -> Outcome {
    let m = standard();
    let mean = degree_mixture_mean(m).unwrap();
    let target = 2.0 * m.beta() * m.p();
    let pass = tv <= 0.05 && (mean - target).abs() <= 1e-6;
    outcome(pass, format!("TV = {tv:.5} over {samples} survivors, mixture mean = {mean:.9} (target {target})"))
}

fn giant_identity() -> Outcome {
    let m = standard();
    let n = 100_000usize;
    let gamma = survival_gamma(m, 2048, 1e-10).unwrap();
    let fractions: Vec<f64> = (0..30u64)
        .into_par_iter()
        .map(|s| components(&generate_drgvr(m, n, s)).giant_fraction)
        .collect();
    let ratio = fractions.iter().sum::<f64>() / fractions.len() as f64 / (2.0 * m.eps());
    let sub = m.with_beta(0.1).unwrap();
    let cap = 30.0 * (n as f64).ln();
    let sub_reports: Vec<(f64, usize)> = (0..30u64)
        .into_par_iter()
        .map(|s| {
            let c = components(&generate_drgvr(sub, n, s));
            (c.giant_fraction, c.c1)
        })
        .collect();
    let sub_ok = sub_reports.iter().all(|&(f, c1)| f < 0.01 && c1 as f64 <= cap);
    let worst = sub_reports.iter().map(|&(_, c)| c).max().unwrap_or(0);
    let pass = (ratio - gamma).abs() <= 0.03 && sub_ok;
    outcome(
        pass,
        format!("giant/(2eps) = {ratio:.5} vs gamma = {gamma:.5}; subcritical max c1 = {worst} (cap {cap:.1})"),
    )
}

fn pruned_graph() -> Outcome {
    let m = standard();
    let n = 100_000usize;
    let (lambda, delta) = (0.05, 0.05);
    let gamma = survival_gamma(m, 2048, 1e-10).unwrap();
    let centre = 2.0 * m.eps() * gamma;
    let cap = 30.0 * (n as f64).ln();
    let runs: Vec<(f64, usize)> = (0..30u64)
        .into_par_iter()
        .map(|s| {
            let g = prune(&generate_drgvr(m, n, s), lambda).unwrap();
            let c = components(&g);
            (c.c1 as f64 / n as f64, c.c2)
        })
        .collect();
    let good = runs.iter().filter(|&&(f, _)| (f - centre).abs() <= delta).count() as f64 / runs.len() as f64;
    let c2_ok = runs.iter().all(|&(_, c2)| c2 as f64 <= cap);
    let worst_c2 = runs.iter().map(|&(_, c)| c).max().unwrap_or(0);
    outcome(
        good >= 0.9 && c2_ok,
        format!("fraction with |c1/n - {centre:.4}| <= {delta}: {good:.3}; max c2 = {worst_c2} (cap {cap:.1})"),
    )
}

fn sandwich() -> Outcome {
    let m = standard();
    let n = 10_000usize;
    let dh = default_delta_hat(n);
    let runs: Vec<(bool, usize)> = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let t = generate_sandwich(m, n, s, dh).unwrap();
            (t.chain_holds, t.violations)
        })
        .collect();
    let held = runs.iter().filter(|r| r.0).count();
    let viol: usize = runs.iter().map(|r| r.1).sum();
    outcome(
        held >= 99,
        format!("chain held in {held}/100 seeds at delta_hat = {dh:.4}; total violating edges = {viol}"),
    )
}

fn azuma() -> Outcome {
    let m = standard();
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, stat) in Statistic::ALL.iter().enumerate() {
        let rep = concentration_experiment(m, 10_000, *stat, 10_000, 100 + i as u64).unwrap();
        pass &= rep.within_bound;
        let slack = rep
            .tails
            .iter()
            .map(|r| r.bound - r.empirical)
            .fold(f64::INFINITY, f64::min);
        parts.push(format!(
            "{}: within = {}, std = {:.3}, max dev = {:.1}, min slack = {slack:.4}",
            stat.name(),
            rep.within_bound,
            rep.std_dev,
            rep.max_deviation
        ));
    }
    outcome(pass, parts.join("; "))
}

fn max_degree_structure() -> Outcome {
    let m = standard();
    let n = 1_000_000usize;
    let pred = predict_max_degree(m, n, DegreeKind::In).unwrap().value;
    let reports: Vec<_> = (0..30u64)
        .into_par_iter()
        .map(|s| max_degree_report(&generate_drgvr(m, n, s)).unwrap())
        .collect();
    let bracket = reports
        .iter()
        .all(|r| (0.5 * pred..=1.5 * pred).contains(&(r.max_plus as f64)));
    let ordering = reports.iter().all(|r| r.max_minus < r.max_s);
    let med_minus = median(
        reports
            .iter()
            .map(|r| r.min_label(DegreeKind::Out) as f64 / n as f64)
            .collect(),
    );
    let med_plus = median(
        reports
            .iter()
            .map(|r| (r.min_label(DegreeKind::In) as f64).ln() / (n as f64).ln())
            .collect(),
    );
    let plus_range = (
        reports.iter().map(|r| r.max_plus).min().unwrap(),
        reports.iter().map(|r| r.max_plus).max().unwrap(),
    );
    let pass = bracket && ordering && med_minus >= 0.5 && med_plus >= 0.8;
    outcome(
        pass,
        format!(
            "max d+ in [{}, {}] vs prediction {pred:.3}; d- < ds always: {ordering}; median min I-/n = {med_minus:.4}; median ln min I+/ln n = {med_plus:.4}",
            plus_range.0, plus_range.1
        ),
    )
}

fn local_limit(degree_tv: f64) -> Outcome {
    let m = standard();
    let opts = TvOptions::default();
    let r1 = estimate_tv(m, 100_000, 1, 10_000, 10_000, 11, &opts).unwrap();
    let agree = r1.ci_low <= degree_tv && degree_tv <= r1.ci_high;
    let small = estimate_tv(m, 10_000, 2, 2_000, 2_000, 12, &opts).unwrap();
    let large = estimate_tv(m, 1_000_000, 2, 2_000, 2_000, 13, &opts).unwrap();
    let shrink = large.tv <= small.tv + small.ci_halfwidth + large.ci_halfwidth;
    outcome(
        agree && shrink,
        format!(
            "r=1: tv = {:.4} CI [{:.4}, {:.4}] vs degree TV {degree_tv:.4}; r=2: tv(1e4) = {:.4} ± {:.4}, tv(1e6) = {:.4} ± {:.4}",
            r1.tv, r1.ci_low, r1.ci_high, small.tv, small.ci_halfwidth, large.tv, large.ci_halfwidth
        ),
    )
}

fn same_partition(g: &LabeledGraph) -> bool {
    let v = g.vertex_count();
    let mut uf = UnionFind::new(v);
    for (a, b) in g.rank_edges() {
        uf.union(a as usize, b as usize);
    }
    let dfs = components_dfs(g);
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut back: HashMap<usize, usize> = HashMap::new();
    for x in 0..v {
        let root = uf.find(x);
        if *map.entry(root).or_insert(dfs[x]) != dfs[x] || *back.entry(dfs[x]).or_insert(root) != root {
            return false;
        }
    }
    let mut dfs_sizes: HashMap<usize, usize> = HashMap::new();
    for &l in &dfs {
        *dfs_sizes.entry(l).or_default() += 1;
    }
    let mut sizes: Vec<usize> = dfs_sizes.into_values().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes == components(g).sizes
}

fn oracles() -> Outcome {
    let params = [(0.5, 0.75), (1.0, 0.75), (3.0, 0.6), (1.0, 1.0), (6.0, 0.9)];
    let mut graphs = 0;
    let mut agree = true;
    for seed in 0..100u64 {
        for &(beta, p) in &params {
            let g = generate_drgvr(ModelParams::from_p(beta, p).unwrap(), 300, seed);
            if g.vertex_count() <= 200 {
                graphs += 1;
                agree &= same_partition(&g);
            }
        }
    }
    // Endpoint uniformity for a vertex with a single earlier neighbour.
    let base = generate_drgvr(standard(), 400, 5);
    let j = (0..base.vertex_count())
        .rev()
        .find(|&j| base.out_degree(j) == 1 && j >= 20)
        .expect("a vertex with out-degree one");
    let replicas = 20_000u64;
    let counts: Vec<u64> = (0..replicas)
        .into_par_iter()
        .map(|s| conditional_resample(&base, s).unwrap().neighbors(j)[0] as usize)
        .fold(
            || vec![0u64; j],
            |mut acc, t| {
                acc[t] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; j],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let expected = replicas as f64 / j as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p_value = ChiSquared::new((j - 1) as f64).unwrap().sf(stat);
    outcome(
        agree && p_value > 0.001,
        format!("{graphs} graphs, partitions agree: {agree}; chi-square over {j} endpoints p = {p_value:.4}"),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        if !o.pass {
            failures += 1;
        }
        println!("{} {name} ({secs:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    let mut degree_tv = f64::NAN;
    report("1 critical intensity at p = 1", &mut betac_endpoint);
    report("2 critical intensity bounds across p", &mut figure_one);
    report("3 survivor count law", &mut vertex_count_law);
    report("4 survivor age law", &mut survivor_age_law);
    report("5 degree mixture", &mut || {
        let (tv, samples) = pooled_degree_tv();
        degree_tv = tv;
        degree_mixture(tv, samples)
    });
    report("6 giant component identity", &mut giant_identity);
    report("7 pruned graph components", &mut pruned_graph);
    report("8 sandwich coupling", &mut sandwich);
    report("9 bounded-difference tails", &mut azuma);
    report("10 maximum degree structure", &mut max_degree_structure);
    report("11 local limit distance", &mut || local_limit(degree_tv));
    report("12 oracle equivalence", &mut oracles);
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
