use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

const COMMON: &[&str] = &["experiment", "out"];
const MODEL: &[&str] = &["beta", "eps", "p", "n", "seeds"];

fn knobs(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::Generate => &["write_graphs"],
        Experiment::DegreeDist | Experiment::Maxdeg => &[],
        Experiment::Giant => &["lambda", "grid_m", "tol"],
        Experiment::Betac => &["eps", "p", "p_grid", "grid_m", "tol"],
        Experiment::Figure1 => &["p_grid", "grid_m", "tol"],
        Experiment::LocalTv => &["r", "m_graph", "m_tree", "bootstrap"],
        Experiment::Sandwich => &["delta_hat"],
        Experiment::Concentration => &["replicas", "statistic"],
        Experiment::Distances => &["pairs", "lambda", "grid_m"],
    }
}

fn set_fields(c: &ExperimentConfig) -> Vec<&'static str> {
    let flags = [
        ("beta", c.beta.is_some()),
        ("eps", c.eps.is_some()),
        ("p", c.p.is_some()),
        ("n", c.n.is_some()),
        ("seeds", c.seeds.is_some()),
        ("r", c.r.is_some()),
        ("m_graph", c.m_graph.is_some()),
        ("m_tree", c.m_tree.is_some()),
        ("bootstrap", c.bootstrap.is_some()),
        ("lambda", c.lambda.is_some()),
        ("replicas", c.replicas.is_some()),
        ("statistic", c.statistic.is_some()),
        ("p_grid", c.p_grid.is_some()),
        ("grid_m", c.grid_m.is_some()),
        ("tol", c.tol.is_some()),
        ("delta_hat", c.delta_hat.is_some()),
        ("pairs", c.pairs.is_some()),
        ("write_graphs", c.write_graphs.is_some()),
    ];
    flags.iter().filter(|f| f.1).map(|f| f.0).collect()
}

struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, field: &'static str, message: impl Into<String>) {
        self.0.push(FieldError {
            field,
            message: message.into(),
        });
    }

    fn at_least(&mut self, field: &'static str, value: Option<usize>, min: usize) {
        if let Some(v) = value {
            if v < min {
                self.push(field, format!("must be at least {min}, got {v}"));
            }
        }
    }
}

fn in_open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Static checks of every precondition reachable from the config. Returns
/// all problems found; an empty list means the config is runnable.
pub fn validate(c: &ExperimentConfig) -> Vec<FieldError> {
    let mut e = Errors(Vec::new());
    let Some(exp) = c.experiment else {
        e.push("experiment", "missing experiment name");
        return e.0;
    };

    let allowed: HashSet<&str> = COMMON
        .iter()
        .chain(knobs(exp))
        .chain(if exp.is_seeded() { MODEL } else { &[] })
        .copied()
        .collect();
    for field in set_fields(c) {
        if !allowed.contains(field) {
            e.push(field, format!("not used by experiment {exp}"));
        }
    }

    if let Some(eps) = c.eps {
        if !(eps > 0.0 && eps <= 0.5) {
            e.push("eps", format!("eps ∈ (0, 1/2] required, got {eps}"));
        }
    }
    if let Some(p) = c.p {
        if !(p > 0.5 && p <= 1.0) {
            e.push("p", format!("p ∈ (1/2, 1] required, got {p}"));
        }
    }
    if c.eps.is_some() && c.p.is_some() {
        e.push("p", "give either eps or p, not both");
    }

    if exp.is_seeded() {
        match c.beta {
            None => e.push("beta", "missing"),
            Some(b) if !(b > 0.0 && b.is_finite()) => e.push("beta", format!("must be positive and finite, got {b}")),
            _ => {}
        }
        if c.eps.is_none() && c.p.is_none() {
            e.push("eps", "missing: give eps or p");
        }
        match c.n {
            None => e.push("n", "missing"),
            Some(0) if exp != Experiment::Generate => e.push("n", "must be positive"),
            _ => {}
        }
        let seeds = c.seed_list();
        if seeds.is_empty() {
            e.push("seeds", "no seeds to run");
        }
        if seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
            e.push("seeds", "duplicate seeds");
        }
    }

    match exp {
        Experiment::DegreeDist => {
            if c.resolved_p() == Some(1.0) {
                e.push("p", "degree-dist requires p < 1; the degree mixture law degenerates at p = 1");
            }
        }
        Experiment::Maxdeg => e.at_least("n", c.n, 1000),
        Experiment::LocalTv => {
            match c.r {
                None => e.push("r", "missing"),
                Some(0) => e.push("r", "radius must be at least 1"),
                _ => {}
            }
            e.at_least("m_graph", c.m_graph, 1000);
            e.at_least("m_tree", c.m_tree, 1000);
            e.at_least("bootstrap", c.bootstrap, 1);
        }
        Experiment::Sandwich => {
            if let Some(d) = c.delta_hat {
                if !in_open_unit(d) {
                    e.push("delta_hat", format!("must lie in (0,1), got {d}"));
                }
            }
        }
        Experiment::Concentration => {
            e.at_least("replicas", c.replicas, 1);
            e.at_least("n", c.n, 2);
        }
        Experiment::Distances => e.at_least("pairs", c.pairs, 100),
        Experiment::Betac | Experiment::Figure1 => {
            let grid = c.p_values();
            if grid.is_empty() {
                e.push("p_grid", "empty grid");
            }
            if let Some(bad) = grid.iter().find(|p| !(**p > 0.5 && **p <= 1.0)) {
                e.push("p_grid", format!("every p must lie in (1/2, 1], got {bad}"));
            }
        }
        Experiment::Generate | Experiment::Giant => {}
    }

    if let Some(l) = c.lambda {
        if !in_open_unit(l) {
            e.push("lambda", format!("must lie in (0,1), got {l}"));
        }
    }
    e.at_least("grid_m", c.grid_m, 64);
    if let Some(t) = c.tol {
        if !(t > 0.0 && t < 1e-2) {
            e.push("tol", format!("must lie in (0, 0.01), got {t}"));
        }
    }
    e.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn valid_config_passes() {
        let c = cfg(r#"{"experiment": "giant", "beta": 1.0, "p": 0.75, "n": 1000, "seeds": {"base": 0, "count": 3}}"#);
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn eps_out_of_range() {
        let c = cfg(r#"{"experiment": "generate", "beta": 1.0, "eps": 0.6, "n": 10}"#);
        let errs = validate(&c);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "eps");
        assert!(errs[0].message.contains("eps ∈ (0, 1/2]"));
    }

    #[test]
    fn degree_dist_rejects_p_one() {
        let c = cfg(r#"{"experiment": "degree-dist", "beta": 1.0, "p": 1.0, "n": 100}"#);
        let errs = validate(&c);
        assert!(errs.iter().any(|e| e.field == "p" && e.message.contains("p < 1")));
    }

    #[test]
    fn irrelevant_knob_is_reported() {
        let c = cfg(r#"{"experiment": "generate", "beta": 1.0, "p": 0.75, "n": 10, "r": 2}"#);
        let errs = validate(&c);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "r");
    }

    #[test]
    fn all_problems_are_collected() {
        let c = cfg(r#"{"experiment": "local-tv", "eps": 0.0, "n": 0, "m_graph": 10}"#);
        let fields: Vec<_> = validate(&c).into_iter().map(|e| e.field).collect();
        for f in ["eps", "beta", "n", "r", "m_graph"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn betac_needs_no_model() {
        let c = cfg(r#"{"experiment": "betac", "p_grid": {"start": 0.6, "stop": 0.8, "step": 0.1}}"#);
        assert!(validate(&c).is_empty());
        let bad = cfg(r#"{"experiment": "figure1", "p_grid": [0.4]}"#);
        assert_eq!(validate(&bad)[0].field, "p_grid");
    }

    #[test]
    fn generate_allows_empty_horizon() {
        let c = cfg(r#"{"experiment": "generate", "beta": 1.0, "p": 0.75, "n": 0}"#);
        assert!(validate(&c).is_empty());
    }
}
