use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Generate,
    DegreeDist,
    Giant,
    Betac,
    Figure1,
    Maxdeg,
    LocalTv,
    Sandwich,
    Concentration,
    Distances,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Generate => "generate",
            Experiment::DegreeDist => "degree-dist",
            Experiment::Giant => "giant",
            Experiment::Betac => "betac",
            Experiment::Figure1 => "figure1",
            Experiment::Maxdeg => "maxdeg",
            Experiment::LocalTv => "local-tv",
            Experiment::Sandwich => "sandwich",
            Experiment::Concentration => "concentration",
            Experiment::Distances => "distances",
        }
    }

    /// Whether the experiment fans out over seeds and needs model parameters.
    pub fn is_seeded(self) -> bool {
        !matches!(self, Experiment::Betac | Experiment::Figure1)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range { base: u64, count: usize },
}

impl Seeds {
    pub fn expand(&self) -> Vec<u64> {
        match self {
            Seeds::List(v) => v.clone(),
            Seeds::Range { base, count } => (0..*count as u64).map(|i| base + i).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    /// Grid points; a range includes `stop` when it lies on the lattice.
    pub fn expand(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                if !(*step > 0.0) || stop < start {
                    return Vec::new();
                }
                let k = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=k)
                    .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                    .collect()
            }
        }
    }
}

/// Which statistics a concentration run measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticChoice {
    All,
    EdgeCountInLabelRange,
    MaxMatchingGreedy,
    TriangleCountCapped,
}

/// One experiment, as a flat JSON document. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Either `eps` or `p = 1/2 + eps`, not both.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Seeds>,
    /// Ball radius for `local-tv`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_graph: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_tree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<usize>,
    /// Pruning level for `giant` and `distances`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<StatisticChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Grid>,
    /// Discretization size for spectral quantities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    /// Write each generated graph as an edge list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub write_graphs: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_GRID_M: usize = 2048;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_M_SAMPLES: usize = 2000;
pub const DEFAULT_REPLICAS: usize = 1000;
pub const DEFAULT_PAIRS: usize = 1000;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Canonical JSON used for hashing and the `config.json` echo.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical JSON, truncated to 16 characters.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        format!("{digest:x}")[..16].to_string()
    }

    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds.as_ref().map(Seeds::expand).unwrap_or_else(|| vec![0])
    }

    pub fn p_values(&self) -> Vec<f64> {
        match (&self.p_grid, self.experiment) {
            (Some(g), _) => g.expand(),
            (None, Some(Experiment::Betac)) if self.resolved_p().is_some() => vec![self.resolved_p().unwrap()],
            _ => Grid::Range {
                start: 0.51,
                stop: 1.0,
                step: 0.01,
            }
            .expand(),
        }
    }

    pub fn resolved_p(&self) -> Option<f64> {
        self.p.or(self.eps.map(|e| 0.5 + e))
    }

    pub fn grid_m(&self) -> usize {
        self.grid_m.unwrap_or(DEFAULT_GRID_M)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_range_expands_in_order() {
        let s: Seeds = serde_json::from_str(r#"{"base": 5, "count": 3}"#).unwrap();
        assert_eq!(s.expand(), vec![5, 6, 7]);
        let l: Seeds = serde_json::from_str("[9, 2]").unwrap();
        assert_eq!(l.expand(), vec![9, 2]);
    }

    #[test]
    fn grid_range_includes_stop() {
        let g = Grid::Range {
            start: 0.51,
            stop: 1.0,
            step: 0.01,
        };
        let v = g.expand();
        assert_eq!(v.len(), 50);
        assert_eq!(v[0], 0.51);
        assert_eq!(*v.last().unwrap(), 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_json(r#"{"beta": 1, "bogus": 2}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = ExperimentConfig::from_json(r#"{"beta": 1.0, "p": 0.75, "n": 10}"#).unwrap();
        let b = ExperimentConfig::from_json(r#"{"n": 10, "p": 0.75, "beta": 1.0}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig::from_json(r#"{"n": 11, "p": 0.75, "beta": 1.0}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
