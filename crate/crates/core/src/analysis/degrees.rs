use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::LabeledGraph;
use crate::params::ModelParams;

/// Principal branch of the Lambert W function, by Halley iteration.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -(-1f64).exp();
    if !(x >= branch) || !x.is_finite() {
        return Err(invalid("x", format!("W_0 needs x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x - branch < 1e-300 {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        // Series around the branch point.
        let q = (2.0 * (std::f64::consts::E * x + 1.0)).sqrt();
        -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q * q * q
    } else if x < 3.0 {
        x.ln_1p() * 0.7
    } else {
        let l = x.ln();
        l - l.ln()
    };
    let tol = 1e-12 * x.abs().max(1.0);
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= tol {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-15 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
    }
    Ok(w)
}

/// Which degree a statistic refers to: total `s`, in-degree `+`, out-degree `-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegreeKind {
    #[serde(rename = "s")]
    Total,
    #[serde(rename = "+")]
    In,
    #[serde(rename = "-")]
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambertPredictor {
    pub n: usize,
    pub which: DegreeKind,
    pub c_const: f64,
    pub w0: f64,
    pub value: f64,
}

/// Second-order prediction `ln n / W_0(ln n) + c ln n / (ln ln n)^2` of the
/// maximum degree of kind `which`.
pub fn predict_max_degree(params: ModelParams, n: usize, which: DegreeKind) -> Result<LambertPredictor> {
    if n < 1000 {
        return Err(invalid("n", format!("need n >= 1000, got {n}")));
    }
    let c_const = match which {
        DegreeKind::Total | DegreeKind::In => {
            if params.is_dubins() {
                return Err(Error::DegenerateP("predict_max_degree for total and in-degree"));
            }
            1.0 + params.offspring_bound().ln()
        }
        DegreeKind::Out => 1.0 + params.beta().ln(),
    };
    let ln_n = (n as f64).ln();
    let w0 = lambert_w0(ln_n)?;
    let value = ln_n / w0 + c_const * ln_n / ln_n.ln().powi(2);
    Ok(LambertPredictor {
        n,
        which,
        c_const,
        w0,
        value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxDegreeReport {
    pub max_s: usize,
    pub max_plus: usize,
    pub max_minus: usize,
    /// Birth labels attaining each maximum, increasing.
    pub argmax_s: Vec<u32>,
    pub argmax_plus: Vec<u32>,
    pub argmax_minus: Vec<u32>,
}

impl MaxDegreeReport {
    pub fn min_label(&self, which: DegreeKind) -> u32 {
        let set = match which {
            DegreeKind::Total => &self.argmax_s,
            DegreeKind::In => &self.argmax_plus,
            DegreeKind::Out => &self.argmax_minus,
        };
        set[0]
    }
}

/// Exact maxima of total, in- and out-degree with their full argmax sets.
pub fn max_degree_report(graph: &LabeledGraph) -> Result<MaxDegreeReport> {
    if graph.vertex_count() == 0 {
        return Err(invalid("graph", "maximum degree of an empty graph"));
    }
    let argmax = |f: &dyn Fn(usize) -> usize| {
        let max = (0..graph.vertex_count()).map(f).max().unwrap_or(0);
        let set: Vec<u32> = (0..graph.vertex_count())
            .filter(|&r| f(r) == max)
            .map(|r| graph.label(r))
            .collect();
        (max, set)
    };
    let (max_s, argmax_s) = argmax(&|r| graph.degree(r));
    let (max_plus, argmax_plus) = argmax(&|r| graph.in_degree(r));
    let (max_minus, argmax_minus) = argmax(&|r| graph.out_degree(r));
    Ok(MaxDegreeReport {
        max_s,
        max_plus,
        max_minus,
        argmax_s,
        argmax_plus,
        argmax_minus,
    })
}
