//! Numerics for the kernel `kappa(x,y) = beta max{x,y}^{-2eps/p}` on `(0,1]`:
//! operator norm, survival probability of the associated branching process,
//! the critical intensity `beta_c` and its closed-form bounds.
//!
//! The kernel is discretized by Galerkin projection onto piecewise constants
//! over a geometric grid: cells are uniform in `-ln x` on `[e^{-L}, 1]`, and a
//! single cell covers `[0, e^{-L}]`. Every cell integral is exact. Because a
//! cell lying entirely below another sees `max{x,y} = y`, the Galerkin matrix
//! is a rank-one pattern off the diagonal and a matrix-vector product costs
//! `O(m)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;

const MAX_POWER_ITERATIONS: usize = 500_000;
const MAX_PICARD_ITERATIONS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetacBounds {
    pub p: f64,
    pub lower: f64,
    pub upper_simple: f64,
    pub upper_opt: f64,
    pub t_star: f64,
}

/// The function minimized for the sharper upper bound on `beta_c`.
pub fn upper_bound_objective(p: f64, t: f64) -> f64 {
    let inner = (1.0 + 2.0 * t) * (2.0 * t * t + 7.0 * t + 4.0 + 1.0 / p)
        / ((1.0 + t).powi(2) * (t + 1.0 / p) * (2.0 * t + 2.0 / p - 1.0));
    inner.powf(-0.5)
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Lower bound and the two upper bounds for `beta_c(p)`.
pub fn betac_bounds(p: f64) -> Result<BetacBounds> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(invalid("p", format!("p ∈ (1/2, 1] required, got {p}")));
    }
    let lower = ((1.0 - p) / p).sqrt().max(0.25);
    let upper_simple = ((2.0 - p) / (p * (1.0 + 4.0 * p))).sqrt();
    let g = |t: f64| upper_bound_objective(p, t);

    // Coarse scan on (-0.499, 50], then golden section around the best point.
    let steps = 20_000;
    let (lo, hi) = (-0.499, 50.0);
    let grid = |k: usize| lo + (hi - lo) * k as f64 / steps as f64;
    let best = (0..=steps)
        .min_by(|&i, &j| g(grid(i)).total_cmp(&g(grid(j))))
        .expect("nonempty scan");
    // The infimum may sit at the open end t -> -1/2 (it does at p = 1).
    let left = if best == 0 { -0.5 + 1e-12 } else { grid(best - 1) };
    let right = grid((best + 1).min(steps));
    let t_star = golden_section(g, left, right, 1e-10);
    let upper_opt = g(t_star).min(g(grid(best)));
    Ok(BetacBounds {
        p,
        lower,
        upper_simple,
        upper_opt,
        t_star,
    })
}

/// Galerkin discretization of the kernel on a geometric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    pub params: ModelParams,
    pub m: usize,
    /// The grid resolves `[e^{-span}, 1]` geometrically.
    pub span: f64,
    /// Cell boundaries `0 = y_0 < y_1 < ... < y_m = 1`.
    pub edges: Vec<f64>,
    /// Cell widths.
    pub widths: Vec<f64>,
    /// `∫_cell y^{-a} dy`, with `a = 2eps/p` (without the factor beta);
    /// infinite for the first cell when `a = 1`, where it is never used.
    col: Vec<f64>,
    /// `∫∫_{cell × cell} max{x,y}^{-a}` (without beta).
    diag: Vec<f64>,
}

/// Default log-span for `m` cells: balances the `O(span^{-2})` truncation
/// error at the singular end against the `O((span/m)^2)` resolution error.
pub fn default_span(m: usize) -> f64 {
    (m as f64).sqrt().max(8.0)
}

fn power_integral(u: f64, v: f64, e: f64) -> f64 {
    // ∫_u^v y^{e-1} dy, stable for e near 0.
    if e.abs() < 1e-12 {
        (v / u).ln()
    } else if u == 0.0 {
        v.powf(e) / e
    } else {
        (v.powf(e) - u.powf(e)) / e
    }
}

impl DiscreteKernel {
    pub fn new(params: ModelParams, m: usize) -> Result<Self> {
        Self::with_span(params, m, default_span(m))
    }

    pub fn with_span(params: ModelParams, m: usize, span: f64) -> Result<Self> {
        if m < 64 {
            return Err(invalid("m", format!("grid needs at least 64 cells, got {m}")));
        }
        if !(span > 0.0 && span.is_finite()) {
            return Err(invalid("span", format!("must be positive, got {span}")));
        }
        let a = params.kernel_exponent();
        let mut edges = Vec::with_capacity(m + 1);
        edges.push(0.0);
        for i in 1..=m {
            edges.push((-span * (m - i) as f64 / (m - 1) as f64).exp());
        }
        let mut widths = Vec::with_capacity(m);
        let mut col = Vec::with_capacity(m);
        let mut diag = Vec::with_capacity(m);
        for i in 0..m {
            let (u, v) = (edges[i], edges[i + 1]);
            widths.push(v - u);
            let c = power_integral(u, v, 1.0 - a);
            col.push(c);
            // 2 ∫_u^v y^{-a} (y - u) dy
            let cross = if u == 0.0 { 0.0 } else { u * c };
            diag.push(2.0 * (power_integral(u, v, 2.0 - a) - cross));
        }
        Ok(Self {
            params,
            m,
            span,
            edges,
            widths,
            col,
            diag,
        })
    }

    /// `out = B f` where `B_ij = ∫∫_{cell_i × cell_j} kappa`.
    fn apply_raw(&self, f: &[f64], out: &mut [f64]) {
        let beta = self.params.beta();
        // Lower part: sum over cells j < i of w_j f_j, times col_i.
        out[0] = 0.0;
        let mut below = self.widths[0] * f[0];
        for i in 1..self.m {
            out[i] = self.col[i] * below;
            below += self.widths[i] * f[i];
        }
        // Upper part: sum over cells j > i of col_j f_j, times w_i.
        let mut above = 0.0;
        for i in (0..self.m).rev() {
            out[i] += self.widths[i] * above + self.diag[i] * f[i];
            if i > 0 {
                above += self.col[i] * f[i];
            }
            out[i] *= beta;
        }
    }

    /// Cell averages of `T_kappa f` for a piecewise-constant `f`.
    pub fn apply_average(&self, f: &[f64], out: &mut [f64]) {
        self.apply_raw(f, out);
        for (o, w) in out.iter_mut().zip(&self.widths) {
            *o /= w;
        }
    }

    /// Largest eigenvalue of the projected operator, by power iteration on the
    /// symmetric matrix `W^{-1/2} B W^{-1/2}`. Converges when the residual
    /// `|A v - lambda v| / lambda` drops below `tol`.
    pub fn top_eigenvalue(&self, tol: f64) -> Result<f64> {
        let m = self.m;
        let sw: Vec<f64> = self.widths.iter().map(|w| w.sqrt()).collect();
        // Start near the expected shape x^{-a/2}, in orthonormal coordinates.
        let a = self.params.kernel_exponent();
        let mut v: Vec<f64> = (0..m)
            .map(|i| {
                let mid = 0.5 * (self.edges[i] + self.edges[i + 1]);
                sw[i] * mid.powf(-a / 2.0)
            })
            .collect();
        normalize(&mut v);
        let mut g = vec![0.0; m];
        let mut h = vec![0.0; m];
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_POWER_ITERATIONS {
            for i in 0..m {
                g[i] = v[i] / sw[i];
            }
            self.apply_raw(&g, &mut h);
            for i in 0..m {
                h[i] /= sw[i];
            }
            let lambda: f64 = v.iter().zip(&h).map(|(x, y)| x * y).sum();
            residual = v
                .iter()
                .zip(&h)
                .map(|(x, y)| (y - lambda * x).powi(2))
                .sum::<f64>()
                .sqrt()
                / lambda;
            if residual <= tol {
                return Ok(lambda);
            }
            v.copy_from_slice(&h);
            normalize(&mut v);
        }
        Err(Error::NoConvergence {
            iterations: MAX_POWER_ITERATIONS,
            residual,
        })
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Operator norm of `T_kappa` from grids of `m` and `2m` cells, extrapolated
/// assuming the discretization error is `O(1/m)` under [`default_span`].
pub fn operator_norm(params: ModelParams, m: usize) -> Result<f64> {
    operator_norm_with_tol(params, m, 1e-8)
}

pub fn operator_norm_with_tol(params: ModelParams, m: usize, tol: f64) -> Result<f64> {
    let coarse = DiscreteKernel::new(params, m)?.top_eigenvalue(tol)?;
    let fine = DiscreteKernel::new(params, 2 * m)?.top_eigenvalue(tol)?;
    Ok(2.0 * fine - coarse)
}

/// Survival probability `∫ rho` of the multi-type Poisson branching process
/// with kernel `kappa`, where `rho = 1 - exp(-T_kappa rho)` is the maximal fixed
/// point. Damped Picard iteration from `rho = 1` on the grid of `m` cells.
pub fn survival_gamma(params: ModelParams, m: usize, tol: f64) -> Result<f64> {
    let k = DiscreteKernel::new(params, m)?;
    survival_on(&k, tol)
}

pub fn survival_on(k: &DiscreteKernel, tol: f64) -> Result<f64> {
    let m = k.m;
    let mut rho = vec![1.0; m];
    let mut t = vec![0.0; m];
    for _ in 0..MAX_PICARD_ITERATIONS {
        k.apply_average(&rho, &mut t);
        let mut change: f64 = 0.0;
        let mut top: f64 = 0.0;
        for i in 0..m {
            let next = 0.5 * rho[i] + 0.5 * (1.0 - (-t[i]).exp());
            change = change.max((next - rho[i]).abs());
            rho[i] = next;
            top = top.max(next);
        }
        if top < 10.0 * tol {
            return Ok(0.0);
        }
        if change <= tol {
            return Ok(rho.iter().zip(&k.widths).map(|(r, w)| r * w).sum());
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_PICARD_ITERATIONS,
        residual: f64::NAN,
    })
}

/// Critical intensity: the `beta` at which the operator norm equals 1, which
/// by linearity is `1 / ||T_kappa||` at `beta = 1`.
pub fn betac_empirical(p: f64, m: usize, tol: f64) -> Result<f64> {
    let unit = ModelParams::from_p(1.0, p)?;
    Ok(1.0 / operator_norm_with_tol(unit, m, tol)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub p: f64,
    pub lower: f64,
    pub upper_opt: f64,
    pub upper_simple: f64,
    pub empirical: f64,
}

/// Bounds and numerical `beta_c` over a grid of `p` values.
pub fn figure1_table(p_grid: &[f64], m: usize) -> Result<Vec<Figure1Row>> {
    use rayon::prelude::*;
    p_grid
        .par_iter()
        .map(|&p| {
            let b = betac_bounds(p)?;
            Ok(Figure1Row {
                p,
                lower: b.lower,
                upper_opt: b.upper_opt,
                upper_simple: b.upper_simple,
                empirical: betac_empirical(p, m, 1e-8)?,
            })
        })
        .collect()
}

pub fn figure1_csv(rows: &[Figure1Row]) -> String {
    let mut out = String::from("p,lower,upper_opt,upper_simple,empirical\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.p, r.lower, r.upper_opt, r.upper_simple, r.empirical
        ));
    }
    out
}
