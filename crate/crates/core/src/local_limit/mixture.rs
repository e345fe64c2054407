use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::{stream, Purpose};

const QUAD_TOL: f64 = 1e-10;

fn require_removals(params: ModelParams, op: &'static str) -> Result<()> {
    if params.is_dubins() {
        return Err(Error::DegenerateP(op));
    }
    Ok(())
}

/// Poisson mean of the root degree when the root sits at survivor quantile `u`
/// (`u = a^{p/2eps}` is uniform on (0,1)).
fn mixture_rate(params: ModelParams, u: f64) -> f64 {
    let p = params.p();
    params.offspring_bound() * (1.0 - (2.0 * p - 1.0) / p * u.powf((1.0 - p) / p))
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn poisson_pmf(mu: f64, k: u64, ln_kfact: f64) -> f64 {
    (k as f64 * mu.ln() - mu - ln_kfact).exp()
}

/// Limiting probability that a uniform survivor has total degree `k`.
pub fn degree_mixture_pmf(params: ModelParams, k: u64) -> Result<f64> {
    require_removals(params, "degree_mixture_pmf")?;
    let lf = ln_factorial(k);
    let out = quadrature::integrate(|u| poisson_pmf(mixture_rate(params, u), k, lf), 0.0, 1.0, QUAD_TOL);
    Ok(out.integral)
}

/// `pmf(0..=K)` with `K` the first index where the tail mass drops below `1e-12`.
pub fn degree_mixture_table(params: ModelParams) -> Result<Vec<f64>> {
    require_removals(params, "degree_mixture_table")?;
    let mut table = Vec::new();
    let mut total = 0.0;
    let floor = params.offspring_bound();
    for k in 0.. {
        let v = degree_mixture_pmf(params, k)?;
        table.push(v);
        total += v;
        if (k as f64) > floor && 1.0 - total < 1e-12 {
            break;
        }
        if k > 10_000 {
            break;
        }
    }
    Ok(table)
}

/// Mean of the limiting degree law, by quadrature of the Poisson rate.
pub fn degree_mixture_mean(params: ModelParams) -> Result<f64> {
    require_removals(params, "degree_mixture_mean")?;
    Ok(quadrature::integrate(|u| mixture_rate(params, u), 0.0, 1.0, QUAD_TOL).integral)
}

/// One draw from the limiting degree law.
pub fn sample_degree_mixture(params: ModelParams, seed: u64) -> Result<u64> {
    Ok(sample_degree_mixture_many(params, 1, seed)?[0])
}

/// `count` i.i.d. draws from the limiting degree law.
pub fn sample_degree_mixture_many(params: ModelParams, count: usize, seed: u64) -> Result<Vec<u64>> {
    require_removals(params, "sample_degree_mixture")?;
    let mut rng = stream(seed, Purpose::Mixture, 0);
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let mu = mixture_rate(params, u);
            Poisson::new(mu).expect("rate is at least beta").sample(&mut rng) as u64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(beta: f64, eps: f64) -> ModelParams {
        ModelParams::new(beta, eps).unwrap()
    }

    #[test]
    fn pmf_zero_closed_form() {
        // beta=1, p=3/4: in the birth-time variable a, pmf(0) = ∫ 1.5 sqrt(a) e^{-3 + 2 sqrt(a)} da;
        // with s = sqrt(a) this is 3 e^{-3} ∫_0^1 s^2 e^{2s} ds = 0.75 (e^{-1} - e^{-3}).
        let exact = 0.75 * ((-1f64).exp() - (-3f64).exp());
        let direct = quadrature::integrate(|a: f64| 1.5 * a.sqrt() * (-3.0 + 2.0 * a.sqrt()).exp(), 0.0, 1.0, 1e-13);
        assert!((direct.integral - exact).abs() < 1e-11);
        let got = degree_mixture_pmf(mp(1.0, 0.25), 0).unwrap();
        assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");
    }

    #[test]
    fn normalization_and_mean() {
        for &(beta, eps) in &[(1.0, 0.25), (0.3, 0.1), (2.0, 0.4), (1.0, 0.05), (5.0, 0.45)] {
            let m = mp(beta, eps);
            let t = degree_mixture_table(m).unwrap();
            let total: f64 = t.iter().sum();
            assert!((total - 1.0).abs() < 1e-8, "{beta} {eps} total {total}");
            let mean: f64 = t.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
            let target = 2.0 * beta * m.p();
            assert!((mean - target).abs() < 1e-6, "{mean} vs {target}");
            assert!((degree_mixture_mean(m).unwrap() - target).abs() < 1e-6);
        }
    }

    #[test]
    fn dubins_is_excluded() {
        let d = mp(1.0, 0.5);
        assert_eq!(degree_mixture_pmf(d, 0), Err(Error::DegenerateP("degree_mixture_pmf")));
        assert!(sample_degree_mixture(d, 0).is_err());
    }

    #[test]
    fn small_beta_concentrates_at_zero() {
        assert!(degree_mixture_pmf(mp(1e-4, 0.25), 0).unwrap() > 0.999);
    }

    #[test]
    fn sampler_matches_pmf() {
        let m = mp(1.0, 0.25);
        let draws = sample_degree_mixture_many(m, 200_000, 3).unwrap();
        let t = degree_mixture_table(m).unwrap();
        let mut counts = vec![0usize; t.len().max(64)];
        for d in &draws {
            counts[*d as usize] += 1;
        }
        let tv: f64 = 0.5
            * counts
                .iter()
                .enumerate()
                .map(|(k, &c)| (c as f64 / draws.len() as f64 - t.get(k).copied().unwrap_or(0.0)).abs())
                .sum::<f64>();
        assert!(tv < 0.01, "tv {tv}");
        let mean = draws.iter().sum::<u64>() as f64 / draws.len() as f64;
        assert!((mean - 1.5).abs() < 0.02);
        assert_eq!(sample_degree_mixture(m, 9).unwrap(), sample_degree_mixture(m, 9).unwrap());
    }
}
