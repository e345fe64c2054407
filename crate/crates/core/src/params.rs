use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Model constants `(beta, eps)`; the birth probability `p = 1/2 + eps` is
/// always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    beta: f64,
    eps: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    beta: f64,
    eps: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = crate::Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.beta, raw.eps)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            beta: p.beta,
            eps: p.eps,
        }
    }
}

impl ModelParams {
    pub fn new(beta: f64, eps: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid("beta", format!("must be positive, got {beta}")));
        }
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(invalid("eps", format!("eps ∈ (0, 1/2] required, got {eps}")));
        }
        Ok(Self { beta, eps })
    }

    /// Builds parameters from the birth probability `p ∈ (1/2, 1]`.
    pub fn from_p(beta: f64, p: f64) -> Result<Self> {
        if !(p > 0.5 && p <= 1.0) {
            return Err(invalid("p", format!("p ∈ (1/2, 1] required, got {p}")));
        }
        Self::new(beta, p - 0.5)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn p(&self) -> f64 {
        0.5 + self.eps
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(beta, self.eps)
    }

    /// No removals happen at `p = 1`.
    pub fn is_dubins(&self) -> bool {
        self.eps >= 0.5
    }

    /// `(1-p)/(2 eps)`: mark-survival exponent.
    pub fn survival_exponent(&self) -> f64 {
        (1.0 - self.p()) / (2.0 * self.eps)
    }

    /// `p/(2 eps)`: shape of the Beta law of survivor ages.
    pub fn age_exponent(&self) -> f64 {
        self.p() / (2.0 * self.eps)
    }

    /// `2 eps / p`: exponent of the limiting kernel `max{x,y}^{-2eps/p}`.
    pub fn kernel_exponent(&self) -> f64 {
        2.0 * self.eps / self.p()
    }

    /// `beta p / (1-p)`, infinite at `p = 1`.
    pub fn offspring_bound(&self) -> f64 {
        self.beta * self.p() / (1.0 - self.p())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_domain() {
        assert!(ModelParams::new(0.0, 0.25).is_err());
        assert!(ModelParams::new(1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.6).is_err());
        assert!(ModelParams::new(f64::NAN, 0.2).is_err());
        assert!(ModelParams::new(1.0, 0.5).is_ok());
    }

    #[test]
    fn serde_validates() {
        let ok: ModelParams = serde_json::from_str(r#"{"beta":1.0,"eps":0.25}"#).unwrap();
        assert_eq!(ok.p(), 0.75);
        assert!(serde_json::from_str::<ModelParams>(r#"{"beta":1.0,"eps":0.6}"#).is_err());
    }

    proptest! {
        #[test]
        fn exponents_consistent(beta in 0.01f64..10.0, eps in 0.001f64..=0.5) {
            let m = ModelParams::new(beta, eps).unwrap();
            let lhs = m.survival_exponent() + m.age_exponent();
            prop_assert!((lhs - 1.0 / (2.0 * eps)).abs() <= 1e-9 * lhs);
            prop_assert!(m.p() == 0.5 + eps);
        }
    }
}
