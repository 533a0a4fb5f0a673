//! Value at Risk and Expected Shortfall of predictive distributions.
//!
//! `X` is the asset value or return, so both measures live in the lower
//! tail and are typically negative. Nothing here flips signs into losses.
//!
//! - `VaR_α(X) = inf { x : P(X <= x) >= α }`
//! - `ES_α(X) = (1/α) ∫_0^α VaR_β(X) dβ`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

/// A probability level strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RiskLevel(f64);

impl RiskLevel {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidRiskLevel(alpha))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RiskLevel {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<RiskLevel> for f64 {
    fn from(level: RiskLevel) -> f64 {
        level.0
    }
}

/// A predictive distribution for the next-period value.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Normal { mu: f64, sigma: f64 },
    Empirical(EmpiricalSample),
}

/// A non-empty sample of finite values, kept sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    sorted: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("empirical sample is empty".into()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 1-based rank `k` of the lower α-quantile: the smallest `k` with `k/n >= α`.
    fn quantile_rank(&self, alpha: f64) -> usize {
        let n = self.sorted.len();
        let nf = n as f64;
        let mut k = ((alpha * nf).ceil() as usize).clamp(1, n);
        while k > 1 && (k - 1) as f64 / nf >= alpha {
            k -= 1;
        }
        while k < n && (k as f64) / nf < alpha {
            k += 1;
        }
        k
    }
}

impl Distribution {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidDistribution(format!("mean must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "standard deviation must be positive and finite, got {sigma}"
            )));
        }
        Ok(Distribution::Normal { mu, sigma })
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        EmpiricalSample::new(values).map(Distribution::Empirical)
    }
}

/// The pair `(VaR_α, ES_α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskPair {
    pub var: f64,
    pub es: f64,
}

/// Lower α-quantile.
pub fn var_of(dist: &Distribution, level: RiskLevel) -> f64 {
    let alpha = level.get();
    match dist {
        Distribution::Normal { mu, sigma } => mu + sigma * normal::quantile(alpha),
        Distribution::Empirical(sample) => sample.sorted[sample.quantile_rank(alpha) - 1],
    }
}

/// Expected Shortfall at level α.
///
/// For an empirical sample the quantile function is a step function, so the
/// defining integral is a finite sum. It is written as `VaR` minus a
/// non-negative correction, which keeps `es <= var` exact in floating point.
pub fn es_of(dist: &Distribution, level: RiskLevel) -> f64 {
    let alpha = level.get();
    match dist {
        Distribution::Normal { mu, sigma } => mu - sigma / alpha * normal::pdf(normal::quantile(alpha)),
        Distribution::Empirical(sample) => {
            let k = sample.quantile_rank(alpha);
            let var = sample.sorted[k - 1];
            let shortfall: f64 = sample.sorted[..k - 1].iter().map(|x| var - x).sum();
            var - shortfall / (sample.len() as f64 * alpha)
        }
    }
}

/// Closed-form `(VaR_α, ES_α)` of `N(mu, sigma^2)`.
pub fn normal_risk_pair(mu: f64, sigma: f64, level: RiskLevel) -> Result<RiskPair> {
    let dist = Distribution::normal(mu, sigma)?;
    Ok(RiskPair { var: var_of(&dist, level), es: es_of(&dist, level) })
}

/// Probability integral transform `F(x)`.
pub fn pit(dist: &Distribution, x: f64) -> f64 {
    match dist {
        Distribution::Normal { mu, sigma } => normal::cdf((x - mu) / sigma),
        Distribution::Empirical(sample) => {
            let below = sample.sorted.partition_point(|&v| v <= x);
            below as f64 / sample.len() as f64
        }
    }
}
