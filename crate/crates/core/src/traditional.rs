//! Traditional coverage backtests of the hypothesis that forecasts are correct.
//!
//! - Traffic light for VaR: the exceedance count over the window is compared
//!   with Binomial(n, α) cumulative probabilities.
//! - ES coverage: PIT values below α are turned into severities
//!   `s = 1 - u/α`, whose mean is standardised against its null moments
//!   (mean α/2, variance α/3 - α²/4).
//!
//! Both map into green/yellow/red with the cumulative thresholds 0.95 and
//! 0.9999, one-sided in the direction of understated risk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RiskLevel;
use crate::normal;
use crate::Zone;

pub const GREEN_CUMULATIVE: f64 = 0.95;
pub const RED_CUMULATIVE: f64 = 0.9999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficLightConfig {
    pub level: RiskLevel,
    pub n: usize,
    pub green_cum: f64,
    pub red_cum: f64,
}

impl Default for TrafficLightConfig {
    fn default() -> Self {
        Self {
            level: RiskLevel::new(0.01).expect("valid"),
            n: 250,
            green_cum: GREEN_CUMULATIVE,
            red_cum: RED_CUMULATIVE,
        }
    }
}

impl TrafficLightConfig {
    pub fn new(level: RiskLevel, n: usize) -> Self {
        Self { level, n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("window length must be positive".into()));
        }
        if !(0.0 < self.green_cum && self.green_cum < self.red_cum && self.red_cum < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < green_cum < red_cum < 1, got {} and {}",
                self.green_cum, self.red_cum
            )));
        }
        Ok(())
    }

    /// `(k_g, k_r)`: green for `k <= k_g`, red for `k >= k_r`.
    ///
    /// `k_g = max{k : P(K <= k) < green_cum}` (`None` if even `k = 0` fails)
    /// and `k_r = min{k : P(K <= k) >= red_cum}` (`n + 1` if never reached).
    pub fn boundaries(&self) -> (Option<usize>, usize) {
        let cdf = binomial_cdf_table(self.n, self.level.get());
        let k_g = cdf.iter().rposition(|&c| c < self.green_cum);
        let k_r = cdf.iter().position(|&c| c >= self.red_cum).unwrap_or(self.n + 1);
        (k_g, k_r)
    }

    pub fn zone(&self, exceedances: usize) -> Zone {
        let (k_g, k_r) = self.boundaries();
        if k_g.is_some_and(|g| exceedances <= g) {
            Zone::Green
        } else if exceedances >= k_r {
            Zone::Red
        } else {
            Zone::Yellow
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// Exceedance count for the traffic light, `Z` for the ES test.
    pub statistic: f64,
    pub zone: Zone,
    pub p_value: f64,
}

fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    let log_choose = libm::lgamma(nf + 1.0) - libm::lgamma(kf + 1.0) - libm::lgamma(nf - kf + 1.0);
    let log_p = if k == 0 { 0.0 } else { kf * p.ln() };
    let log_q = if k == n { 0.0 } else { (nf - kf) * (-p).ln_1p() };
    (log_choose + log_p + log_q).exp()
}

/// `P(K <= k)` for `k = 0..=n`.
fn binomial_cdf_table(n: usize, p: f64) -> Vec<f64> {
    let mut acc = 0.0;
    (0..=n)
        .map(|k| {
            acc += binomial_pmf(n, p, k);
            acc.min(1.0)
        })
        .collect()
}

/// `P(K >= k)`, summed from the upper end for small tails.
fn binomial_upper_tail(n: usize, p: f64, k: usize) -> f64 {
    (k..=n).rev().map(|j| binomial_pmf(n, p, j)).sum::<f64>().min(1.0)
}

/// Basel-style traffic light on `(v_t, x_t)` pairs; `x_t <= v_t` is an exceedance.
pub fn traffic_light_var(cfg: &TrafficLightConfig, records: &[(f64, f64)]) -> Result<CoverageResult> {
    cfg.validate()?;
    if records.len() != cfg.n {
        return Err(Error::ShapeMismatch { expected: cfg.n, actual: records.len() });
    }
    if let Some(index) = records.iter().position(|(v, x)| !(v.is_finite() && x.is_finite())) {
        return Err(Error::NonFinite { index });
    }
    let k = records.iter().filter(|(v, x)| x <= v).count();
    Ok(CoverageResult {
        statistic: k as f64,
        zone: cfg.zone(k),
        p_value: binomial_upper_tail(cfg.n, cfg.level.get(), k),
    })
}

/// `(1 - u/α) 1{u <= α}`, in `[0, 1]`.
pub fn severity(level: RiskLevel, u: f64) -> f64 {
    let alpha = level.get();
    if u <= alpha {
        1.0 - u / alpha
    } else {
        0.0
    }
}

/// Standardised mean severity.
pub fn es_coverage_statistic(level: RiskLevel, pits: &[f64]) -> f64 {
    let alpha = level.get();
    let n = pits.len() as f64;
    let mean = pits.iter().map(|&u| severity(level, u)).sum::<f64>() / n;
    let null_var = alpha / 3.0 - alpha * alpha / 4.0;
    (mean - alpha / 2.0) / (null_var / n).sqrt()
}

/// Generalized coverage test for ES from PIT values `u_t = F_t(x_t)`.
pub fn es_coverage_test(level: RiskLevel, pits: &[f64], n: usize) -> Result<CoverageResult> {
    if pits.len() != n {
        return Err(Error::ShapeMismatch { expected: n, actual: pits.len() });
    }
    if n == 0 {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }
    if let Some(index) = pits.iter().position(|u| !(0.0..=1.0).contains(u)) {
        return Err(Error::InvalidParameter(format!(
            "PIT value at index {index} is outside [0, 1]: {}",
            pits[index]
        )));
    }
    let z = es_coverage_statistic(level, pits);
    let cum = normal::cdf(z);
    let zone = if cum < GREEN_CUMULATIVE {
        Zone::Green
    } else if cum < RED_CUMULATIVE {
        Zone::Yellow
    } else {
        Zone::Red
    };
    Ok(CoverageResult { statistic: z, zone, p_value: normal::cdf(-z) })
}
