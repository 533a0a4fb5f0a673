//! Strictly consistent scoring functions for VaR and for the pair (VaR, ES).
//!
//! For VaR at level α the consistent scores are
//!
//! ```text
//! S_V(v, x) = (1{x <= v} - α) (G(v) - G(x))
//! ```
//!
//! with `G` strictly increasing. The pair (VaR_α, ES_α) is elicited by
//!
//! ```text
//! S_VE(v, e, x) = (1{x <= v} - α) (G1(v) - G1(x))
//!               + (1/α) G2(e) 1{x <= v} (v - x)
//!               + G2(e) (e - v) - 𝒢2(e)
//! ```
//!
//! where `G1` is strictly increasing, `G2` is strictly increasing with
//! `G2(-inf) = 0`, and `𝒢2' = G2`. Choosing `G2 = 0` collapses `S_VE`
//! back to `S_V` with `G = G1`.
//!
//! The admissible `G` are a closed set ([`GChoice`]) so that each carries
//! its exact antiderivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{es_of, var_of, Distribution, RiskLevel, RiskPair};
use crate::quadrature;

/// Choice of the increasing function `G` (and its antiderivative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GChoice {
    /// `G(x) = x`
    Identity,
    /// `G(x) = exp(x)`
    Exponential,
    /// `G(x) = exp(x) / (1 + exp(x))`
    BoundedLogistic,
    /// `G(x) = 0`; only meaningful as `G2`.
    Zero,
}

impl GChoice {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            GChoice::Identity => x,
            GChoice::Exponential => x.exp(),
            GChoice::BoundedLogistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let ex = x.exp();
                    ex / (1.0 + ex)
                }
            }
            GChoice::Zero => 0.0,
        }
    }

    /// The antiderivative `𝒢` used in the joint score.
    pub fn antiderivative(self, x: f64) -> f64 {
        match self {
            GChoice::Identity => 0.5 * x * x,
            GChoice::Exponential => x.exp(),
            // log(1 + e^x), evaluated without overflow
            GChoice::BoundedLogistic => x.max(0.0) + (-x.abs()).exp().ln_1p(),
            GChoice::Zero => 0.0,
        }
    }

    pub fn is_strictly_increasing(self) -> bool {
        !matches!(self, GChoice::Zero)
    }

    /// `lim_{x -> -inf} G(x) = 0`
    pub fn vanishes_at_minus_infinity(self) -> bool {
        !matches!(self, GChoice::Identity)
    }
}

/// Risk level together with the `(G1, G2)` choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoringSpec {
    level: RiskLevel,
    g1: GChoice,
    g2: GChoice,
}

impl ScoringSpec {
    pub fn new(level: RiskLevel, g1: GChoice, g2: GChoice) -> Result<Self> {
        if !g1.is_strictly_increasing() {
            return Err(Error::InvalidScoringSpec("G1 must be strictly increasing".into()));
        }
        if !g2.vanishes_at_minus_infinity() {
            return Err(Error::InvalidScoringSpec(format!(
                "{g2:?} is not admissible as G2: it must vanish at -infinity"
            )));
        }
        Ok(Self { level, g1, g2 })
    }

    /// `G1(v) = v`, `G2(e) = exp(e) / (1 + exp(e))`.
    pub fn logistic(level: RiskLevel) -> Self {
        Self { level, g1: GChoice::Identity, g2: GChoice::BoundedLogistic }
    }

    /// `G1(v) = v`, `G2(e) = exp(e)`.
    pub fn exponential(level: RiskLevel) -> Self {
        Self { level, g1: GChoice::Identity, g2: GChoice::Exponential }
    }

    /// VaR-only scoring, `G2 = 0`.
    pub fn var_only(level: RiskLevel, g: GChoice) -> Result<Self> {
        Self::new(level, g, GChoice::Zero)
    }

    pub fn level(&self) -> RiskLevel {
        self.level
    }

    pub fn g1(&self) -> GChoice {
        self.g1
    }

    pub fn g2(&self) -> GChoice {
        self.g2
    }
}

/// VaR score `(1{x <= v} - α)(G(v) - G(x))`.
pub fn score_var(g: GChoice, level: RiskLevel, v: f64, x: f64) -> f64 {
    let hit = if x <= v { 1.0 } else { 0.0 };
    (hit - level.get()) * (g.eval(v) - g.eval(x))
}

/// Joint (VaR, ES) score.
pub fn score_var_es(spec: &ScoringSpec, v: f64, e: f64, x: f64) -> f64 {
    let quantile_part = score_var(spec.g1, spec.level, v, x);
    if spec.g2 == GChoice::Zero {
        return quantile_part;
    }
    let alpha = spec.level.get();
    let g2e = spec.g2.eval(e);
    let tail = if x <= v { (v - x) / alpha } else { 0.0 };
    quantile_part + g2e * tail + g2e * (e - v) - spec.g2.antiderivative(e)
}

/// Per-period scores of a forecast series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries(Vec<f64>);

impl ScoreSeries {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InsufficientData { required: 1, actual: 0 });
        }
        if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(scores))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// Scores every period and returns the series; `.mean()` gives the average score.
pub fn mean_score(spec: &ScoringSpec, forecasts: &[(f64, f64)], realizations: &[f64]) -> Result<ScoreSeries> {
    if forecasts.len() != realizations.len() {
        return Err(Error::ShapeMismatch { expected: forecasts.len(), actual: realizations.len() });
    }
    let scores =
        forecasts.iter().zip(realizations).map(|(&(v, e), &x)| score_var_es(spec, v, e, x)).collect();
    ScoreSeries::new(scores)
}

const QUAD_TOL: f64 = 1e-10;
const TAIL_SIGMAS: f64 = 10.0;

/// `E[S_VE(v, e, X)]` under `dist`.
///
/// Normal: adaptive quadrature over `mu ± 10 sigma` (stretched to cover the
/// mass of `exp(x) φ` when `G1` is exponential), split at the kink `x = v`.
/// Empirical: exact average over the atoms.
pub fn expected_score(spec: &ScoringSpec, dist: &Distribution, v: f64, e: f64) -> Result<f64> {
    let value = match dist {
        Distribution::Empirical(sample) => {
            let values = sample.values();
            values.iter().map(|&x| score_var_es(spec, v, e, x)).sum::<f64>() / values.len() as f64
        }
        Distribution::Normal { mu, sigma } => {
            let (mu, sigma) = (*mu, *sigma);
            let lo = mu - TAIL_SIGMAS * sigma;
            let mut hi = mu + TAIL_SIGMAS * sigma;
            if spec.g1 == GChoice::Exponential {
                hi += sigma * sigma;
            }
            let integrand = |x: f64| {
                let z = (x - mu) / sigma;
                score_var_es(spec, v, e, x) * crate::normal::pdf(z) / sigma
            };
            if v > lo && v < hi {
                quadrature::integrate(integrand, lo, v, QUAD_TOL)
                    + quadrature::integrate(integrand, v, hi, QUAD_TOL)
            } else {
                quadrature::integrate(integrand, lo, hi, QUAD_TOL)
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::UnsupportedCombination(format!(
            "expected score is not finite for G1={:?}, G2={:?} under {dist:?}",
            spec.g1, spec.g2
        )))
    }
}

/// Rectangular grid of candidate `(v, e)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub v_min: f64,
    pub v_max: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub step: f64,
}

impl SearchGrid {
    pub fn square(min: f64, max: f64, step: f64) -> Self {
        Self { v_min: min, v_max: max, e_min: min, e_max: max, step }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.v_min <= self.v_max
            && self.e_min <= self.e_max
            && [self.v_min, self.v_max, self.e_min, self.e_max, self.step].iter().all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad search grid {self:?}")))
        }
    }

    pub fn v_points(&self) -> Vec<f64> {
        axis(self.v_min, self.v_max, self.step)
    }

    pub fn e_points(&self) -> Vec<f64> {
        axis(self.e_min, self.e_max, self.step)
    }
}

fn axis(min: f64, max: f64, step: f64) -> Vec<f64> {
    let count = ((max - min) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| min + i as f64 * step).collect()
}

/// Outcome of a grid minimisation of the expected score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElicitabilityCheck {
    /// Grid point with the smallest expected score.
    pub argmin: RiskPair,
    pub min_score: f64,
    /// Closed-form or exact `(VaR_α, ES_α)` of the distribution.
    pub truth: RiskPair,
    pub score_at_truth: f64,
    /// Sup-norm distance between `argmin` and `truth`.
    pub gap: f64,
}

/// Exhaustively minimises [`expected_score`] over `grid` and compares the
/// minimiser with the true `(VaR_α, ES_α)`.
pub fn verify_elicitability(
    spec: &ScoringSpec,
    dist: &Distribution,
    grid: &SearchGrid,
) -> Result<ElicitabilityCheck> {
    grid.validate()?;
    let truth = RiskPair { var: var_of(dist, spec.level), es: es_of(dist, spec.level) };
    let vs = grid.v_points();
    let es = grid.e_points();

    let row_min = |v: f64| -> Result<(f64, f64, f64)> {
        let mut best = (f64::INFINITY, v, f64::NAN);
        for &e in &es {
            let s = expected_score(spec, dist, v, e)?;
            if s < best.0 {
                best = (s, v, e);
            }
        }
        Ok(best)
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<(f64, f64, f64)> = {
        use rayon::prelude::*;
        vs.par_iter().map(|&v| row_min(v)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<(f64, f64, f64)> = vs.iter().map(|&v| row_min(v)).collect::<Result<_>>()?;

    // First strict minimum in grid order, independent of evaluation order.
    let (min_score, v_best, e_best) =
        rows.into_iter()
            .fold((f64::INFINITY, f64::NAN, f64::NAN), |acc, r| if r.0 < acc.0 { r } else { acc });

    let score_at_truth = expected_score(spec, dist, truth.var, truth.es)?;
    let argmin = RiskPair { var: v_best, es: e_best };
    let gap = (argmin.var - truth.var).abs().max((argmin.es - truth.es).abs());
    Ok(ElicitabilityCheck { argmin, min_score, truth, score_at_truth, gap })
}
