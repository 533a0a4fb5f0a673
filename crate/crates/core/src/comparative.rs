//! Comparative (Diebold-Mariano) backtests.
//!
//! An internal procedure is compared against a standard one on the same
//! realizations. With `d_t = S(v_t, e_t, x_t) - S(v*_t, e*_t, x_t)` the
//! statistic is `T = mean(d) / sigma_N`, referred to the standard normal.
//!
//! Two one-sided nulls are tested with the same `T`:
//!
//! - H0⁻, internal at least as good as standard: rejected for large `T`.
//! - H0⁺, internal at most as good as standard: rejected for small `T`.
//!
//! Rejecting H0⁺ puts the internal model in the green zone, rejecting H0⁻
//! puts it in the red zone, and anything else is yellow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RiskLevel;
use crate::normal;
use crate::scoring::{score_var, score_var_es, GChoice, ScoringSpec};
use crate::Zone;

/// One period: the realization and both procedures' forecasts made one step earlier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub x: f64,
    pub v: f64,
    pub e: f64,
    pub v_star: f64,
    pub e_star: f64,
}

impl ForecastRecord {
    /// Internal and standard roles exchanged.
    pub fn swapped(self) -> Self {
        Self { x: self.x, v: self.v_star, e: self.e_star, v_star: self.v, e_star: self.e }
    }

    fn check_finite(&self, index: usize) -> Result<()> {
        if [self.x, self.v, self.e, self.v_star, self.e_star].iter().all(|f| f.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { index })
        }
    }
}

/// Estimator for the standard deviation of the mean score difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceEstimator {
    /// Sample standard deviation (divisor N-1) over √N.
    #[default]
    IidSample,
    /// Bartlett-weighted long-run variance with the given lag truncation.
    NeweyWest { lag: usize },
}

impl VarianceEstimator {
    /// Estimated standard deviation of `mean(d)`.
    pub fn sigma_n(&self, d: &[f64]) -> Result<f64> {
        let n = d.len();
        if n < 2 {
            return Err(Error::InsufficientData { required: 2, actual: n });
        }
        let nf = n as f64;
        let mean = d.iter().sum::<f64>() / nf;
        let variance = match *self {
            VarianceEstimator::IidSample => d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0),
            VarianceEstimator::NeweyWest { lag } => {
                if lag >= n {
                    return Err(Error::InvalidParameter(format!(
                        "Newey-West lag {lag} must be smaller than the sample size {n}"
                    )));
                }
                let autocov = |l: usize| (l..n).map(|t| (d[t] - mean) * (d[t - l] - mean)).sum::<f64>() / nf;
                let mut lrv = autocov(0);
                for l in 1..=lag {
                    let w = 1.0 - l as f64 / (lag as f64 + 1.0);
                    lrv += 2.0 * w * autocov(l);
                }
                lrv
            }
        };
        let sigma = (variance / nf).sqrt();
        if sigma > 0.0 && sigma.is_finite() {
            Ok(sigma)
        } else {
            Err(Error::DegenerateSeries)
        }
    }
}

/// Level of each one-sided test, in (0, 0.5).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TestLevel(f64);

impl TestLevel {
    pub fn new(eta: f64) -> Result<Self> {
        if eta > 0.0 && eta < 0.5 {
            Ok(Self(eta))
        } else {
            Err(Error::InvalidTestLevel(eta))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `z_{1-η}`, the one-sided critical value.
    pub fn critical_value(self) -> f64 {
        normal::quantile(1.0 - self.0)
    }
}

impl Default for TestLevel {
    fn default() -> Self {
        Self(0.05)
    }
}

impl TryFrom<f64> for TestLevel {
    type Error = Error;

    fn try_from(eta: f64) -> Result<Self> {
        Self::new(eta)
    }
}

impl From<TestLevel> for f64 {
    fn from(level: TestLevel) -> f64 {
        level.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmStatistic {
    pub t2: f64,
    pub sigma_n: f64,
    pub n: usize,
    pub mean_score_internal: f64,
    pub mean_score_standard: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparativeResult {
    pub t2: f64,
    pub sigma_n: f64,
    /// p-value of the test of H0⁻ (internal at least as good).
    pub p_superior: f64,
    /// p-value of the test of H0⁺ (internal at most as good).
    pub p_inferior: f64,
    pub zone: Zone,
    pub n: usize,
    pub mean_score_internal: f64,
    pub mean_score_standard: f64,
}

/// `mean(d) / sigma_N` for a given score-difference series.
pub fn dm_from_differences(d: &[f64], var_est: VarianceEstimator) -> Result<(f64, f64)> {
    if let Some(index) = d.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let sigma_n = var_est.sigma_n(d)?;
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    Ok((mean / sigma_n, sigma_n))
}

fn dm_with<F>(records: &[ForecastRecord], var_est: VarianceEstimator, score: F) -> Result<DmStatistic>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let mut internal = Vec::with_capacity(records.len());
    let mut standard = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        r.check_finite(i)?;
        internal.push(score(r.v, r.e, r.x));
        standard.push(score(r.v_star, r.e_star, r.x));
    }
    let d: Vec<f64> = internal.iter().zip(&standard).map(|(a, b)| a - b).collect();
    let (t2, sigma_n) = dm_from_differences(&d, var_est)?;
    let n = records.len() as f64;
    Ok(DmStatistic {
        t2,
        sigma_n,
        n: records.len(),
        mean_score_internal: internal.iter().sum::<f64>() / n,
        mean_score_standard: standard.iter().sum::<f64>() / n,
    })
}

/// Diebold-Mariano statistic for the joint (VaR, ES) score.
pub fn dm_statistic(
    spec: &ScoringSpec,
    records: &[ForecastRecord],
    var_est: VarianceEstimator,
) -> Result<DmStatistic> {
    dm_with(records, var_est, |v, e, x| score_var_es(spec, v, e, x))
}

fn decide(stat: DmStatistic, eta: TestLevel) -> ComparativeResult {
    let t2 = stat.t2;
    let z = eta.critical_value();
    let zone = if t2 <= -z {
        Zone::Green
    } else if t2 >= z {
        Zone::Red
    } else {
        Zone::Yellow
    };
    ComparativeResult {
        t2,
        sigma_n: stat.sigma_n,
        p_superior: normal::cdf(-t2),
        p_inferior: normal::cdf(t2),
        zone,
        n: stat.n,
        mean_score_internal: stat.mean_score_internal,
        mean_score_standard: stat.mean_score_standard,
    }
}

/// Comparative backtest of (VaR, ES) forecasts with a three-zone decision.
pub fn comparative_backtest(
    spec: &ScoringSpec,
    records: &[ForecastRecord],
    var_est: VarianceEstimator,
    eta: TestLevel,
) -> Result<ComparativeResult> {
    dm_statistic(spec, records, var_est).map(|stat| decide(stat, eta))
}

/// Comparative backtest of VaR forecasts alone; `e` and `e_star` are ignored.
pub fn comparative_backtest_var(
    g: GChoice,
    level: RiskLevel,
    records: &[ForecastRecord],
    var_est: VarianceEstimator,
    eta: TestLevel,
) -> Result<ComparativeResult> {
    if !g.is_strictly_increasing() {
        return Err(Error::InvalidScoringSpec("G must be strictly increasing".into()));
    }
    dm_with(records, var_est, |v, _, x| score_var(g, level, v, x)).map(|stat| decide(stat, eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lvl(a: f64) -> RiskLevel {
        RiskLevel::new(a).unwrap()
    }

    fn synthetic(n: usize, shift: f64) -> Vec<ForecastRecord> {
        (0..n)
            .map(|t| {
                let x = ((t * 37 % 101) as f64 / 101.0 - 0.5) * 4.0;
                ForecastRecord {
                    x,
                    v: -1.9 + shift * ((t % 7) as f64 / 7.0),
                    e: -2.3,
                    v_star: -2.1,
                    e_star: -2.6 + 0.1 * ((t % 3) as f64),
                }
            })
            .collect()
    }

    #[test]
    fn identical_forecasts_are_degenerate() {
        let recs: Vec<_> = synthetic(50, 0.3)
            .into_iter()
            .map(|r| ForecastRecord { v_star: r.v, e_star: r.e, ..r })
            .collect();
        let spec = ScoringSpec::logistic(lvl(0.025));
        assert_eq!(
            comparative_backtest(&spec, &recs, VarianceEstimator::IidSample, TestLevel::default()),
            Err(Error::DegenerateSeries)
        );
        assert_eq!(
            comparative_backtest_var(
                GChoice::Identity,
                lvl(0.01),
                &recs,
                VarianceEstimator::IidSample,
                TestLevel::default()
            ),
            Err(Error::DegenerateSeries)
        );
    }

    #[test]
    fn needs_two_observations() {
        let spec = ScoringSpec::logistic(lvl(0.025));
        assert!(matches!(
            dm_statistic(&spec, &synthetic(1, 0.5), VarianceEstimator::IidSample),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn swap_negates_t2_exactly() {
        let spec = ScoringSpec::logistic(lvl(0.025));
        let recs = synthetic(120, 0.8);
        let swapped: Vec<_> = recs.iter().map(|r| r.swapped()).collect();
        let a = dm_statistic(&spec, &recs, VarianceEstimator::IidSample).unwrap();
        let b = dm_statistic(&spec, &swapped, VarianceEstimator::IidSample).unwrap();
        assert_eq!(a.t2, -b.t2);
        assert_eq!(a.sigma_n, b.sigma_n);
    }

    #[test]
    fn zero_statistic_is_yellow() {
        let stat =
            DmStatistic { t2: 0.0, sigma_n: 1.0, n: 10, mean_score_internal: 0.0, mean_score_standard: 0.0 };
        let r = decide(stat, TestLevel::default());
        assert_eq!(r.zone, Zone::Yellow);
        assert_eq!(r.p_superior, 0.5);
        assert_eq!(r.p_inferior, 0.5);
    }

    #[test]
    fn zone_boundaries_sit_at_critical_values() {
        let eta = TestLevel::default();
        let z = eta.critical_value();
        assert!((z - 1.644_853_626_951_472).abs() < 1e-12);
        let at = |t2: f64| {
            decide(
                DmStatistic { t2, sigma_n: 1.0, n: 10, mean_score_internal: 0.0, mean_score_standard: 0.0 },
                eta,
            )
            .zone
        };
        assert_eq!(at(-3.0), Zone::Green);
        assert_eq!(at(-z), Zone::Green);
        assert_eq!(at(-z + 1e-12), Zone::Yellow);
        assert_eq!(at(z - 1e-12), Zone::Yellow);
        assert_eq!(at(z), Zone::Red);
    }

    #[test]
    fn test_level_validation() {
        assert!(TestLevel::new(0.0).is_err());
        assert!(TestLevel::new(0.5).is_err());
        assert!(TestLevel::new(0.1).is_ok());
    }

    #[test]
    fn var_path_matches_zero_g2_joint_path() {
        let recs = synthetic(200, 1.1);
        let spec = ScoringSpec::var_only(lvl(0.01), GChoice::Identity).unwrap();
        for est in [VarianceEstimator::IidSample, VarianceEstimator::NeweyWest { lag: 4 }] {
            let joint = comparative_backtest(&spec, &recs, est, TestLevel::default()).unwrap();
            let var =
                comparative_backtest_var(GChoice::Identity, lvl(0.01), &recs, est, TestLevel::default())
                    .unwrap();
            assert_eq!(joint, var);
        }
    }

    #[test]
    fn newey_west_lag_zero_is_biased_iid() {
        let d: Vec<f64> = (0..40).map(|i| ((i * 13 % 17) as f64).sin()).collect();
        let iid = VarianceEstimator::IidSample.sigma_n(&d).unwrap();
        let nw0 = VarianceEstimator::NeweyWest { lag: 0 }.sigma_n(&d).unwrap();
        assert!((nw0 * nw0 * 40.0 / 39.0 - iid * iid).abs() < 1e-15);
        assert!(VarianceEstimator::NeweyWest { lag: 40 }.sigma_n(&d).is_err());
    }

    #[test]
    fn newey_west_hand_computed() {
        // Bartlett weight at lag 1 with L = 1 is 1/2.
        let d = [1.0, 2.0, 3.0, 4.0];
        let c = [-1.5, -0.5, 0.5, 1.5];
        let g0: f64 = c.iter().map(|x| x * x).sum::<f64>() / 4.0;
        let g1: f64 = (c[1] * c[0] + c[2] * c[1] + c[3] * c[2]) / 4.0;
        let lrv = g0 + 2.0 * 0.5 * g1;
        let got = VarianceEstimator::NeweyWest { lag: 1 }.sigma_n(&d).unwrap();
        assert!((got - (lrv / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn iid_sigma_matches_known_variance_on_average() {
        use rand::SeedableRng;
        use rand_distr::{Distribution as _, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dist = Normal::new(0.3, 2.0).unwrap();
        let n = 50;
        let draws = 10_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let d: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
            acc += VarianceEstimator::IidSample.sigma_n(&d).unwrap().powi(2);
        }
        let expected = 4.0 / n as f64;
        assert!((acc / draws as f64 / expected - 1.0).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn p_values_are_complementary(t2 in -40f64..40.0) {
            let r = decide(DmStatistic { t2, sigma_n: 1.0, n: 2, mean_score_internal: 0.0, mean_score_standard: 0.0 }, TestLevel::default());
            prop_assert!((r.p_superior + r.p_inferior - 1.0).abs() < 1e-12);
        }

        #[test]
        fn p_superior_decreases_in_t2(a in -8f64..8.0, b in -8f64..8.0) {
            let p = |t2: f64| normal::cdf(-t2);
            if a < b {
                prop_assert!(p(a) >= p(b));
            }
        }

        #[test]
        fn t2_is_scale_invariant(
            d in prop::collection::vec(-5f64..5.0, 3..80),
            c in 1e-3f64..1e3,
        ) {
            let scaled: Vec<f64> = d.iter().map(|x| x * c).collect();
            if let (Ok((a, _)), Ok((b, _))) = (
                dm_from_differences(&d, VarianceEstimator::IidSample),
                dm_from_differences(&scaled, VarianceEstimator::IidSample),
            ) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }
}
