//! Evaluation and comparison of Value-at-Risk and Expected Shortfall forecasts.
//!
//! The crate is organised bottom-up:
//!
//! - [`normal`]: standard normal density, CDF and quantile.
//! - [`measures`]: VaR and ES of normal and empirical distributions.
//! - [`scoring`]: strictly consistent scoring functions for VaR and for the
//!   pair (VaR, ES), their expectations, and a grid check of the argmin property.
//! - [`comparative`]: Diebold-Mariano style comparative backtests with a
//!   three-zone decision.
//! - [`traditional`]: the binomial traffic-light test for VaR and the
//!   PIT-severity coverage test for ES.
//! - [`sim`]: a seeded Monte Carlo study comparing all four backtests.

pub mod comparative;
pub mod error;
pub mod measures;
pub mod normal;
mod quadrature;
pub mod scoring;
pub mod sim;
pub mod traditional;

pub use comparative::{
    comparative_backtest, comparative_backtest_var, dm_from_differences, dm_statistic, ComparativeResult,
    DmStatistic, ForecastRecord, TestLevel, VarianceEstimator,
};
pub use error::{Error, Result};
pub use measures::{es_of, normal_risk_pair, pit, var_of, Distribution, RiskLevel, RiskPair};
pub use scoring::{
    expected_score, mean_score, score_var, score_var_es, verify_elicitability, ElicitabilityCheck, GChoice,
    ScoreSeries, ScoringSpec, SearchGrid,
};
pub use sim::{run_experiment, run_replication, Scenario, ScenarioConfig, ZoneSummary};
pub use traditional::{es_coverage_test, traffic_light_var, CoverageResult, TrafficLightConfig};

use serde::{Deserialize, Serialize};

/// Three-zone outcome shared by every backtest in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Green,
    Yellow,
    Red,
}

impl Zone {
    /// Green and Red swap, Yellow is fixed.
    pub fn mirrored(self) -> Self {
        match self {
            Zone::Green => Zone::Red,
            Zone::Yellow => Zone::Yellow,
            Zone::Red => Zone::Green,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Green => "green",
            Zone::Yellow => "yellow",
            Zone::Red => "red",
        }
    }
}

impl std::fmt::Display for Zone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
