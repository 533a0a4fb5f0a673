//! Monte Carlo comparison of traditional and comparative backtests.
//!
//! Each period draws `mu_t ~ N(0, 1)` and `x_t ~ N(mu_t, 1)`. One forecaster
//! uses the conditional law `N(mu_t, 1)`, the other the unconditional law
//! `N(0, 2)`. In scenario A the internal model is the conditional one and the
//! standard model the unconditional one; scenario B swaps them.
//!
//! Every replication runs four backtests on the same draws:
//! the VaR traffic light and the ES coverage test on the internal model, the
//! VaR-only comparative test with `G(v) = v`, and the joint (VaR, ES)
//! comparative test with `G1(v) = v`, `G2(e) = exp(e)/(1+exp(e))`.
//!
//! Draws for replication `r` come from ChaCha8 seeded with `seed` on stream
//! `r`, so results do not depend on thread scheduling.

use std::f64::consts::SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::comparative::{
    comparative_backtest, comparative_backtest_var, ForecastRecord, TestLevel, VarianceEstimator,
};
use crate::error::{Error, Result};
use crate::measures::{normal_risk_pair, RiskLevel, RiskPair};
use crate::normal;
use crate::scoring::{GChoice, ScoringSpec};
use crate::traditional::{es_coverage_test, traffic_light_var, TrafficLightConfig};
use crate::Zone;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Internal model uses the conditional distribution.
    A,
    /// Internal model uses the unconditional distribution.
    B,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Scenario::A),
            "B" | "b" => Ok(Scenario::B),
            other => Err(Error::InvalidParameter(format!("unknown scenario {other:?}"))),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::A => "A",
            Scenario::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub eta: TestLevel,
    pub var_level_tl: RiskLevel,
    pub joint_level: RiskLevel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::A,
            n: 250,
            reps: 10_000,
            seed: 0,
            eta: TestLevel::default(),
            var_level_tl: RiskLevel::new(0.01).expect("valid"),
            joint_level: RiskLevel::new(0.025).expect("valid"),
        }
    }
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self { scenario, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InsufficientData { required: 2, actual: self.n });
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        Ok(())
    }
}

/// The four backtests, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BacktestKind {
    TraditionalVar,
    TraditionalEs,
    ComparativeVar,
    ComparativeJoint,
}

impl BacktestKind {
    pub const ALL: [BacktestKind; 4] = [
        BacktestKind::TraditionalVar,
        BacktestKind::TraditionalEs,
        BacktestKind::ComparativeVar,
        BacktestKind::ComparativeJoint,
    ];

    pub fn label(self, cfg: &ScenarioConfig) -> String {
        let tl = cfg.var_level_tl.get();
        let joint = cfg.joint_level.get();
        match self {
            BacktestKind::TraditionalVar => format!("Traditional  VaR_{tl}"),
            BacktestKind::TraditionalEs => format!("Traditional  ES_{joint}"),
            BacktestKind::ComparativeVar => format!("Comparative  VaR_{tl}"),
            BacktestKind::ComparativeJoint => format!("Comparative  (VaR_{joint}, ES_{joint})"),
        }
    }
}

/// Per-replication decisions plus the statistics behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub rep: u64,
    pub exceedances: usize,
    pub es_z: f64,
    pub t2_var: f64,
    pub t2_joint: f64,
    pub zones: [Zone; 4],
}

/// Simulated `(mu_t, x_t)` for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    pub mu: Vec<f64>,
    pub x: Vec<f64>,
}

pub fn draw(cfg: &ScenarioConfig, rep_index: u64) -> Draws {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep_index);
    let mut mu = Vec::with_capacity(cfg.n);
    let mut x = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let m: f64 = StandardNormal.sample(&mut rng);
        let eps: f64 = StandardNormal.sample(&mut rng);
        mu.push(m);
        x.push(m + eps);
    }
    Draws { mu, x }
}

/// Forecasts of the conditional and unconditional normal models.
struct Forecasters {
    conditional: RiskPair,
    unconditional: RiskPair,
}

impl Forecasters {
    fn at(level: RiskLevel) -> Self {
        Self {
            conditional: normal_risk_pair(0.0, 1.0, level).expect("unit sigma"),
            unconditional: normal_risk_pair(0.0, SQRT_2, level).expect("positive sigma"),
        }
    }

    fn internal_standard(&self, scenario: Scenario, mu: f64) -> (RiskPair, RiskPair) {
        let conditional = RiskPair { var: mu + self.conditional.var, es: mu + self.conditional.es };
        match scenario {
            Scenario::A => (conditional, self.unconditional),
            Scenario::B => (self.unconditional, conditional),
        }
    }
}

/// Forecast records at `level` for the given draws.
pub fn forecast_records(scenario: Scenario, draws: &Draws, level: RiskLevel) -> Vec<ForecastRecord> {
    let f = Forecasters::at(level);
    draws
        .mu
        .iter()
        .zip(&draws.x)
        .map(|(&mu, &x)| {
            let (internal, standard) = f.internal_standard(scenario, mu);
            ForecastRecord { x, v: internal.var, e: internal.es, v_star: standard.var, e_star: standard.es }
        })
        .collect()
}

/// Internal-model PIT values for the given draws.
pub fn internal_pits(scenario: Scenario, draws: &Draws) -> Vec<f64> {
    draws
        .mu
        .iter()
        .zip(&draws.x)
        .map(|(&mu, &x)| match scenario {
            Scenario::A => normal::cdf(x - mu),
            Scenario::B => normal::cdf(x / SQRT_2),
        })
        .collect()
}

/// Runs the four backtests on replication `rep_index`.
pub fn run_replication(cfg: &ScenarioConfig, rep_index: u64) -> Result<ReplicationOutcome> {
    cfg.validate()?;
    let draws = draw(cfg, rep_index);

    let var_records = forecast_records(cfg.scenario, &draws, cfg.var_level_tl);
    let joint_records = forecast_records(cfg.scenario, &draws, cfg.joint_level);
    let pits = internal_pits(cfg.scenario, &draws);

    let tl_cfg = TrafficLightConfig::new(cfg.var_level_tl, cfg.n);
    let tl_pairs: Vec<(f64, f64)> = var_records.iter().map(|r| (r.v, r.x)).collect();
    let tl = traffic_light_var(&tl_cfg, &tl_pairs)?;
    let es = es_coverage_test(cfg.joint_level, &pits, cfg.n)?;

    let est = VarianceEstimator::IidSample;
    let comp_var = comparative_backtest_var(GChoice::Identity, cfg.var_level_tl, &var_records, est, cfg.eta)?;
    let comp_joint =
        comparative_backtest(&ScoringSpec::logistic(cfg.joint_level), &joint_records, est, cfg.eta)?;

    Ok(ReplicationOutcome {
        rep: rep_index,
        exceedances: tl.statistic as usize,
        es_z: es.statistic,
        t2_var: comp_var.t2,
        t2_joint: comp_joint.t2,
        zones: [tl.zone, es.zone, comp_var.zone, comp_joint.zone],
    })
}

/// Green/yellow/red counts for one backtest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ZoneCounts {
    pub green: u64,
    pub yellow: u64,
    pub red: u64,
}

impl ZoneCounts {
    fn add(&mut self, zone: Zone) {
        match zone {
            Zone::Green => self.green += 1,
            Zone::Yellow => self.yellow += 1,
            Zone::Red => self.red += 1,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.green += other.green;
        self.yellow += other.yellow;
        self.red += other.red;
        self
    }

    pub fn total(&self) -> u64 {
        self.green + self.yellow + self.red
    }

    /// `[green, yellow, red]` in percent.
    pub fn percentages(&self) -> [f64; 3] {
        let total = self.total() as f64;
        [self.green, self.yellow, self.red].map(|c| 100.0 * c as f64 / total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneRow {
    pub test: BacktestKind,
    pub counts: ZoneCounts,
    pub green_pct: f64,
    pub yellow_pct: f64,
    pub red_pct: f64,
}

/// Zone percentages per backtest, in [`BacktestKind::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneSummary {
    pub rows: Vec<ZoneRow>,
}

impl ZoneSummary {
    pub fn from_counts(counts: [ZoneCounts; 4]) -> Self {
        let rows = BacktestKind::ALL
            .iter()
            .zip(counts)
            .map(|(&test, counts)| {
                let [green_pct, yellow_pct, red_pct] = counts.percentages();
                ZoneRow { test, counts, green_pct, yellow_pct, red_pct }
            })
            .collect();
        Self { rows }
    }

    pub fn from_outcomes(outcomes: &[ReplicationOutcome]) -> Self {
        Self::from_counts(tally(outcomes.iter()))
    }

    pub fn row(&self, test: BacktestKind) -> &ZoneRow {
        self.rows.iter().find(|r| r.test == test).expect("all four rows present")
    }
}

fn tally<'a>(outcomes: impl Iterator<Item = &'a ReplicationOutcome>) -> [ZoneCounts; 4] {
    let mut counts = [ZoneCounts::default(); 4];
    for o in outcomes {
        for (c, &z) in counts.iter_mut().zip(&o.zones) {
            c.add(z);
        }
    }
    counts
}

/// All replication outcomes, ordered by replication index.
pub fn run_outcomes(cfg: &ScenarioConfig) -> Result<Vec<ReplicationOutcome>> {
    cfg.validate()?;
    let reps = cfg.reps as u64;

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..reps).into_par_iter().map(|r| run_replication(cfg, r)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..reps).map(|r| run_replication(cfg, r)).collect()
    }
}

/// Aggregated zone percentages over `cfg.reps` replications.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<ZoneSummary> {
    cfg.validate()?;
    let reps = cfg.reps as u64;

    #[cfg(feature = "parallel")]
    let counts = {
        use rayon::prelude::*;
        (0..reps)
            .into_par_iter()
            .map(|r| run_replication(cfg, r).map(|o| tally(std::iter::once(&o))))
            .try_reduce(|| [ZoneCounts::default(); 4], |a, b| Ok(std::array::from_fn(|i| a[i].merge(b[i]))))?
    };
    #[cfg(not(feature = "parallel"))]
    let counts = {
        let mut acc = [ZoneCounts::default(); 4];
        for r in 0..reps {
            let o = run_replication(cfg, r)?;
            let c = tally(std::iter::once(&o));
            acc = std::array::from_fn(|i| acc[i].merge(c[i]));
        }
        acc
    };

    Ok(ZoneSummary::from_counts(counts))
}
