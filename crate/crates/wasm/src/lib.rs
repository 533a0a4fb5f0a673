//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string; the pure functions underneath are
//! ordinary Rust and are tested natively.

use esbt_core::sim::{draw, forecast_records, run_experiment, Draws};
use esbt_core::{
    comparative_backtest, expected_score, normal_risk_pair, score_var_es, ComparativeResult, Distribution,
    GChoice, RiskLevel, RiskPair, Scenario, ScenarioConfig, ScoringSpec, TestLevel, VarianceEstimator,
    ZoneSummary,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest simulation the page will run on the main thread.
pub const MAX_REPS: usize = 20_000;
pub const MAX_GRID: usize = 121;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surface {
    pub v: Vec<f64>,
    pub e: Vec<f64>,
    /// Row-major, `scores[i * e.len() + j]` at `(v[i], e[j])`; `null` where `e > v`.
    pub scores: Vec<Option<f64>>,
    pub argmin: RiskPair,
    pub truth: RiskPair,
}

fn spec_for(alpha: f64, g2: &str) -> esbt_core::Result<ScoringSpec> {
    let level = RiskLevel::new(alpha)?;
    match g2 {
        "logistic" => Ok(ScoringSpec::logistic(level)),
        "exponential" => Ok(ScoringSpec::exponential(level)),
        "zero" => ScoringSpec::var_only(level, GChoice::Identity),
        other => Err(esbt_core::Error::InvalidParameter(format!("unknown G2 {other:?}"))),
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

/// Expected joint score of N(mu, sigma^2) over a square grid around the true pair.
pub fn score_surface(alpha: f64, mu: f64, sigma: f64, g2: &str, steps: usize) -> esbt_core::Result<Surface> {
    if !(3..=MAX_GRID).contains(&steps) {
        return Err(esbt_core::Error::InvalidParameter(format!("steps must be in 3..={MAX_GRID}")));
    }
    let spec = spec_for(alpha, g2)?;
    let dist = Distribution::normal(mu, sigma)?;
    let truth = normal_risk_pair(mu, sigma, spec.level())?;
    let half = 1.5 * sigma.max(truth.var - truth.es);
    let v = linspace(truth.var - half, truth.var + half, steps);
    let e = linspace(truth.es - half, truth.es + half, steps);

    let mut scores = Vec::with_capacity(steps * steps);
    let mut best = (f64::INFINITY, truth);
    for &vi in &v {
        for &ej in &e {
            if ej > vi {
                scores.push(None);
                continue;
            }
            let s = expected_score(&spec, &dist, vi, ej)?;
            if s < best.0 {
                best = (s, RiskPair { var: vi, es: ej });
            }
            scores.push(Some(s));
        }
    }
    Ok(Surface { v, e, scores, argmin: best.1, truth })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationView {
    pub result: ComparativeResult,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub v_star: Vec<f64>,
    /// Running sum of the per-period score differences.
    pub cumulative_d: Vec<f64>,
}

/// Comparative backtest on one simulated replication.
pub fn compare_replication(
    scenario: &str,
    seed: u64,
    rep: u64,
    alpha: f64,
    g2: &str,
    lag: Option<usize>,
) -> esbt_core::Result<ReplicationView> {
    let scenario: Scenario = scenario.parse()?;
    let spec = spec_for(alpha, g2)?;
    let cfg = ScenarioConfig::new(scenario, seed);
    let draws: Draws = draw(&cfg, rep);
    let records = forecast_records(scenario, &draws, spec.level());
    let est = lag.map_or(VarianceEstimator::IidSample, |lag| VarianceEstimator::NeweyWest { lag });
    let result = comparative_backtest(&spec, &records, est, TestLevel::default())?;
    let cumulative_d = records
        .iter()
        .scan(0.0, |acc, r| {
            *acc += score_var_es(&spec, r.v, r.e, r.x) - score_var_es(&spec, r.v_star, r.e_star, r.x);
            Some(*acc)
        })
        .collect();
    Ok(ReplicationView {
        result,
        x: records.iter().map(|r| r.x).collect(),
        v: records.iter().map(|r| r.v).collect(),
        v_star: records.iter().map(|r| r.v_star).collect(),
        cumulative_d,
    })
}

pub fn simulate_table(scenario: &str, seed: u64, reps: usize) -> esbt_core::Result<ZoneSummary> {
    if reps > MAX_REPS {
        return Err(esbt_core::Error::InvalidParameter(format!("at most {MAX_REPS} replications")));
    }
    let cfg = ScenarioConfig { reps, ..ScenarioConfig::new(scenario.parse()?, seed) };
    run_experiment(&cfg)
}

fn to_js<T: Serialize>(r: esbt_core::Result<T>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = scoreSurface)]
pub fn score_surface_js(alpha: f64, mu: f64, sigma: f64, g2: &str, steps: usize) -> Result<String, JsError> {
    to_js(score_surface(alpha, mu, sigma, g2, steps))
}

/// `lag < 0` selects the i.i.d. variance estimator.
#[wasm_bindgen(js_name = compareReplication)]
pub fn compare_replication_js(
    scenario: &str,
    seed: u64,
    rep: u64,
    alpha: f64,
    g2: &str,
    lag: i32,
) -> Result<String, JsError> {
    let lag = usize::try_from(lag).ok();
    to_js(compare_replication(scenario, seed, rep, alpha, g2, lag))
}

#[wasm_bindgen(js_name = simulateTable)]
pub fn simulate_table_js(scenario: &str, seed: u64, reps: usize) -> Result<String, JsError> {
    to_js(simulate_table(scenario, seed, reps))
}
