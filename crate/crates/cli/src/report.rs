//! Structured run reports and their text/JSON renderings.

use std::fmt::Write as _;

use esbt_core::sim::{BacktestKind, ScenarioConfig};
use esbt_core::{ComparativeResult, CoverageResult, Scenario, ZoneSummary};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum G2Arg {
    Logistic,
    Exponential,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CoverageTest {
    Traffic,
    Es,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub input: String,
    pub alpha: f64,
    pub g2: G2Arg,
    pub variance: String,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub input: String,
    pub test: CoverageTest,
    pub alpha: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Body {
    Compare { config: CompareConfig, result: ComparativeResult },
    Coverage { config: CoverageConfig, result: CoverageResult },
    Simulate { config: SimulateConfig, result: ZoneSummary },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    #[serde(flatten)]
    pub body: Body,
}

impl Report {
    pub fn new(body: Body) -> Self {
        Self { version: env!("CARGO_PKG_VERSION").to_string(), body }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.body {
            Body::Compare { config, result } => render_compare(&mut out, config, result),
            Body::Coverage { config, result } => render_coverage(&mut out, config, result),
            Body::Simulate { config, result } => render_simulate(&mut out, config, result),
        }
        out
    }
}

fn render_compare(out: &mut String, cfg: &CompareConfig, r: &ComparativeResult) {
    let g2 = match cfg.g2 {
        G2Arg::Logistic => "logistic",
        G2Arg::Exponential => "exponential",
        G2Arg::Zero => "zero (VaR only)",
    };
    let _ = writeln!(out, "Comparative backtest: {}", cfg.input);
    let _ = writeln!(out, "  alpha {}  G2 {g2}  variance {}  eta {}", cfg.alpha, cfg.variance, cfg.level);
    let _ = writeln!(out, "  observations         {}", r.n);
    let _ = writeln!(out, "  mean score internal  {:.8}", r.mean_score_internal);
    let _ = writeln!(out, "  mean score standard  {:.8}", r.mean_score_standard);
    let _ = writeln!(out, "  T2                   {:.6}", r.t2);
    let _ = writeln!(out, "  sigma_N              {:.6e}", r.sigma_n);
    let _ = writeln!(out, "  p-value H0- (internal at least as good)  {:.6}", r.p_superior);
    let _ = writeln!(out, "  p-value H0+ (internal at most as good)   {:.6}", r.p_inferior);
    let _ = writeln!(out, "  zone                 {}", r.zone);
}

fn render_coverage(out: &mut String, cfg: &CoverageConfig, r: &CoverageResult) {
    match cfg.test {
        CoverageTest::Traffic => {
            let _ = writeln!(out, "Traffic-light VaR backtest: {}", cfg.input);
            let _ = writeln!(out, "  alpha {}  n {}", cfg.alpha, cfg.n);
            let _ = writeln!(out, "  exceedances  {}", r.statistic);
        }
        CoverageTest::Es => {
            let _ = writeln!(out, "ES coverage backtest: {}", cfg.input);
            let _ = writeln!(out, "  alpha {}  n {}", cfg.alpha, cfg.n);
            let _ = writeln!(out, "  Z            {:.6}", r.statistic);
        }
    }
    let _ = writeln!(out, "  p-value      {:.6}", r.p_value);
    let _ = writeln!(out, "  zone         {}", r.zone);
}

fn render_simulate(out: &mut String, cfg: &SimulateConfig, summary: &ZoneSummary) {
    let labels = ScenarioConfig { n: cfg.n, reps: cfg.reps, ..ScenarioConfig::new(cfg.scenario, cfg.seed) };
    let _ =
        writeln!(out, "Scenario {}  (n = {}, reps = {}, seed = {})", cfg.scenario, cfg.n, cfg.reps, cfg.seed);
    let _ = writeln!(out, "{:<36} {:>7} {:>7} {:>7}", "Test", "Green", "Yellow", "Red");
    for kind in BacktestKind::ALL {
        let row = summary.row(kind);
        let _ = writeln!(
            out,
            "{:<36} {:>7.2} {:>7.2} {:>7.2}",
            kind.label(&labels),
            row.green_pct,
            row.yellow_pct,
            row.red_pct
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use esbt_core::sim::run_experiment;
    use esbt_core::Zone;

    fn comparative() -> Report {
        Report::new(Body::Compare {
            config: CompareConfig {
                input: "f.csv".into(),
                alpha: 0.025,
                g2: G2Arg::Logistic,
                variance: "nw:4".into(),
                level: 0.05,
            },
            result: ComparativeResult {
                t2: -2.0000000000000004,
                sigma_n: 1.2345678901234567e-3,
                p_superior: 0.9772498680518208,
                p_inferior: 0.022750131948179195,
                zone: Zone::Green,
                n: 250,
                mean_score_internal: -0.1,
                mean_score_standard: 0.30000000000000004,
            },
        })
    }

    #[test]
    fn json_round_trip_is_exact() {
        let cfg = ScenarioConfig { reps: 20, ..ScenarioConfig::new(Scenario::B, 9) };
        let sim = Report::new(Body::Simulate {
            config: SimulateConfig { scenario: Scenario::B, n: 250, reps: 20, seed: u64::MAX },
            result: run_experiment(&cfg).unwrap(),
        });
        let cov = Report::new(Body::Coverage {
            config: CoverageConfig { input: "p.csv".into(), test: CoverageTest::Es, alpha: 0.025, n: 3 },
            result: CoverageResult { statistic: -1.0 / 3.0, zone: Zone::Yellow, p_value: 0.1 + 0.2 },
        });
        for report in [comparative(), sim, cov] {
            let json = report.to_json().unwrap();
            assert_eq!(Report::from_json(&json).unwrap(), report);
        }
    }

    #[test]
    fn json_field_names() {
        let v: serde_json::Value = serde_json::from_str(&comparative().to_json().unwrap()).unwrap();
        assert_eq!(v["command"], "compare");
        assert_eq!(v["config"]["g2"], "logistic");
        assert_eq!(v["result"]["zone"], "green");
        assert!(v["version"].is_string());
    }

    #[test]
    fn simulate_text_has_two_decimals() {
        let cfg = ScenarioConfig { reps: 3, ..ScenarioConfig::new(Scenario::A, 1) };
        let text = Report::new(Body::Simulate {
            config: SimulateConfig { scenario: Scenario::A, n: 250, reps: 3, seed: 1 },
            result: run_experiment(&cfg).unwrap(),
        })
        .to_text();
        assert!(text.contains("Comparative  (VaR_0.025, ES_0.025)"));
        assert!(text.lines().skip(2).all(|l| l
            .split_whitespace()
            .last()
            .unwrap()
            .split('.')
            .nth(1)
            .unwrap()
            .len()
            == 2));
    }
}
