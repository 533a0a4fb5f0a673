//! `esbt` command-line front end: CSV in, text or JSON report out.
//!
//! Exit codes: 0 on success (whatever the zone), 2 for usage and input
//! errors, 3 when the score-difference series is degenerate.

pub mod commands;
pub mod error;
pub mod input;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use esbt_core::{Scenario, VarianceEstimator};

pub use error::{CliError, Result, EXIT_DEGENERATE, EXIT_USAGE};
pub use report::{Body, CoverageTest, Format, G2Arg, Report};

#[derive(Debug, Parser)]
#[command(name = "esbt", version, about = "Backtests for Value-at-Risk and Expected Shortfall forecasts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Comparative backtest of internal against standard forecasts
    Compare {
        /// CSV with columns x, v, e, v_star, e_star
        input: PathBuf,
        #[arg(long, default_value_t = 0.025)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = G2Arg::Logistic)]
        g2: G2Arg,
        /// `iid` or `nw:<lag>` (Newey-West with Bartlett weights)
        #[arg(long, default_value = "iid", value_parser = parse_variance)]
        variance: VarianceEstimator,
        /// Test level eta
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Traditional coverage backtest (traffic light for VaR, PIT-based for ES)
    Coverage {
        /// CSV with columns x, v (traffic) or pit (es)
        input: PathBuf,
        #[arg(long, value_enum)]
        test: CoverageTest,
        /// Defaults to 0.01 for traffic and 0.025 for es
        #[arg(long)]
        alpha: Option<f64>,
        /// Window length; defaults to the number of rows
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Monte Carlo study of all four backtests
    Simulate {
        #[arg(long, default_value = "A", value_parser = parse_scenario)]
        scenario: Scenario,
        #[arg(long, default_value_t = 250)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write one CSV row per replication
        #[arg(long)]
        dump_reps: Option<PathBuf>,
        /// Write replication 0 as a `compare`/`coverage` input CSV
        #[arg(long)]
        dump_records: Option<PathBuf>,
    },
}

fn parse_variance(s: &str) -> std::result::Result<VarianceEstimator, String> {
    if s == "iid" {
        return Ok(VarianceEstimator::IidSample);
    }
    s.strip_prefix("nw:")
        .and_then(|lag| lag.parse().ok())
        .map(|lag| VarianceEstimator::NeweyWest { lag })
        .ok_or_else(|| format!("expected `iid` or `nw:<lag>`, got {s:?}"))
}

fn parse_scenario(s: &str) -> std::result::Result<Scenario, String> {
    s.parse().map_err(|e: esbt_core::Error| e.to_string())
}

pub fn variance_label(est: VarianceEstimator) -> String {
    match est {
        VarianceEstimator::IidSample => "iid".into(),
        VarianceEstimator::NeweyWest { lag } => format!("nw:{lag}"),
    }
}

/// Runs one command, writing the rendered report to `out` only on success.
pub fn run(cli: Cli, out: &mut impl std::io::Write) -> Result<Report> {
    let (report, format) = match cli.command {
        Command::Compare { input, alpha, g2, variance, level, format } => {
            (commands::compare(&input, alpha, g2, variance, level)?, format)
        }
        Command::Coverage { input, test, alpha, n, format } => {
            (commands::coverage(&input, test, alpha, n)?, format)
        }
        Command::Simulate { scenario, n, reps, seed, format, dump_reps, dump_records } => {
            let opts = commands::SimulateOptions { scenario, n, reps, seed, dump_reps, dump_records };
            (commands::simulate(&opts)?, format)
        }
    };
    let rendered = match format {
        Format::Text => report.to_text(),
        Format::Machine => report.to_json()? + "\n",
    };
    out.write_all(rendered.as_bytes())?;
    Ok(report)
}
