//! Prints the four-backtest zone table for both scenarios.

use esbt_core::sim::BacktestKind;
use esbt_core::{run_experiment, Scenario, ScenarioConfig};

fn main() -> Result<(), esbt_core::Error> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_150_101);
    for scenario in [Scenario::A, Scenario::B] {
        let cfg = ScenarioConfig::new(scenario, seed);
        let started = std::time::Instant::now();
        let summary = run_experiment(&cfg)?;
        println!("Scenario {scenario} ({:.2?})", started.elapsed());
        for kind in BacktestKind::ALL {
            let row = summary.row(kind);
            println!(
                "  {:<40} {:>6.2} {:>6.2} {:>6.2}",
                kind.label(&cfg),
                row.green_pct,
                row.yellow_pct,
                row.red_pct
            );
        }
    }
    Ok(())
}
