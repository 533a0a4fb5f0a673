use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use esbt_core::sim::{draw, forecast_records, internal_pits, run_outcomes, ReplicationOutcome};
use esbt_core::traditional::{es_coverage_test, traffic_light_var, TrafficLightConfig};
use esbt_core::{
    comparative_backtest, GChoice, RiskLevel, Scenario, ScenarioConfig, ScoringSpec, TestLevel,
    VarianceEstimator, ZoneSummary,
};

use crate::error::{CliError, Result};
use crate::input::{fmt_exact, Column, InputTable};
use crate::report::{Body, CompareConfig, CoverageConfig, CoverageTest, G2Arg, Report, SimulateConfig};
use crate::variance_label;

pub fn compare(
    input: &Path,
    alpha: f64,
    g2: G2Arg,
    variance: VarianceEstimator,
    level: f64,
) -> Result<Report> {
    let risk = RiskLevel::new(alpha)?;
    let eta = TestLevel::new(level)?;
    let spec = match g2 {
        G2Arg::Logistic => ScoringSpec::logistic(risk),
        G2Arg::Exponential => ScoringSpec::exponential(risk),
        G2Arg::Zero => ScoringSpec::var_only(risk, GChoice::Identity)?,
    };
    let table = match g2 {
        G2Arg::Zero => {
            InputTable::read(input, &[Column::X, Column::V, Column::VStar], &[Column::E, Column::EStar])?
        }
        _ => InputTable::read(input, &[Column::X, Column::V, Column::E, Column::VStar, Column::EStar], &[])?,
    };
    if table.len() < 2 {
        return Err(CliError::Usage(format!(
            "{}: need at least 2 rows, got {}",
            input.display(),
            table.len()
        )));
    }
    let records = table.forecast_records().expect("forecast columns bound");
    let result = comparative_backtest(&spec, &records, variance, eta)?;
    Ok(Report::new(Body::Compare {
        config: CompareConfig {
            input: input.display().to_string(),
            alpha,
            g2,
            variance: variance_label(variance),
            level,
        },
        result,
    }))
}

pub fn coverage(input: &Path, test: CoverageTest, alpha: Option<f64>, n: Option<usize>) -> Result<Report> {
    let alpha = alpha.unwrap_or(match test {
        CoverageTest::Traffic => 0.01,
        CoverageTest::Es => 0.025,
    });
    let risk = RiskLevel::new(alpha)?;
    let required: &[Column] = match test {
        CoverageTest::Traffic => &[Column::X, Column::V],
        CoverageTest::Es => &[Column::Pit],
    };
    let table = InputTable::read(input, required, &[])?;
    let n = n.unwrap_or(table.len());
    if table.len() != n {
        return Err(CliError::Usage(format!(
            "{}: --n {n} but the file has {} rows",
            input.display(),
            table.len()
        )));
    }
    let result = match test {
        CoverageTest::Traffic => {
            let x = table.column(Column::X).expect("bound");
            let v = table.column(Column::V).expect("bound");
            let pairs: Vec<(f64, f64)> = v.iter().copied().zip(x.iter().copied()).collect();
            traffic_light_var(&TrafficLightConfig::new(risk, n), &pairs)?
        }
        CoverageTest::Es => es_coverage_test(risk, table.column(Column::Pit).expect("bound"), n)?,
    };
    Ok(Report::new(Body::Coverage {
        config: CoverageConfig { input: input.display().to_string(), test, alpha, n },
        result,
    }))
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub scenario: Scenario,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub dump_reps: Option<PathBuf>,
    pub dump_records: Option<PathBuf>,
}

pub fn simulate(opts: &SimulateOptions) -> Result<Report> {
    let cfg = ScenarioConfig { n: opts.n, reps: opts.reps, ..ScenarioConfig::new(opts.scenario, opts.seed) };
    cfg.validate()?;
    let outcomes = run_outcomes(&cfg)?;
    if let Some(path) = &opts.dump_reps {
        write_file(path, |w| write_outcomes(w, &outcomes))?;
    }
    if let Some(path) = &opts.dump_records {
        write_file(path, |w| write_records(w, &cfg, 0))?;
    }
    Ok(Report::new(Body::Simulate {
        config: SimulateConfig { scenario: opts.scenario, n: opts.n, reps: opts.reps, seed: opts.seed },
        result: ZoneSummary::from_outcomes(&outcomes),
    }))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let wrap = |source| CliError::Write { path: path.to_path_buf(), source };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    f(&mut w).and_then(|_| w.flush()).map_err(wrap)
}

pub const OUTCOME_HEADER: &str =
    "rep,exceedances,es_z,t2_var,t2_joint,traditional_var,traditional_es,comparative_var,comparative_joint";

pub fn write_outcomes(w: &mut impl Write, outcomes: &[ReplicationOutcome]) -> std::io::Result<()> {
    writeln!(w, "{OUTCOME_HEADER}")?;
    for o in outcomes {
        let [a, b, c, d] = o.zones;
        writeln!(
            w,
            "{},{},{},{},{},{a},{b},{c},{d}",
            o.rep,
            o.exceedances,
            fmt_exact(o.es_z),
            fmt_exact(o.t2_var),
            fmt_exact(o.t2_joint)
        )?;
    }
    Ok(())
}

/// Replication `rep` at the joint level, with the internal model's PITs.
pub fn write_records(w: &mut impl Write, cfg: &ScenarioConfig, rep: u64) -> std::io::Result<()> {
    let draws = draw(cfg, rep);
    let records = forecast_records(cfg.scenario, &draws, cfg.joint_level);
    let pits = internal_pits(cfg.scenario, &draws);
    writeln!(w, "t,x,v,e,v_star,e_star,pit")?;
    for (t, (r, u)) in records.iter().zip(&pits).enumerate() {
        writeln!(
            w,
            "{t},{},{},{},{},{},{}",
            fmt_exact(r.x),
            fmt_exact(r.v),
            fmt_exact(r.e),
            fmt_exact(r.v_star),
            fmt_exact(r.e_star),
            fmt_exact(*u)
        )?;
    }
    Ok(())
}
