//! Experiment runner: seeded multi-run comparisons, evaluation on a
//! held-out test set, loss-landscape slices and artifact output.
//!
//! An experiment directory contains:
//!
//! - `config.toml` and `spec.toml`: the config as run and the resolved scenario
//! - `runs/run<r>_<algorithm>.csv`: per-batch optimizer history
//! - `final.csv`: final parameters and test metrics per (run, algorithm)
//! - `report.csv`: mean and sample standard deviation per algorithm
//! - `geometry/run<r>_<algorithm>.{txt,svg}`: optimized tool outlines
//! - `timings.json`: wall-clock seconds (the only non-reproducible file)

mod config;
mod export;
mod landscape;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::continual::{
    run_baseline_diffhand, run_ours, run_simple_continual, Algorithm, BatchSchedule, OptimizerRun,
};
use crate::error::{Error, Result};
use crate::scenarios::{Scenario, TaskVariation};

pub use config::{ExperimentConfig, LandscapeSpec, SizePreset};
pub use export::{dump_rollout, export_geometry, parse_polygon, polygon_svg, polygon_text};
pub use landscape::{evaluate_landscape, Landscape};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub theta: Vec<f64>,
    pub test_loss: f64,
    /// Fraction of test variations solved; `None` when not reported.
    pub success_rate: Option<f64>,
    pub skipped_batches: usize,
    pub padded: usize,
    pub error: Option<String>,
    #[serde(skip)]
    pub history: Option<OptimizerRun>,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub failed: usize,
    pub mean_test_loss: f64,
    pub std_test_loss: f64,
    pub mean_success_rate: Option<f64>,
    pub std_success_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub summaries: Vec<AlgorithmSummary>,
    pub records: Vec<RunRecord>,
    /// Number of failed (run, algorithm) pairs excluded from the statistics.
    pub warnings: usize,
    pub wall_seconds: f64,
}

impl EvaluationReport {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }
}

/// Mean and sample standard deviation (NaN below two samples).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(algorithms: &[Algorithm], records: &[RunRecord]) -> Vec<AlgorithmSummary> {
    algorithms
        .iter()
        .map(|&alg| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm == alg).collect();
            let ok: Vec<&RunRecord> = mine.iter().copied().filter(|r| r.ok()).collect();
            let losses: Vec<f64> = ok.iter().map(|r| r.test_loss).collect();
            let rates: Vec<f64> = ok.iter().filter_map(|r| r.success_rate).collect();
            let (ml, sl) = mean_std(&losses);
            let (ms, ss) = if rates.is_empty() { (None, None) } else {
                let (m, s) = mean_std(&rates);
                (Some(m), Some(s))
            };
            AlgorithmSummary {
                algorithm: alg,
                runs: ok.len(),
                failed: mine.len() - ok.len(),
                mean_test_loss: ml,
                std_test_loss: sl,
                mean_success_rate: ms,
                std_success_rate: ss,
            }
        })
        .collect()
}

/// Mean task loss and success count over `test`.
pub fn evaluate(scenario: &Scenario, theta: &[f64], test: &[TaskVariation]) -> Result<(f64, usize)> {
    let per: Vec<(f64, bool)> = test
        .par_iter()
        .map(|v| {
            let t = scenario.rollout::<f64>(v, theta).map_err(|e| Error::Rollout {
                variation: v.index,
                source: Box::new(e),
            })?;
            Ok((scenario.task_loss(&t)?, scenario.success(&t)?))
        })
        .collect::<Result<_>>()?;
    let loss = per.iter().map(|p| p.0).sum::<f64>() / per.len() as f64;
    Ok((loss, per.iter().filter(|p| p.1).count()))
}

fn train(
    scenario: &Scenario,
    algorithm: Algorithm,
    schedule: &BatchSchedule<TaskVariation>,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<OptimizerRun> {
    match algorithm {
        Algorithm::Ours => run_ours(scenario, schedule, &config.continual, scenario.spec.d_prime, seed),
        Algorithm::SimpleContinual => run_simple_continual(scenario, schedule, &config.continual),
        Algorithm::BaselineDiffhand => run_baseline_diffhand(scenario, &schedule.batches[0], &config.continual),
    }
}

/// Runs every listed algorithm for every train seed, evaluates on the
/// shared test set and writes all artifacts under `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<EvaluationReport> {
    config.validate()?;
    let start = Instant::now();
    let spec = config.scenario_spec()?;
    let scenario = Scenario::new(spec)?;
    let test = scenario.sample_variations(config.test_size, config.test_seed);
    let test_seeds: HashSet<u64> = test.iter().map(|v| v.seed).collect();

    create_dir(out)?;
    write_file(&out.join("config.toml"), &config.to_toml())?;
    write_file(
        &out.join("spec.toml"),
        &toml::to_string(&scenario.spec).expect("spec serializes"),
    )?;

    let mut records = Vec::new();
    for (r, &seed) in config.train_seeds().iter().enumerate() {
        let tasks = scenario.sample_variations(scenario.spec.n, seed);
        if let Some(v) = tasks.iter().find(|v| test_seeds.contains(&v.seed)) {
            return Err(Error::config(
                "test_seed",
                format!("train variation {} of seed {seed} is in the test set", v.index),
            ));
        }
        let schedule = BatchSchedule::build(&tasks, scenario.spec.m, seed)?;
        for &alg in &config.algorithms {
            let t0 = Instant::now();
            let outcome = train(&scenario, alg, &schedule, config, seed)
                .and_then(|run| evaluate(&scenario, &run.theta, &test).map(|ev| (run, ev)));
            let wall = t0.elapsed().as_secs_f64();
            let rec = match outcome {
                Ok((run, (loss, solved))) => RunRecord {
                    run: r,
                    seed,
                    algorithm: alg,
                    theta: run.theta.clone(),
                    test_loss: loss,
                    success_rate: scenario
                        .id()
                        .reports_success_rate()
                        .then(|| solved as f64 / test.len() as f64),
                    skipped_batches: run.skipped_batches,
                    padded: run.padded,
                    error: None,
                    history: Some(run),
                    wall_seconds: wall,
                },
                Err(e) => {
                    log::warn!("run {r} ({alg}) failed: {e}");
                    RunRecord {
                        run: r,
                        seed,
                        algorithm: alg,
                        theta: Vec::new(),
                        test_loss: f64::NAN,
                        success_rate: None,
                        skipped_batches: 0,
                        padded: schedule.padded,
                        error: Some(format!("{}: {e}", e.kind())),
                        history: None,
                        wall_seconds: wall,
                    }
                }
            };
            if let Some(run) = &rec.history {
                let stem = format!("run{r}_{alg}");
                write_file(&out.join("runs").join(format!("{stem}.csv")), &history_csv(run, scenario.dim()))?;
                export_geometry(&scenario, &run.theta, &out.join("geometry").join(&stem))?;
            }
            records.push(rec);
        }
    }

    let summaries = summarize(&config.algorithms, &records);
    let report = EvaluationReport {
        warnings: records.iter().filter(|r| !r.ok()).count(),
        summaries,
        records,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    write_file(&out.join("final.csv"), &final_csv(&report.records, scenario.dim()))?;
    write_file(&out.join("report.csv"), &report_csv(&report.summaries))?;
    write_file(&out.join("timings.json"), &timings_json(&report))?;
    Ok(report)
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Columns `batch,algorithm,theta_0..,train_loss,grad_norm,step_scale,active,iterations,restarts,skipped`.
pub fn history_csv(run: &OptimizerRun, dim: usize) -> String {
    let mut s = String::from("batch,algorithm");
    for k in 0..dim {
        write!(s, ",theta_{k}").unwrap();
    }
    s.push_str(",train_loss,grad_norm,step_scale,active,iterations,restarts,skipped\n");
    for b in &run.history {
        write!(s, "{},{}", b.batch, run.algorithm).unwrap();
        for v in &b.theta {
            write!(s, ",{v}").unwrap();
        }
        let active: Vec<String> = b.active.iter().map(|k| k.to_string()).collect();
        writeln!(
            s,
            ",{},{},{},{},{},{},{}",
            b.train_loss,
            b.grad_norm,
            b.step_scale,
            active.join(";"),
            b.iterations,
            b.restarts,
            b.skipped
        )
        .unwrap();
    }
    s
}

/// Columns `run,seed,algorithm,status,test_loss,success_rate,skipped_batches,padded,theta_0..`.
pub fn final_csv(records: &[RunRecord], dim: usize) -> String {
    let mut s = String::from("run,seed,algorithm,status,test_loss,success_rate,skipped_batches,padded");
    for k in 0..dim {
        write!(s, ",theta_{k}").unwrap();
    }
    s.push('\n');
    for r in records {
        let status = match &r.error {
            None => "ok".to_string(),
            Some(e) => format!("\"{}\"", e.replace('"', "'")),
        };
        write!(
            s,
            "{},{},{},{status},{},{},{},{}",
            r.run,
            r.seed,
            r.algorithm,
            r.test_loss,
            opt(r.success_rate),
            r.skipped_batches,
            r.padded
        )
        .unwrap();
        for k in 0..dim {
            write!(s, ",{}", r.theta.get(k).map(|v| v.to_string()).unwrap_or_default()).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Columns `algorithm,runs,failed,mean_test_loss,std_test_loss,mean_success_rate,std_success_rate`.
pub fn report_csv(summaries: &[AlgorithmSummary]) -> String {
    let mut s = String::from("algorithm,runs,failed,mean_test_loss,std_test_loss,mean_success_rate,std_success_rate\n");
    for a in summaries {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            a.algorithm,
            a.runs,
            a.failed,
            a.mean_test_loss,
            a.std_test_loss,
            opt(a.mean_success_rate),
            opt(a.std_success_rate)
        )
        .unwrap();
    }
    s
}

fn timings_json(report: &EvaluationReport) -> String {
    let runs: Vec<serde_json::Value> = report
        .records
        .iter()
        .map(|r| serde_json::json!({"run": r.run, "algorithm": r.algorithm, "wall_seconds": r.wall_seconds}))
        .collect();
    let v = serde_json::json!({"total_seconds": report.wall_seconds, "runs": runs});
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::ScenarioId;

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_std(&[1.0]).1.is_nan());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut c = ExperimentConfig::new(ScenarioId::Pushing);
        c.runs = 3;
        c.spec = toml::from_str("n = 10\n[world]\nhorizon = 50\n").unwrap();
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        let spec = back.scenario_spec().unwrap();
        assert_eq!((spec.n, spec.world.horizon, spec.m), (10, 50, 5));
    }

    #[test]
    fn bad_config_fields_are_reported() {
        let e = ExperimentConfig::from_toml("scenario = \"pushing\"\nruns = 0\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "runs"));
        assert!(ExperimentConfig::from_toml("scenario = \"pushing\"\nbogus = 1\n").is_err());
        let c = ExperimentConfig::from_toml("scenario = \"pushing\"\n[spec]\nbogus = 1\n").unwrap();
        assert!(c.scenario_spec().is_err());
        let e = ExperimentConfig::from_toml("scenario = \"pushing\"\ntest_seed = 3\nruns = 5\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "test_seed"));
    }
}
