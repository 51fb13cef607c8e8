//! Independent runs of one method with the emulated expert.

use std::path::{Path, PathBuf};
use std::time::Instant;

use april::loops::{AprilState, EmulatedExpert, EsState, IrlState, IterationRecord, Method};
use serde::Serialize;

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::{io_err, HarnessError, Result};
use crate::runlog::{IterationLine, RunHeader, RunLog};
use crate::stats::summarize;

/// Runs `run_id` of `config` (seed `config.seed + run_id`) to completion.
pub fn run_one(config: &ExperimentConfig, run_id: usize) -> Result<RunLog> {
    config.validate()?;
    let seed = config.seed.wrapping_add(run_id as u64);
    let hash = config.hash();
    let header = |initial_score| RunHeader {
        schema_version: SCHEMA_VERSION,
        run_id,
        seed,
        config_hash: hash.clone(),
        method: config.method,
        environment: config.environment,
        initial_score,
    };
    let timed = |f: &mut dyn FnMut() -> april::Result<IterationRecord>| -> Result<IterationLine> {
        let start = Instant::now();
        let record = f()?;
        Ok(IterationLine::from_record(&record, start.elapsed().as_secs_f64() * 1e3))
    };

    let log = match config.method {
        Method::April => {
            let april_config = config.april_config()?;
            let mut oracle = EmulatedExpert::new(april_config.env.clone());
            let mut state = AprilState::new(april_config, seed)?;
            let mut log = RunLog::new(header(state.best_score()?));
            for _ in 0..config.n_iterations {
                log.push(timed(&mut || state.iterate(&mut oracle))?);
            }
            log
        }
        Method::Es => {
            let es_config = config.es_config()?;
            let mut oracle = EmulatedExpert::new(es_config.env.clone());
            let mut state = EsState::new(es_config, seed)?;
            let mut log = RunLog::new(header(state.best_score()?));
            for _ in 0..config.n_iterations {
                log.push(timed(&mut || state.iterate(&mut oracle))?);
            }
            log
        }
        Method::Irl => {
            let mut state = IrlState::new(config.irl_config()?, seed)?;
            let mut log = RunLog::new(header(state.best_score()));
            for _ in 0..config.n_iterations {
                log.push(timed(&mut || state.iterate())?);
            }
            log
        }
    };
    Ok(log)
}

/// All runs, in run-id order. Each run owns its seed, so the result does not
/// depend on whether runs execute in parallel.
pub fn run_all(config: &ExperimentConfig) -> Result<Vec<RunLog>> {
    config.validate()?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..config.n_runs).into_par_iter().map(|i| run_one(config, i)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.n_runs).map(|i| run_one(config, i)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    config_hash: String,
    config: &'a ExperimentConfig,
    runs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub logs: Vec<RunLog>,
    pub summary_path: PathBuf,
    pub best_scores_path: PathBuf,
}

/// Executes every run and writes, under `out`:
/// `runs/run_NNN.ndjson`, `best_scores.csv` (run_id, iteration, best_score),
/// `summary.csv` (per-iteration mean/median/quartiles over runs) and `manifest.json`.
pub fn cmd_run(config: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let logs = run_all(config)?;
    let runs_dir = out.join("runs");
    std::fs::create_dir_all(&runs_dir).map_err(io_err(&runs_dir))?;
    let mut names = Vec::with_capacity(logs.len());
    for log in &logs {
        let name = format!("run_{:03}.ndjson", log.header.run_id);
        log.write(&runs_dir.join(&name))?;
        names.push(format!("runs/{name}"));
    }

    let best_scores_path = out.join("best_scores.csv");
    let mut w = csv::Writer::from_path(&best_scores_path)?;
    w.write_record(["run_id", "iteration", "best_score"])?;
    for log in &logs {
        for (t, score) in log.best_scores().iter().enumerate() {
            w.write_record([log.header.run_id.to_string(), t.to_string(), score.to_string()])?;
        }
    }
    w.flush().map_err(io_err(&best_scores_path))?;

    let summary_path = out.join("summary.csv");
    write_summary(config, &logs, &summary_path)?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        config_hash: config.hash(),
        config,
        runs: names,
    };
    let manifest_path = out.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_vec_pretty(&manifest)?).map_err(io_err(&manifest_path))?;

    Ok(RunOutcome {
        logs,
        summary_path,
        best_scores_path,
    })
}

/// One row per iteration `1..=n_iterations`.
fn write_summary(config: &ExperimentConfig, logs: &[RunLog], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "environment", "iteration", "mean", "median", "q1", "q3"])?;
    let curves: Vec<Vec<f64>> = logs.iter().map(RunLog::best_scores).collect();
    for t in 1..=config.n_iterations {
        let column: Vec<f64> = curves
            .iter()
            .map(|c| {
                c.get(t).copied().ok_or_else(|| HarnessError::MissingInput(format!("iteration {t} missing from a run")))
            })
            .collect::<Result<_>>()?;
        let s = summarize(&column);
        w.write_record([
            config.method.to_string(),
            config.environment.to_string(),
            t.to_string(),
            s.mean.to_string(),
            s.median.to_string(),
            s.q1.to_string(),
            s.q3.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}
