//! Per-run logs as newline-delimited JSON: one header line, then one line per iteration.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use april::loops::{AprilState, IterationRecord, Method};
use april::envs::Environment;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::{io_err, HarnessError, Result};

/// Which side of a comparison the expert picked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Candidate,
    Incumbent,
}

impl Verdict {
    pub fn from_wins(candidate_wins: bool) -> Self {
        if candidate_wins {
            Verdict::Candidate
        } else {
            Verdict::Incumbent
        }
    }

    pub fn candidate_wins(self) -> bool {
        self == Verdict::Candidate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub schema_version: u32,
    pub run_id: usize,
    pub seed: u64,
    pub config_hash: String,
    pub method: Method,
    pub environment: Environment,
    /// Emulated score of the initial demonstration.
    pub initial_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLine {
    pub iteration: usize,
    pub policy_id: usize,
    /// Index of the demonstration among all shown to the expert (0 is the initial one).
    pub trajectory_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub candidate_score: f64,
    /// Emulated score of the incumbent after this iteration.
    pub incumbent_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    pub simulations: usize,
    pub wall_time_ms: f64,
}

impl IterationLine {
    pub fn from_record(record: &IterationRecord, wall_time_ms: f64) -> Self {
        Self {
            iteration: record.iteration,
            policy_id: record.candidate_id,
            trajectory_id: record.iteration,
            verdict: record.candidate_wins.map(Verdict::from_wins),
            candidate_score: record.candidate_score,
            incumbent_score: record.best_score,
            sigma: record.sigma,
            dim: record.dim,
            selection_score: record.selection_score,
            distance: record.distance,
            simulations: record.simulations,
            wall_time_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Header(RunHeader),
    Iteration(IterationLine),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub header: RunHeader,
    pub iterations: Vec<IterationLine>,
}

impl RunLog {
    pub fn new(header: RunHeader) -> Self {
        Self {
            header,
            iterations: Vec::new(),
        }
    }

    pub fn push(&mut self, line: IterationLine) {
        self.iterations.push(line);
    }

    /// Incumbent score before the first iteration and after each one.
    pub fn best_scores(&self) -> Vec<f64> {
        std::iter::once(self.header.initial_score)
            .chain(self.iterations.iter().map(|l| l.incumbent_score))
            .collect()
    }

    /// Verdicts in order; `None` if any iteration had no expert query.
    pub fn verdicts(&self) -> Option<Vec<bool>> {
        self.iterations
            .iter()
            .map(|l| l.verdict.map(Verdict::candidate_wins))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut out = BufWriter::new(file);
        let mut emit = |line: &Line| -> Result<()> {
            serde_json::to_writer(&mut out, line)?;
            out.write_all(b"\n").map_err(io_err(path))
        };
        emit(&Line::Header(self.header.clone()))?;
        for it in &self.iterations {
            emit(&Line::Iteration(it.clone()))?;
        }
        out.flush().map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let malformed = |message: String| HarnessError::Malformed {
            path: path.to_path_buf(),
            message,
        };
        let mut header = None;
        let mut iterations = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Line>(&line).map_err(|e| malformed(format!("line {}: {e}", n + 1)))? {
                Line::Header(h) if header.is_none() => header = Some(h),
                Line::Header(_) => return Err(malformed(format!("line {}: second header", n + 1))),
                Line::Iteration(_) if header.is_none() => {
                    return Err(malformed("iteration before header".into()))
                }
                Line::Iteration(it) => iterations.push(it),
            }
        }
        let header = header.ok_or_else(|| malformed("no header line".into()))?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(malformed(format!("unsupported schema_version {}", header.schema_version)));
        }
        Ok(Self { header, iterations })
    }
}

/// Rebuilds an APRIL run's final state from its log. The config must hash to
/// the value recorded in the log.
pub fn replay_april(config: &ExperimentConfig, log: &RunLog) -> Result<AprilState> {
    if log.header.method != april::loops::Method::April {
        return Err(HarnessError::InvalidConfig("only APRIL logs can be replayed".into()));
    }
    if config.hash() != log.header.config_hash {
        return Err(HarnessError::InvalidConfig("config hash differs from the log's".into()));
    }
    let verdicts = log
        .verdicts()
        .ok_or_else(|| HarnessError::InvalidConfig("log has iterations without a verdict".into()))?;
    Ok(AprilState::replay(config.april_config()?, log.header.seed, &verdicts)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunLog {
        let mut log = RunLog::new(RunHeader {
            schema_version: SCHEMA_VERSION,
            run_id: 2,
            seed: 9,
            config_hash: "abc".into(),
            method: Method::Es,
            environment: Environment::Cancer,
            initial_score: 5.5,
        });
        log.push(IterationLine {
            iteration: 1,
            policy_id: 1,
            trajectory_id: 1,
            verdict: Some(Verdict::Candidate),
            candidate_score: 5.0,
            incumbent_score: 5.0,
            sigma: Some(1.5),
            dim: 0,
            selection_score: None,
            distance: None,
            simulations: 10,
            wall_time_ms: 0.25,
        });
        log
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ndjson");
        let log = sample();
        log.write(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("{\"kind\":\"header\""));
        assert_eq!(RunLog::read(&path).unwrap(), log);
        assert_eq!(log.best_scores(), vec![5.5, 5.0]);
        assert_eq!(log.verdicts(), Some(vec![true]));
    }

    #[test]
    fn rejects_headless_logs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ndjson");
        std::fs::write(&path, "{\"kind\":\"iteration\"}\n").unwrap();
        assert!(RunLog::read(&path).is_err());
        std::fs::write(&path, "").unwrap();
        assert!(RunLog::read(&path).is_err());
    }
}
