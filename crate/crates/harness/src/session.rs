//! Interactive sessions: one APRIL loop per session, driven by a human's verdicts.

use std::path::{Path, PathBuf};

use april::envs::{Environment, Trajectory};
use april::loops::AprilState;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::{io_err, HarnessError, Result};
use crate::runlog::Verdict;

/// Settings a client may change when creating a session.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionOverrides {
    pub seed: Option<u64>,
    pub noise: Option<f64>,
    pub hazard: Option<bool>,
    pub lambda: Option<usize>,
    pub c: Option<f64>,
    pub radius: Option<f64>,
    pub n_rollouts: Option<usize>,
    pub hidden: Option<usize>,
    /// Stop offering comparisons after this many verdicts.
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub environment: Environment,
    #[serde(default)]
    pub overrides: SessionOverrides,
}

impl CreateSession {
    /// Session settings on top of `base`, validated.
    pub fn resolve(&self, base: &ExperimentConfig) -> Result<(ExperimentConfig, u64, Option<usize>)> {
        let o = &self.overrides;
        let config = ExperimentConfig {
            method: april::loops::Method::April,
            environment: self.environment,
            noise: o.noise.unwrap_or(if self.environment == Environment::Cancer { base.noise } else { 0.0 }),
            hazard: o.hazard.unwrap_or(self.environment == Environment::Cancer && base.hazard),
            lambda: o.lambda.unwrap_or(base.lambda),
            c: o.c.unwrap_or(base.c),
            radius: o.radius.unwrap_or(base.radius),
            n_rollouts: o.n_rollouts.or(base.n_rollouts),
            hidden: o.hidden.or(base.hidden),
            es_ranking: None,
            irl_generations: None,
            output: None,
            ..base.clone()
        };
        config.validate()?;
        if o.max_iterations == Some(0) {
            return Err(HarnessError::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok((config, o.seed.unwrap_or(base.seed), o.max_iterations))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub comparison_id: u64,
    pub winner: Verdict,
}

/// Everything needed to resume a session; written after every change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub schema_version: u32,
    pub id: String,
    pub config: ExperimentConfig,
    pub max_iterations: Option<usize>,
    pub state: AprilState,
    pub verdicts: Vec<VerdictEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonView<'a> {
    pub comparison_id: u64,
    /// The iteration this verdict completes.
    pub iteration: usize,
    pub candidate: &'a Trajectory,
    pub incumbent: &'a Trajectory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub iterations: usize,
    /// Emulated incumbent score before the first verdict and after each one.
    pub incumbent_scores: Vec<f64>,
    /// Behavioral dimension after each verdict.
    pub dims: Vec<usize>,
    /// Step size after each verdict.
    pub sigmas: Vec<f64>,
    pub verdicts: Vec<Verdict>,
    /// Current behavioral dimension D.
    pub dim: usize,
    pub sigma: f64,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveItem {
    pub index: usize,
    pub incumbent: bool,
    pub score: f64,
    pub trajectory: Trajectory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictAccepted {
    pub accepted: bool,
    pub next_iteration: usize,
    /// The same verdict had already been applied.
    pub duplicate: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerdictRejection {
    /// No comparison is ready yet for this id.
    NotReady,
    /// The id does not name the pending comparison or a resolved one.
    Stale { pending: Option<u64> },
    /// The comparison was already resolved the other way.
    Conflict,
    Complete,
}

impl SessionRecord {
    pub fn create(id: String, request: &CreateSession, base: &ExperimentConfig) -> Result<Self> {
        let (config, seed, max_iterations) = request.resolve(base)?;
        let state = AprilState::new(config.april_config()?, seed)?;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            id,
            config,
            max_iterations,
            state,
            verdicts: Vec::new(),
        })
    }

    pub fn complete(&self) -> bool {
        self.max_iterations.is_some_and(|m| self.state.iteration >= m)
    }

    /// A comparison has to be computed before the expert can answer.
    pub fn needs_proposal(&self) -> bool {
        self.state.pending.is_none() && !self.complete()
    }

    pub fn comparison(&self) -> Option<ComparisonView<'_>> {
        let pending = self.state.pending.as_ref()?;
        Some(ComparisonView {
            comparison_id: pending.comparison_id,
            iteration: self.state.iteration + 1,
            candidate: &pending.trajectory,
            incumbent: self.state.incumbent_trajectory(),
        })
    }

    /// Applies a verdict to the pending comparison. Re-posting a verdict that
    /// was already applied is accepted without effect.
    pub fn apply_verdict(
        &mut self,
        comparison_id: u64,
        winner: Verdict,
    ) -> Result<std::result::Result<VerdictAccepted, VerdictRejection>> {
        if let Some(done) = self.verdicts.iter().find(|v| v.comparison_id == comparison_id) {
            return Ok(if done.winner == winner {
                Ok(VerdictAccepted {
                    accepted: true,
                    next_iteration: self.state.iteration + 1,
                    duplicate: true,
                })
            } else {
                Err(VerdictRejection::Conflict)
            });
        }
        if self.complete() {
            return Ok(Err(VerdictRejection::Complete));
        }
        match &self.state.pending {
            Some(p) if p.comparison_id == comparison_id => {}
            None if comparison_id == self.state.iteration as u64 + 1 => return Ok(Err(VerdictRejection::NotReady)),
            other => {
                return Ok(Err(VerdictRejection::Stale {
                    pending: other.as_ref().map(|p| p.comparison_id),
                }))
            }
        }
        self.state.resolve(winner.candidate_wins())?;
        self.verdicts.push(VerdictEntry { comparison_id, winner });
        Ok(Ok(VerdictAccepted {
            accepted: true,
            next_iteration: self.state.iteration + 1,
            duplicate: false,
        }))
    }

    pub fn progress(&self) -> Result<Progress> {
        let records = &self.state.records;
        let initial = match self.state.archive.entries()[0].trajectory.as_ref() {
            Some(t) => self.state.config.env.score(t)?,
            None => f64::NAN,
        };
        Ok(Progress {
            iterations: self.state.iteration,
            incumbent_scores: std::iter::once(initial).chain(records.iter().map(|r| r.best_score)).collect(),
            dims: records.iter().map(|r| r.dim).collect(),
            sigmas: records.iter().filter_map(|r| r.sigma).collect(),
            verdicts: self.verdicts.iter().map(|v| v.winner).collect(),
            dim: self.state.book.len(),
            sigma: self.state.step.sigma,
            complete: self.complete(),
        })
    }

    pub fn archive(&self) -> Result<Vec<ArchiveItem>> {
        let incumbent = self.state.archive.incumbent();
        self.state
            .archive
            .entries()
            .iter()
            .enumerate()
            .filter_map(|(index, e)| e.trajectory.as_ref().map(|t| (index, t)))
            .map(|(index, t)| {
                Ok(ArchiveItem {
                    index,
                    incumbent: index == incumbent,
                    score: self.state.config.env.score(t)?,
                    trajectory: t.clone(),
                })
            })
            .collect()
    }
}

/// Session checkpoints as `<dir>/<id>.json`.
#[derive(Clone, Debug)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Writes through a temporary file so a crash never leaves a torn checkpoint.
    pub fn save(&self, record: &SessionRecord) -> Result<()> {
        let path = self.path(&record.id);
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_vec(record)?).map_err(io_err(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(io_err(&path))
    }

    pub fn load(&self, id: &str) -> Result<SessionRecord> {
        let path = self.path(id);
        let bytes = std::fs::read(&path).map_err(io_err(&path))?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn load_all(&self) -> Result<Vec<SessionRecord>> {
        let mut out = Vec::new();
        let entries = std::fs::read_dir(&self.dir).map_err(io_err(&self.dir))?;
        for entry in entries {
            let path = entry.map_err(io_err(&self.dir))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let bytes = std::fs::read(&path).map_err(io_err(&path))?;
            out.push(serde_json::from_slice(&bytes)?);
        }
        out.sort_by(|a: &SessionRecord, b| a.id.cmp(&b.id));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(env: Environment) -> CreateSession {
        CreateSession {
            environment: env,
            overrides: SessionOverrides {
                seed: Some(3),
                lambda: Some(3),
                hidden: Some(3),
                max_iterations: Some(2),
                ..SessionOverrides::default()
            },
        }
    }

    #[test]
    fn verdict_protocol() {
        let mut s = SessionRecord::create("a".into(), &small(Environment::Cancer), &ExperimentConfig::default()).unwrap();
        assert!(s.comparison().is_none());
        assert_eq!(s.apply_verdict(1, Verdict::Candidate).unwrap(), Err(VerdictRejection::NotReady));
        s.state.propose().unwrap();
        assert_eq!(s.comparison().unwrap().comparison_id, 1);
        assert_eq!(
            s.apply_verdict(7, Verdict::Candidate).unwrap(),
            Err(VerdictRejection::Stale { pending: Some(1) })
        );
        let ok = s.apply_verdict(1, Verdict::Incumbent).unwrap().unwrap();
        assert_eq!((ok.next_iteration, ok.duplicate), (2, false));
        let again = s.apply_verdict(1, Verdict::Incumbent).unwrap().unwrap();
        assert!(again.duplicate);
        assert_eq!(s.state.iteration, 1);
        assert_eq!(s.apply_verdict(1, Verdict::Candidate).unwrap(), Err(VerdictRejection::Conflict));

        s.state.propose().unwrap();
        s.apply_verdict(2, Verdict::Candidate).unwrap().unwrap();
        assert!(s.complete() && !s.needs_proposal());
        assert_eq!(s.apply_verdict(3, Verdict::Candidate).unwrap(), Err(VerdictRejection::Complete));
        let p = s.progress().unwrap();
        assert_eq!(p.incumbent_scores.len(), 3);
        assert_eq!(p.verdicts, vec![Verdict::Incumbent, Verdict::Candidate]);
        assert_eq!(s.archive().unwrap().len(), 3);
    }

    #[test]
    fn overrides_are_validated() {
        let base = ExperimentConfig::default();
        let mut req = small(Environment::MountainCar);
        req.overrides.noise = Some(0.1);
        assert!(SessionRecord::create("b".into(), &req, &base).is_err());
        let req: std::result::Result<CreateSession, _> =
            serde_json::from_str(r#"{"environment":"cancer","overrides":{"lamda":3}}"#);
        assert!(req.is_err());
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let mut s = SessionRecord::create("c".into(), &small(Environment::Cancer), &ExperimentConfig::default()).unwrap();
        s.state.propose().unwrap();
        store.save(&s).unwrap();
        assert_eq!(store.load("c").unwrap(), s);
        assert_eq!(store.load_all().unwrap(), vec![s]);
    }
}
