//! The interactive loop.
//!
//! An iteration is split in two so a human expert can take as long as they
//! like: [`AprilState::propose`] runs self-training and demonstrates the
//! chosen candidate, [`AprilState::resolve`] applies the verdict. The state is
//! serializable at every point and all randomness comes from counter-based
//! streams, so a checkpoint is just the serialized state.

use serde::{Deserialize, Serialize};

use super::{ExpertOracle, IterationRecord, ScriptedExpert};
use crate::behavior::{featurize, ClusterBook, DEFAULT_RADIUS};
use crate::envs::{EnvSpec, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::argmax;
use crate::policy::{ParametricPolicy, StepSizeState};
use crate::rng::{stream, Purpose};
use crate::selection::{AeusContext, AeusOptions, Archive, ArchiveEntry};

pub const DEFAULT_LAMBDA: usize = 11;
pub const DEFAULT_NOISY_ROLLOUTS: usize = 11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprilConfig {
    pub env: EnvSpec,
    #[serde(default = "default_lambda")]
    pub lambda: usize,
    /// Rollouts per candidate for AEUS; `None` picks 11 for stochastic
    /// environments and 1 otherwise.
    #[serde(default)]
    pub n_rollouts: Option<usize>,
    /// Hidden units; `None` uses the environment default.
    #[serde(default)]
    pub hidden: Option<usize>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub aeus: AeusOptions,
    #[serde(default)]
    pub step: StepSizeState,
}

fn default_lambda() -> usize {
    DEFAULT_LAMBDA
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

impl AprilConfig {
    pub fn new(env: EnvSpec) -> Self {
        Self {
            env,
            lambda: DEFAULT_LAMBDA,
            n_rollouts: None,
            hidden: None,
            radius: DEFAULT_RADIUS,
            aeus: AeusOptions::default(),
            step: StepSizeState::default(),
        }
    }

    pub fn rollouts_per_candidate(&self) -> usize {
        self.n_rollouts.unwrap_or(if self.env.is_stochastic() {
            DEFAULT_NOISY_ROLLOUTS
        } else {
            1
        })
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden.unwrap_or_else(|| self.env.default_hidden())
    }

    fn validate(&self) -> Result<()> {
        if self.lambda == 0 {
            return Err(Error::InvalidArgument("lambda must be at least 1".into()));
        }
        if self.n_rollouts == Some(0) {
            return Err(Error::InvalidArgument("n_rollouts must be at least 1".into()));
        }
        Ok(())
    }
}

/// A demonstration waiting for the expert's verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendingComparison {
    /// Equal to the iteration the verdict will close.
    pub comparison_id: u64,
    pub policy: ParametricPolicy,
    pub trajectory: Trajectory,
    pub descriptor: Vec<f64>,
    /// AEUS of the chosen candidate (0 when every candidate was degenerate).
    pub selection_score: f64,
    /// Position of the chosen candidate among the λ perturbations.
    pub candidate_index: usize,
    pub simulations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprilState {
    pub config: AprilConfig,
    pub seed: u64,
    /// Completed iterations.
    pub iteration: usize,
    pub archive: Archive,
    pub book: ClusterBook,
    pub step: StepSizeState,
    pub pending: Option<PendingComparison>,
    pub records: Vec<IterationRecord>,
}

impl AprilState {
    /// Draws the initial policy and demonstrates it once.
    pub fn new(config: AprilConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let shape = config.env.policy_shape(config.hidden_units());
        let policy = ParametricPolicy::random(shape, &mut stream(seed, 0, Purpose::InitialPolicy, 0))?;
        let trajectory = config
            .env
            .rollout(&policy, &mut stream(seed, 0, Purpose::Demonstrate, 0))?;
        let mut book = ClusterBook::new(config.radius)?;
        let descriptor = featurize(&mut book, &config.env, &trajectory)?.into_inner();
        let archive = Archive::new(ArchiveEntry {
            descriptor,
            policy: Some(policy),
            trajectory: Some(trajectory),
        });
        Ok(Self {
            step: config.step,
            config,
            seed,
            iteration: 0,
            archive,
            book,
            pending: None,
            records: Vec::new(),
        })
    }

    pub fn env(&self) -> &EnvSpec {
        &self.config.env
    }

    pub fn incumbent_policy(&self) -> &ParametricPolicy {
        self.archive
            .incumbent_entry()
            .policy
            .as_ref()
            .expect("loop archives store policies")
    }

    pub fn incumbent_trajectory(&self) -> &Trajectory {
        self.archive
            .incumbent_entry()
            .trajectory
            .as_ref()
            .expect("loop archives store trajectories")
    }

    /// Emulated score of the incumbent demonstration.
    pub fn best_score(&self) -> Result<f64> {
        self.config.env.score(self.incumbent_trajectory())
    }

    /// Self-training phase: perturbs the incumbent λ times, scores each
    /// candidate by AEUS over its rollouts, and demonstrates the best one.
    /// Calling it again before [`resolve`](Self::resolve) returns the same comparison.
    pub fn propose(&mut self) -> Result<&PendingComparison> {
        if self.pending.is_none() {
            let pending = self.self_train()?;
            self.pending = Some(pending);
        }
        Ok(self.pending.as_ref().expect("just set"))
    }

    fn self_train(&mut self) -> Result<PendingComparison> {
        let t = self.iteration as u64 + 1;
        let env = self.config.env.clone();
        let n_rollouts = self.config.rollouts_per_candidate();
        let incumbent = self.incumbent_policy().clone();

        let mut candidates = Vec::with_capacity(self.config.lambda);
        let mut descriptors = Vec::with_capacity(self.config.lambda);
        for k in 0..self.config.lambda {
            let policy = incumbent.perturb(self.step.sigma, &mut stream(self.seed, t, Purpose::Perturb, k as u64))?;
            let mut per_rollout = Vec::with_capacity(n_rollouts);
            for r in 0..n_rollouts {
                let index = (k * n_rollouts + r) as u64;
                let traj = env.rollout(&policy, &mut stream(self.seed, t, Purpose::Estimate, index))?;
                per_rollout.push(featurize(&mut self.book, &env, &traj)?.into_inner());
            }
            candidates.push(policy);
            descriptors.push(per_rollout);
        }

        let context = AeusContext::new(&self.archive, self.book.len(), self.config.aeus)?;
        let evaluations = context.evaluate_all(&descriptors)?;
        let scores: Vec<f64> = evaluations
            .iter()
            .map(|e| if e.degenerate { f64::NAN } else { e.score })
            .collect();
        let chosen = argmax(scores.iter().copied()).unwrap_or(0);
        let selection_score = if scores[chosen].is_nan() { 0.0 } else { scores[chosen] };

        let policy = candidates.swap_remove(chosen);
        let trajectory = env.rollout(&policy, &mut stream(self.seed, t, Purpose::Demonstrate, 0))?;
        let descriptor = featurize(&mut self.book, &env, &trajectory)?.into_inner();
        Ok(PendingComparison {
            comparison_id: t,
            policy,
            trajectory,
            descriptor,
            selection_score,
            candidate_index: chosen,
            simulations: self.config.lambda * n_rollouts,
        })
    }

    /// Applies the expert's verdict on the pending comparison.
    pub fn resolve(&mut self, candidate_wins: bool) -> Result<IterationRecord> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::InvalidArgument("no comparison is pending".into()))?;
        let candidate_score = self.config.env.score(&pending.trajectory)?;
        let candidate_id = self.archive.record(
            ArchiveEntry {
                descriptor: pending.descriptor,
                policy: Some(pending.policy),
                trajectory: Some(pending.trajectory),
            },
            candidate_wins,
        );
        self.archive.grow_dim(self.book.len());
        self.step = self.step.adapt(candidate_wins);
        self.iteration += 1;
        let record = IterationRecord {
            iteration: self.iteration,
            candidate_id,
            candidate_wins: Some(candidate_wins),
            candidate_score,
            best_score: self.best_score()?,
            sigma: Some(self.step.sigma),
            dim: self.book.len(),
            selection_score: Some(pending.selection_score),
            distance: None,
            simulations: pending.simulations,
        };
        self.records.push(record.clone());
        Ok(record)
    }

    /// One full iteration against `oracle`. If the oracle fails the pending
    /// comparison is kept and the call can simply be retried.
    pub fn iterate(&mut self, oracle: &mut dyn ExpertOracle) -> Result<IterationRecord> {
        self.propose()?;
        let pending = self.pending.as_ref().expect("proposed");
        let wins = oracle.prefer(&pending.trajectory, self.incumbent_trajectory())?;
        self.resolve(wins)
    }

    /// Rebuilds a run from its configuration, seed and verdict sequence.
    pub fn replay(config: AprilConfig, seed: u64, verdicts: &[bool]) -> Result<Self> {
        let mut state = Self::new(config, seed)?;
        let mut oracle = ScriptedExpert::new(verdicts.iter().copied());
        for _ in 0..verdicts.len() {
            state.iterate(&mut oracle)?;
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::cancer::{CancerConfig, NoiseSpec};
    use crate::loops::EmulatedExpert;

    fn quick(env: EnvSpec) -> AprilConfig {
        AprilConfig {
            lambda: 4,
            hidden: Some(4),
            ..AprilConfig::new(env)
        }
    }

    #[test]
    fn chain_and_monotone_incumbent() {
        let config = quick(EnvSpec::cancer());
        let mut state = AprilState::new(config.clone(), 5).unwrap();
        let mut oracle = EmulatedExpert::new(config.env.clone());
        let mut last = state.best_score().unwrap();
        for t in 1..=8 {
            let before = state.archive.incumbent();
            let record = state.iterate(&mut oracle).unwrap();
            assert_eq!(record.iteration, t);
            assert_eq!(state.archive.constraints().len(), t);
            assert_eq!(state.archive.len(), t + 1);
            let pair = state.archive.constraints()[t - 1];
            if record.candidate_wins == Some(true) {
                assert_eq!(pair.loser, before);
                assert_eq!(state.archive.incumbent(), t);
            } else {
                assert_eq!(pair.winner, before);
                assert_eq!(state.archive.incumbent(), before);
            }
            assert!(record.best_score <= last);
            last = record.best_score;
        }
    }

    #[test]
    fn deterministic_and_replayable() {
        let config = quick(EnvSpec::cancer());
        let run = |seed| {
            let mut s = AprilState::new(config.clone(), seed).unwrap();
            let mut oracle = EmulatedExpert::new(config.env.clone());
            for _ in 0..6 {
                s.iterate(&mut oracle).unwrap();
            }
            s
        };
        let a = run(9);
        let b = run(9);
        assert_eq!(a, b);
        let verdicts: Vec<bool> = a.records.iter().map(|r| r.candidate_wins.unwrap()).collect();
        let replayed = AprilState::replay(config.clone(), 9, &verdicts).unwrap();
        assert_eq!(replayed.archive, a.archive);
        assert_eq!(replayed.book, a.book);
    }

    #[test]
    fn propose_is_idempotent_and_resumable() {
        let config = quick(EnvSpec::mountain_car());
        let mut state = AprilState::new(config, 2).unwrap();
        let first = state.propose().unwrap().clone();
        assert_eq!(state.propose().unwrap(), &first);
        let json = serde_json::to_string(&state).unwrap();
        let mut restored: AprilState = serde_json::from_str(&json).unwrap();
        assert_eq!(restored, state);
        let a = state.resolve(true).unwrap();
        let b = restored.resolve(true).unwrap();
        assert_eq!(a, b);
        assert!(state.resolve(false).is_err());
    }

    #[test]
    fn oracle_failure_keeps_pending() {
        let mut state = AprilState::new(quick(EnvSpec::cancer()), 1).unwrap();
        let mut empty = ScriptedExpert::new([]);
        assert!(state.iterate(&mut empty).is_err());
        assert!(state.pending.is_some());
        assert_eq!(state.iteration, 0);
        let mut one = ScriptedExpert::new([false]);
        state.iterate(&mut one).unwrap();
        assert_eq!(state.iteration, 1);
    }

    #[test]
    fn stochastic_env_uses_eleven_rollouts() {
        let env = EnvSpec::Cancer(CancerConfig {
            noise: NoiseSpec::new(0.1).unwrap(),
            ..CancerConfig::default()
        });
        let config = quick(env);
        assert_eq!(config.rollouts_per_candidate(), 11);
        let mut state = AprilState::new(config, 3).unwrap();
        assert_eq!(state.propose().unwrap().simulations, 44);
        assert_eq!(quick(EnvSpec::mountain_car()).rollouts_per_candidate(), 1);
    }

    #[test]
    fn rejects_bad_config() {
        let mut config = quick(EnvSpec::cancer());
        config.lambda = 0;
        assert!(AprilState::new(config, 0).is_err());
    }
}
