//! Apprenticeship learning by projection.
//!
//! The reward is linear in the behavioral descriptor, `r(π) = ⟨w, μ(π)⟩` with
//! `w = μ_E − μ̄`. Each iteration optimizes a policy for the current `w`, then
//! projects the expert's descriptor `μ_E` onto the line through `μ̄` and the
//! new policy's descriptor, so `‖μ_E − μ̄‖` can only shrink.

use serde::{Deserialize, Serialize};

use super::es::es_maximize;
use super::expert::{make_expert_demo, ExpertDemoConfig};
use super::IterationRecord;
use crate::behavior::{featurize, ClusterBook, DEFAULT_RADIUS};
use crate::envs::{EnvSpec, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{dot, dot_padded, norm, padded, padded_sub};
use crate::policy::{ParametricPolicy, StepSizeState};
use crate::rng::{stream, Purpose};
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrlConfig {
    pub env: EnvSpec,
    #[serde(default)]
    pub hidden: Option<usize>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Inner optimization budget: generations of a (1+λ)-ES.
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_lambda")]
    pub lambda: usize,
    /// Rollouts averaged into a policy's descriptor; `None` picks 11 for
    /// stochastic environments and 1 otherwise.
    #[serde(default)]
    pub n_rollouts: Option<usize>,
    #[serde(default)]
    pub step: StepSizeState,
    #[serde(default)]
    pub expert: ExpertDemoConfig,
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

fn default_generations() -> usize {
    50
}

fn default_lambda() -> usize {
    super::april::DEFAULT_LAMBDA
}

impl IrlConfig {
    pub fn new(env: EnvSpec) -> Self {
        Self {
            env,
            hidden: None,
            radius: DEFAULT_RADIUS,
            generations: default_generations(),
            lambda: default_lambda(),
            n_rollouts: None,
            step: StepSizeState::default(),
            expert: ExpertDemoConfig::default(),
        }
    }

    fn rollouts(&self) -> usize {
        self.n_rollouts
            .unwrap_or(if self.env.is_stochastic() { 11 } else { 1 })
            .max(1)
    }
}

/// `μ̄ + [⟨μ_new − μ̄, μ_E − μ̄⟩ / ‖μ_new − μ̄‖²]·(μ_new − μ̄)` over the longest
/// of the three dimensions, or `None` when `μ_new = μ̄`.
pub fn projection_update(mu_bar: &[f64], mu_new: &[f64], mu_e: &[f64]) -> Option<Vec<f64>> {
    let dim = mu_bar.len().max(mu_new.len()).max(mu_e.len());
    let step = padded_sub(mu_new, mu_bar, dim);
    let gap = padded_sub(mu_e, mu_bar, dim);
    let denom = dot(&step, &step);
    if denom == 0.0 {
        return None;
    }
    let ratio = dot(&step, &gap) / denom;
    let base = padded(mu_bar, dim);
    Some(base.iter().zip(&step).map(|(b, s)| b + ratio * s).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrlState {
    pub config: IrlConfig,
    pub seed: u64,
    pub iteration: usize,
    pub book: ClusterBook,
    pub expert_demo: Trajectory,
    pub mu_e: Vec<f64>,
    pub mu_bar: Vec<f64>,
    /// Reward weights used by the latest inner optimization.
    pub w: Vec<f64>,
    pub policies: Vec<ParametricPolicy>,
    pub descriptors: Vec<Vec<f64>>,
    /// Emulated score of each policy's demonstration.
    pub scores: Vec<f64>,
    /// Set when an iteration returned `μ̄` itself and the projection stalled.
    pub stagnated: bool,
    pub records: Vec<IterationRecord>,
}

impl IrlState {
    /// Builds the expert descriptor and seeds `μ̄` with the initial policy's.
    pub fn new(config: IrlConfig, seed: u64) -> Result<Self> {
        let demo = make_expert_demo(&config.env, &config.expert)?;
        Self::with_demo(config, seed, demo)
    }

    pub fn with_demo(config: IrlConfig, seed: u64, expert_demo: Trajectory) -> Result<Self> {
        if config.lambda == 0 {
            return Err(Error::InvalidArgument("lambda must be at least 1".into()));
        }
        let mut book = ClusterBook::new(config.radius)?;
        let mu_e = featurize(&mut book, &config.env, &expert_demo)?.into_inner();
        let hidden = config.hidden.unwrap_or_else(|| config.env.default_hidden());
        let policy = ParametricPolicy::random(
            config.env.policy_shape(hidden),
            &mut stream(seed, 0, Purpose::InitialPolicy, 0),
        )?;
        let mut state = Self {
            config,
            seed,
            iteration: 0,
            book,
            expert_demo,
            mu_e,
            mu_bar: Vec::new(),
            w: Vec::new(),
            policies: Vec::new(),
            descriptors: Vec::new(),
            scores: Vec::new(),
            stagnated: false,
            records: Vec::new(),
        };
        let (descriptor, score) = state.demonstrate(&policy, 0)?;
        state.mu_bar = descriptor.clone();
        state.policies.push(policy);
        state.descriptors.push(descriptor);
        state.scores.push(score);
        Ok(state)
    }

    /// Mean descriptor over the configured rollouts and the first rollout's score.
    fn demonstrate(&mut self, policy: &ParametricPolicy, iteration: u64) -> Result<(Vec<f64>, f64)> {
        let n = self.config.rollouts();
        let mut sum: Vec<f64> = Vec::new();
        let mut score = 0.0;
        for r in 0..n as u64 {
            let traj = self
                .config
                .env
                .rollout(policy, &mut stream(self.seed, iteration, Purpose::Demonstrate, r))?;
            if r == 0 {
                score = self.config.env.score(&traj)?;
            }
            let u = featurize(&mut self.book, &self.config.env, &traj)?.into_inner();
            sum.resize(u.len().max(sum.len()), 0.0);
            for (s, v) in sum.iter_mut().zip(&u) {
                *s += v;
            }
        }
        sum.iter_mut().for_each(|s| *s /= n as f64);
        Ok((sum, score))
    }

    /// `μ_E − μ̄` at the current behavioral dimension.
    pub fn reward_weights(&self) -> Vec<f64> {
        padded_sub(&self.mu_e, &self.mu_bar, self.book.len().max(self.mu_bar.len()))
    }

    /// `‖μ_E − μ̄‖`
    pub fn distance(&self) -> f64 {
        norm(&self.reward_weights())
    }

    pub fn best_score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn best_policy(&self) -> &ParametricPolicy {
        let mut best = 0;
        for (i, s) in self.scores.iter().enumerate() {
            if *s < self.scores[best] {
                best = i;
            }
        }
        &self.policies[best]
    }

    pub fn iterate(&mut self) -> Result<IterationRecord> {
        let t = self.iteration as u64 + 1;
        let w = self.reward_weights();
        self.w = w.clone();
        let start = self.policies.last().expect("initial policy present").clone();
        let env = self.config.env.clone();
        let inner_seed: u64 = stream(self.seed, t, Purpose::InnerOptimize, 0).random();
        let book = &mut self.book;
        let outcome = es_maximize(
            &start,
            self.config.step,
            self.config.generations,
            self.config.lambda,
            inner_seed,
            |policy, rng| {
                let traj = env.rollout(policy, rng)?;
                let u = featurize(book, &env, &traj)?;
                Ok(dot_padded(&w, u.as_slice()))
            },
        )?;

        let (descriptor, score) = self.demonstrate(&outcome.policy, t)?;
        let before = self.distance();
        match projection_update(&self.mu_bar, &descriptor, &self.mu_e) {
            Some(next) => {
                self.mu_bar = next;
                self.stagnated = false;
            }
            None => self.stagnated = true,
        }
        let distance = self.distance();
        debug_assert!(distance <= before + 1e-9, "projection moved away from the expert");
        self.policies.push(outcome.policy);
        self.descriptors.push(descriptor);
        self.scores.push(score);
        self.iteration += 1;
        let record = IterationRecord {
            iteration: self.iteration,
            candidate_id: self.policies.len() - 1,
            candidate_wins: None,
            candidate_score: score,
            best_score: self.best_score(),
            sigma: Some(outcome.step.sigma),
            dim: self.book.len(),
            selection_score: None,
            distance: Some(distance),
            simulations: outcome.evaluations,
        };
        self.records.push(record.clone());
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::Environment;

    fn quick(env: EnvSpec) -> IrlConfig {
        IrlConfig {
            hidden: Some(4),
            generations: 10,
            expert: ExpertDemoConfig {
                restarts: 1,
                generations: 40,
                ..ExpertDemoConfig::default()
            },
            ..IrlConfig::new(env)
        }
    }

    #[test]
    fn projection_examples() {
        assert_eq!(projection_update(&[0.0, 1.0], &[1.0, 0.0], &[1.0, 0.0]), Some(vec![1.0, 0.0]));
        assert_eq!(projection_update(&[0.5, 0.5], &[0.5, 0.5], &[1.0, 0.0]), None);
        // μ_E off the line: lands on its orthogonal projection.
        let p = projection_update(&[0.0, 0.0], &[2.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        // Shorter vectors are zero-padded.
        let p = projection_update(&[1.0], &[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(p, vec![0.0, 1.0]);
    }

    #[test]
    fn first_reward_is_target_minus_initial() {
        let env = EnvSpec::cancer();
        let mut state = IrlState::with_demo(quick(env.clone()), 0, cancer_demo(&env)).unwrap();
        state.mu_e = vec![1.0, 0.0];
        state.mu_bar = vec![0.0, 1.0];
        let w = state.reward_weights();
        assert_eq!(&w[..2], &[1.0, -1.0]);
        assert!(w[2..].iter().all(|x| *x == 0.0));
    }

    fn cancer_demo(env: &EnvSpec) -> Trajectory {
        make_expert_demo(env, &quick(env.clone()).expert).unwrap()
    }

    #[test]
    fn distance_never_increases() {
        let env = EnvSpec::cancer();
        let mut state = IrlState::new(quick(env), 4).unwrap();
        assert_eq!(state.expert_demo.environment, Environment::Cancer);
        let mut last = state.distance();
        for _ in 0..5 {
            let r = state.iterate().unwrap();
            let d = r.distance.unwrap();
            assert!(d <= last + 1e-12, "{d} > {last}");
            last = d;
            assert!(r.best_score <= state.scores[0]);
        }
        assert_eq!(state.policies.len(), 6);
    }

    #[test]
    fn deterministic() {
        let env = EnvSpec::cancer();
        let run = || {
            let mut s = IrlState::new(quick(env.clone()), 8).unwrap();
            s.iterate().unwrap();
            s.iterate().unwrap();
            s
        };
        assert_eq!(run(), run());
    }
}
