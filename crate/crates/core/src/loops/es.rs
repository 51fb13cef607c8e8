//! (1+λ) evolution strategy with multiplicative step-size control.

use serde::{Deserialize, Serialize};

use super::{ExpertOracle, IterationRecord};
use crate::envs::{EnvSpec, Trajectory};
use crate::error::{Error, Result};
use crate::policy::{ParametricPolicy, StepSizeState};
use crate::rng::{stream, Purpose, StreamRng};
use rand::Rng;

/// How the ES baseline picks which of its λ rollouts to show the expert.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EsRanking {
    /// Lowest emulated score among the λ rollouts.
    #[default]
    EmulatedScore,
    /// A uniformly drawn rollout; no information beyond the expert's verdicts.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsConfig {
    pub env: EnvSpec,
    #[serde(default = "default_lambda")]
    pub lambda: usize,
    #[serde(default)]
    pub hidden: Option<usize>,
    #[serde(default)]
    pub step: StepSizeState,
    #[serde(default)]
    pub ranking: EsRanking,
}

fn default_lambda() -> usize {
    super::april::DEFAULT_LAMBDA
}

impl EsConfig {
    pub fn new(env: EnvSpec) -> Self {
        Self {
            env,
            lambda: default_lambda(),
            hidden: None,
            step: StepSizeState::default(),
            ranking: EsRanking::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsState {
    pub config: EsConfig,
    pub seed: u64,
    pub iteration: usize,
    pub policy: ParametricPolicy,
    pub trajectory: Trajectory,
    pub step: StepSizeState,
    pub records: Vec<IterationRecord>,
}

impl EsState {
    /// Same initial policy and demonstration as an APRIL run with this seed.
    pub fn new(config: EsConfig, seed: u64) -> Result<Self> {
        if config.lambda == 0 {
            return Err(Error::InvalidArgument("lambda must be at least 1".into()));
        }
        let hidden = config.hidden.unwrap_or_else(|| config.env.default_hidden());
        let shape = config.env.policy_shape(hidden);
        let policy = ParametricPolicy::random(shape, &mut stream(seed, 0, Purpose::InitialPolicy, 0))?;
        let trajectory = config
            .env
            .rollout(&policy, &mut stream(seed, 0, Purpose::Demonstrate, 0))?;
        Ok(Self {
            step: config.step,
            config,
            seed,
            iteration: 0,
            policy,
            trajectory,
            records: Vec::new(),
        })
    }

    pub fn best_score(&self) -> Result<f64> {
        self.config.env.score(&self.trajectory)
    }

    /// Rolls out λ perturbations, shows one to the expert against the
    /// incumbent, keeps the winner and adapts σ on the verdict.
    pub fn iterate(&mut self, oracle: &mut dyn ExpertOracle) -> Result<IterationRecord> {
        let t = self.iteration as u64 + 1;
        let env = &self.config.env;
        let mut pool = Vec::with_capacity(self.config.lambda);
        for k in 0..self.config.lambda as u64 {
            let policy = self
                .policy
                .perturb(self.step.sigma, &mut stream(self.seed, t, Purpose::Perturb, k))?;
            let traj = env.rollout(&policy, &mut stream(self.seed, t, Purpose::Demonstrate, k))?;
            let score = env.score(&traj)?;
            pool.push((policy, traj, score));
        }
        let chosen = match self.config.ranking {
            EsRanking::EmulatedScore => {
                let mut best = 0;
                for (k, entry) in pool.iter().enumerate() {
                    if entry.2 < pool[best].2 {
                        best = k;
                    }
                }
                best
            }
            EsRanking::Random => stream(self.seed, t, Purpose::Selection, 0).random_range(0..pool.len()),
        };
        let (policy, trajectory, candidate_score) = pool.swap_remove(chosen);
        let wins = oracle.prefer(&trajectory, &self.trajectory)?;
        if wins {
            self.policy = policy;
            self.trajectory = trajectory;
        }
        self.step = self.step.adapt(wins);
        self.iteration += 1;
        let record = IterationRecord {
            iteration: self.iteration,
            candidate_id: self.iteration,
            candidate_wins: Some(wins),
            candidate_score,
            best_score: self.best_score()?,
            sigma: Some(self.step.sigma),
            dim: 0,
            selection_score: None,
            distance: None,
            simulations: self.config.lambda - 1,
        };
        self.records.push(record.clone());
        Ok(record)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximizeOutcome {
    pub policy: ParametricPolicy,
    pub value: f64,
    pub evaluations: usize,
    pub step: StepSizeState,
}

/// Maximizes `fitness` with a (1+λ)-ES started at `start`. `fitness` receives
/// a dedicated random stream for each evaluation; a candidate replaces the
/// parent only on strict improvement.
pub fn es_maximize<F>(
    start: &ParametricPolicy,
    step: StepSizeState,
    generations: usize,
    lambda: usize,
    seed: u64,
    mut fitness: F,
) -> Result<MaximizeOutcome>
where
    F: FnMut(&ParametricPolicy, &mut StreamRng) -> Result<f64>,
{
    if lambda == 0 {
        return Err(Error::InvalidArgument("lambda must be at least 1".into()));
    }
    let eval_index = |k: usize| (1u64 << 32) | k as u64;
    let mut parent = start.clone();
    let mut value = fitness(&parent, &mut stream(seed, 0, Purpose::InnerOptimize, eval_index(0)))?;
    let mut evaluations = 1;
    let mut step = step;
    for g in 1..=generations as u64 {
        let mut best: Option<(ParametricPolicy, f64)> = None;
        for k in 0..lambda {
            let child = parent.perturb(step.sigma, &mut stream(seed, g, Purpose::InnerOptimize, k as u64))?;
            let v = fitness(&child, &mut stream(seed, g, Purpose::InnerOptimize, eval_index(k)))?;
            evaluations += 1;
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((child, v));
            }
        }
        let (child, v) = best.expect("lambda is positive");
        let improved = v > value;
        if improved {
            parent = child;
            value = v;
        }
        step = step.adapt(improved);
    }
    Ok(MaximizeOutcome {
        policy: parent,
        value,
        evaluations,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::{EmulatedExpert, ScriptedExpert};
    use crate::policy::PolicyShape;

    #[test]
    fn plus_selection_never_worsens() {
        let config = EsConfig {
            hidden: Some(4),
            ..EsConfig::new(EnvSpec::cancer())
        };
        let mut state = EsState::new(config.clone(), 3).unwrap();
        let mut oracle = EmulatedExpert::new(config.env.clone());
        let mut last = state.best_score().unwrap();
        let mut sigma = StepSizeState::default();
        for _ in 0..10 {
            let r = state.iterate(&mut oracle).unwrap();
            assert!(r.best_score <= last);
            last = r.best_score;
            sigma = sigma.adapt(r.candidate_wins.unwrap());
            assert_eq!(r.sigma, Some(sigma.sigma));
        }
    }

    #[test]
    fn lambda_one_is_one_plus_one() {
        let config = EsConfig {
            lambda: 1,
            hidden: Some(3),
            ranking: EsRanking::Random,
            ..EsConfig::new(EnvSpec::mountain_car())
        };
        let mut state = EsState::new(config, 1).unwrap();
        let r = state.iterate(&mut ScriptedExpert::new([true])).unwrap();
        assert_eq!(r.simulations, 0);
        assert_eq!(state.step.sigma, 1.5);
        assert!(EsState::new(
            EsConfig {
                lambda: 0,
                ..EsConfig::new(EnvSpec::cancer())
            },
            0
        )
        .is_err());
    }

    #[test]
    fn maximizer_climbs_a_quadratic() {
        let shape = PolicyShape::new(1, 1, 1);
        let start = ParametricPolicy::zeros(shape).unwrap();
        let target = [0.5, -1.0, 2.0, 0.25];
        let fitness = |p: &ParametricPolicy, _: &mut StreamRng| {
            Ok(-p.weights.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        };
        let out = es_maximize(&start, StepSizeState::default(), 200, 11, 4, fitness).unwrap();
        assert!(out.value > -1e-3, "{}", out.value);
        assert_eq!(out.evaluations, 1 + 200 * 11);
        let again = es_maximize(&start, StepSizeState::default(), 200, 11, 4, fitness).unwrap();
        assert_eq!(again, out);
    }
}
