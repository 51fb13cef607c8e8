//! Benchmark environments, rollouts and the emulated expert.

pub mod cancer;
pub mod mountain_car;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{ActionMap, ParametricPolicy, PolicyShape};

pub use cancer::{cancer_step, CancerConfig, CancerState, HazardModel, NoiseDraw, NoiseSpec};
pub use mountain_car::{mc_step, MountainCarConfig, MountainCarState};

pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

/// Upper bound used to normalize tumor size and toxicity. Values above it are
/// clamped in the sensori-motor stream.
pub const CANCER_STATE_SCALE: f64 = 2.6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    MountainCar,
    Cancer,
}

impl Environment {
    pub fn name(self) -> &'static str {
        match self {
            Environment::MountainCar => "mountain_car",
            Environment::Cancer => "cancer",
        }
    }
}

impl std::fmt::Display for Environment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mountain_car" | "mountain-car" => Ok(Environment::MountainCar),
            "cancer" => Ok(Environment::Cancer),
            other => Err(Error::InvalidArgument(format!("unknown environment {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    GoalReached,
    Horizon,
    Death,
}

/// A recorded rollout. `states[k]` is the raw state before `actions[k]`;
/// mountain-car states are `[position, velocity]`, cancer states `[tumor, toxicity]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub schema_version: u32,
    pub environment: Environment,
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<f64>,
    pub terminal: TerminalReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Trajectory {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Which of two trajectories the expert prefers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    First,
    Second,
}

/// A fully configured benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "environment", rename_all = "snake_case")]
pub enum EnvSpec {
    MountainCar(MountainCarConfig),
    Cancer(CancerConfig),
}

impl EnvSpec {
    pub fn mountain_car() -> Self {
        EnvSpec::MountainCar(MountainCarConfig::default())
    }

    pub fn cancer() -> Self {
        EnvSpec::Cancer(CancerConfig::default())
    }

    pub fn environment(&self) -> Environment {
        match self {
            EnvSpec::MountainCar(_) => Environment::MountainCar,
            EnvSpec::Cancer(_) => Environment::Cancer,
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            EnvSpec::MountainCar(c) => c.horizon,
            EnvSpec::Cancer(c) => c.horizon,
        }
    }

    /// Hidden-layer width giving 37 (mountain car) or 397 (cancer) weights.
    pub fn default_hidden(&self) -> usize {
        match self {
            EnvSpec::MountainCar(_) => 9,
            EnvSpec::Cancer(_) => 99,
        }
    }

    pub fn policy_shape(&self, hidden: usize) -> PolicyShape {
        PolicyShape::new(2, hidden, 1)
    }

    pub fn action_map(&self) -> ActionMap {
        match self {
            EnvSpec::MountainCar(_) => ActionMap::Trichotomy,
            EnvSpec::Cancer(_) => ActionMap::Dosage,
        }
    }

    /// Whether two rollouts of the same policy can differ.
    pub fn is_stochastic(&self) -> bool {
        match self {
            EnvSpec::MountainCar(_) => false,
            EnvSpec::Cancer(c) => c.noise.sigma > 0.0 || c.hazard.is_some(),
        }
    }

    /// Raw state mapped to `[−1, 1]` per coordinate (network input).
    pub fn observation(&self, state: &[f64]) -> Vec<f64> {
        match self {
            EnvSpec::MountainCar(_) => vec![
                to_signed_unit(state[0], mountain_car::MIN_POSITION, mountain_car::MAX_POSITION),
                to_signed_unit(state[1], -mountain_car::MAX_SPEED, mountain_car::MAX_SPEED),
            ],
            EnvSpec::Cancer(_) => vec![
                to_signed_unit(state[0], 0.0, CANCER_STATE_SCALE),
                to_signed_unit(state[1], 0.0, CANCER_STATE_SCALE),
            ],
        }
    }

    /// Runs `policy` from the initial state until a terminal event or the horizon.
    pub fn rollout<R: Rng + ?Sized>(&self, policy: &ParametricPolicy, rng: &mut R) -> Result<Trajectory> {
        let map = self.action_map();
        match self {
            EnvSpec::MountainCar(cfg) => {
                let mut state = MountainCarState::INITIAL;
                let mut states = vec![vec![state.position, state.velocity]];
                let mut actions = Vec::new();
                let mut terminal = TerminalReason::Horizon;
                for _ in 0..cfg.horizon {
                    let obs = self.observation(&[state.position, state.velocity]);
                    let action = policy.act(&obs, map)?;
                    state = mc_step(state, action as i8)?;
                    actions.push(action);
                    states.push(vec![state.position, state.velocity]);
                    if state.at_goal() {
                        terminal = TerminalReason::GoalReached;
                        break;
                    }
                }
                Ok(Trajectory {
                    schema_version: TRAJECTORY_SCHEMA_VERSION,
                    environment: Environment::MountainCar,
                    states,
                    actions,
                    terminal,
                    seed: None,
                })
            }
            EnvSpec::Cancer(cfg) => {
                let mut state = CancerState::INITIAL;
                let mut states = vec![vec![state.tumor, state.toxicity]];
                let mut actions = Vec::new();
                let mut terminal = TerminalReason::Horizon;
                for _ in 0..cfg.horizon {
                    let obs = self.observation(&[state.tumor, state.toxicity]);
                    let dosage = policy.act(&obs, map)?;
                    state = cancer_step(state, dosage, cfg, rng)?;
                    actions.push(dosage);
                    states.push(vec![state.tumor, state.toxicity]);
                    if !state.alive {
                        terminal = TerminalReason::Death;
                        break;
                    }
                }
                Ok(Trajectory {
                    schema_version: TRAJECTORY_SCHEMA_VERSION,
                    environment: Environment::Cancer,
                    states,
                    actions,
                    terminal,
                    seed: None,
                })
            }
        }
    }

    /// Emulated-expert score, lower is better.
    pub fn score(&self, traj: &Trajectory) -> Result<f64> {
        match self {
            EnvSpec::MountainCar(cfg) => mc_trajectory_score(traj, cfg),
            EnvSpec::Cancer(cfg) => cancer_trajectory_score(traj, cfg),
        }
    }

    /// Prefers the lower score; ties go to `incumbent`.
    pub fn prefer(&self, candidate: &Trajectory, incumbent: &Trajectory) -> Result<Preference> {
        let a = self.score(candidate)?;
        let b = self.score(incumbent)?;
        Ok(if a < b { Preference::First } else { Preference::Second })
    }

    /// Normalized sensor + actuator readings fed to the sensori-motor clustering,
    /// one point per transition, every coordinate in `[0, 1]`.
    ///
    /// Mountain car pairs each visited state with the action taken there, so the
    /// goal state itself never appears. Cancer pairs each dose with the patient
    /// condition it produced and appends a death flag coordinate; a death
    /// transition maps to the dedicated point `(0, 0, 0, 1)`.
    pub fn sensorimotor_points(&self, traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
        expect_env(traj, self.environment())?;
        if traj.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let n = traj.len();
        let points = match self {
            EnvSpec::MountainCar(_) => (0..n)
                .map(|k| {
                    let s = &traj.states[k];
                    vec![
                        to_unit(s[0], mountain_car::MIN_POSITION, mountain_car::MAX_POSITION),
                        to_unit(s[1], -mountain_car::MAX_SPEED, mountain_car::MAX_SPEED),
                        to_unit(traj.actions[k], -1.0, 1.0),
                    ]
                })
                .collect(),
            EnvSpec::Cancer(_) => (0..n)
                .map(|k| {
                    if k + 1 == n && traj.terminal == TerminalReason::Death {
                        return vec![0.0, 0.0, 0.0, 1.0];
                    }
                    let s = &traj.states[k + 1];
                    vec![
                        to_unit(s[0], 0.0, CANCER_STATE_SCALE),
                        to_unit(s[1], 0.0, CANCER_STATE_SCALE),
                        traj.actions[k].clamp(0.0, 1.0),
                        0.0,
                    ]
                })
                .collect(),
        };
        Ok(points)
    }
}

fn to_unit(x: f64, lo: f64, hi: f64) -> f64 {
    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

fn to_signed_unit(x: f64, lo: f64, hi: f64) -> f64 {
    2.0 * (x - lo) / (hi - lo) - 1.0
}

/// Steps to the goal, or the horizon plus a penalty proportional to how far
/// the closest approach stayed from the goal.
pub fn mc_trajectory_score(traj: &Trajectory, cfg: &MountainCarConfig) -> Result<f64> {
    expect_env(traj, Environment::MountainCar)?;
    if traj.terminal == TerminalReason::GoalReached {
        return Ok(traj.len() as f64);
    }
    let best = traj
        .states
        .iter()
        .map(|s| s[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(cfg.horizon as f64 + (mountain_car::GOAL_POSITION - best) * cfg.miss_scale)
}

/// Final tumor size plus toxicity; a death scores the flat death penalty.
pub fn cancer_trajectory_score(traj: &Trajectory, cfg: &CancerConfig) -> Result<f64> {
    expect_env(traj, Environment::Cancer)?;
    if traj.terminal == TerminalReason::Death {
        return Ok(cfg.death_penalty);
    }
    let last = traj.final_state();
    Ok(last[0] + last[1])
}

fn expect_env(traj: &Trajectory, env: Environment) -> Result<()> {
    if traj.environment != env {
        return Err(Error::EnvironmentMismatch {
            expected: env.to_string(),
            got: traj.environment.to_string(),
        });
    }
    Ok(())
}

/// Emulated expert verdict between `a` and the incumbent `b`.
pub fn emulated_prefer(env: &EnvSpec, a: &Trajectory, b: &Trajectory) -> Result<Preference> {
    env.prefer(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn mc_traj(positions: &[f64], terminal: TerminalReason) -> Trajectory {
        Trajectory {
            schema_version: TRAJECTORY_SCHEMA_VERSION,
            environment: Environment::MountainCar,
            states: positions.iter().map(|p| vec![*p, 0.0]).collect(),
            actions: vec![0.0; positions.len() - 1],
            terminal,
            seed: None,
        }
    }

    fn cancer_traj(final_state: [f64; 2], months: usize, terminal: TerminalReason) -> Trajectory {
        let mut states = vec![vec![1.3, 0.0]; months];
        states.push(final_state.to_vec());
        Trajectory {
            schema_version: TRAJECTORY_SCHEMA_VERSION,
            environment: Environment::Cancer,
            states,
            actions: vec![0.5; months],
            terminal,
            seed: None,
        }
    }

    #[test]
    fn mountain_car_scores() {
        let env = EnvSpec::mountain_car();
        let mut p = vec![-0.5; 120];
        p.push(0.5);
        assert_eq!(env.score(&mc_traj(&p, TerminalReason::GoalReached)).unwrap(), 120.0);

        let miss = mc_traj(&[-0.5, 0.2, 0.1], TerminalReason::Horizon);
        assert!((env.score(&miss).unwrap() - (1000.0 + 0.3 * 1000.0)).abs() < 1e-9);
        let closer = mc_traj(&[-0.5, 0.3, 0.1], TerminalReason::Horizon);
        assert!(env.score(&closer).unwrap() < env.score(&miss).unwrap());

        let mut slow = vec![-0.5; 1000];
        slow.push(0.5);
        let slow = mc_traj(&slow, TerminalReason::GoalReached);
        assert!(env.score(&slow).unwrap() < env.score(&closer).unwrap());
    }

    #[test]
    fn cancer_scores() {
        let env = EnvSpec::cancer();
        assert!((env.score(&cancer_traj([0.2, 0.5], 12, TerminalReason::Horizon)).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(env.score(&cancer_traj([0.0, 0.0], 12, TerminalReason::Horizon)).unwrap(), 0.0);
        assert_eq!(env.score(&cancer_traj([0.4, 1.1], 6, TerminalReason::Death)).unwrap(), 10.0);
        assert!(env.score(&mc_traj(&[-0.5, -0.5], TerminalReason::Horizon)).is_err());
    }

    #[test]
    fn preferences() {
        let mc = EnvSpec::mountain_car();
        let fast = mc_traj(&[vec![-0.5; 100], vec![0.5]].concat(), TerminalReason::GoalReached);
        let slow = mc_traj(&[vec![-0.5; 200], vec![0.5]].concat(), TerminalReason::GoalReached);
        assert_eq!(emulated_prefer(&mc, &fast, &slow).unwrap(), Preference::First);
        assert_eq!(emulated_prefer(&mc, &fast, &fast).unwrap(), Preference::Second);

        let cancer = EnvSpec::cancer();
        let a = cancer_traj([0.2, 0.5], 12, TerminalReason::Horizon);
        let b = cancer_traj([0.4, 0.5], 12, TerminalReason::Horizon);
        assert_eq!(emulated_prefer(&cancer, &a, &b).unwrap(), Preference::First);
        assert_eq!(emulated_prefer(&cancer, &b, &a).unwrap(), Preference::Second);
        assert!(emulated_prefer(&cancer, &a, &fast).is_err());
    }

    #[test]
    fn constant_cancer_policy_rollout() {
        let env = EnvSpec::cancer();
        let policy = ParametricPolicy::zeros(env.policy_shape(99)).unwrap();
        let traj = env.rollout(&policy, &mut stream(0, 0, Purpose::Demonstrate, 0)).unwrap();
        assert_eq!(traj.len(), 12);
        assert_eq!(traj.states.len(), 13);
        assert!(traj.actions.iter().all(|a| *a == 0.5));
        assert_eq!(traj.terminal, TerminalReason::Horizon);
    }

    #[test]
    fn coasting_car_never_reaches_goal() {
        let env = EnvSpec::mountain_car();
        let policy = ParametricPolicy::zeros(env.policy_shape(9)).unwrap();
        let traj = env.rollout(&policy, &mut stream(0, 0, Purpose::Demonstrate, 0)).unwrap();
        assert_eq!(traj.len(), 1000);
        assert_eq!(traj.terminal, TerminalReason::Horizon);
        assert!(traj.states.iter().all(|s| s[0] < 0.5));
    }

    #[test]
    fn sensorimotor_points_are_unit_scaled() {
        let env = EnvSpec::cancer();
        let death = cancer_traj([5.0, 1.0], 3, TerminalReason::Death);
        let pts = env.sensorimotor_points(&death).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[2], vec![0.0, 0.0, 0.0, 1.0]);
        let alive = cancer_traj([5.0, 1.3], 3, TerminalReason::Horizon);
        let pts = env.sensorimotor_points(&alive).unwrap();
        assert_eq!(pts[2], vec![1.0, 0.5, 0.5, 0.0]);
        let empty = cancer_traj([0.0, 0.0], 0, TerminalReason::Horizon);
        assert_eq!(env.sensorimotor_points(&empty), Err(Error::EmptyTrajectory));
    }

    #[test]
    fn trajectory_json_round_trip() {
        let env = EnvSpec::mountain_car();
        let policy = ParametricPolicy::random(env.policy_shape(9), &mut stream(5, 0, Purpose::InitialPolicy, 0)).unwrap();
        let traj = env.rollout(&policy, &mut stream(5, 0, Purpose::Demonstrate, 0)).unwrap();
        let json = serde_json::to_string(&traj).unwrap();
        assert!(json.contains("\"environment\":\"mountain_car\""));
        assert!(json.contains("\"schema_version\":1"));
        let back: Trajectory = serde_json::from_str(&json).unwrap();
        assert_eq!(back, traj);
    }
}
