//! Classic mountain car: an underpowered car in a valley must rock back and
//! forth to reach the hilltop at position 0.5.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;
pub const DEFAULT_HORIZON: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MountainCarState {
    pub position: f64,
    pub velocity: f64,
}

impl MountainCarState {
    pub const INITIAL: Self = Self {
        position: -0.5,
        velocity: 0.0,
    };

    pub fn at_goal(&self) -> bool {
        self.position >= GOAL_POSITION
    }
}

/// One step of the dynamics; `action` must be −1, 0 or +1.
pub fn mc_step(state: MountainCarState, action: i8) -> Result<MountainCarState> {
    if !(-1..=1).contains(&action) {
        return Err(Error::InvalidArgument(format!(
            "mountain car action must be -1, 0 or 1, got {action}"
        )));
    }
    let mut velocity = state.velocity + FORCE * f64::from(action) - GRAVITY * (3.0 * state.position).cos();
    velocity = velocity.clamp(-MAX_SPEED, MAX_SPEED);
    let mut position = (state.position + velocity).clamp(MIN_POSITION, MAX_POSITION);
    if position <= MIN_POSITION && velocity < 0.0 {
        position = MIN_POSITION;
        velocity = 0.0;
    }
    Ok(MountainCarState { position, velocity })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MountainCarConfig {
    pub horizon: usize,
    /// Per-unit-distance penalty for trajectories that never reach the goal;
    /// any positive value keeps every goal-reaching run ahead of every miss.
    pub miss_scale: f64,
}

impl Default for MountainCarConfig {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            miss_scale: 1000.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coasting_from_rest() {
        let s = mc_step(MountainCarState::INITIAL, 0).unwrap();
        let v = -0.0025 * (-1.5f64).cos();
        assert!((s.velocity - v).abs() < 1e-15);
        assert!((s.velocity + 1.7685e-4).abs() < 1e-8);
        assert!((s.position - (-0.5 + v)).abs() < 1e-15);
        assert!((s.position + 0.50018).abs() < 1e-5);
    }

    #[test]
    fn accelerating_from_rest() {
        let s = mc_step(MountainCarState::INITIAL, 1).unwrap();
        assert!((s.velocity - (0.001 - 0.0025 * (-1.5f64).cos())).abs() < 1e-15);
        assert!((s.velocity - 8.2315e-4).abs() < 1e-8);
    }

    #[test]
    fn inelastic_left_wall() {
        let s = mc_step(
            MountainCarState {
                position: -1.2,
                velocity: -0.01,
            },
            -1,
        )
        .unwrap();
        assert_eq!(s.position, -1.2);
        assert_eq!(s.velocity, 0.0);
    }

    #[test]
    fn bounds_hold_and_bad_action_rejected() {
        let mut s = MountainCarState::INITIAL;
        for k in 0..5000 {
            let a = if (k / 60) % 2 == 0 { 1 } else { -1 };
            s = mc_step(s, a).unwrap();
            assert!((MIN_POSITION..=MAX_POSITION).contains(&s.position));
            assert!((-MAX_SPEED..=MAX_SPEED).contains(&s.velocity));
        }
        assert!(mc_step(s, 2).is_err());
    }
}
