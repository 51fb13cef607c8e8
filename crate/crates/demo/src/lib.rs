//! WebAssembly bindings behind `www/index.html`.
//!
//! [`SimplexDemo`] steps an active-selection run on the 3-simplex and paints
//! the AEUS landscape; [`LoopDemo`] runs the interactive loop against the
//! emulated expert on either benchmark.

use april::envs::{EnvSpec, Environment};
use april::loops::{AprilConfig, AprilState, EmulatedExpert};
use april::selection::{AeusContext, AeusOptions, Criterion, SyntheticConfig, SyntheticInstance, SyntheticState};
use wasm_bindgen::prelude::*;

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[wasm_bindgen]
pub struct SimplexDemo {
    state: SyntheticState,
    config: SyntheticConfig,
}

#[wasm_bindgen]
impl SimplexDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n_candidates: usize, seed: u32) -> Result<SimplexDemo, String> {
        let seed = u64::from(seed);
        let instance = SyntheticInstance::generate(3, n_candidates, seed).map_err(msg)?;
        let config = SyntheticConfig {
            n_candidates,
            eus_samples: 2_000,
            ..SyntheticConfig::new(3, Criterion::Aeus, seed)
        };
        Ok(Self {
            state: SyntheticState::new(instance, seed),
            config,
        })
    }

    /// Barycentric coordinates, three per candidate.
    pub fn candidates(&self) -> Vec<f64> {
        self.state.instance.candidates.concat()
    }

    pub fn target(&self) -> Vec<f64> {
        self.state.instance.target.clone()
    }

    /// Candidates shown so far, in order.
    pub fn queried(&self) -> Vec<u32> {
        self.state.members.iter().map(|&i| i as u32).collect()
    }

    pub fn incumbent(&self) -> u32 {
        self.state.incumbent() as u32
    }

    /// Incumbent utility over iterations, divided by the best achievable.
    pub fn performance(&self) -> Vec<f64> {
        let best = self.state.instance.best_possible();
        self.state.performance.iter().map(|p| p / best).collect()
    }

    /// Picks the next query with `criterion` (`aeus`, `eeus`, `random`,
    /// `max_coord`), lets the hidden utility answer, and returns the pick.
    pub fn step(&mut self, criterion: &str) -> Result<u32, String> {
        let criterion: Criterion = criterion.parse().map_err(msg)?;
        let config = SyntheticConfig {
            criterion,
            ..self.config.clone()
        };
        let pick = self.state.select(&config).map_err(msg)?;
        self.state.query(pick).map_err(msg)?;
        Ok(pick as u32)
    }

    /// AEUS over a triangular grid with `resolution + 1` points per edge,
    /// ordered by `(i, j)` with `u = (i, j, resolution − i − j) / resolution`.
    /// Degenerate points are NaN.
    pub fn aeus_map(&self, resolution: usize) -> Result<Vec<f64>, String> {
        if resolution == 0 {
            return Err("resolution must be positive".into());
        }
        let context = AeusContext::new(&self.state.archive, 3, AeusOptions::default()).map_err(msg)?;
        let r = resolution as f64;
        let mut grid = Vec::new();
        for i in 0..=resolution {
            for j in 0..=resolution - i {
                grid.push(vec![i as f64 / r, j as f64 / r, (resolution - i - j) as f64 / r]);
            }
        }
        context.scores(&grid).map_err(msg)
    }
}

#[wasm_bindgen]
pub struct LoopDemo {
    state: AprilState,
    oracle: EmulatedExpert,
}

#[wasm_bindgen]
impl LoopDemo {
    /// `environment` is `cancer` or `mountain_car`.
    #[wasm_bindgen(constructor)]
    pub fn new(environment: &str, seed: u32) -> Result<LoopDemo, String> {
        let seed = u64::from(seed);
        let env = match environment.parse::<Environment>().map_err(msg)? {
            Environment::Cancer => EnvSpec::cancer(),
            Environment::MountainCar => EnvSpec::mountain_car(),
        };
        Ok(Self {
            state: AprilState::new(AprilConfig::new(env.clone()), seed).map_err(msg)?,
            oracle: EmulatedExpert::new(env),
        })
    }

    /// Runs `n` iterations and returns the incumbent's score afterwards.
    pub fn iterate(&mut self, n: usize) -> Result<f64, String> {
        for _ in 0..n {
            self.state.iterate(&mut self.oracle).map_err(msg)?;
        }
        self.state.best_score().map_err(msg)
    }

    pub fn iteration(&self) -> usize {
        self.state.iteration
    }

    /// Incumbent score before the first iteration and after each one.
    pub fn scores(&self) -> Result<Vec<f64>, String> {
        let first = self.state.archive.entries()[0]
            .trajectory
            .as_ref()
            .ok_or("initial demonstration missing")?;
        let initial = self.state.config.env.score(first).map_err(msg)?;
        Ok(std::iter::once(initial)
            .chain(self.state.records.iter().map(|r| r.best_score))
            .collect())
    }

    /// Verdicts so far, 1 when the candidate won.
    pub fn verdicts(&self) -> Vec<u8> {
        self.state
            .records
            .iter()
            .map(|r| r.candidate_wins.unwrap_or(false) as u8)
            .collect()
    }

    /// Incumbent states flattened in pairs: (position, velocity) or (tumor, toxicity).
    pub fn incumbent_states(&self) -> Vec<f64> {
        self.state.incumbent_trajectory().states.concat()
    }

    /// Behavioral dimension D.
    pub fn dim(&self) -> usize {
        self.state.book.len()
    }

    pub fn sigma(&self) -> f64 {
        self.state.step.sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_steps_and_map() {
        let mut demo = SimplexDemo::new(40, 2).unwrap();
        assert_eq!(demo.candidates().len(), 120);
        let pick = demo.step("aeus").unwrap();
        assert_eq!(demo.queried()[1], pick);
        demo.step("random").unwrap();
        demo.step("max_coord").unwrap();
        assert!(demo.step("bogus").is_err());
        let perf = demo.performance();
        assert_eq!(perf.len(), 4);
        assert!(perf.windows(2).all(|w| w[1] >= w[0]) && perf[3] <= 1.0);
        let map = demo.aeus_map(10).unwrap();
        assert_eq!(map.len(), 66);
        assert!(map.iter().any(|v| v.is_finite()));
        assert!(demo.aeus_map(0).is_err());
    }

    #[test]
    fn loop_runs_both_benchmarks() {
        for env in ["cancer", "mountain_car"] {
            let mut demo = LoopDemo::new(env, 1).unwrap();
            let score = demo.iterate(2).unwrap();
            assert_eq!(demo.iteration(), 2);
            let scores = demo.scores().unwrap();
            assert_eq!(scores.len(), 3);
            assert_eq!(scores[2], score);
            assert_eq!(demo.verdicts().len(), 2);
            assert_eq!(demo.incumbent_states().len() % 2, 0);
            assert!(demo.dim() > 0 && demo.sigma() > 0.0);
        }
        assert!(LoopDemo::new("moon", 0).is_err());
    }
}
