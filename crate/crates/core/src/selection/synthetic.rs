//! Active ranking on the simplex.
//!
//! Candidates are uniform on the nonnegative L1 unit sphere, the hidden
//! utility `w*` uniform on the L2 unit sphere. Each iteration a criterion
//! picks an unused candidate, the oracle compares it with the incumbent under
//! `w*`, and the incumbent's true utility is recorded.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::aeus::{AeusContext, AeusMode, AeusOptions};
use super::eus::{EusEstimator, EusWeighting};
use super::version_space::HitAndRunOptions;
use super::{select_max_coord, Archive, ArchiveEntry};
use crate::error::{Error, Result};
use crate::linalg::{argmax, dot, norm};
use crate::ranksvm::{self, SolverOptions};
use crate::rng::{stream, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Aeus,
    #[serde(rename = "eeus", alias = "eus_mc")]
    EusMc,
    Random,
    MaxCoord,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::Aeus, Criterion::EusMc, Criterion::Random, Criterion::MaxCoord];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Aeus => "aeus",
            Criterion::EusMc => "eeus",
            Criterion::Random => "random",
            Criterion::MaxCoord => "max_coord",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "aeus" => Ok(Criterion::Aeus),
            "eeus" | "eus_mc" | "eus" => Ok(Criterion::EusMc),
            "random" => Ok(Criterion::Random),
            "max_coord" | "maxcoord" => Ok(Criterion::MaxCoord),
            other => Err(Error::InvalidArgument(format!("unknown criterion `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub dim: usize,
    pub n_candidates: usize,
    pub n_iterations: usize,
    pub criterion: Criterion,
    pub seed: u64,
    pub c: f64,
    pub solver: SolverOptions,
    pub eus_samples: usize,
    pub eus_weighting: EusWeighting,
    pub hit_and_run: HitAndRunOptions,
}

impl SyntheticConfig {
    pub fn new(dim: usize, criterion: Criterion, seed: u64) -> Self {
        Self {
            dim,
            n_candidates: 1000,
            n_iterations: 50,
            criterion,
            seed,
            c: ranksvm::DEFAULT_C,
            solver: SolverOptions::default(),
            eus_samples: 10_000,
            eus_weighting: EusWeighting::Plain,
            hit_and_run: HitAndRunOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticInstance {
    pub dim: usize,
    pub candidates: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub seed: u64,
}

impl SyntheticInstance {
    pub fn generate(dim: usize, n_candidates: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {dim}")));
        }
        if n_candidates < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 candidates, got {n_candidates}")));
        }
        let mut rng = stream(seed, 0, Purpose::Instance, 0);
        let candidates = (0..n_candidates)
            .map(|_| {
                let e: Vec<f64> = (0..dim).map(|_| Exp1.sample(&mut rng)).collect();
                let total: f64 = e.iter().sum();
                e.into_iter().map(|x| x / total).collect()
            })
            .collect();
        let target = loop {
            let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = norm(&g);
            if n > 0.0 {
                break g.into_iter().map(|x| x / n).collect::<Vec<f64>>();
            }
        };
        Ok(Self {
            dim,
            candidates,
            target,
            seed,
        })
    }

    pub fn true_utility(&self, index: usize) -> f64 {
        dot(&self.candidates[index], &self.target)
    }

    /// `max_{s∈S} ⟨s, w*⟩`
    pub fn best_possible(&self) -> f64 {
        (0..self.candidates.len())
            .map(|i| self.true_utility(i))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A synthetic run in progress.
#[derive(Clone, Debug)]
pub struct SyntheticState {
    pub instance: SyntheticInstance,
    pub archive: Archive,
    /// Position in `instance.candidates` of each archive entry.
    pub members: Vec<usize>,
    pub used: Vec<bool>,
    /// True utility of the incumbent, starting with the initial pick.
    pub performance: Vec<f64>,
    seed: u64,
}

impl SyntheticState {
    /// Starts from a uniformly drawn incumbent.
    pub fn new(instance: SyntheticInstance, seed: u64) -> Self {
        let first = stream(seed, 0, Purpose::Selection, 0).random_range(0..instance.candidates.len());
        let mut used = vec![false; instance.candidates.len()];
        used[first] = true;
        let archive = Archive::new(ArchiveEntry::descriptor_only(instance.candidates[first].clone()));
        let performance = vec![instance.true_utility(first)];
        Self {
            instance,
            archive,
            members: vec![first],
            used,
            performance,
            seed,
        }
    }

    pub fn incumbent(&self) -> usize {
        self.members[self.archive.incumbent()]
    }

    pub fn iteration(&self) -> usize {
        self.performance.len() - 1
    }

    pub fn exhausted(&self) -> bool {
        self.used.iter().all(|u| *u)
    }

    /// Candidate positions not yet shown.
    pub fn unused(&self) -> Vec<usize> {
        (0..self.used.len()).filter(|i| !self.used[*i]).collect()
    }

    /// The candidate the criterion would query next.
    pub fn select(&self, config: &SyntheticConfig) -> Result<usize> {
        let unused = self.unused();
        if unused.is_empty() {
            return Err(Error::Exhausted);
        }
        let iteration = self.iteration() as u64 + 1;
        let points: Vec<&[f64]> = unused.iter().map(|&i| self.instance.candidates[i].as_slice()).collect();
        let scores = match config.criterion {
            Criterion::Random => {
                let k = stream(self.seed, iteration, Purpose::Selection, 0).random_range(0..unused.len());
                return Ok(unused[k]);
            }
            Criterion::MaxCoord => return select_max_coord(&self.instance.candidates, &self.used),
            Criterion::Aeus => {
                let options = AeusOptions {
                    c: config.c,
                    solver: config.solver,
                    mode: AeusMode::PerTrajectory,
                };
                AeusContext::new(&self.archive, self.instance.dim, options)?.scores(&points)?
            }
            Criterion::EusMc => {
                let mut rng = stream(self.seed, iteration, Purpose::VersionSpace, 0);
                let estimator = EusEstimator::from_archive(
                    &self.archive,
                    self.instance.dim,
                    config.eus_samples,
                    &mut rng,
                    config.hit_and_run,
                    config.eus_weighting,
                )?;
                points.iter().map(|u| estimator.score(u)).collect::<Result<Vec<_>>>()?
            }
        };
        Ok(unused[argmax(scores).unwrap_or(0)])
    }

    /// Shows candidate `index` to the oracle and records the incumbent's utility.
    pub fn query(&mut self, index: usize) -> Result<bool> {
        if index >= self.used.len() || self.used[index] {
            return Err(Error::InvalidArgument(format!("candidate {index} is unavailable")));
        }
        let wins = self.instance.true_utility(index) > self.instance.true_utility(self.incumbent());
        self.used[index] = true;
        self.archive
            .record(ArchiveEntry::descriptor_only(self.instance.candidates[index].clone()), wins);
        self.members.push(index);
        self.performance.push(self.instance.true_utility(self.incumbent()));
        Ok(wins)
    }

    pub fn step(&mut self, config: &SyntheticConfig) -> Result<()> {
        if self.exhausted() {
            let last = *self.performance.last().expect("performance starts nonempty");
            self.performance.push(last);
            return Ok(());
        }
        let pick = self.select(config)?;
        self.query(pick)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRun {
    pub criterion: Criterion,
    pub dim: usize,
    pub seed: u64,
    /// `⟨uₜ, w*⟩` for `t = 0..=n_iterations`; entry 0 is the initial incumbent.
    pub performance: Vec<f64>,
    pub best_possible: f64,
    /// Candidate positions in query order, starting with the initial incumbent.
    pub queried: Vec<usize>,
}

pub fn run_synthetic(config: &SyntheticConfig) -> Result<SyntheticRun> {
    let instance = SyntheticInstance::generate(config.dim, config.n_candidates, config.seed)?;
    let best_possible = instance.best_possible();
    let mut state = SyntheticState::new(instance, config.seed);
    for _ in 0..config.n_iterations {
        state.step(config)?;
    }
    Ok(SyntheticRun {
        criterion: config.criterion,
        dim: config.dim,
        seed: config.seed,
        performance: state.performance,
        best_possible,
        queried: state.members,
    })
}
