//! Choosing what to show the expert next.
//!
//! [`aeus`] holds the approximate expected utility of selection, [`eus`] its
//! Monte-Carlo reference over version-space samples drawn by [`version_space`],
//! and [`synthetic`] the simplex benchmark comparing these criteria with the
//! random and max-coordinate baselines.

pub mod aeus;
pub mod eus;
pub mod synthetic;
pub mod version_space;

use serde::{Deserialize, Serialize};

use crate::envs::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::{l_inf, padded_sub};
use crate::policy::ParametricPolicy;
use crate::ranksvm::RankSvmProblem;

pub use aeus::{aeus_score, AeusContext, AeusEvaluation, AeusMode, AeusOptions, DescriptorScore};
pub use eus::{eus_from_samples, eus_mc, EusEstimator, EusWeighting};
pub use synthetic::{run_synthetic, Criterion, SyntheticConfig, SyntheticInstance, SyntheticRun, SyntheticState};
pub use version_space::{in_version_space, interior_point, sample_version_space, HitAndRunOptions};

/// One demonstration shown to the expert.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    /// Behavioral descriptor at the dimension it was created with.
    pub descriptor: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<ParametricPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
}

impl ArchiveEntry {
    pub fn descriptor_only(descriptor: Vec<f64>) -> Self {
        Self {
            descriptor,
            policy: None,
            trajectory: None,
        }
    }
}

/// `entries[loser] ≺ entries[winner]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedPair {
    pub loser: usize,
    pub winner: usize,
}

/// Demonstrations, the expert's verdicts on them, and the current best.
///
/// Every verdict compares a new demonstration with the incumbent of its time,
/// so after `t` recorded demonstrations the archive holds `t` constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
    constraints: Vec<RankedPair>,
    incumbent: usize,
    dim: usize,
}

impl Archive {
    pub fn new(first: ArchiveEntry) -> Self {
        let dim = first.descriptor.len();
        Self {
            entries: vec![first],
            constraints: Vec::new(),
            incumbent: 0,
            dim,
        }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn constraints(&self) -> &[RankedPair] {
        &self.constraints
    }

    pub fn incumbent(&self) -> usize {
        self.incumbent
    }

    pub fn incumbent_entry(&self) -> &ArchiveEntry {
        &self.entries[self.incumbent]
    }

    /// Current behavioral dimension (never decreases).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn grow_dim(&mut self, dim: usize) {
        self.dim = self.dim.max(dim);
    }

    /// Appends a demonstration ranked against the incumbent and returns its
    /// index. The incumbent moves only when the candidate wins.
    pub fn record(&mut self, entry: ArchiveEntry, candidate_wins: bool) -> usize {
        self.grow_dim(entry.descriptor.len());
        let index = self.entries.len();
        self.entries.push(entry);
        let pair = if candidate_wins {
            RankedPair {
                loser: self.incumbent,
                winner: index,
            }
        } else {
            RankedPair {
                loser: index,
                winner: self.incumbent,
            }
        };
        self.constraints.push(pair);
        if candidate_wins {
            self.incumbent = index;
        }
        index
    }

    /// `winner − loser` for each constraint, zero-padded to `dim`.
    pub fn differences(&self, dim: usize) -> Vec<Vec<f64>> {
        self.constraints
            .iter()
            .map(|p| {
                padded_sub(
                    &self.entries[p.winner].descriptor,
                    &self.entries[p.loser].descriptor,
                    dim,
                )
            })
            .collect()
    }

    pub fn problem(&self, c: f64) -> Result<RankSvmProblem> {
        let mut problem = RankSvmProblem::new(self.dim.max(1), c)?;
        for p in &self.constraints {
            problem.push(&self.entries[p.loser].descriptor, &self.entries[p.winner].descriptor)?;
        }
        Ok(problem)
    }
}

/// Unused candidate with the largest L∞ norm; ties go to the lowest index.
pub fn select_max_coord(candidates: &[Vec<f64>], used: &[bool]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if used.get(i).copied().unwrap_or(false) {
            continue;
        }
        let v = l_inf(c);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::Exhausted)
}
