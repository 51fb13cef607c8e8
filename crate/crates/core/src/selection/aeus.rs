//! Approximate expected utility of selection.
//!
//! For a candidate descriptor `u` and incumbent `uₜ`, two ranking problems are
//! solved on the archive constraints: `w⁺` with `uₜ ≺ u` added and `w⁻` with
//! `u ≺ uₜ` added. Each SVM solution stands in for the center of mass of its
//! half of the version space and its inverse objective for that half's
//! probability:
//!
//! ```text
//! score(u) = ⟨w⁺, u⟩ / F(w⁺) + ⟨w⁻, uₜ⟩ / F(w⁻)
//! ```
//!
//! A policy's score averages this over the descriptors of its rollouts.

use serde::{Deserialize, Serialize};

use super::Archive;
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{dot, padded};
use crate::ranksvm::{self, RankingModel, SolverOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AeusMode {
    /// Re-solve `w±` for every rollout descriptor and average the scores.
    #[default]
    PerTrajectory,
    /// Solve once on the mean descriptor.
    MeanDescriptor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeusOptions {
    pub c: f64,
    pub solver: SolverOptions,
    pub mode: AeusMode,
}

impl Default for AeusOptions {
    fn default() -> Self {
        Self {
            c: ranksvm::DEFAULT_C,
            solver: SolverOptions::default(),
            mode: AeusMode::PerTrajectory,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorScore {
    pub w_plus: RankingModel,
    pub w_minus: RankingModel,
    /// `⟨w⁺, u⟩`
    pub candidate_utility: f64,
    /// `⟨w⁻, uₜ⟩`
    pub incumbent_utility: f64,
    pub score: f64,
    /// Candidate identical to the incumbent (or a zero objective): score forced to 0.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AeusEvaluation {
    pub score: f64,
    /// Every descriptor was degenerate; the candidate carries no information.
    pub degenerate: bool,
    pub per_descriptor: Vec<DescriptorScore>,
}

/// Archive constraints prepared once and shared by every candidate of an
/// iteration. Read-only, so candidates can be scored concurrently.
#[derive(Clone, Debug)]
pub struct AeusContext {
    dim: usize,
    diffs: Vec<Vec<f64>>,
    base_dual: Vec<f64>,
    incumbent: Vec<f64>,
    options: AeusOptions,
}

impl AeusContext {
    /// `dim` must cover the archive and every descriptor that will be scored.
    pub fn new(archive: &Archive, dim: usize, options: AeusOptions) -> Result<Self> {
        if archive.is_empty() {
            return Err(Error::InvalidArgument("archive is empty".into()));
        }
        let dim = dim.max(archive.dim()).max(1);
        let diffs = archive.differences(dim);
        let refs: Vec<&[f64]> = diffs.iter().map(Vec::as_slice).collect();
        let base = ranksvm::solve_differences(&refs, dim, options.c, options.solver, None)?;
        Ok(Self {
            dim,
            diffs,
            base_dual: base.dual,
            incumbent: padded(&archive.incumbent_entry().descriptor, dim),
            options,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn solve_with(&self, extra: &[f64]) -> Result<RankingModel> {
        let mut refs: Vec<&[f64]> = self.diffs.iter().map(Vec::as_slice).collect();
        refs.push(extra);
        ranksvm::solve_differences(&refs, self.dim, self.options.c, self.options.solver, Some(&self.base_dual))
    }

    /// Score of a single descriptor.
    pub fn score_descriptor(&self, u: &[f64]) -> Result<DescriptorScore> {
        if u.len() > self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        ensure_finite(u, "candidate descriptor")?;
        let u = padded(u, self.dim);
        let delta: Vec<f64> = u.iter().zip(&self.incumbent).map(|(a, b)| a - b).collect();
        let minus_delta: Vec<f64> = delta.iter().map(|d| -d).collect();
        let w_plus = self.solve_with(&delta)?;
        let w_minus = self.solve_with(&minus_delta)?;
        let candidate_utility = dot(&w_plus.w, &u);
        let incumbent_utility = dot(&w_minus.w, &self.incumbent);

        let identical = delta.iter().all(|d| *d == 0.0);
        let zero_objective = w_plus.objective == 0.0 || w_minus.objective == 0.0;
        let (score, degenerate) = if identical || zero_objective {
            (0.0, true)
        } else {
            (
                candidate_utility / w_plus.objective + incumbent_utility / w_minus.objective,
                false,
            )
        };
        Ok(DescriptorScore {
            w_plus,
            w_minus,
            candidate_utility,
            incumbent_utility,
            score,
            degenerate,
        })
    }

    /// Score of a policy represented by the descriptors of its rollouts.
    pub fn evaluate<D: AsRef<[f64]>>(&self, descriptors: &[D]) -> Result<AeusEvaluation> {
        if descriptors.is_empty() {
            return Err(Error::InvalidArgument("no candidate descriptors".into()));
        }
        let per_descriptor = match self.options.mode {
            AeusMode::PerTrajectory => descriptors
                .iter()
                .map(|u| self.score_descriptor(u.as_ref()))
                .collect::<Result<Vec<_>>>()?,
            AeusMode::MeanDescriptor => {
                let mut mean = vec![0.0; self.dim];
                for u in descriptors {
                    let u = u.as_ref();
                    if u.len() > self.dim {
                        return Err(Error::DimensionMismatch {
                            expected: self.dim,
                            got: u.len(),
                        });
                    }
                    for (m, v) in mean.iter_mut().zip(u) {
                        *m += v;
                    }
                }
                let n = descriptors.len() as f64;
                mean.iter_mut().for_each(|m| *m /= n);
                vec![self.score_descriptor(&mean)?]
            }
        };
        let score = per_descriptor.iter().map(|d| d.score).sum::<f64>() / per_descriptor.len() as f64;
        let degenerate = per_descriptor.iter().all(|d| d.degenerate);
        Ok(AeusEvaluation {
            score,
            degenerate,
            per_descriptor,
        })
    }

    /// Scores many candidates, in parallel when the `parallel` feature is on.
    /// Output order matches input order.
    pub fn evaluate_all<D>(&self, candidates: &[Vec<D>]) -> Result<Vec<AeusEvaluation>>
    where
        D: AsRef<[f64]> + Sync,
    {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            candidates.par_iter().map(|c| self.evaluate(c)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            candidates.iter().map(|c| self.evaluate(c)).collect()
        }
    }

    /// Single-descriptor scores only, skipping the per-descriptor models.
    pub fn scores<D>(&self, descriptors: &[D]) -> Result<Vec<f64>>
    where
        D: AsRef<[f64]> + Sync,
    {
        let one = |u: &D| self.score_descriptor(u.as_ref()).map(|s| if s.degenerate { f64::NAN } else { s.score });
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            descriptors.par_iter().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            descriptors.iter().map(one).collect()
        }
    }
}

/// AEUS of one candidate policy given its rollout descriptors.
pub fn aeus_score<D: AsRef<[f64]>>(archive: &Archive, candidate_descriptors: &[D], options: AeusOptions) -> Result<AeusEvaluation> {
    let dim = candidate_descriptors
        .iter()
        .map(|u| u.as_ref().len())
        .max()
        .unwrap_or(0);
    AeusContext::new(archive, dim, options)?.evaluate(candidate_descriptors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::ArchiveEntry;

    fn archive(incumbent: Vec<f64>) -> Archive {
        Archive::new(ArchiveEntry::descriptor_only(incumbent))
    }

    #[test]
    fn empty_archive_analytic_case() {
        let a = archive(vec![0.0, 1.0]);
        let eval = aeus_score(&a, &[vec![1.0, 0.0]], AeusOptions::default()).unwrap();
        let d = &eval.per_descriptor[0];
        assert!((d.w_plus.w[0] - 0.5).abs() < 1e-12 && (d.w_plus.w[1] + 0.5).abs() < 1e-12);
        assert!((d.w_plus.objective - 0.25).abs() < 1e-12);
        assert!((d.candidate_utility - 0.5).abs() < 1e-12);
        assert!((d.w_minus.w[0] + 0.5).abs() < 1e-12 && (d.w_minus.w[1] - 0.5).abs() < 1e-12);
        assert!((d.w_minus.objective - 0.25).abs() < 1e-12);
        assert!((d.incumbent_utility - 0.5).abs() < 1e-12);
        assert!((eval.score - 4.0).abs() < 1e-9);
        assert!(!eval.degenerate);
    }

    #[test]
    fn identical_candidate_is_degenerate() {
        let a = archive(vec![0.3, 0.7]);
        let eval = aeus_score(&a, &[vec![0.3, 0.7]], AeusOptions::default()).unwrap();
        assert_eq!(eval.score, 0.0);
        assert!(eval.degenerate);
        let d = &eval.per_descriptor[0];
        assert_eq!(d.w_plus.w, vec![0.0, 0.0]);
        assert_eq!(d.w_plus.slacks, vec![1.0]);
    }

    #[test]
    fn permutation_invariance() {
        let mut a = archive(vec![0.2, 0.3, 0.5]);
        a.record(ArchiveEntry::descriptor_only(vec![0.6, 0.2, 0.2]), true);
        let u = vec![0.1, 0.8, 0.1];
        let s = aeus_score(&a, std::slice::from_ref(&u), AeusOptions::default()).unwrap().score;

        let perm = |v: &[f64]| vec![v[2], v[0], v[1]];
        let mut b = archive(perm(&[0.2, 0.3, 0.5]));
        b.record(ArchiveEntry::descriptor_only(perm(&[0.6, 0.2, 0.2])), true);
        let t = aeus_score(&b, &[perm(&u)], AeusOptions::default()).unwrap().score;
        assert!((s - t).abs() < 1e-9 * s.abs().max(1.0));
    }

    #[test]
    fn augmented_models_are_feasible() {
        let mut a = archive(vec![0.25, 0.25, 0.25, 0.25]);
        a.record(ArchiveEntry::descriptor_only(vec![0.7, 0.1, 0.1, 0.1]), true);
        a.record(ArchiveEntry::descriptor_only(vec![0.1, 0.7, 0.1, 0.1]), false);
        let u = vec![0.4, 0.0, 0.6, 0.0];
        let eval = aeus_score(&a, std::slice::from_ref(&u), AeusOptions::default()).unwrap();
        let d = &eval.per_descriptor[0];
        let diffs = a.differences(4);
        let inc = a.incumbent_entry().descriptor.clone();
        let delta: Vec<f64> = u.iter().zip(&inc).map(|(x, y)| x - y).collect();
        for (model, extra) in [(&d.w_plus, delta.clone()), (&d.w_minus, delta.iter().map(|v| -v).collect())] {
            for (k, diff) in diffs.iter().chain(std::iter::once(&extra)).enumerate() {
                assert!(dot(&model.w, diff) >= 1.0 - model.slacks[k] - 1e-6);
            }
            let recomputed = 0.5 * dot(&model.w, &model.w) + 100.0 * model.slacks.iter().sum::<f64>();
            assert!((recomputed - model.objective).abs() <= 1e-8 * model.objective);
        }
        let recomputed = d.candidate_utility / d.w_plus.objective + d.incumbent_utility / d.w_minus.objective;
        assert!((recomputed - eval.score).abs() < 1e-9);
    }

    #[test]
    fn mean_descriptor_mode_solves_once() {
        let a = archive(vec![0.0, 1.0]);
        let opts = AeusOptions {
            mode: AeusMode::MeanDescriptor,
            ..AeusOptions::default()
        };
        let eval = aeus_score(&a, &[vec![1.0, 0.0], vec![1.0, 0.0]], opts).unwrap();
        assert_eq!(eval.per_descriptor.len(), 1);
        assert!((eval.score - 4.0).abs() < 1e-9);
    }

    #[test]
    fn longer_candidate_descriptors_are_accepted() {
        let a = archive(vec![1.0]);
        let eval = aeus_score(&a, &[vec![0.0, 1.0]], AeusOptions::default()).unwrap();
        assert!((eval.score - 4.0).abs() < 1e-9);
        assert!(aeus_score::<Vec<f64>>(&a, &[], AeusOptions::default()).is_err());
    }
}
