//! Monte-Carlo expected utility of selection over version-space samples.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::version_space::{sample_version_space, HitAndRunOptions};
use super::Archive;
use crate::error::{Error, Result};
use crate::linalg::{dot, padded};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EusWeighting {
    /// `(1/n)[Σ_{W⁺}⟨w,u⟩ + Σ_{W⁻}⟨w,uₜ⟩]`: the plain mean of the max.
    #[default]
    Plain,
    /// Mean over `W⁺` plus mean over `W⁻`; an empty side contributes 0.
    Renormalized,
}

/// EUS of `candidate` against `incumbent` from a fixed set of samples.
/// All vectors must share one dimension.
pub fn eus_from_samples(samples: &[Vec<f64>], candidate: &[f64], incumbent: &[f64], weighting: EusWeighting) -> Result<f64> {
    let estimator = EusEstimator::new(samples.to_vec(), incumbent, weighting)?;
    estimator.score(candidate)
}

/// Version-space samples with the incumbent's utilities precomputed, for
/// scoring many candidates against the same archive.
#[derive(Clone, Debug)]
pub struct EusEstimator {
    samples: Vec<Vec<f64>>,
    incumbent_utilities: Vec<f64>,
    dim: usize,
    weighting: EusWeighting,
}

impl EusEstimator {
    pub fn new(samples: Vec<Vec<f64>>, incumbent: &[f64], weighting: EusWeighting) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("at least one version-space sample is required".into()));
        }
        let dim = samples[0].len();
        if let Some(s) = samples.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
        if incumbent.len() > dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: incumbent.len(),
            });
        }
        let incumbent = padded(incumbent, dim);
        let incumbent_utilities = samples.iter().map(|w| dot(w, &incumbent)).collect();
        Ok(Self {
            samples,
            incumbent_utilities,
            dim,
            weighting,
        })
    }

    /// Builds the estimator from `n_samples` hit-and-run draws of the archive's version space.
    pub fn from_archive<R: Rng + ?Sized>(
        archive: &Archive,
        dim: usize,
        n_samples: usize,
        rng: &mut R,
        sampler: HitAndRunOptions,
        weighting: EusWeighting,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be positive".into()));
        }
        let dim = dim.max(archive.dim()).max(1);
        let diffs = archive.differences(dim);
        let samples = sample_version_space(&diffs, dim, n_samples, rng, sampler)?;
        Self::new(samples, &archive.incumbent_entry().descriptor, weighting)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn score(&self, candidate: &[f64]) -> Result<f64> {
        if candidate.len() > self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: candidate.len(),
            });
        }
        let candidate = padded(candidate, self.dim);
        let (mut plus, mut minus) = (0.0, 0.0);
        let (mut n_plus, mut n_minus) = (0usize, 0usize);
        for (w, &ut) in self.samples.iter().zip(&self.incumbent_utilities) {
            let ux = dot(w, &candidate);
            if ux > ut {
                plus += ux;
                n_plus += 1;
            } else {
                minus += ut;
                n_minus += 1;
            }
        }
        Ok(match self.weighting {
            EusWeighting::Plain => (plus + minus) / self.samples.len() as f64,
            EusWeighting::Renormalized => {
                let side = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
                side(plus, n_plus) + side(minus, n_minus)
            }
        })
    }
}

/// EUS of `candidate` estimated from `n_samples` version-space draws.
pub fn eus_mc<R: Rng + ?Sized>(
    archive: &Archive,
    candidate: &[f64],
    n_samples: usize,
    rng: &mut R,
    sampler: HitAndRunOptions,
    weighting: EusWeighting,
) -> Result<f64> {
    let dim = candidate.len().max(archive.dim());
    EusEstimator::from_archive(archive, dim, n_samples, rng, sampler, weighting)?.score(candidate)
}
