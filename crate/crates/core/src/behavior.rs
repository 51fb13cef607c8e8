//! Behavioral feature space.
//!
//! Sensori-motor points are clustered online with a fixed radius (leader
//! clustering): a point joins the oldest centroid lying within `ε`, otherwise
//! it founds a new cluster. Centroids never move and later centroids never
//! take precedence, so an index assigned once stays valid for the rest of the
//! run and older descriptors only need zero-padding when new clusters appear.

use serde::{Deserialize, Serialize};

use crate::envs::{EnvSpec, Trajectory};
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::padded;

pub const CLUSTER_BOOK_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_RADIUS: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterBook {
    pub schema_version: u32,
    radius: f64,
    centroids: Vec<Vec<f64>>,
}

impl ClusterBook {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("cluster radius must be positive, got {radius}")));
        }
        Ok(Self {
            schema_version: CLUSTER_BOOK_SCHEMA_VERSION,
            radius,
            centroids: Vec::new(),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    /// Number of sensori-motor states discovered so far.
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn point_dim(&self) -> Option<usize> {
        self.centroids.first().map(Vec::len)
    }

    /// Nearest centroid and its squared distance; ties go to the oldest.
    pub fn nearest(&self, point: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.centroids.iter().enumerate() {
            let d: f64 = c.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }

    /// Index of the cluster `point` falls in, founding a new one when no
    /// centroid is within the radius. Among several centroids within the
    /// radius the oldest wins, which keeps re-assignment stable as the book grows.
    pub fn assign(&mut self, point: &[f64]) -> Result<usize> {
        if let Some(dim) = self.point_dim() {
            if point.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: point.len(),
                });
            }
        }
        ensure_finite(point, "sensori-motor point")?;
        let r2 = self.radius * self.radius;
        if let Some(i) = self
            .centroids
            .iter()
            .position(|c| c.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2)
        {
            return Ok(i);
        }
        self.centroids.push(point.to_vec());
        Ok(self.centroids.len() - 1)
    }

    /// Smallest distance between two centroids (`None` with fewer than two).
    pub fn min_separation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.centroids.len() {
            for j in i + 1..self.centroids.len() {
                let d: f64 = self.centroids[i]
                    .iter()
                    .zip(&self.centroids[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }
}

/// Fraction of time a trajectory spends in each sensori-motor state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BehaviorDescriptor(Vec<f64>);

impl BehaviorDescriptor {
    /// Wraps a histogram, checking it is nonnegative with unit L1 norm.
    pub fn new(histogram: Vec<f64>) -> Result<Self> {
        ensure_finite(&histogram, "behavior descriptor")?;
        if histogram.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidArgument("descriptor entries must be nonnegative".into()));
        }
        let total: f64 = histogram.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("descriptor must sum to 1, got {total}")));
        }
        Ok(Self(histogram))
    }

    pub fn one_hot(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim.max(index + 1)];
        v[index] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Zero-pads to `dim`, which may not be smaller than the current dimension.
    pub fn align(&self, dim: usize) -> Result<Self> {
        if dim < self.0.len() {
            return Err(Error::AlignShrink {
                from: self.0.len(),
                to: dim,
            });
        }
        Ok(Self(padded(&self.0, dim)))
    }
}

impl AsRef<[f64]> for BehaviorDescriptor {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Histogram over cluster indices, sized to the book after assignment.
pub fn featurize_points(book: &mut ClusterBook, points: &[Vec<f64>]) -> Result<BehaviorDescriptor> {
    if points.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let indices = points
        .iter()
        .map(|p| book.assign(p))
        .collect::<Result<Vec<_>>>()?;
    let mut histogram = vec![0.0; book.len()];
    for i in indices {
        histogram[i] += 1.0;
    }
    let n = points.len() as f64;
    for h in &mut histogram {
        *h /= n;
    }
    Ok(BehaviorDescriptor(histogram))
}

pub fn featurize(book: &mut ClusterBook, env: &EnvSpec, trajectory: &Trajectory) -> Result<BehaviorDescriptor> {
    let points = env.sensorimotor_points(trajectory)?;
    featurize_points(book, &points)
}
