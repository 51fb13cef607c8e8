//! Uniform sampling of the version space
//! `{w : ‖w‖₂ ≤ 1, ⟨w, winnerᵢ − loserᵢ⟩ > 0 ∀i}` by hit-and-run.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, norm_sq};
use crate::ranksvm::{self, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HitAndRunOptions {
    pub burn_in: usize,
    pub thinning: usize,
}

impl Default for HitAndRunOptions {
    fn default() -> Self {
        Self {
            burn_in: 1000,
            thinning: 10,
        }
    }
}

/// Strict membership: inside the closed unit ball with every margin positive.
pub fn in_version_space(w: &[f64], diffs: &[Vec<f64>]) -> bool {
    norm_sq(w) <= 1.0 && diffs.iter().all(|d| dot(w, d) > 0.0)
}

/// A strictly feasible point: the maximum-margin direction scaled to norm ½.
pub fn interior_point(diffs: &[Vec<f64>], dim: usize) -> Result<Vec<f64>> {
    if diffs.is_empty() {
        return Ok(vec![0.0; dim]);
    }
    if let Some(d) = diffs.iter().find(|d| d.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: d.len(),
        });
    }
    let refs: Vec<&[f64]> = diffs.iter().map(Vec::as_slice).collect();
    let model = ranksvm::solve_differences(
        &refs,
        dim,
        1e6,
        SolverOptions {
            tolerance: 1e-10,
            max_iterations: 20_000,
        },
        None,
    )?;
    let n = norm(&model.w);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::EmptyVersionSpace);
    }
    let w: Vec<f64> = model.w.iter().map(|x| 0.5 * x / n).collect();
    if in_version_space(&w, diffs) {
        Ok(w)
    } else {
        Err(Error::EmptyVersionSpace)
    }
}

/// Draws `n` approximately uniform points of the version space.
///
/// The chain starts from [`interior_point`], discards `burn_in` moves and then
/// keeps every `thinning`-th point. A move is accepted only after an exact
/// membership check, so the chain never leaves the region.
pub fn sample_version_space<R: Rng + ?Sized>(
    diffs: &[Vec<f64>],
    dim: usize,
    n: usize,
    rng: &mut R,
    options: HitAndRunOptions,
) -> Result<Vec<Vec<f64>>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut x = interior_point(diffs, dim)?;
    let mut scratch = vec![0.0; dim];
    for _ in 0..options.burn_in {
        hit_and_run_step(&mut x, &mut scratch, diffs, rng);
    }
    let thinning = options.thinning.max(1);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        for _ in 0..thinning {
            hit_and_run_step(&mut x, &mut scratch, diffs, rng);
        }
        out.push(x.clone());
    }
    Ok(out)
}

const MAX_DIRECTION_RETRIES: usize = 100;

/// One hit-and-run move: random direction, uniform point on the feasible chord.
fn hit_and_run_step<R: Rng + ?Sized>(x: &mut Vec<f64>, direction: &mut [f64], diffs: &[Vec<f64>], rng: &mut R) {
    for _ in 0..MAX_DIRECTION_RETRIES {
        for v in direction.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let len = norm(direction);
        if len == 0.0 {
            continue;
        }
        direction.iter_mut().for_each(|v| *v /= len);

        let b = dot(x, direction);
        let c = norm_sq(x) - 1.0;
        let disc = (b * b - c).max(0.0).sqrt();
        let (mut lo, mut hi) = (-b - disc, -b + disc);
        for d in diffs {
            let rate = dot(direction, d);
            let margin = dot(x, d);
            if rate > 0.0 {
                lo = lo.max(-margin / rate);
            } else if rate < 0.0 {
                hi = hi.min(-margin / rate);
            }
        }
        if hi.is_nan() || lo.is_nan() || hi <= lo {
            continue;
        }
        let t = lo + (hi - lo) * rng.random::<f64>();
        let candidate: Vec<f64> = x.iter().zip(direction.iter()).map(|(a, v)| a + t * v).collect();
        if in_version_space(&candidate, diffs) {
            *x = candidate;
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn unconstrained_disk_is_centered() {
        let mut rng = stream(11, 0, Purpose::VersionSpace, 0);
        let samples = sample_version_space(&[], 2, 10_000, &mut rng, HitAndRunOptions::default()).unwrap();
        assert_eq!(samples.len(), 10_000);
        let mean: Vec<f64> = (0..2)
            .map(|i| samples.iter().map(|w| w[i]).sum::<f64>() / samples.len() as f64)
            .collect();
        assert!(mean[0].abs() < 0.05 && mean[1].abs() < 0.05, "{mean:?}");
        assert!(samples.iter().all(|w| norm_sq(w) <= 1.0));
        // Uniform on the disk: E‖w‖² = ½.
        let r2 = samples.iter().map(|w| norm_sq(w)).sum::<f64>() / samples.len() as f64;
        assert!((r2 - 0.5).abs() < 0.03, "{r2}");
    }

    #[test]
    fn halfplane_membership() {
        let diffs = vec![vec![-1.0, 1.0]];
        let mut rng = stream(2, 0, Purpose::VersionSpace, 0);
        let samples = sample_version_space(&diffs, 2, 2000, &mut rng, HitAndRunOptions::default()).unwrap();
        assert!(samples.iter().all(|w| w[1] > w[0]));
    }

    #[test]
    fn contradiction_is_empty() {
        let diffs = vec![vec![-1.0, 1.0], vec![1.0, -1.0]];
        let mut rng = stream(2, 0, Purpose::VersionSpace, 0);
        assert_eq!(
            sample_version_space(&diffs, 2, 10, &mut rng, HitAndRunOptions::default()),
            Err(Error::EmptyVersionSpace)
        );
        assert_eq!(interior_point(&[vec![0.0, 0.0]], 2), Err(Error::EmptyVersionSpace));
    }

    #[test]
    fn narrow_cone_samples_stay_feasible() {
        let diffs = vec![vec![1.0, 0.0, -0.2], vec![0.1, 1.0, 0.0], vec![-0.3, 0.2, 1.0], vec![0.9, -0.8, 0.05]];
        let mut rng = stream(5, 0, Purpose::VersionSpace, 0);
        let samples = sample_version_space(&diffs, 3, 5000, &mut rng, HitAndRunOptions::default()).unwrap();
        assert_eq!(samples.len(), 5000);
        assert!(samples.iter().all(|w| in_version_space(w, &diffs)));
    }
}
