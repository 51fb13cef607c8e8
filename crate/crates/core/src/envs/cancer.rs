//! Chemotherapy dosing: monthly dosage trades tumor shrinkage against
//! accumulated toxicity.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INITIAL_TUMOR: f64 = 1.3;
pub const INITIAL_TOXICITY: f64 = 0.0;
pub const DEFAULT_HORIZON: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancerState {
    pub tumor: f64,
    pub toxicity: f64,
    pub alive: bool,
    pub month: usize,
}

impl CancerState {
    pub const INITIAL: Self = Self {
        tumor: INITIAL_TUMOR,
        toxicity: INITIAL_TOXICITY,
        alive: true,
        month: 0,
    };
}

/// Transition noise `ε ~ N(0, σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
}

impl NoiseSpec {
    pub const NONE: Self = Self { sigma: 0.0 };

    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { sigma })
    }
}

/// Whether the two transition equations draw their own noise or share one draw.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDraw {
    #[default]
    Independent,
    Shared,
}

/// Monthly death probability `1 − exp(−exp(c₀ + c₁·s + c₂·t))` on the post-transition state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HazardModel {
    pub intercept: f64,
    pub tumor_coef: f64,
    pub toxicity_coef: f64,
}

impl Default for HazardModel {
    fn default() -> Self {
        Self {
            intercept: -4.0,
            tumor_coef: 1.0,
            toxicity_coef: 1.0,
        }
    }
}

impl HazardModel {
    pub fn death_probability(&self, tumor: f64, toxicity: f64) -> f64 {
        let rate = (self.intercept + self.tumor_coef * tumor + self.toxicity_coef * toxicity).exp();
        1.0 - (-rate).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CancerConfig {
    pub horizon: usize,
    pub noise: NoiseSpec,
    pub noise_draw: NoiseDraw,
    /// `None` disables the stochastic death mechanism.
    pub hazard: Option<HazardModel>,
    pub death_penalty: f64,
}

impl Default for CancerConfig {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            noise: NoiseSpec::NONE,
            noise_draw: NoiseDraw::Independent,
            hazard: None,
            death_penalty: 10.0,
        }
    }
}

/// One month of treatment at `dosage ∈ [0, 1]`.
pub fn cancer_step<R: Rng + ?Sized>(
    state: CancerState,
    dosage: f64,
    config: &CancerConfig,
    rng: &mut R,
) -> Result<CancerState> {
    if !state.alive || state.month >= config.horizon {
        return Err(Error::TerminalState);
    }
    if !(0.0..=1.0).contains(&dosage) {
        return Err(Error::InvalidArgument(format!("dosage must lie in [0, 1], got {dosage}")));
    }
    let (noise_tumor, noise_toxicity) = if config.noise.sigma > 0.0 {
        let normal = Normal::new(0.0, config.noise.sigma)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let first = normal.sample(rng);
        let second = match config.noise_draw {
            NoiseDraw::Independent => normal.sample(rng),
            NoiseDraw::Shared => first,
        };
        (first, second)
    } else {
        (0.0, 0.0)
    };

    let s = state.tumor;
    let t = state.toxicity;
    let treated = if s > 0.0 { 1.0 } else { 0.0 };
    let tumor = (s + 0.15 * t.max(INITIAL_TOXICITY) - 1.2 * (dosage - 0.5) * treated + noise_tumor).max(0.0);
    let toxicity = (t + 0.1 * s.max(INITIAL_TUMOR) + 1.2 * (dosage - 0.5) + noise_toxicity).max(0.0);

    let alive = match &config.hazard {
        Some(h) => rng.random::<f64>() >= h.death_probability(tumor, toxicity),
        None => true,
    };
    Ok(CancerState {
        tumor,
        toxicity,
        alive,
        month: state.month + 1,
    })
}
