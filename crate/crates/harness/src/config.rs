//! Experiment configuration and its content hash.

use std::path::{Path, PathBuf};

use april::behavior::DEFAULT_RADIUS;
use april::envs::{CancerConfig, EnvSpec, Environment, HazardModel, NoiseSpec};
use april::loops::{AprilConfig, EsConfig, EsRanking, IrlConfig, Method};
use april::ranksvm::DEFAULT_C;
use april::selection::AeusOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, HarnessError, Result};

/// Version stamped into every file the harness writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub environment: Environment,
    /// Transition noise σ (cancer only).
    pub noise: f64,
    /// Enables the stochastic death hazard (cancer only).
    pub hazard: bool,
    pub n_iterations: usize,
    pub n_runs: usize,
    pub lambda: usize,
    /// Rank-SVM box constraint.
    pub c: f64,
    /// Sensori-motor clustering radius ε.
    pub radius: f64,
    pub n_rollouts: Option<usize>,
    pub hidden: Option<usize>,
    /// Run `i` uses `seed + i`.
    pub seed: u64,
    /// ES only.
    pub es_ranking: Option<EsRanking>,
    /// IRL only: inner ES generations per iteration.
    pub irl_generations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::April,
            environment: Environment::Cancer,
            noise: 0.0,
            hazard: false,
            n_iterations: 30,
            n_runs: 101,
            lambda: 11,
            c: DEFAULT_C,
            radius: DEFAULT_RADIUS,
            n_rollouts: None,
            hidden: None,
            seed: 0,
            es_ranking: None,
            irl_generations: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn new(method: Method, environment: Environment) -> Self {
        Self {
            method,
            environment,
            ..Self::default()
        }
    }

    /// Reads TOML (by extension) or JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let config: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text)?,
            _ => serde_json::from_str(&text)?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.to_string()));
        if self.n_runs == 0 || self.n_iterations == 0 || self.lambda == 0 {
            return bad("n_runs, n_iterations and lambda must be positive");
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad("c must be positive");
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad("radius must be positive");
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad("noise must be >= 0");
        }
        if self.n_rollouts == Some(0) || self.hidden == Some(0) || self.irl_generations == Some(0) {
            return bad("n_rollouts, hidden and irl_generations must be positive when set");
        }
        if self.environment == Environment::MountainCar && (self.noise > 0.0 || self.hazard) {
            return bad("mountain_car has no transition noise or death hazard");
        }
        if self.es_ranking.is_some() && self.method != Method::Es {
            return bad("es_ranking applies to method es only");
        }
        if self.irl_generations.is_some() && self.method != Method::Irl {
            return bad("irl_generations applies to method irl only");
        }
        Ok(())
    }

    pub fn env_spec(&self) -> Result<EnvSpec> {
        Ok(match self.environment {
            Environment::MountainCar => EnvSpec::mountain_car(),
            Environment::Cancer => EnvSpec::Cancer(CancerConfig {
                noise: NoiseSpec::new(self.noise)?,
                hazard: self.hazard.then(HazardModel::default),
                ..CancerConfig::default()
            }),
        })
    }

    pub fn april_config(&self) -> Result<AprilConfig> {
        Ok(AprilConfig {
            lambda: self.lambda,
            n_rollouts: self.n_rollouts,
            hidden: self.hidden,
            radius: self.radius,
            aeus: AeusOptions {
                c: self.c,
                ..AeusOptions::default()
            },
            ..AprilConfig::new(self.env_spec()?)
        })
    }

    pub fn es_config(&self) -> Result<EsConfig> {
        Ok(EsConfig {
            lambda: self.lambda,
            hidden: self.hidden,
            ranking: self.es_ranking.unwrap_or_default(),
            ..EsConfig::new(self.env_spec()?)
        })
    }

    pub fn irl_config(&self) -> Result<IrlConfig> {
        let base = IrlConfig::new(self.env_spec()?);
        Ok(IrlConfig {
            hidden: self.hidden,
            radius: self.radius,
            lambda: self.lambda,
            n_rollouts: self.n_rollouts,
            generations: self.irl_generations.unwrap_or(base.generations),
            ..base
        })
    }

    /// SHA-256 over every field except the output location.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
