//! Interactive policy search and its baselines.
//!
//! [`april`] alternates self-training (AEUS over perturbed policies) with one
//! expert comparison per iteration. [`es`] is the (1+λ) evolution strategy
//! that replaces self-training by picking the best of λ rollouts, and [`irl`]
//! is the projection variant of apprenticeship learning driven by an expert
//! demonstration built in [`expert`].

pub mod april;
pub mod es;
pub mod expert;
pub mod irl;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::envs::{EnvSpec, Preference, Trajectory};
use crate::error::{Error, Result};

pub use april::{AprilConfig, AprilState, PendingComparison};
pub use es::{es_maximize, EsConfig, EsRanking, EsState, MaximizeOutcome};
pub use expert::{make_expert_demo, ExpertDemoConfig};
pub use irl::{projection_update, IrlConfig, IrlState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    April,
    Irl,
    Es,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::April => "april",
            Method::Irl => "irl",
            Method::Es => "es",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "april" => Ok(Method::April),
            "irl" => Ok(Method::Irl),
            "es" => Ok(Method::Es),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleSource {
    Emulated,
    Human,
}

/// Something that ranks a new demonstration against the incumbent.
pub trait ExpertOracle {
    /// `true` when `candidate` is preferred to `incumbent`.
    fn prefer(&mut self, candidate: &Trajectory, incumbent: &Trajectory) -> Result<bool>;

    fn source(&self) -> OracleSource;
}

/// Ranks by the environment's score (lower is better, ties keep the incumbent).
#[derive(Clone, Debug)]
pub struct EmulatedExpert {
    env: EnvSpec,
}

impl EmulatedExpert {
    pub fn new(env: EnvSpec) -> Self {
        Self { env }
    }
}

impl ExpertOracle for EmulatedExpert {
    fn prefer(&mut self, candidate: &Trajectory, incumbent: &Trajectory) -> Result<bool> {
        Ok(self.env.prefer(candidate, incumbent)? == Preference::First)
    }

    fn source(&self) -> OracleSource {
        OracleSource::Emulated
    }
}

/// Replays a fixed list of verdicts, e.g. from a run log or a human session.
#[derive(Clone, Debug, Default)]
pub struct ScriptedExpert {
    verdicts: VecDeque<bool>,
    source: Option<OracleSource>,
}

impl ScriptedExpert {
    pub fn new<I: IntoIterator<Item = bool>>(verdicts: I) -> Self {
        Self {
            verdicts: verdicts.into_iter().collect(),
            source: None,
        }
    }

    /// Reports `source` instead of [`OracleSource::Human`].
    pub fn with_source(mut self, source: OracleSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn remaining(&self) -> usize {
        self.verdicts.len()
    }
}

impl ExpertOracle for ScriptedExpert {
    fn prefer(&mut self, _candidate: &Trajectory, _incumbent: &Trajectory) -> Result<bool> {
        self.verdicts
            .pop_front()
            .ok_or_else(|| Error::Oracle("no verdict left in the script".into()))
    }

    fn source(&self) -> OracleSource {
        self.source.unwrap_or(OracleSource::Human)
    }
}

/// One line of a run log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based; iteration `t` is the `t`-th demonstration after the initial one.
    pub iteration: usize,
    /// Index of the demonstrated policy in the run's archive.
    pub candidate_id: usize,
    /// Expert verdict; absent for methods that never query the expert.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_wins: Option<bool>,
    /// Emulated score of the new demonstration.
    pub candidate_score: f64,
    /// Emulated score of the best policy after this iteration (lower is better).
    pub best_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Behavioral dimension after this iteration.
    pub dim: usize,
    /// Criterion value of the demonstrated candidate (AEUS for APRIL).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_score: Option<f64>,
    /// `‖μ_E − μ̄‖` for the projection baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    /// Rollouts simulated during this iteration, demonstrations excluded.
    pub simulations: usize,
}
