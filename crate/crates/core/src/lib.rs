//! Active preference-based policy search.
//!
//! The crate learns a linear utility over behavioral descriptors from pairwise
//! expert verdicts ([`ranksvm`]), builds those descriptors online from the
//! sensori-motor stream of each rollout ([`behavior`]), and picks the next
//! policy to show the expert with the approximate expected utility of
//! selection ([`selection`]). [`loops`] wires everything into the interactive
//! loop together with the apprenticeship-learning and evolution-strategy
//! baselines, run on the benchmarks in [`envs`].

pub mod behavior;
pub mod envs;
pub mod error;
pub mod linalg;
pub mod loops;
pub mod policy;
pub mod ranksvm;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
