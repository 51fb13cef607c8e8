//! One-hidden-layer neural policies and Gaussian mutation with multiplicative
//! step-size control.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Layer sizes of a one-hidden-layer network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolicyShape {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
}

impl PolicyShape {
    pub fn new(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Self {
            inputs,
            hidden,
            outputs,
        }
    }
}

/// Number of weights: `(inputs + 1)·hidden + (hidden + 1)·outputs`.
pub fn param_dim(shape: PolicyShape) -> Result<usize> {
    if shape.inputs == 0 || shape.hidden == 0 || shape.outputs == 0 {
        return Err(Error::InvalidShape(format!(
            "layer sizes must be positive, got {}x{}x{}",
            shape.inputs, shape.hidden, shape.outputs
        )));
    }
    Ok((shape.inputs + 1) * shape.hidden + (shape.hidden + 1) * shape.outputs)
}

/// How the raw network output becomes an action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMap {
    /// `−1` below `−⅓`, `+1` above `⅓`, `0` in between.
    Trichotomy,
    /// `(tanh(y) + 1) / 2`, a dosage in `[0, 1]`.
    Dosage,
}

impl ActionMap {
    pub fn apply(self, y: f64) -> f64 {
        match self {
            ActionMap::Trichotomy => {
                if y < -1.0 / 3.0 {
                    -1.0
                } else if y > 1.0 / 3.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActionMap::Dosage => (y.tanh() + 1.0) / 2.0,
        }
    }
}

/// Flattened network weights. Layout: input→hidden matrix (row per hidden
/// unit), hidden biases, hidden→output matrix (row per output), output biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametricPolicy {
    pub shape: PolicyShape,
    pub weights: Vec<f64>,
}

impl ParametricPolicy {
    pub fn new(shape: PolicyShape, weights: Vec<f64>) -> Result<Self> {
        let d = param_dim(shape)?;
        if weights.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: weights.len(),
            });
        }
        ensure_finite(&weights, "policy weights")?;
        Ok(Self { shape, weights })
    }

    pub fn zeros(shape: PolicyShape) -> Result<Self> {
        Ok(Self {
            shape,
            weights: vec![0.0; param_dim(shape)?],
        })
    }

    /// Weights drawn i.i.d. from `N(0, 1)`.
    pub fn random<R: Rng + ?Sized>(shape: PolicyShape, rng: &mut R) -> Result<Self> {
        let d = param_dim(shape)?;
        let weights = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        Ok(Self { shape, weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Raw network outputs (tanh hidden layer, linear output layer).
    pub fn forward(&self, observation: &[f64]) -> Result<Vec<f64>> {
        let PolicyShape {
            inputs,
            hidden,
            outputs,
        } = self.shape;
        if observation.len() != inputs {
            return Err(Error::DimensionMismatch {
                expected: inputs,
                got: observation.len(),
            });
        }
        let (w1, rest) = self.weights.split_at(inputs * hidden);
        let (b1, rest) = rest.split_at(hidden);
        let (w2, b2) = rest.split_at(hidden * outputs);

        let activations: Vec<f64> = (0..hidden)
            .map(|j| {
                let row = &w1[j * inputs..(j + 1) * inputs];
                let z: f64 = row.iter().zip(observation).map(|(a, b)| a * b).sum::<f64>() + b1[j];
                z.tanh()
            })
            .collect();
        Ok((0..outputs)
            .map(|k| {
                let row = &w2[k * hidden..(k + 1) * hidden];
                row.iter().zip(&activations).map(|(a, b)| a * b).sum::<f64>() + b2[k]
            })
            .collect())
    }

    /// Action for `observation` (already normalized) using the first output.
    pub fn act(&self, observation: &[f64], map: ActionMap) -> Result<f64> {
        let y = self.forward(observation)?[0];
        Ok(map.apply(y))
    }

    /// `x + σ·g` with `g` standard normal per coordinate.
    pub fn perturb<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        let weights = self
            .weights
            .iter()
            .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(Self {
            shape: self.shape,
            weights,
        })
    }
}

pub const DEFAULT_STEP_FACTOR: f64 = 1.5;

/// Mutation strength with the multiply-on-success / divide-by-`c^¼`-on-failure rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizeState {
    pub sigma: f64,
    pub factor: f64,
}

impl Default for StepSizeState {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            factor: DEFAULT_STEP_FACTOR,
        }
    }
}

impl StepSizeState {
    pub fn new(sigma: f64, factor: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        if !(factor.is_finite() && factor > 1.0) {
            return Err(Error::InvalidArgument(format!("step factor must exceed 1, got {factor}")));
        }
        Ok(Self { sigma, factor })
    }

    pub fn adapt(self, improved: bool) -> Self {
        let sigma = if improved {
            self.sigma * self.factor
        } else {
            self.sigma / self.factor.powf(0.25)
        };
        Self { sigma, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use proptest::prelude::*;

    #[test]
    fn reference_network_sizes() {
        assert_eq!(param_dim(PolicyShape::new(2, 9, 1)).unwrap(), 37);
        assert_eq!(param_dim(PolicyShape::new(2, 99, 1)).unwrap(), 397);
        assert_eq!(param_dim(PolicyShape::new(1, 1, 1)).unwrap(), 4);
        assert!(param_dim(PolicyShape::new(0, 3, 1)).is_err());
        assert!(param_dim(PolicyShape::new(2, 0, 1)).is_err());
    }

    #[test]
    fn zero_policy_outputs() {
        let p = ParametricPolicy::zeros(PolicyShape::new(2, 9, 1)).unwrap();
        assert_eq!(p.act(&[0.3, -0.7], ActionMap::Trichotomy).unwrap(), 0.0);
        assert_eq!(p.act(&[0.3, -0.7], ActionMap::Dosage).unwrap(), 0.5);
    }

    #[test]
    fn output_bias_saturates() {
        let shape = PolicyShape::new(2, 9, 1);
        let mut p = ParametricPolicy::zeros(shape).unwrap();
        *p.weights.last_mut().unwrap() = 10.0;
        assert_eq!(p.act(&[0.0, 0.0], ActionMap::Trichotomy).unwrap(), 1.0);
        let dose = p.act(&[0.0, 0.0], ActionMap::Dosage).unwrap();
        assert!((dose - 1.0).abs() < 1e-8);
    }

    #[test]
    fn forward_matches_hand_evaluation() {
        // inputs 2, hidden 1, outputs 1: w1 = (1, 2), b1 = 0.5, w2 = 3, b2 = -1.
        let p = ParametricPolicy::new(PolicyShape::new(2, 1, 1), vec![1.0, 2.0, 0.5, 3.0, -1.0]).unwrap();
        let y = p.forward(&[0.1, -0.2]).unwrap()[0];
        let expected = 3.0 * (0.1 - 0.4 + 0.5_f64).tanh() - 1.0;
        assert!((y - expected).abs() < 1e-15);
        assert!(p.forward(&[1.0]).is_err());
    }

    #[test]
    fn wrong_weight_count_rejected() {
        assert!(ParametricPolicy::new(PolicyShape::new(2, 9, 1), vec![0.0; 36]).is_err());
        assert!(ParametricPolicy::new(PolicyShape::new(1, 1, 1), vec![0.0, 0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn perturbation_is_seeded() {
        let p = ParametricPolicy::zeros(PolicyShape::new(2, 9, 1)).unwrap();
        let a = p.perturb(0.5, &mut stream(1, 0, Purpose::Perturb, 0)).unwrap();
        let b = p.perturb(0.5, &mut stream(1, 0, Purpose::Perturb, 0)).unwrap();
        assert_eq!(a, b);
        assert!(p.perturb(0.0, &mut stream(1, 0, Purpose::Perturb, 0)).is_err());
        let tiny = p.perturb(1e-300, &mut stream(1, 0, Purpose::Perturb, 0)).unwrap();
        assert!(tiny.weights.iter().all(|w| w.abs() < 1e-290));
    }

    #[test]
    fn perturbation_has_unit_spread() {
        let p = ParametricPolicy::zeros(PolicyShape::new(1, 1, 1)).unwrap();
        let mut rng = stream(42, 0, Purpose::Perturb, 0);
        let n = 10_000;
        let mut sums = [0.0; 4];
        let mut squares = [0.0; 4];
        for _ in 0..n {
            let q = p.perturb(1.0, &mut rng).unwrap();
            for (i, w) in q.weights.iter().enumerate() {
                sums[i] += w;
                squares[i] += w * w;
            }
        }
        for i in 0..4 {
            let mean = sums[i] / n as f64;
            let std = (squares[i] / n as f64 - mean * mean).sqrt();
            assert!((0.97..=1.03).contains(&std), "coordinate {i}: std {std}");
        }
    }

    #[test]
    fn sigma_adaptation() {
        let s = StepSizeState::default();
        assert_eq!(s.adapt(true).sigma, 1.5);
        assert!((s.adapt(false).sigma - 0.903_602_003_609_844_9).abs() < 1e-12);
        let mut t = s;
        for _ in 0..4 {
            t = t.adapt(true).adapt(false);
        }
        assert!((t.sigma - 3.375).abs() < 1e-12);
        assert!(StepSizeState::new(0.0, 1.5).is_err());
        assert!(StepSizeState::new(1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn param_dim_matches_layout(inputs in 1usize..6, hidden in 1usize..30, outputs in 1usize..4, seed in any::<u64>()) {
            let shape = PolicyShape::new(inputs, hidden, outputs);
            let p = ParametricPolicy::random(shape, &mut stream(seed, 0, Purpose::InitialPolicy, 0)).unwrap();
            prop_assert_eq!(p.dim(), param_dim(shape).unwrap());
            let obs = vec![0.25; inputs];
            prop_assert_eq!(p.forward(&obs).unwrap().len(), outputs);
        }

        #[test]
        fn actions_stay_in_codomain(seed in any::<u64>(), a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let p = ParametricPolicy::random(PolicyShape::new(2, 5, 1), &mut stream(seed, 0, Purpose::InitialPolicy, 0)).unwrap();
            let mc = p.act(&[a, b], ActionMap::Trichotomy).unwrap();
            prop_assert!(mc == -1.0 || mc == 0.0 || mc == 1.0);
            let dose = p.act(&[a, b], ActionMap::Dosage).unwrap();
            prop_assert!((0.0..=1.0).contains(&dose));
        }

        #[test]
        fn log_sigma_moves_by_fixed_steps(flags in proptest::collection::vec(any::<bool>(), 1..40)) {
            let mut s = StepSizeState::default();
            for f in flags {
                let before = s.sigma.ln();
                s = s.adapt(f);
                prop_assert!(s.sigma > 0.0);
                let delta = s.sigma.ln() - before;
                let expected = if f { 1.5f64.ln() } else { -1.5f64.ln() / 4.0 };
                prop_assert!((delta - expected).abs() < 1e-12);
            }
        }
    }
}
