//! Linear pairwise ranking SVM.
//!
//! Minimizes `½‖w‖² + C Σ ξᵢ` subject to `⟨w, winnerᵢ⟩ − ⟨w, loserᵢ⟩ ≥ 1 − ξᵢ`,
//! `ξᵢ ≥ 0`. The solver runs exact coordinate ascent on the box-constrained
//! dual `max Σαᵢ − ½‖Σαᵢδᵢ‖²`, `0 ≤ αᵢ ≤ C`, with `δᵢ = winnerᵢ − loserᵢ`,
//! visiting constraints in a fixed cyclic order so results are bit-reproducible.
//! It stops once the primal/dual gap falls below the requested relative
//! tolerance, which bounds the distance to the true optimum.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{axpy, dot, norm_sq, padded};

pub const DEFAULT_C: f64 = 100.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

const GAP_CHECK_INTERVAL: usize = 4;

/// A preference `loser ≺ winner` between two feature vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingConstraint {
    pub loser: Vec<f64>,
    pub winner: Vec<f64>,
}

impl RankingConstraint {
    pub fn new(loser: Vec<f64>, winner: Vec<f64>) -> Self {
        Self { loser, winner }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankSvmProblem {
    dim: usize,
    c: f64,
    constraints: Vec<RankingConstraint>,
    diffs: Vec<Vec<f64>>,
}

impl RankSvmProblem {
    pub fn new(dim: usize, c: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidProblem("dimension must be positive".into()));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidProblem(format!("C must be positive, got {c}")));
        }
        Ok(Self {
            dim,
            c,
            constraints: Vec::new(),
            diffs: Vec::new(),
        })
    }

    pub fn with_constraints<I>(dim: usize, c: f64, constraints: I) -> Result<Self>
    where
        I: IntoIterator<Item = RankingConstraint>,
    {
        let mut problem = Self::new(dim, c)?;
        for constraint in constraints {
            problem.push(&constraint.loser, &constraint.winner)?;
        }
        Ok(problem)
    }

    /// Adds `loser ≺ winner`. Vectors shorter than the problem dimension are
    /// zero-padded; longer ones are rejected.
    pub fn push(&mut self, loser: &[f64], winner: &[f64]) -> Result<()> {
        for v in [loser, winner] {
            if v.len() > self.dim {
                return Err(Error::InvalidProblem(format!(
                    "constraint vector of dimension {} exceeds problem dimension {}",
                    v.len(),
                    self.dim
                )));
            }
            ensure_finite(v, "ranking constraint")?;
        }
        let loser = padded(loser, self.dim);
        let winner = padded(winner, self.dim);
        self.diffs
            .push(winner.iter().zip(&loser).map(|(w, l)| w - l).collect());
        self.constraints.push(RankingConstraint { loser, winner });
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn constraints(&self) -> &[RankingConstraint] {
        &self.constraints
    }

    /// `winner − loser` for every constraint, padded to the problem dimension.
    pub fn differences(&self) -> &[Vec<f64>] {
        &self.diffs
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// Solution of a ranking problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingModel {
    pub w: Vec<f64>,
    pub objective: f64,
    pub slacks: Vec<f64>,
    pub converged: bool,
    /// Full passes over the constraint set.
    pub iterations: usize,
    /// Dual multipliers, one per constraint; reusable as a warm start.
    pub dual: Vec<f64>,
}

impl RankingModel {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `⟨w, u⟩` with `u` zero-padded to the model dimension.
    pub fn utility(&self, u: &[f64]) -> Result<f64> {
        utility(self, u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

pub fn solve(problem: &RankSvmProblem, tolerance: f64, max_iterations: usize) -> Result<RankingModel> {
    let diffs: Vec<&[f64]> = problem.diffs.iter().map(Vec::as_slice).collect();
    solve_differences(
        &diffs,
        problem.dim,
        problem.c,
        SolverOptions {
            tolerance,
            max_iterations,
        },
        None,
    )
}

/// Same as [`solve`] but starting from the given dual multipliers (missing
/// entries start at zero). The optimum does not depend on the start.
pub fn solve_warm(problem: &RankSvmProblem, options: SolverOptions, dual: &[f64]) -> Result<RankingModel> {
    let diffs: Vec<&[f64]> = problem.diffs.iter().map(Vec::as_slice).collect();
    solve_differences(&diffs, problem.dim, problem.c, options, Some(dual))
}

/// Core solver over borrowed difference vectors `δᵢ = winnerᵢ − loserᵢ`, each of
/// length `dim`.
pub fn solve_differences(
    diffs: &[&[f64]],
    dim: usize,
    c: f64,
    options: SolverOptions,
    warm_start: Option<&[f64]>,
) -> Result<RankingModel> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidProblem(format!("C must be positive, got {c}")));
    }
    if options.tolerance.is_nan() || options.tolerance <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if let Some(d) = diffs.iter().find(|d| d.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: d.len(),
        });
    }

    let m = diffs.len();
    let sq_norms: Vec<f64> = diffs.iter().map(|d| norm_sq(d)).collect();
    let mut alpha = vec![0.0; m];
    if let Some(start) = warm_start {
        for (a, s) in alpha.iter_mut().zip(start) {
            *a = s.clamp(0.0, c);
        }
    }
    // A null difference cannot be satisfied by any w: its multiplier sits at C.
    for (a, q) in alpha.iter_mut().zip(&sq_norms) {
        if *q == 0.0 {
            *a = c;
        }
    }

    let mut w = vec![0.0; dim];
    for (a, d) in alpha.iter().zip(diffs) {
        if *a != 0.0 {
            axpy(*a, d, &mut w);
        }
    }

    // Cyclic dual coordinate ascent; the duality gap is checked every few passes.
    let mut iterations = 0;
    let mut converged = duality_gap_ok(diffs, &alpha, &w, c, options.tolerance);
    while !converged && iterations < options.max_iterations {
        for i in 0..m {
            let q = sq_norms[i];
            if q == 0.0 {
                continue;
            }
            let gradient = dot(&w, diffs[i]) - 1.0;
            let updated = (alpha[i] - gradient / q).clamp(0.0, c);
            let step = updated - alpha[i];
            if step != 0.0 {
                axpy(step, diffs[i], &mut w);
                alpha[i] = updated;
            }
        }
        iterations += 1;
        if iterations % GAP_CHECK_INTERVAL == 0 || iterations == options.max_iterations {
            converged = duality_gap_ok(diffs, &alpha, &w, c, options.tolerance);
        }
    }

    let slacks: Vec<f64> = diffs.iter().map(|d| (1.0 - dot(&w, d)).max(0.0)).collect();
    let objective = 0.5 * norm_sq(&w) + c * slacks.iter().sum::<f64>();
    Ok(RankingModel {
        w,
        objective,
        slacks,
        converged,
        iterations,
        dual: alpha,
    })
}

fn duality_gap_ok(diffs: &[&[f64]], alpha: &[f64], w: &[f64], c: f64, tolerance: f64) -> bool {
    let half_sq = 0.5 * norm_sq(w);
    let hinge: f64 = diffs.iter().map(|d| (1.0 - dot(w, d)).max(0.0)).sum();
    let primal = half_sq + c * hinge;
    let dual = alpha.iter().sum::<f64>() - half_sq;
    primal - dual <= tolerance * primal.abs().max(f64::MIN_POSITIVE)
}

/// `⟨w, u⟩`, with `u` zero-padded to the model dimension.
pub fn utility(model: &RankingModel, u: &[f64]) -> Result<f64> {
    if u.len() > model.w.len() {
        return Err(Error::DimensionMismatch {
            expected: model.w.len(),
            got: u.len(),
        });
    }
    ensure_finite(u, "utility input")?;
    Ok(dot(&model.w, u))
}

/// `½‖w‖² + C Σ max(0, 1 − ⟨w, winner − loser⟩)` for any candidate `w`.
pub fn objective(w: &[f64], problem: &RankSvmProblem) -> f64 {
    let hinge: f64 = problem
        .diffs
        .iter()
        .map(|d| (1.0 - dot(w, d)).max(0.0))
        .sum();
    0.5 * norm_sq(w) + problem.c * hinge
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(loser: &[f64], winner: &[f64], c: f64) -> RankSvmProblem {
        let mut p = RankSvmProblem::new(loser.len().max(winner.len()), c).unwrap();
        p.push(loser, winner).unwrap();
        p
    }

    #[test]
    fn single_constraint_kkt_solution() {
        let p = single(&[1.0, 0.0], &[0.0, 1.0], 100.0);
        let m = solve(&p, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS).unwrap();
        assert!(m.converged);
        assert!((m.w[0] + 0.5).abs() < 1e-12);
        assert!((m.w[1] - 0.5).abs() < 1e-12);
        assert!((m.objective - 0.25).abs() < 1e-12);
        assert_eq!(m.slacks, vec![0.0]);
    }

    #[test]
    fn no_constraints_gives_zero() {
        let p = RankSvmProblem::new(3, 100.0).unwrap();
        let m = solve(&p, DEFAULT_TOLERANCE, 10).unwrap();
        assert_eq!(m.w, vec![0.0; 3]);
        assert_eq!(m.objective, 0.0);
        assert!(m.converged);
    }

    #[test]
    fn identical_pair_forces_unit_slack() {
        let p = single(&[0.3, 0.7], &[0.3, 0.7], 100.0);
        let m = solve(&p, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS).unwrap();
        assert_eq!(m.w, vec![0.0, 0.0]);
        assert_eq!(m.slacks, vec![1.0]);
        assert_eq!(m.objective, 100.0);
    }

    #[test]
    fn small_c_caps_the_multiplier() {
        // ‖δ‖² = 2, C = 0.1 < 1/2: α = C, w = Cδ, ξ = 1 − 2C.
        let p = single(&[1.0, 0.0], &[0.0, 1.0], 0.1);
        let m = solve(&p, 1e-12, 1000).unwrap();
        assert!((m.w[1] - 0.1).abs() < 1e-12);
        assert!((m.slacks[0] - 0.8).abs() < 1e-12);
        assert!((m.objective - (0.5 * 0.02 + 0.1 * 0.8)).abs() < 1e-12);
    }

    #[test]
    fn utility_examples() {
        let model = RankingModel {
            w: vec![-0.5, 0.5],
            objective: 0.25,
            slacks: vec![0.0],
            converged: true,
            iterations: 1,
            dual: vec![0.5],
        };
        assert_eq!(utility(&model, &[0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(utility(&model, &[0.75, 0.25]).unwrap(), -0.25);
        assert_eq!(utility(&model, &[1.0]).unwrap(), -0.5);
        assert!(utility(&model, &[0.0, 0.0, 1.0]).is_err());
        assert!(utility(&model, &[f64::NAN]).is_err());
        let zero = RankingModel {
            w: vec![0.0; 2],
            ..model
        };
        assert_eq!(utility(&zero, &[0.2, 0.8]).unwrap(), 0.0);
    }

    #[test]
    fn objective_examples() {
        let p = single(&[1.0, 0.0], &[0.0, 1.0], 100.0);
        assert_eq!(objective(&[-0.5, 0.5], &p), 0.25);
        assert_eq!(objective(&[0.0, 0.0], &p), 100.0);
        assert_eq!(objective(&[-1.0, 1.0], &p), 1.0);
    }

    #[test]
    fn rejects_oversized_and_invalid_problems() {
        let mut p = RankSvmProblem::new(2, 1.0).unwrap();
        assert!(matches!(
            p.push(&[1.0, 0.0, 0.0], &[0.0, 1.0]),
            Err(Error::InvalidProblem(_))
        ));
        assert!(p.push(&[1.0], &[f64::INFINITY]).is_err());
        assert!(RankSvmProblem::new(2, 0.0).is_err());
        assert!(RankSvmProblem::new(0, 1.0).is_err());
        let a = [1.0, 0.0];
        let b = [0.0, 1.0, 2.0];
        assert!(matches!(
            solve_differences(&[&a, &b], 2, 1.0, SolverOptions::default(), None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn shorter_vectors_are_zero_padded() {
        let mut p = RankSvmProblem::new(3, 100.0).unwrap();
        p.push(&[1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(p.differences()[0], vec![-1.0, 1.0, 0.0]);
    }

    #[test]
    fn budget_exhaustion_reports_not_converged() {
        let mut p = RankSvmProblem::new(2, 100.0).unwrap();
        p.push(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        p.push(&[0.0, 1.0], &[0.6, 0.4]).unwrap();
        p.push(&[0.2, 0.8], &[0.9, 0.1]).unwrap();
        let m = solve(&p, 1e-15, 0).unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 0);
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        let mut p = RankSvmProblem::new(3, 100.0).unwrap();
        p.push(&[0.5, 0.5, 0.0], &[0.0, 0.2, 0.8]).unwrap();
        p.push(&[0.1, 0.1, 0.8], &[0.7, 0.3, 0.0]).unwrap();
        p.push(&[0.3, 0.3, 0.4], &[0.0, 1.0, 0.0]).unwrap();
        let cold = solve(&p, 1e-12, 100_000).unwrap();
        let warm = solve_warm(
            &p,
            SolverOptions {
                tolerance: 1e-12,
                max_iterations: 100_000,
            },
            &cold.dual[..2],
        )
        .unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-9 * cold.objective);
        for (a, b) in cold.w.iter().zip(&warm.w) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
