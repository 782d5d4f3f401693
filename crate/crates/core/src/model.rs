//! Problem instance, solver configuration and trace types shared by every solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RowMatrix;

/// A binary classification instance with the ±1 labels folded into the rows,
/// so that every target is +1 and row `i` is correctly classified exactly
/// when `(A x)_i > 0`.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct ClassificationInstance {
    matrix: RowMatrix,
    entry_bound: f64,
}

impl ClassificationInstance {
    /// Folds `labels` into `matrix` and validates the result.
    ///
    /// Rejects zero-sized matrices, labels other than exactly ±1, and
    /// non-finite entries, each with a distinct error.
    pub fn new(mut matrix: RowMatrix, labels: &[f64]) -> Result<Self> {
        let (m, n) = (matrix.rows(), matrix.cols());
        if m == 0 || n == 0 {
            return Err(Error::EmptyInstance { rows: m, cols: n });
        }
        if labels.len() != m {
            return Err(Error::DimensionMismatch {
                context: "labels",
                expected: m,
                got: labels.len(),
            });
        }
        if !matrix.all_finite() {
            return Err(Error::NonFinite {
                context: "matrix entries",
            });
        }
        for (i, &label) in labels.iter().enumerate() {
            if label != 1.0 && label != -1.0 {
                return Err(Error::InvalidLabel {
                    row: i,
                    value: label,
                });
            }
            if label == -1.0 {
                matrix.scale_row(i, -1.0);
            }
        }
        let entry_bound = matrix.max_abs();
        Ok(Self {
            matrix,
            entry_bound,
        })
    }

    /// Dense convenience constructor.
    pub fn from_dense(rows: Vec<Vec<f64>>, labels: &[f64]) -> Result<Self> {
        Self::new(RowMatrix::dense(rows), labels)
    }

    /// Wraps an already-folded matrix (all labels +1).
    pub fn from_folded(matrix: RowMatrix) -> Result<Self> {
        let labels = vec![1.0; matrix.rows()];
        Self::new(matrix, &labels)
    }

    pub fn examples(&self) -> usize {
        self.matrix.rows()
    }

    pub fn features(&self) -> usize {
        self.matrix.cols()
    }

    /// M, the largest entry of the folded matrix in absolute value.
    pub fn entry_bound(&self) -> f64 {
        self.entry_bound
    }

    pub fn matrix(&self) -> &RowMatrix {
        &self.matrix
    }

    /// Margins `A x`.
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.examples()];
        self.matrix.matvec(x, &mut out);
        out
    }
}

/// Which λ_t the greedy coordinate solver uses when masking zero coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaPolicy {
    /// λ_t = min{B₁ / ||x^t||₁, 1}, with λ_t = 1 at x = 0.
    Adaptive,
    /// A fixed λ in (0, 1]; λ = 1 treats zero and nonzero coordinates alike.
    Constant(f64),
}

/// Shared solver knobs. `box_bound` is Algorithm-1's B; `l1_estimate`
/// defaults to B when absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub box_bound: f64,
    pub l1_estimate: Option<f64>,
    pub delta: f64,
    pub epsilon: Option<f64>,
    pub max_iters: usize,
    pub lambda: LambdaPolicy,
    pub tol_grad: f64,
}

impl SolverConfig {
    pub fn new(box_bound: f64, max_iters: usize) -> Self {
        Self {
            box_bound,
            l1_estimate: None,
            delta: 0.1,
            epsilon: None,
            max_iters,
            lambda: LambdaPolicy::Adaptive,
            tol_grad: 1e-10,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_l1_estimate(mut self, b1: f64) -> Self {
        self.l1_estimate = Some(b1);
        self
    }

    pub fn with_lambda(mut self, lambda: LambdaPolicy) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Effective B₁ (falls back to B).
    pub fn l1_bound(&self) -> f64 {
        self.l1_estimate.unwrap_or(self.box_bound)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(v: f64) -> bool {
            v.is_finite() && v > 0.0
        }
        if !positive(self.box_bound) {
            return Err(Error::InvalidConfig("box_bound must be > 0".into()));
        }
        if let Some(b1) = self.l1_estimate {
            if !positive(b1) {
                return Err(Error::InvalidConfig("l1_estimate must be > 0".into()));
            }
        }
        if !positive(self.delta) || self.delta >= 1.0 {
            return Err(Error::InvalidConfig("delta must lie in (0, 1)".into()));
        }
        if let Some(eps) = self.epsilon {
            if !positive(eps) {
                return Err(Error::InvalidConfig("epsilon must be > 0".into()));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !positive(self.tol_grad) {
            return Err(Error::InvalidConfig("tol_grad must be > 0".into()));
        }
        if let LambdaPolicy::Constant(l) = self.lambda {
            if !positive(l) || l > 1.0 {
                return Err(Error::InvalidConfig(
                    "constant lambda must lie in (0, 1]".into(),
                ));
            }
        }
        Ok(())
    }

    /// The theorem-mode precondition ε < m/2; enforced by the coordinate
    /// solvers, which are the ones whose guarantees assume it.
    pub(crate) fn validate_epsilon_for(&self, examples: usize) -> Result<()> {
        if let Some(eps) = self.epsilon {
            if eps >= examples as f64 / 2.0 {
                return Err(Error::InvalidConfig(format!(
                    "epsilon = {eps} must be below m/2 = {}",
                    examples as f64 / 2.0
                )));
            }
        }
        Ok(())
    }
}

/// One executed solver iteration: the state at `x^t` plus the step taken.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iter: usize,
    pub loss: f64,
    pub grad_inf: f64,
    pub grad_l2: f64,
    pub step_size: f64,
    pub nnz: usize,
    pub chosen_coord: Option<usize>,
    pub wall_ns: u64,
}

/// Why a solver run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    BudgetExhausted,
    LossTargetReached,
    GradTargetReached,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::LossTargetReached => "loss_target_reached",
            Termination::GradTargetReached => "grad_target_reached",
        };
        f.write_str(s)
    }
}

/// Final solution plus the full per-iteration trace.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: Vec<f64>,
    pub trace: Vec<IterateRecord>,
    pub termination: Termination,
}

impl SolveResult {
    /// Exact nonzero count of the returned solution.
    pub fn nnz(&self) -> usize {
        self.solution.iter().filter(|v| **v != 0.0).count()
    }
}

/// Mode for the ℓ₂ smoothness constants of the variable-step solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantsMode {
    /// μ = β/m: the hypothesis observed along gradient-descent paths.
    Empirical,
    /// μ = β: what the worst-case bound justifies.
    Conservative,
}

/// β = ||A||₂² together with the derived (μ, γ) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    pub beta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub mode: ConstantsMode,
}

impl SmoothnessConstants {
    pub fn empirical(beta: f64, examples: usize) -> Self {
        Self {
            beta,
            mu: beta / examples as f64,
            gamma: 2.0 * beta.sqrt(),
            mode: ConstantsMode::Empirical,
        }
    }

    pub fn conservative(beta: f64) -> Self {
        Self {
            beta,
            mu: beta,
            gamma: 2.0 * beta.sqrt(),
            mode: ConstantsMode::Conservative,
        }
    }
}
