//! Logistic loss evaluation, gradient, curvature weights and the smoothness
//! quantities the step-size rules are built on.

use crate::error::{Error, Result};
use crate::model::ClassificationInstance;
use crate::stable;

/// Everything derivable from one pass over the margins `z = A x`:
/// the loss `f(x)`, the residuals `1 - sigma(z)` and the curvature weights
/// `w(z) = sigma(z)(1 - sigma(z))`.
///
/// Caching these lets a solver iteration spend exactly one matrix-vector
/// product with `A` (here) and one with `A^T` (in [`gradient`]).
#[derive(Debug, Clone)]
pub struct LossState {
    margins: Vec<f64>,
    loss: f64,
    residuals: Vec<f64>,
    weights: Vec<f64>,
}

impl LossState {
    pub fn loss(&self) -> f64 {
        self.loss
    }

    pub fn margins(&self) -> &[f64] {
        &self.margins
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Evaluates `f(x) = sum_i log(1 + e^{-(Ax)_i})` with the stable kernels,
/// together with the residual and weight vectors.
pub fn evaluate(instance: &ClassificationInstance, x: &[f64]) -> Result<LossState> {
    if x.len() != instance.features() {
        return Err(Error::DimensionMismatch {
            context: "evaluate",
            expected: instance.features(),
            got: x.len(),
        });
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { context: "x" });
    }
    let margins = instance.margins(x);
    let m = margins.len();
    let mut loss = 0.0;
    let mut residuals = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for (i, &z) in margins.iter().enumerate() {
        let (l, r, w) = stable::loss_residual_weight(z);
        loss += l;
        residuals[i] = r;
        weights[i] = w;
    }
    Ok(LossState {
        margins,
        loss,
        residuals,
        weights,
    })
}

/// `∇f(x) = -A^T (1 - sigma(Ax))`, from the cached residuals.
///
/// Satisfies `||∇f(x)||_inf <= M f(x)`.
pub fn gradient(instance: &ClassificationInstance, state: &LossState) -> Result<Vec<f64>> {
    if state.residuals.len() != instance.examples() {
        return Err(Error::DimensionMismatch {
            context: "gradient",
            expected: instance.examples(),
            got: state.residuals.len(),
        });
    }
    let mut grad = vec![0.0; instance.features()];
    instance.matrix().matvec_t(&state.residuals, &mut grad);
    for g in &mut grad {
        *g = -*g;
    }
    Ok(grad)
}

/// Hessian quadratic form `d^T ∇²f(x) d = sum_i w_i (A d)_i²`.
pub fn hessian_quadratic_form(
    instance: &ClassificationInstance,
    state: &LossState,
    direction: &[f64],
) -> Result<f64> {
    if direction.len() != instance.features() {
        return Err(Error::DimensionMismatch {
            context: "hessian_quadratic_form",
            expected: instance.features(),
            got: direction.len(),
        });
    }
    if !direction.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "direction",
        });
    }
    let mut ad = vec![0.0; instance.examples()];
    instance.matrix().matvec(direction, &mut ad);
    Ok(state.weights.iter().zip(&ad).map(|(w, v)| w * v * v).sum())
}

/// The ℓ₂ multiplicative-smoothness ratio along the gradient direction,
/// `<w, (A g)²> / (f(x) m⁻¹ ||A g||₂²)` with `g = ∇f(x)`.
///
/// Returns `None` when `||A g||₂²` underflows (degenerate direction); the
/// caller skips the sample.
pub fn l2_smoothness_ratio(
    instance: &ClassificationInstance,
    state: &LossState,
) -> Result<Option<f64>> {
    let grad = gradient(instance, state)?;
    Ok(l2_smoothness_ratio_for(instance, state, &grad))
}

/// Ratio for a caller-supplied gradient, saving the `A^T` pass when the
/// solver loop already holds it.
pub(crate) fn l2_smoothness_ratio_for(
    instance: &ClassificationInstance,
    state: &LossState,
    grad: &[f64],
) -> Option<f64> {
    let mut ag = vec![0.0; instance.examples()];
    instance.matrix().matvec(grad, &mut ag);
    let denom_sq: f64 = ag.iter().map(|v| v * v).sum();
    if denom_sq < 1e-300 {
        return None;
    }
    let numer: f64 = state.weights.iter().zip(&ag).map(|(w, v)| w * v * v).sum();
    let m = instance.examples() as f64;
    Some(numer / (state.loss / m * denom_sq))
}

/// Checks the second-order-robustness guarantee: for `||x' - x||_1 <= 1/(2M)`
/// every weight ratio `w(Ax')_i / w(Ax)_i` must lie in `[1/2, 2]`.
///
/// Inputs outside the ball are rejected; the guarantee only holds inside it.
/// The comparison runs in log space (`|log w' - log w| <= log 2`), which
/// stays exact where the weights themselves underflow.
pub fn hessian_stability_check(
    instance: &ClassificationInstance,
    x: &[f64],
    x_prime: &[f64],
) -> Result<bool> {
    let radius = 1.0 / (2.0 * instance.entry_bound());
    let l1: f64 = x.iter().zip(x_prime).map(|(a, b)| (a - b).abs()).sum();
    // ulp slack so perturbations constructed to sit exactly on the boundary
    // are not rejected by rounding in the norm recomputation
    if l1 > radius * (1.0 + 1e-12) {
        return Err(Error::OutsideStabilityBall { norm: l1, radius });
    }
    let z = instance.margins(x);
    let z_prime = instance.margins(x_prime);
    let bound = std::f64::consts::LN_2;
    Ok(z.iter()
        .zip(&z_prime)
        .all(|(&a, &b)| (stable::log_weight(b) - stable::log_weight(a)).abs() <= bound))
}
