//! Numerically stable scalar kernels for the logistic loss.
//!
//! Margins on separable data grow without bound, so every kernel here must
//! survive arguments up to the full f64 range without overflowing `exp`.

/// Per-example logistic loss `log(1 + exp(-z))` for margin `z`.
///
/// Uses the stable branch split: for `z >= 0` this is `log1p(exp(-z))`,
/// for `z < 0` it is `-z + log1p(exp(z))`.
#[inline]
pub fn loss_term(z: f64) -> f64 {
    if z >= 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// Stable sigmoid `1 / (1 + exp(-z))`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    let e = (-z.abs()).exp(); // in (0, 1], never overflows
    let recip = 1.0 / (1.0 + e);
    if z >= 0.0 {
        recip
    } else {
        e * recip
    }
}

/// Fused per-example quantities from a single `exp` call:
/// `(loss, residual, weight)` = `(log(1+e^{-z}), 1 - sigma(z), sigma(z)(1-sigma(z)))`.
#[inline]
pub fn loss_residual_weight(z: f64) -> (f64, f64, f64) {
    let e = (-z.abs()).exp();
    let denom = 1.0 + e;
    // sigma(|z|) = 1/(1+e), sigma(-|z|) = e/(1+e)
    let (sig, res) = if z >= 0.0 {
        (1.0 / denom, e / denom)
    } else {
        (e / denom, 1.0 / denom)
    };
    let loss = (-z).max(0.0) + e.ln_1p();
    (loss, res, sig * res)
}

/// `log w(z)` where `w(z) = sigma(z)(1 - sigma(z))`, computed without
/// underflow: `log w = -softplus(z) - softplus(-z)`.
///
/// The direct product underflows to 0 for |z| above ~745, which would turn
/// weight-ratio checks into 0/0; the log form stays exact out to |z| ~ 1e308.
#[inline]
pub fn log_weight(z: f64) -> f64 {
    -loss_term(z) - loss_term(-z)
}
