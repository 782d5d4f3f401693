//! Spectral-norm estimation, the smoothness-ratio experiment and
//! separability checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gradient::{run_gd, StepPolicy};
use crate::loss::l2_smoothness_ratio_for;
use crate::model::{ClassificationInstance, SolverConfig};

/// Fixed seed for the power-iteration start vector; beta must be
/// reproducible across runs.
const POWER_SEED: u64 = 0x00b1_57ab1e;

const POWER_ITER_CAP: usize = 10_000;

/// β = ||A||₂², the largest eigenvalue of AᵀA, by power iteration to
/// relative tolerance `tol` (certified by Rayleigh-quotient stagnation over
/// 3 consecutive iterations). A zero matrix returns 0.
pub fn spectral_norm_sq(instance: &ClassificationInstance, tol: f64) -> f64 {
    spectral_norm_sq_masked(instance, tol, None)
}

/// Power iteration restricted to the columns where `mask` is true: computes
/// ||A_S||₂² without materializing the submatrix.
pub(crate) fn spectral_norm_sq_masked(
    instance: &ClassificationInstance,
    tol: f64,
    mask: Option<&[bool]>,
) -> f64 {
    debug_assert!(tol > 0.0);
    let n = instance.features();
    let m = instance.examples();
    let apply_mask = |v: &mut Vec<f64>| {
        if let Some(mask) = mask {
            for (x, &keep) in v.iter_mut().zip(mask) {
                if !keep {
                    *x = 0.0;
                }
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut reseeds = 0;
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    apply_mask(&mut v);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0; // fully masked out
    }
    v.iter_mut().for_each(|x| *x /= norm);

    let mut u = vec![0.0; m];
    let mut w = vec![0.0; n];
    let mut lambda_prev = f64::NAN;
    let mut stagnant = 0;
    for _ in 0..POWER_ITER_CAP {
        instance.matrix().matvec(&v, &mut u);
        instance.matrix().matvec_t(&u, &mut w);
        apply_mask(&mut w);
        let lambda: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let w_norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if w_norm == 0.0 {
            // v lies in the null space; try another start
            if reseeds >= 3 {
                return 0.0;
            }
            reseeds += 1;
            let mut fresh: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            apply_mask(&mut fresh);
            let fresh_norm = fresh.iter().map(|x| x * x).sum::<f64>().sqrt();
            if fresh_norm == 0.0 {
                return 0.0;
            }
            fresh.iter_mut().for_each(|x| *x /= fresh_norm);
            v = fresh;
            lambda_prev = f64::NAN;
            stagnant = 0;
            continue;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / w_norm;
        }
        if (lambda - lambda_prev).abs() <= tol * lambda.abs().max(f64::MIN_POSITIVE) {
            stagnant += 1;
            if stagnant >= 3 {
                return lambda;
            }
        } else {
            stagnant = 0;
        }
        lambda_prev = lambda;
    }
    lambda_prev
}

/// Per-iterate smoothness ratios along a gradient-descent path, plus their
/// maximum. `skipped` counts degenerate-direction samples.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub dataset_name: String,
    pub iterations: usize,
    pub max_ratio: f64,
    pub ratio_trace: Vec<f64>,
    pub skipped: usize,
}

/// Runs gradient descent from x⁰ = 0 with the given step policy and records
/// the ℓ₂ smoothness ratio at every iterate.
pub fn max_ratio_experiment(
    instance: &ClassificationInstance,
    dataset_name: &str,
    iters: usize,
    policy: &StepPolicy,
) -> Result<RatioReport> {
    let config = SolverConfig::new(1.0, iters.max(1));
    let mut ratio_trace = Vec::new();
    let mut skipped = 0usize;
    let x0 = vec![0.0; instance.features()];
    run_gd(
        instance,
        &x0,
        policy,
        &config,
        None,
        None,
        |_, _, state, grad| match l2_smoothness_ratio_for(instance, state, grad) {
            Some(r) => ratio_trace.push(r),
            None => skipped += 1,
        },
    )?;
    let max_ratio = ratio_trace.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(RatioReport {
        dataset_name: dataset_name.to_string(),
        iterations: ratio_trace.len() + skipped,
        max_ratio,
        ratio_trace,
        skipped,
    })
}

/// ℓ₂ distance between the unit-normalized vectors,
/// `||x/||x||₂ - x*/||x*||₂||₂`, in [0, 2].
///
/// `None` when either vector is zero (undefined direction).
pub fn estimator_error(x: &[f64], x_star: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), x_star.len());
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ns = x_star.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 || ns == 0.0 {
        return None;
    }
    Some(
        x.iter()
            .zip(x_star)
            .map(|(a, b)| {
                let d = a / nx - b / ns;
                d * d
            })
            .sum::<f64>()
            .sqrt(),
    )
}

/// Whether `x` strictly separates the instance, together with the smallest
/// folded margin `min_i (Ax)_i`.
pub fn separability_check(instance: &ClassificationInstance, x: &[f64]) -> (bool, f64) {
    let margins = instance.margins(x);
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    (min_margin > 0.0, min_margin)
}
