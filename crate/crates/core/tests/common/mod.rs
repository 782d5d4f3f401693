//! Independent oracles for the acceptance suite: finite differences, a
//! damped Newton solver over the full space, and least-squares fits.
//! Everything here is deliberately written against the public evaluation
//! API only, never against the solver paths it checks.
#![allow(dead_code)] // each test binary uses its own subset

use loglin::loss::{evaluate, gradient};
use loglin::model::ClassificationInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_rows: usize,
    max_cols: usize,
    entry_scale: f64,
) -> ClassificationInstance {
    let m = rng.random_range(1..=max_rows);
    let n = rng.random_range(1..=max_cols);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| rng.random_range(-entry_scale..entry_scale))
                .collect()
        })
        .collect();
    let labels: Vec<f64> = (0..m)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    ClassificationInstance::from_dense(rows, &labels).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Central finite differences of the loss with h = 1e-5 * (1 + |x_i|).
pub fn fd_gradient(instance: &ClassificationInstance, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = 1e-5 * (1.0 + x[i].abs());
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (evaluate(instance, &xp).unwrap().loss() - evaluate(instance, &xm).unwrap().loss())
                / (2.0 * h)
        })
        .collect()
}

/// Dense Hessian assembly A^T diag(w) A; small instances only.
pub fn dense_hessian(instance: &ClassificationInstance, x: &[f64]) -> Vec<Vec<f64>> {
    let n = instance.features();
    let state = evaluate(instance, x).unwrap();
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..instance.examples() {
        let w = state.weights()[i];
        let row: Vec<f64> = (0..n).map(|j| instance.matrix().get(i, j)).collect();
        for a in 0..n {
            for b in 0..n {
                h[a][b] += w * row[a] * row[b];
            }
        }
    }
    h
}

/// Gaussian elimination with partial pivoting; oracle-sized systems only.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        assert!(p.abs() > 0.0, "singular oracle system");
        for row in col + 1..n {
            let factor = m[row][col] / p;
            let (pivot_rows, rest) = m.split_at_mut(row);
            let pivot_row = &pivot_rows[col];
            for (k, cell) in rest[0].iter_mut().enumerate().take(n + 1).skip(col) {
                *cell -= factor * pivot_row[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for (k, xk) in x.iter().enumerate().skip(row + 1) {
            acc -= m[row][k] * *xk;
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Damped Newton to ||grad||_inf <= tol over the full space. Independent of
/// every solver under test (its only shared code is loss evaluation).
pub fn damped_newton(instance: &ClassificationInstance, x0: &[f64], tol: f64) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    for _ in 0..500 {
        let state = evaluate(instance, &x).unwrap();
        let g = gradient(instance, &state).unwrap();
        if g.iter().fold(0.0f64, |a, v| a.max(v.abs())) <= tol {
            return (x, state.loss());
        }
        let h = dense_hessian(instance, &x);
        let direction = gauss_solve(&h, &g);
        let f = state.loss();
        let gd: f64 = g.iter().zip(&direction).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = x
                .iter()
                .zip(&direction)
                .map(|(xi, di)| xi - t * di)
                .collect();
            let fc = evaluate(instance, &cand).unwrap().loss();
            if fc <= f - 0.25 * t * gd {
                x = cand;
                break;
            }
            t *= 0.5;
            assert!(t > 1e-20, "newton line search failed");
        }
    }
    let state = evaluate(instance, &x).unwrap();
    (x, state.loss())
}

/// Least-squares line fit returning (slope, r_squared).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let pred = my + slope * (x - mx);
            (y - pred) * (y - pred)
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    (slope, 1.0 - ss_res / ss_tot)
}
