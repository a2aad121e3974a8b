//! Test-only oracles. Dense linear algebra comes from nalgebra so none of
//! these share code with the crate's incremental paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use stableopt_core::gp::NUGGET;
use stableopt_core::KernelSpec;

pub fn dense_gram(kernel: &KernelSpec, xs: &[Vec<f64>]) -> DMatrix<f64> {
    let n = xs.len();
    DMatrix::from_fn(n, n, |i, j| kernel.evaluate(&xs[i], &xs[j]).unwrap())
}

/// Posterior mean and variance by a fresh dense solve of the same system the
/// crate factorizes, `K + (σ² + nugget) I`.
pub fn dense_posterior(kernel: &KernelSpec, xs: &[Vec<f64>], ys: &[f64], noise_var: f64, q: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, kernel.evaluate(q, q).unwrap());
    }
    let k = dense_gram(kernel, xs) + DMatrix::identity(n, n) * (noise_var + NUGGET);
    let chol = k.cholesky().expect("noisy gram is positive definite");
    let kq = DVector::from_fn(n, |i, _| kernel.evaluate(&xs[i], q).unwrap());
    let y = DVector::from_column_slice(ys);
    let mean = kq.dot(&chol.solve(&y));
    let var = kernel.evaluate(q, q).unwrap() - kq.dot(&chol.solve(&kq));
    (mean, var)
}

/// `½ log det(I + σ⁻² K)` from eigenvalues.
pub fn dense_information_gain(kernel: &KernelSpec, xs: &[Vec<f64>], noise_var: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let eig = dense_gram(kernel, xs).symmetric_eigenvalues();
    eig.iter().map(|l| 0.5 * (l.max(0.0) / noise_var).ln_1p()).sum()
}

/// Nested-loop worst case of `values` over `{j : close(i, j)}`.
pub fn nested_robust(n: usize, values: &[f64], close: impl Fn(usize, usize) -> bool) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; n];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, &v) in values.iter().enumerate().take(n) {
            if close(i, j) && v < *o {
                *o = v;
            }
        }
    }
    out
}

/// First index of the maximum.
pub fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// First index of the minimum over `candidates`.
pub fn first_argmin_over(v: &[f64], candidates: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for j in candidates {
        if best.is_none_or(|b| v[j] < v[b] || (v[j] == v[b] && j < b)) {
            best = Some(j);
        }
    }
    best.expect("non-empty candidate set")
}

/// Closed ball membership with the same relative boundary slack as the crate.
pub fn in_ball(d: f64, eps: f64) -> bool {
    d <= eps + eps * 1e-12
}
