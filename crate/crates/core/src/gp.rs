//! Gaussian-process posterior inference.
//!
//! [`GpPosterior`] is an immutable snapshot of `(kernel, observations,
//! factor of K + σ²I)`. New observations are absorbed by extending the
//! triangular factor by one row, never by refactorizing.
//! [`DomainPosterior`] additionally keeps the posterior moments of every
//! point of a finite domain current under the same rank-one extensions,
//! which is what the acquisition loop queries each round.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{check_dims, KernelSpec};
use crate::linalg::CholeskyFactor;
use crate::robust_sets::FiniteDomain;

/// Diagonal jitter added on top of the noise variance when factorizing.
pub const NUGGET: f64 = 1e-10;
const RETRY_NUGGET: f64 = 1e-6;
/// Pre-clamp variances below this are reported as errors instead of clamped.
pub const NEGATIVE_VARIANCE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSet {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    noise_variance: f64,
}

impl ObservationSet {
    pub fn new(noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(invalid(
                "noise_variance",
                format!("must be positive, got {noise_variance}"),
            ));
        }
        Ok(ObservationSet {
            inputs: Vec::new(),
            outputs: Vec::new(),
            noise_variance,
        })
    }

    pub fn from_data(inputs: Vec<Vec<f64>>, outputs: Vec<f64>, noise_variance: f64) -> Result<Self> {
        let mut obs = ObservationSet::new(noise_variance)?;
        if inputs.len() != outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                found: outputs.len(),
            });
        }
        check_dims(&inputs)?;
        obs.inputs = inputs;
        obs.outputs = outputs;
        Ok(obs)
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    fn dim(&self) -> Option<usize> {
        self.inputs.first().map(Vec::len)
    }
}

#[derive(Clone, Debug)]
pub struct GpPosterior {
    kernel: KernelSpec,
    obs: ObservationSet,
    factor: CholeskyFactor,
    /// `L⁻¹ y`
    whitened: Vec<f64>,
    /// `(K + σ²I)⁻¹ y`
    weights: Vec<f64>,
    nugget: f64,
}

/// Conditions the kernel on `obs`.
pub fn posterior(kernel: &KernelSpec, obs: &ObservationSet) -> Result<GpPosterior> {
    kernel.validate(obs.dim())?;
    match build(kernel, obs, NUGGET) {
        Err(Error::NotPositiveDefinite { .. }) => {
            log::warn!("factorization failed with nugget {NUGGET:e}; retrying with {RETRY_NUGGET:e}");
            build(kernel, obs, RETRY_NUGGET)
        }
        other => other,
    }
}

fn build(kernel: &KernelSpec, obs: &ObservationSet, nugget: f64) -> Result<GpPosterior> {
    let mut factor = CholeskyFactor::new();
    let mut cross = Vec::with_capacity(obs.len());
    for (i, x) in obs.inputs.iter().enumerate() {
        cross.clear();
        cross.extend(obs.inputs[..i].iter().map(|xi| kernel.eval(xi, x)));
        factor.push(&cross, kernel.eval(x, x) + obs.noise_variance + nugget)?;
    }
    let whitened = factor.forward_solve(&obs.outputs);
    let mut weights = whitened.clone();
    factor.backward_solve_in_place(&mut weights);
    Ok(GpPosterior {
        kernel: kernel.clone(),
        obs: obs.clone(),
        factor,
        whitened,
        weights,
        nugget,
    })
}

impl GpPosterior {
    pub fn prior(kernel: &KernelSpec, noise_variance: f64) -> Result<Self> {
        posterior(kernel, &ObservationSet::new(noise_variance)?)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn observations(&self) -> &ObservationSet {
        &self.obs
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Posterior conditioned on one more observation; `self` is left untouched.
    pub fn extend(&self, x: &[f64], y: f64) -> Result<GpPosterior> {
        let mut next = self.clone();
        next.extend_in_place(x, y)?;
        Ok(next)
    }

    pub(crate) fn extend_in_place(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.check_dim(x)?;
        if self.obs.is_empty() {
            self.kernel.validate(Some(x.len()))?;
        }
        let cross: Vec<f64> = self.obs.inputs.iter().map(|xi| self.kernel.eval(xi, x)).collect();
        let diag = self.kernel.eval(x, x) + self.obs.noise_variance + self.nugget;
        let row = self.factor.push(&cross, diag)?;
        let n = row.len() - 1;
        let dot: f64 = row[..n].iter().zip(&self.whitened).map(|(a, b)| a * b).sum();
        self.whitened.push((y - dot) / row[n]);
        self.obs.inputs.push(x.to_vec());
        self.obs.outputs.push(y);
        let mut weights = self.whitened.clone();
        self.factor.backward_solve_in_place(&mut weights);
        self.weights = weights;
        Ok(())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        match self.obs.dim() {
            Some(d) if d != x.len() => Err(Error::DimensionMismatch {
                expected: d,
                found: x.len(),
            }),
            _ => Ok(()),
        }
    }

    /// `(μ_t(x), σ_t²(x))`.
    pub fn mean_var(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_dim(x)?;
        if self.obs.is_empty() {
            self.kernel.validate(Some(x.len()))?;
        }
        let mut v: Vec<f64> = self.obs.inputs.iter().map(|xi| self.kernel.eval(xi, x)).collect();
        self.factor.forward_solve_in_place(&mut v);
        let mean = v.iter().zip(&self.whitened).map(|(a, b)| a * b).sum();
        let raw = self.kernel.eval(x, x) - v.iter().map(|a| a * a).sum::<f64>();
        Ok((mean, clamp_variance(raw)?))
    }

    pub fn mean_var_batch<P: AsRef<[f64]> + Sync>(&self, xs: &[P]) -> Result<Vec<(f64, f64)>> {
        xs.iter().map(|x| self.mean_var(x.as_ref())).collect()
    }

    /// Exact Gaussian log marginal likelihood `log p(y | X, θ)`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.obs.len() as f64;
        -0.5 * self.whitened.iter().map(|v| v * v).sum::<f64>()
            - 0.5 * self.factor.log_det()
            - 0.5 * n * (2.0 * PI).ln()
    }
}

fn clamp_variance(raw: f64) -> Result<f64> {
    if raw < -NEGATIVE_VARIANCE_TOLERANCE {
        Err(Error::NegativeVariance { value: raw })
    } else {
        Ok(raw.max(0.0))
    }
}

/// Posterior moments over every point of a finite domain, kept current under
/// rank-one updates in `O(n·t)` per observation.
#[derive(Clone, Debug)]
pub struct DomainPosterior<'a> {
    domain: &'a FiniteDomain,
    posterior: GpPosterior,
    /// Column `s` holds entry `s` of `L⁻¹ k_t(x_j)` for every domain point `j`.
    columns: Vec<Vec<f64>>,
    mean: Vec<f64>,
    raw_var: Vec<f64>,
}

impl<'a> DomainPosterior<'a> {
    pub fn new(kernel: &KernelSpec, noise_variance: f64, domain: &'a FiniteDomain) -> Result<Self> {
        kernel.validate(Some(domain.dim()))?;
        let posterior = GpPosterior::prior(kernel, noise_variance)?;
        let raw_var = (0..domain.len())
            .map(|j| kernel.eval(domain.point(j), domain.point(j)))
            .collect();
        Ok(DomainPosterior {
            domain,
            posterior,
            columns: Vec::new(),
            mean: vec![0.0; domain.len()],
            raw_var,
        })
    }

    pub fn domain(&self) -> &'a FiniteDomain {
        self.domain
    }

    pub fn posterior(&self) -> &GpPosterior {
        &self.posterior
    }

    pub fn num_observations(&self) -> usize {
        self.columns.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    pub fn mean(&self, j: usize) -> f64 {
        self.mean[j]
    }

    /// Clamped posterior variance at domain point `j`.
    pub fn variance(&self, j: usize) -> f64 {
        self.raw_var[j].max(0.0)
    }

    pub fn variances(&self) -> Vec<f64> {
        (0..self.raw_var.len()).map(|j| self.variance(j)).collect()
    }

    /// Conditions on an observation `y` at domain point `index`.
    pub fn observe(&mut self, index: usize, y: f64) -> Result<()> {
        let n = self.domain.len();
        if index >= n {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        let x_new = self.domain.point(index);
        self.posterior.extend_in_place(x_new, y)?;
        let t = self.columns.len();
        let row = self.posterior.factor.row(t);
        let kernel = &self.posterior.kernel;
        let mut col: Vec<f64> = (0..n).map(|j| kernel.eval(self.domain.point(j), x_new)).collect();
        for (s, prev) in self.columns.iter().enumerate() {
            let l = row[s];
            for (c, p) in col.iter_mut().zip(prev) {
                *c -= l * p;
            }
        }
        let pivot = row[t];
        let z = self.posterior.whitened[t];
        for ((c, m), v) in col.iter_mut().zip(&mut self.mean).zip(&mut self.raw_var) {
            *c /= pivot;
            *m += *c * z;
            *v -= *c * *c;
            if *v < -NEGATIVE_VARIANCE_TOLERANCE {
                return Err(Error::NegativeVariance { value: *v });
            }
        }
        self.columns.push(col);
        Ok(())
    }
}

/// Search box for [`fit_hyperparameters`], in natural (not log) units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitBounds {
    pub lengthscale: (f64, f64),
    pub signal_variance: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        FitBounds {
            lengthscale: (0.01, 10.0),
            signal_variance: (0.01, 1000.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub kernel: KernelSpec,
    pub log_likelihood: f64,
    /// Set when the data carried no signal and the template was returned as-is.
    pub degenerate: bool,
    pub evaluated: usize,
}

/// Maximum-likelihood hyperparameters by seeded multi-start random search.
///
/// Candidate 0 is the template itself, so the result never has a lower
/// likelihood than the template. Roughly half of the remaining budget is
/// spent on log-uniform draws from `bounds`, the rest on multiplicative
/// perturbations of the incumbent.
pub fn fit_hyperparameters(
    template: &KernelSpec,
    obs: &ObservationSet,
    budget: usize,
    bounds: FitBounds,
    seed: u64,
) -> Result<FitOutcome> {
    if obs.len() < 2 {
        return Err(invalid("observations", "at least two observations required"));
    }
    if budget == 0 {
        return Err(invalid("budget", "must be at least 1"));
    }
    let (ls0, sv0) = match template {
        KernelSpec::SquaredExponential {
            lengthscales,
            signal_variance,
        }
        | KernelSpec::Matern {
            lengthscales,
            signal_variance,
            ..
        } => (lengthscales.clone(), *signal_variance),
        _ => {
            return Err(Error::Unsupported(
                "hyperparameter fitting supports squared-exponential and Matérn kernels".into(),
            ))
        }
    };
    template.validate(obs.dim())?;
    let template_lml = posterior(template, obs)?.log_marginal_likelihood();
    let first = obs.outputs[0];
    if obs.outputs.iter().all(|y| *y == first) {
        log::warn!("all outputs identical; returning template hyperparameters");
        return Ok(FitOutcome {
            kernel: template.clone(),
            log_likelihood: template_lml,
            degenerate: true,
            evaluated: 1,
        });
    }

    let score = |k: &KernelSpec| -> f64 {
        posterior(k, obs)
            .map(|p| p.log_marginal_likelihood())
            .unwrap_or(f64::NEG_INFINITY)
    };
    let log_uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| -> f64 { rng.random_range(lo.ln()..=hi.ln()).exp() };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (template.clone(), template_lml);
    let mut evaluated = 1;
    let remaining = budget - 1;
    let global = remaining.div_ceil(2);

    let candidates: Vec<KernelSpec> = (0..global)
        .map(|_| {
            let ls = ls0.iter().map(|_| log_uniform(&mut rng, bounds.lengthscale)).collect();
            let sv = log_uniform(&mut rng, bounds.signal_variance);
            with_hyperparameters(template, ls, sv)
        })
        .collect();
    absorb(&mut best, &candidates, &score);
    evaluated += candidates.len();

    let jitter = Normal::<f64>::new(0.0, 0.3).expect("valid normal");
    let clamp = |v: f64, (lo, hi): (f64, f64)| v.clamp(lo, hi);
    let mut left = remaining - global;
    while left > 0 {
        let batch = left.min(16);
        let (ls_best, sv_best) = hyperparameters(&best.0).unwrap_or((ls0.clone(), sv0));
        let candidates: Vec<KernelSpec> = (0..batch)
            .map(|_| {
                let ls = ls_best
                    .iter()
                    .map(|l| clamp(l * jitter.sample(&mut rng).exp(), bounds.lengthscale))
                    .collect();
                let sv = clamp(sv_best * jitter.sample(&mut rng).exp(), bounds.signal_variance);
                with_hyperparameters(template, ls, sv)
            })
            .collect();
        absorb(&mut best, &candidates, &score);
        evaluated += batch;
        left -= batch;
    }

    Ok(FitOutcome {
        kernel: best.0,
        log_likelihood: best.1,
        degenerate: false,
        evaluated,
    })
}

fn absorb(best: &mut (KernelSpec, f64), candidates: &[KernelSpec], score: &(dyn Fn(&KernelSpec) -> f64 + Sync)) {
    let scores: Vec<f64> = candidates.par_iter().map(score).collect();
    // strict improvement keeps the earliest candidate on ties
    for (k, s) in candidates.iter().zip(scores) {
        if s > best.1 {
            *best = (k.clone(), s);
        }
    }
}

fn hyperparameters(k: &KernelSpec) -> Option<(Vec<f64>, f64)> {
    match k {
        KernelSpec::SquaredExponential {
            lengthscales,
            signal_variance,
        }
        | KernelSpec::Matern {
            lengthscales,
            signal_variance,
            ..
        } => Some((lengthscales.clone(), *signal_variance)),
        _ => None,
    }
}

fn with_hyperparameters(template: &KernelSpec, lengthscales: Vec<f64>, signal_variance: f64) -> KernelSpec {
    match template {
        KernelSpec::Matern { nu, .. } => KernelSpec::Matern {
            nu: *nu,
            lengthscales,
            signal_variance,
        },
        _ => KernelSpec::SquaredExponential {
            lengthscales,
            signal_variance,
        },
    }
}
