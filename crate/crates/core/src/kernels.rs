//! Covariance functions and Gram-matrix construction.
//!
//! Stationary kernels (squared exponential, Matérn) take either a single
//! shared lengthscale or one lengthscale per input dimension (ARD). With a
//! signal variance of 1 they satisfy `k(x, x) = 1`, the normalization every
//! confidence-bound result in this crate assumes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;

/// Matérn smoothness, restricted to the half-integers with closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "3/2")]
    ThreeHalves,
    #[serde(rename = "5/2")]
    FiveHalves,
}

impl Smoothness {
    pub fn value(self) -> f64 {
        match self {
            Smoothness::Half => 0.5,
            Smoothness::ThreeHalves => 1.5,
            Smoothness::FiveHalves => 2.5,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    SquaredExponential {
        lengthscales: Vec<f64>,
        #[serde(default = "one")]
        signal_variance: f64,
    },
    Matern {
        nu: Smoothness,
        lengthscales: Vec<f64>,
        #[serde(default = "one")]
        signal_variance: f64,
    },
    Linear,
    Sum {
        left: Box<KernelSpec>,
        right: Box<KernelSpec>,
    },
    Product {
        left: Box<KernelSpec>,
        right: Box<KernelSpec>,
    },
}

impl KernelSpec {
    /// Isotropic squared-exponential kernel with unit signal variance.
    pub fn se(lengthscale: f64) -> Self {
        KernelSpec::SquaredExponential {
            lengthscales: vec![lengthscale],
            signal_variance: 1.0,
        }
    }

    pub fn se_ard(lengthscales: Vec<f64>, signal_variance: f64) -> Self {
        KernelSpec::SquaredExponential {
            lengthscales,
            signal_variance,
        }
    }

    pub fn matern(nu: Smoothness, lengthscale: f64) -> Self {
        KernelSpec::Matern {
            nu,
            lengthscales: vec![lengthscale],
            signal_variance: 1.0,
        }
    }

    pub fn sum(left: KernelSpec, right: KernelSpec) -> Self {
        KernelSpec::Sum {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn product(left: KernelSpec, right: KernelSpec) -> Self {
        KernelSpec::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Checks hyperparameters and, when `dim` is given, that per-dimension
    /// lengthscales match it.
    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        match self {
            KernelSpec::SquaredExponential {
                lengthscales,
                signal_variance,
            }
            | KernelSpec::Matern {
                lengthscales,
                signal_variance,
                ..
            } => {
                if lengthscales.is_empty() {
                    return Err(invalid("lengthscales", "at least one lengthscale required"));
                }
                if let Some(l) = lengthscales.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
                    return Err(invalid("lengthscales", format!("must be positive, got {l}")));
                }
                if !(*signal_variance > 0.0) || !signal_variance.is_finite() {
                    return Err(invalid(
                        "signal_variance",
                        format!("must be positive, got {signal_variance}"),
                    ));
                }
                if let Some(d) = dim {
                    if lengthscales.len() != 1 && lengthscales.len() != d {
                        return Err(Error::DimensionMismatch {
                            expected: lengthscales.len(),
                            found: d,
                        });
                    }
                }
                Ok(())
            }
            KernelSpec::Linear => Ok(()),
            KernelSpec::Sum { left, right } | KernelSpec::Product { left, right } => {
                left.validate(dim)?;
                right.validate(dim)
            }
        }
    }

    /// Prior variance `k(x, x)` for stationary kernels; `None` when it depends on `x`.
    pub fn stationary_variance(&self) -> Option<f64> {
        match self {
            KernelSpec::SquaredExponential { signal_variance, .. } | KernelSpec::Matern { signal_variance, .. } => {
                Some(*signal_variance)
            }
            KernelSpec::Linear => None,
            KernelSpec::Sum { left, right } => Some(left.stationary_variance()? + right.stationary_variance()?),
            KernelSpec::Product { left, right } => Some(left.stationary_variance()? * right.stationary_variance()?),
        }
    }

    /// `k(x, x')` with argument validation.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        self.validate(Some(x.len()))?;
        Ok(self.eval(x, y))
    }

    /// `k(x, x')` without validation. Callers must have run [`validate`](Self::validate).
    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelSpec::SquaredExponential {
                lengthscales,
                signal_variance,
            } => signal_variance * (-0.5 * scaled_sq_dist(lengthscales, x, y)).exp(),
            KernelSpec::Matern {
                nu,
                lengthscales,
                signal_variance,
            } => signal_variance * matern_profile(*nu, scaled_sq_dist(lengthscales, x, y).sqrt()),
            KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            KernelSpec::Sum { left, right } => left.eval(x, y) + right.eval(x, y),
            KernelSpec::Product { left, right } => left.eval(x, y) * right.eval(x, y),
        }
    }
}

/// Closed-form Matérn correlation at scaled distance `s = r / l`.
pub(crate) fn matern_profile(nu: Smoothness, s: f64) -> f64 {
    match nu {
        Smoothness::Half => (-s).exp(),
        Smoothness::ThreeHalves => {
            let a = 3f64.sqrt() * s;
            (1.0 + a) * (-a).exp()
        }
        Smoothness::FiveHalves => {
            let a = 5f64.sqrt() * s;
            (1.0 + a + 5.0 * s * s / 3.0) * (-a).exp()
        }
    }
}

fn scaled_sq_dist(lengthscales: &[f64], x: &[f64], y: &[f64]) -> f64 {
    if let [l] = lengthscales {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (l * l)
    } else {
        x.iter()
            .zip(y)
            .zip(lengthscales)
            .map(|((a, b), l)| {
                let d = (a - b) / l;
                d * d
            })
            .sum()
    }
}

pub(crate) fn check_dims<P: AsRef<[f64]>>(points: &[P]) -> Result<Option<usize>> {
    let Some(first) = points.first() else {
        return Ok(None);
    };
    let dim = first.as_ref().len();
    for p in points {
        if p.as_ref().len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.as_ref().len(),
            });
        }
    }
    Ok(Some(dim))
}

/// Kernel matrix `K[i][j] = k(points[i], points[j])`, exactly symmetric.
pub fn gram<P: AsRef<[f64]>>(spec: &KernelSpec, points: &[P]) -> Result<Matrix> {
    let dim = check_dims(points)?;
    spec.validate(dim)?;
    let n = points.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval(points[i].as_ref(), points[j].as_ref());
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}
