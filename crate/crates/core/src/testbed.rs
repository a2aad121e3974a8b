//! Objective functions with exact ground truth on finite domains.

use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::gp::NUGGET;
use crate::kernels::{gram, KernelSpec};
use crate::linalg::CholeskyFactor;
use crate::robust_sets::{FiniteDomain, PerturbationSet};

/// True values of an objective on a domain plus their worst cases over each
/// neighbourhood; the ground truth for ε-regret.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveTable {
    values: Vec<f64>,
    robust_values: Vec<f64>,
    optimum: (usize, f64),
}

impl ObjectiveTable {
    /// Builds the table from per-point values by exhaustive min/max.
    pub fn from_values(pset: &PerturbationSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != pset.len() {
            return Err(Error::DimensionMismatch {
                expected: pset.len(),
                found: values.len(),
            });
        }
        let robust_values = pset.worst_cases(&values);
        let mut optimum = (0, f64::NEG_INFINITY);
        for (i, &v) in robust_values.iter().enumerate() {
            if v > optimum.1 {
                optimum = (i, v);
            }
        }
        Ok(ObjectiveTable {
            values,
            robust_values,
            optimum,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn robust_values(&self) -> &[f64] {
        &self.robust_values
    }

    /// `(x*_ε index, max–min value)`.
    pub fn robust_optimum(&self) -> (usize, f64) {
        self.optimum
    }

    /// Lowest-index maximizer of the raw values.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// `r_ε(reported)`.
    pub fn eps_regret(&self, reported: usize) -> Result<f64> {
        let r = self.robust_values.get(reported).ok_or(Error::IndexOutOfRange {
            index: reported,
            len: self.robust_values.len(),
        })?;
        Ok(self.optimum.1 - r)
    }

    /// Writes `index,x0,..,x{p-1},value,robust_value` rows.
    pub fn write_csv(&self, domain: &FiniteDomain, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let mut header = String::from("index");
        for k in 0..domain.dim() {
            header.push_str(&format!(",x{k}"));
        }
        header.push_str(",value,robust_value\n");
        out.write_all(header.as_bytes()).map_err(io)?;
        for i in 0..domain.len() {
            let mut line = i.to_string();
            for c in domain.point(i) {
                line.push_str(&format!(",{c}"));
            }
            line.push_str(&format!(",{},{}\n", self.values[i], self.robust_values[i]));
            out.write_all(line.as_bytes()).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Evaluates `f` on every domain point and tabulates worst cases.
pub fn robust_table(pset: &PerturbationSet, f: impl Fn(&[f64]) -> f64) -> Result<ObjectiveTable> {
    let values = pset.domain().points().map(f).collect();
    ObjectiveTable::from_values(pset, values)
}

/// Degree-6 bivariate polynomial with several local maxima; global max near (2.82, 4.0).
pub fn f_poly(x: f64, y: f64) -> f64 {
    let (x2, y2) = (x * x, y * y);
    let (x3, y3) = (x2 * x, y2 * y);
    let (x4, y4) = (x3 * x, y3 * y);
    -2.0 * x3 * x3 + 12.2 * x4 * x - 21.2 * x4 - 6.2 * x + 6.4 * x3 + 4.7 * x2 - y3 * y3 + 11.0 * y4 * y - 43.3 * y4
        + 10.0 * y
        + 74.8 * y3
        - 56.9 * y2
        + 4.1 * x * y
        + 0.1 * y2 * x2
        - 0.4 * y2 * x
        - 0.4 * x2 * y
}

/// Grid box of the polynomial benchmark: `x ∈ [−0.95, 3.2]`, `y ∈ [−0.45, 4.4]`.
pub const POLY_BOUNDS: [(f64, f64); 2] = [(-0.95, 3.2), (-0.45, 4.4)];

/// `f(x) = Σ_i α_i k(c_i, x)`, an element of the kernel's RKHS.
#[derive(Clone, Debug, PartialEq)]
pub struct RkhsFunctionSpec {
    pub kernel: KernelSpec,
    pub centers: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
}

impl RkhsFunctionSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, a)| a * self.kernel.eval(c, x))
            .sum()
    }

    /// `√(αᵀ K α)`.
    pub fn rkhs_norm(&self) -> Result<f64> {
        let k = gram(&self.kernel, &self.centers)?;
        let n = self.centers.len();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += self.coefficients[i] * k[(i, j)] * self.coefficients[j];
            }
        }
        Ok(q.max(0.0).sqrt())
    }
}

const RKHS_RETRIES: usize = 10;

/// Random kernel expansion over domain points, rescaled to RKHS norm `norm_bound`.
pub fn sample_rkhs_function(
    kernel: &KernelSpec,
    domain: &FiniteDomain,
    norm_bound: f64,
    n_centers: usize,
    seed: u64,
) -> Result<RkhsFunctionSpec> {
    if !(norm_bound > 0.0) {
        return Err(invalid("norm_bound", format!("must be positive, got {norm_bound}")));
    }
    if n_centers == 0 {
        return Err(invalid("n_centers", "must be at least 1"));
    }
    kernel.validate(Some(domain.dim()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RKHS_RETRIES {
        let idx: Vec<usize> = if n_centers <= domain.len() {
            sample(&mut rng, domain.len(), n_centers).into_vec()
        } else {
            (0..n_centers).map(|_| rng.random_range(0..domain.len())).collect()
        };
        let centers: Vec<Vec<f64>> = idx.iter().map(|&i| domain.point(i).to_vec()).collect();
        let k = gram(kernel, &centers)?;
        if CholeskyFactor::factorize(&k, NUGGET).is_err() {
            continue;
        }
        let coefficients: Vec<f64> = (0..n_centers).map(|_| rng.sample(StandardNormal)).collect();
        let mut spec = RkhsFunctionSpec {
            kernel: kernel.clone(),
            centers,
            coefficients,
        };
        let norm = spec.rkhs_norm()?;
        if norm < 1e-12 {
            continue;
        }
        for a in &mut spec.coefficients {
            *a *= norm_bound / norm;
        }
        return Ok(spec);
    }
    Err(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })
}

/// Narrow dip of depth `−2η` at `center` on `[0, 1]^p`.
///
/// `f(x) = −2η · exp(−‖x − c‖² / (2s²))` with `s = 0.9 · w / √(2 ln 2)`, so
/// the function stays above `−η` wherever `‖x − c‖₂ ≥ w`, and in particular
/// wherever `‖x − c‖∞ ≥ w`.
pub fn valley_instance(pset: &PerturbationSet, eta: f64, width: f64, center: &[f64]) -> Result<ObjectiveTable> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(invalid("eta", format!("must lie in (0, 1/2), got {eta}")));
    }
    if !(width > 0.0 && width < 0.5) {
        return Err(invalid("width", format!("must lie in (0, 1/2), got {width}")));
    }
    if center.len() != pset.domain().dim() {
        return Err(Error::DimensionMismatch {
            expected: pset.domain().dim(),
            found: center.len(),
        });
    }
    if center.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
        return Err(invalid("center", "must lie in the interior of the unit cube"));
    }
    let f = valley_fn(eta, width, center.to_vec());
    robust_table(pset, f)
}

pub fn valley_fn(eta: f64, width: f64, center: Vec<f64>) -> impl Fn(&[f64]) -> f64 {
    let s = 0.9 * width / (2.0 * std::f64::consts::LN_2).sqrt();
    move |x: &[f64]| {
        let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
        -2.0 * eta * (-r2 / (2.0 * s * s)).exp()
    }
}

/// Two-peak 1-D function: a tall narrow peak at 0.25 and a lower wide peak at 0.7.
///
/// `f(x) = exp(−(x − 0.25)² / (2·0.03²)) + 0.8·exp(−(x − 0.7)² / (2·0.1²))`.
/// Under `d(x, x') = |x − x'|` and `ε = 0.06` the narrow peak is worthless
/// and the ε-stable optimum sits on the wide one.
pub fn running_example_fn(x: f64) -> f64 {
    let narrow = (-(x - 0.25).powi(2) / (2.0 * 0.03 * 0.03)).exp();
    let wide = 0.8 * (-(x - 0.7).powi(2) / (2.0 * 0.1 * 0.1)).exp();
    narrow + wide
}

/// Grid size used for the running example.
pub const RUNNING_EXAMPLE_POINTS: usize = 51;

pub fn running_example_1d(pset: &PerturbationSet) -> Result<ObjectiveTable> {
    if pset.domain().dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: pset.domain().dim(),
        });
    }
    robust_table(pset, |x| running_example_fn(x[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robust_sets::{build_neighborhoods, DistanceSpec};

    fn unit_line(n: usize, eps: f64) -> PerturbationSet {
        build_neighborhoods(FiniteDomain::grid(&[(0.0, 1.0)], &[n]).unwrap(), DistanceSpec::L2, eps).unwrap()
    }

    #[test]
    fn poly_origin_and_maximum() {
        assert_eq!(f_poly(0.0, 0.0), 0.0);
        assert!((f_poly(2.82, 4.0) - 20.82).abs() < 0.05);
    }

    #[test]
    fn zero_epsilon_table_is_identity() {
        let ps = unit_line(11, 0.0);
        let t = robust_table(&ps, |x| (x[0] * 7.0).sin()).unwrap();
        assert_eq!(t.values(), t.robust_values());
        assert_eq!(t.robust_optimum().0, t.argmax());
        assert_eq!(t.eps_regret(t.argmax()).unwrap(), 0.0);
        assert!(t.eps_regret(11).is_err());
    }

    #[test]
    fn running_example_structure() {
        let robust = running_example_1d(&unit_line(RUNNING_EXAMPLE_POINTS, 0.06)).unwrap();
        assert_ne!(robust.argmax(), robust.robust_optimum().0);
        assert!(robust.values()[robust.argmax()] > 0.9);
        let plain = running_example_1d(&unit_line(RUNNING_EXAMPLE_POINTS, 0.0)).unwrap();
        assert_eq!(plain.argmax(), plain.robust_optimum().0);
        for (v, r) in robust.values().iter().zip(robust.robust_values()) {
            assert!(r <= v);
        }
    }

    #[test]
    fn single_center_rkhs_function() {
        let d = FiniteDomain::grid(&[(0.0, 1.0)], &[20]).unwrap();
        let f = sample_rkhs_function(&KernelSpec::se(0.2), &d, 2.5, 1, 3).unwrap();
        assert!((f.eval(&f.centers[0]).abs() - 2.5).abs() < 1e-12);
        assert!(sample_rkhs_function(&KernelSpec::se(0.2), &d, 0.0, 1, 3).is_err());
    }

    #[test]
    fn valley_parameters_are_checked() {
        let ps = unit_line(21, 0.1);
        assert!(valley_instance(&ps, 0.6, 0.1, &[0.5]).is_err());
        assert!(valley_instance(&ps, 0.2, 0.0, &[0.5]).is_err());
        assert!(valley_instance(&ps, 0.2, 0.1, &[1.0]).is_err());
        let t = valley_instance(&ps, 0.2, 0.1, &[0.5]).unwrap();
        assert!((t.values()[10] + 0.4).abs() < 1e-12);
    }
}
