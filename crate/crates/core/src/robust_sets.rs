//! Finite decision domains, distance functions and perturbation
//! neighbourhoods `Δ_ε(x) = { x' ∈ D : d(x, x') ≤ ε }`.
//!
//! Neighbourhoods are stored as index lists into the domain (compressed
//! rows, ascending indices). For the 100×100 polynomial grid at `ε = 0.5`
//! that is about 3.4M indices, roughly 28 MB.
//!
//! The max–min variations reduce to ordinary perturbation sets:
//! [`group_reduction`] (worst case over a partition cell),
//! [`parameter_reduction`] (worst case over an unknown parameter) and
//! [`estimation_reduction`] (worst case over a ball around a parameter
//! estimate).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::check_dims;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDomain {
    coords: Vec<f64>,
    dim: usize,
    groups: Option<Vec<usize>>,
}

impl FiniteDomain {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = check_dims(&points)?.ok_or(Error::Empty("domain"))?;
        if dim == 0 {
            return Err(invalid("points", "zero-dimensional points"));
        }
        Ok(FiniteDomain {
            coords: points.into_iter().flatten().collect(),
            dim,
            groups: None,
        })
    }

    /// Uniform grid over a box, `counts[k]` points along dimension `k`
    /// (endpoints included). The last coordinate varies fastest.
    pub fn grid(bounds: &[(f64, f64)], counts: &[usize]) -> Result<Self> {
        if bounds.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len(),
                found: counts.len(),
            });
        }
        if bounds.is_empty() || counts.contains(&0) {
            return Err(Error::Empty("grid"));
        }
        let axes: Vec<Vec<f64>> = bounds
            .iter()
            .zip(counts)
            .map(|(&(lo, hi), &n)| linspace(lo, hi, n))
            .collect();
        let total: usize = counts.iter().product();
        let dim = bounds.len();
        let mut coords = Vec::with_capacity(total * dim);
        for flat in 0..total {
            let mut rem = flat;
            let start = coords.len();
            coords.resize(start + dim, 0.0);
            for k in (0..dim).rev() {
                coords[start + k] = axes[k][rem % counts[k]];
                rem /= counts[k];
            }
        }
        Ok(FiniteDomain {
            coords,
            dim,
            groups: None,
        })
    }

    pub fn with_groups(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: labels.len(),
            });
        }
        self.groups = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn groups(&self) -> Option<&[usize]> {
        self.groups.as_deref()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + k as f64 * step })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistanceSpec {
    L2,
    L1,
    Linf,
    /// `max_k |x_k − x'_k| / w_k`; a box with half-widths `ε·w_k`.
    WeightedLinf {
        weights: Vec<f64>,
    },
    /// 0 within a group, infinite across groups. Needs domain group labels.
    GroupIndicator,
    /// `max(d_x(x, x'), d_θ(θ, θ'))` over a coordinate split. A missing
    /// θ-distance leaves the θ-block unconstrained.
    ProductComposite {
        x_dims: Vec<usize>,
        x_distance: Box<DistanceSpec>,
        theta_dims: Vec<usize>,
        theta_distance: Option<Box<DistanceSpec>>,
    },
}

impl DistanceSpec {
    fn validate(&self, domain: &FiniteDomain) -> Result<()> {
        match self {
            DistanceSpec::GroupIndicator => {
                if domain.groups.is_none() {
                    return Err(Error::Empty("group labelling"));
                }
                Ok(())
            }
            other => other.validate_coords(domain.dim),
        }
    }

    fn validate_coords(&self, dim: usize) -> Result<()> {
        match self {
            DistanceSpec::L2 | DistanceSpec::L1 | DistanceSpec::Linf => Ok(()),
            DistanceSpec::WeightedLinf { weights } => {
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: weights.len(),
                    });
                }
                if weights.iter().any(|w| !(*w > 0.0)) {
                    return Err(invalid("weights", "must be strictly positive"));
                }
                Ok(())
            }
            DistanceSpec::GroupIndicator => Err(invalid(
                "distance",
                "group-indicator cannot be nested in a product distance",
            )),
            DistanceSpec::ProductComposite {
                x_dims,
                x_distance,
                theta_dims,
                theta_distance,
            } => {
                let mut seen = vec![false; dim];
                for &d in x_dims.iter().chain(theta_dims) {
                    if d >= dim || seen[d] {
                        return Err(invalid(
                            "coordinate split",
                            "blocks must be disjoint and within the point dimension",
                        ));
                    }
                    seen[d] = true;
                }
                if seen.contains(&false) {
                    return Err(invalid("coordinate split", "blocks must cover every coordinate"));
                }
                x_distance.validate_coords(x_dims.len())?;
                if let Some(t) = theta_distance {
                    t.validate_coords(theta_dims.len())?;
                }
                Ok(())
            }
        }
    }

    /// Distance between two coordinate vectors. Group-indicator distances
    /// need labels and are evaluated through [`PerturbationSet`] instead.
    pub fn between(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceSpec::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            DistanceSpec::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            DistanceSpec::Linf => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
            DistanceSpec::WeightedLinf { weights } => a
                .iter()
                .zip(b)
                .zip(weights)
                .map(|((x, y), w)| (x - y).abs() / w)
                .fold(0.0, f64::max),
            DistanceSpec::GroupIndicator => f64::NAN,
            DistanceSpec::ProductComposite {
                x_dims,
                x_distance,
                theta_dims,
                theta_distance,
            } => {
                let pick = |v: &[f64], dims: &[usize]| dims.iter().map(|&d| v[d]).collect::<Vec<_>>();
                let dx = x_distance.between(&pick(a, x_dims), &pick(b, x_dims));
                let dt = theta_distance
                    .as_ref()
                    .map_or(0.0, |t| t.between(&pick(a, theta_dims), &pick(b, theta_dims)));
                dx.max(dt)
            }
        }
    }
}

/// Relative slack on the ε-ball boundary. Grid spacings such as 0.02 make
/// `|0.62 − 0.68|` round to just above 0.06; the slack keeps such points inside.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// `d ≤ ε` up to [`BOUNDARY_TOLERANCE`].
pub fn within_epsilon(d: f64, epsilon: f64) -> bool {
    d <= epsilon * (1.0 + BOUNDARY_TOLERANCE)
}

/// A domain together with the precomputed neighbourhood of every point.
#[derive(Clone, Debug)]
pub struct PerturbationSet {
    domain: FiniteDomain,
    distance: DistanceSpec,
    epsilon: f64,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

/// Computes `N(i) = { j : d(points[i], points[j]) ≤ ε }` for every point,
/// with the boundary slack of [`within_epsilon`].
pub fn build_neighborhoods(domain: FiniteDomain, distance: DistanceSpec, epsilon: f64) -> Result<PerturbationSet> {
    if !(epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be non-negative, got {epsilon}")));
    }
    distance.validate(&domain)?;
    let n = domain.len();
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = domain.point(i);
            match (&distance, domain.groups()) {
                (DistanceSpec::GroupIndicator, Some(g)) => (0..n).filter(|&j| g[j] == g[i]).collect(),
                _ => (0..n)
                    .filter(|&j| within_epsilon(distance.between(a, domain.point(j)), epsilon))
                    .collect(),
            }
        })
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut neighbors = Vec::with_capacity(rows.iter().map(Vec::len).sum());
    for row in rows {
        if row.is_empty() {
            // only reachable with a distance where d(x, x) > ε
            return Err(Error::Empty("neighbourhood"));
        }
        neighbors.extend(row);
        offsets.push(neighbors.len());
    }
    Ok(PerturbationSet {
        domain,
        distance,
        epsilon,
        offsets,
        neighbors,
    })
}

impl PerturbationSet {
    pub fn domain(&self) -> &FiniteDomain {
        &self.domain
    }

    pub fn distance(&self) -> &DistanceSpec {
        &self.distance
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    /// Indices of `Δ_ε(points[i])`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn total_neighbors(&self) -> usize {
        self.neighbors.len()
    }

    /// `min_{j ∈ N(i)} values[j]`.
    pub fn worst_case(&self, i: usize, values: &[f64]) -> f64 {
        self.neighbors(i)
            .iter()
            .map(|&j| values[j])
            .fold(f64::INFINITY, f64::min)
    }

    /// Worst-case value of every point.
    pub fn worst_cases(&self, values: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.worst_case(i, values)).collect()
    }

    /// Lowest-index minimizer of `values` over `N(i)`.
    pub fn argmin_within(&self, i: usize, values: &[f64]) -> usize {
        let nb = self.neighbors(i);
        let mut best = nb[0];
        for &j in &nb[1..] {
            if values[j] < values[best] {
                best = j;
            }
        }
        best
    }

    /// `argmax_i min_{j ∈ N(i)} values[j]` with lowest-index tie-breaking,
    /// and the attained max–min value.
    pub fn argmax_worst_case(&self, values: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for i in 0..self.len() {
            let v = self.worst_case(i, values);
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }
}

/// Neighbourhoods equal to the caller's group: `N(i) = { j : group(j) = group(i) }`.
pub fn group_reduction(domain: FiniteDomain) -> Result<PerturbationSet> {
    if domain.groups.is_none() {
        return Err(Error::Empty("group labelling"));
    }
    build_neighborhoods(domain, DistanceSpec::GroupIndicator, 0.0)
}

/// Product domain over `(x, θ)` pairs whose neighbourhoods range over every θ.
///
/// Point `ix · |Θ| + iθ` is `(domain_x[ix], domain_theta[iθ])`, so
/// `N(ix, iθ) = { (ix, θ') : θ' ∈ Θ }`.
pub fn parameter_reduction(domain_x: &FiniteDomain, domain_theta: &FiniteDomain) -> Result<PerturbationSet> {
    let px = domain_x.dim();
    let pt = domain_theta.dim();
    let mut points = Vec::with_capacity(domain_x.len() * domain_theta.len());
    for x in domain_x.points() {
        for th in domain_theta.points() {
            points.push(x.iter().chain(th).copied().collect::<Vec<_>>());
        }
    }
    let distance = DistanceSpec::ProductComposite {
        x_dims: (0..px).collect(),
        x_distance: Box::new(DistanceSpec::L2),
        theta_dims: (px..px + pt).collect(),
        theta_distance: None,
    };
    build_neighborhoods(FiniteDomain::new(points)?, distance, 0.0)
}

/// Indices of `Θ` within `ε` of the estimate `θ̄` under `distance`.
pub fn estimation_ball(
    domain_theta: &FiniteDomain,
    estimate: usize,
    distance: &DistanceSpec,
    epsilon: f64,
) -> Result<Vec<usize>> {
    if estimate >= domain_theta.len() {
        return Err(Error::IndexOutOfRange {
            index: estimate,
            len: domain_theta.len(),
        });
    }
    if !(epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be non-negative, got {epsilon}")));
    }
    distance.validate_coords(domain_theta.dim())?;
    let center = domain_theta.point(estimate);
    Ok((0..domain_theta.len())
        .filter(|&j| within_epsilon(distance.between(center, domain_theta.point(j)), epsilon))
        .collect())
}

/// Product domain over `(x, θ̄ + δ_θ)` with `θ̄ + δ_θ` in the ε-ball around the
/// estimate; neighbourhoods fix `x` and range over the ball.
///
/// Layout as in [`parameter_reduction`], with the ball (in the order returned
/// by [`estimation_ball`]) in place of `Θ`.
pub fn estimation_reduction(
    domain_x: &FiniteDomain,
    domain_theta: &FiniteDomain,
    estimate: usize,
    distance_theta: &DistanceSpec,
    epsilon: f64,
) -> Result<PerturbationSet> {
    let ball = estimation_ball(domain_theta, estimate, distance_theta, epsilon)?;
    let restricted = FiniteDomain::new(ball.iter().map(|&j| domain_theta.point(j).to_vec()).collect())?;
    parameter_reduction(domain_x, &restricted)
}
