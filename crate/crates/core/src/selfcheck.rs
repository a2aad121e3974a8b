//! Quick internal consistency checks, run by `stableopt selfcheck`.

use std::time::Instant;

use crate::error::Result;
use crate::gp::{posterior, DomainPosterior, ObservationSet};
use crate::kernels::{gram, KernelSpec};
use crate::linalg::CholeskyFactor;
use crate::optimizers::{stableopt_step, ConfidenceField};
use crate::robust_sets::{build_neighborhoods, DistanceSpec, FiniteDomain};
use crate::testbed::{f_poly, robust_table, POLY_BOUNDS};

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn poly_landmarks() -> Result<(bool, String)> {
    let grid = FiniteDomain::grid(&POLY_BOUNDS, &[100, 100])?;
    let pset = build_neighborhoods(grid, DistanceSpec::L2, 0.5)?;
    let table = robust_table(&pset, |x| f_poly(x[0], x[1]))?;
    let fmax = table.values()[table.argmax()];
    let (opt, robust) = table.robust_optimum();
    let p = pset.domain().point(opt);
    let ok = (fmax - 20.82).abs() <= 0.05
        && (robust + 4.33).abs() <= 0.2
        && (p[0] + 0.195).abs() <= 0.1
        && (p[1] - 0.284).abs() <= 0.1;
    Ok((
        ok,
        format!(
            "max f {fmax:.4}, robust optimum {robust:.4} at ({:.4}, {:.4})",
            p[0], p[1]
        ),
    ))
}

fn incremental_posterior() -> Result<(bool, String)> {
    let kernel = KernelSpec::se(0.3);
    let grid = FiniteDomain::grid(&[(0.0, 1.0), (0.0, 1.0)], &[12, 12])?;
    let mut dp = DomainPosterior::new(&kernel, 0.01, &grid)?;
    let mut obs = ObservationSet::new(0.01)?;
    for k in 0..25 {
        let i = (k * 37 + 5) % grid.len();
        let y = (3.0 * grid.point(i)[0]).sin() + grid.point(i)[1];
        dp.observe(i, y)?;
        obs = ObservationSet::from_data(
            obs.inputs().iter().cloned().chain([grid.point(i).to_vec()]).collect(),
            obs.outputs().iter().copied().chain([y]).collect(),
            0.01,
        )?;
    }
    let batch = posterior(&kernel, &obs)?;
    let mut worst: f64 = 0.0;
    for j in 0..grid.len() {
        let (m, v) = batch.mean_var(grid.point(j))?;
        worst = worst.max((m - dp.mean(j)).abs()).max((v - dp.variance(j)).abs());
    }
    Ok((worst <= 1e-8, format!("max deviation {worst:.3e}")))
}

fn gram_is_positive_definite() -> Result<(bool, String)> {
    let grid = FiniteDomain::grid(&[(0.0, 1.0), (0.0, 1.0)], &[8, 8])?;
    let pts: Vec<&[f64]> = grid.points().collect();
    let mut failures = Vec::new();
    for (name, k) in [
        ("se", KernelSpec::se(0.2)),
        ("matern-1/2", KernelSpec::matern(crate::kernels::Smoothness::Half, 0.2)),
        (
            "matern-5/2",
            KernelSpec::matern(crate::kernels::Smoothness::FiveHalves, 0.2),
        ),
    ] {
        if CholeskyFactor::factorize(&gram(&k, &pts)?, 1e-10).is_err() {
            failures.push(name);
        }
    }
    Ok((failures.is_empty(), format!("failed: {failures:?}")))
}

fn acquisition_matches_brute_force() -> Result<(bool, String)> {
    let grid = FiniteDomain::grid(&[(0.0, 1.0)], &[40])?;
    let pset = build_neighborhoods(grid, DistanceSpec::L2, 0.08)?;
    let kernel = KernelSpec::se(0.15);
    let mut dp = DomainPosterior::new(&kernel, 0.01, pset.domain())?;
    for (i, y) in [(3, 0.2), (17, 1.0), (30, -0.4)] {
        dp.observe(i, y)?;
    }
    let field = ConfidenceField::from_moments(dp.means(), &dp.variances(), 2.0);
    let (cand, target) = stableopt_step(&field, &pset)?;
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..pset.len() {
        let m = pset
            .neighbors(i)
            .iter()
            .map(|&j| field.ucb[j])
            .fold(f64::INFINITY, f64::min);
        if m > best.1 {
            best = (i, m);
        }
    }
    let mut worst = (0, f64::INFINITY);
    for &j in pset.neighbors(best.0) {
        if field.lcb[j] < worst.1 {
            worst = (j, field.lcb[j]);
        }
    }
    Ok((
        cand == best.0 && target == worst.0,
        format!("step ({cand}, {target}), brute force ({}, {})", best.0, worst.0),
    ))
}

/// Runs all checks in order.
pub fn run_selfcheck() -> Vec<CheckOutcome> {
    vec![
        check("poly-landmarks", poly_landmarks),
        check("incremental-posterior", incremental_posterior),
        check("gram-positive-definite", gram_is_positive_definite),
        check("acquisition-brute-force", acquisition_matches_brute_force),
    ]
}
