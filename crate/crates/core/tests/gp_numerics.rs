mod common;

use common::{dense_gram, dense_information_gain, dense_posterior};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stableopt_core::kernels::Smoothness;
use stableopt_core::{
    fit_hyperparameters, information_gain, posterior, DomainPosterior, FiniteDomain, FitBounds, KernelSpec,
    ObservationSet,
};

/// `K_ν(z) = ∫₀^∞ exp(−z cosh t) cosh(νt) dt` by the trapezoid rule.
fn bessel_k(nu: f64, z: f64) -> f64 {
    let h = 1e-3;
    let mut sum = 0.5 * (-z).exp();
    let mut t: f64 = h;
    loop {
        let term = (-z * t.cosh()).exp() * (nu * t).cosh();
        sum += term;
        if term < 1e-300 || (t > 1.0 && term < 1e-18 * sum) {
            break;
        }
        t += h;
    }
    sum * h
}

fn gamma_half_integer(nu: f64) -> f64 {
    // Γ(1/2) = √π, Γ(x + 1) = xΓ(x)
    let mut g = std::f64::consts::PI.sqrt();
    let mut x = 0.5;
    while x < nu - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

fn matern_reference(nu: f64, r: f64, l: f64) -> f64 {
    let z = (2.0 * nu).sqrt() * r / l;
    2f64.powf(1.0 - nu) / gamma_half_integer(nu) * z.powf(nu) * bessel_k(nu, z)
}

#[test]
fn matern_matches_bessel_integral() {
    for (nu, nu_val) in [
        (Smoothness::Half, 0.5),
        (Smoothness::ThreeHalves, 1.5),
        (Smoothness::FiveHalves, 2.5),
    ] {
        for l in [0.3, 1.0, 2.5] {
            let k = KernelSpec::matern(nu, l);
            for r in [0.01, 0.1, 0.4, 1.0, 2.0, 4.0] {
                let got = k.evaluate(&[0.0, 0.0], &[r * 0.6, r * 0.8]).unwrap();
                let want = matern_reference(nu_val, r, l);
                assert!((got - want).abs() < 1e-8, "nu={nu_val} l={l} r={r}: {got} vs {want}");
            }
        }
        assert_eq!(KernelSpec::matern(nu, 0.7).evaluate(&[0.3], &[0.3]).unwrap(), 1.0);
    }
}

#[test]
fn gram_matrices_are_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let kernels = [
        KernelSpec::se(0.4),
        KernelSpec::se_ard(vec![0.2, 1.5, 0.7], 2.0),
        KernelSpec::matern(Smoothness::Half, 0.5),
        KernelSpec::matern(Smoothness::ThreeHalves, 0.5),
        KernelSpec::matern(Smoothness::FiveHalves, 0.5),
        KernelSpec::sum(KernelSpec::se(0.3), KernelSpec::matern(Smoothness::Half, 1.0)),
        KernelSpec::product(KernelSpec::se(0.3), KernelSpec::matern(Smoothness::FiveHalves, 1.0)),
    ];
    for k in &kernels {
        for _ in 0..10 {
            let xs: Vec<Vec<f64>> = (0..25).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
            let g = dense_gram(k, &xs);
            let lib = stableopt_core::gram(k, &xs).unwrap();
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    assert_eq!(lib[(i, j)], lib[(j, i)]);
                    assert!((lib[(i, j)] - g[(i, j)]).abs() < 1e-15);
                }
            }
            let min = g.symmetric_eigenvalues().min();
            assert!(min > -1e-10, "{k:?}: eigenvalue {min}");
        }
    }
}

#[test]
fn batch_posterior_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = KernelSpec::matern(Smoothness::FiveHalves, 0.3);
    let xs: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random()]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (4.0 * x[0]).sin() * x[1]).collect();
    let post = posterior(&k, &ObservationSet::from_data(xs.clone(), ys.clone(), 0.04).unwrap()).unwrap();
    for _ in 0..50 {
        let q = [rng.random::<f64>(), rng.random::<f64>()];
        let (m, v) = post.mean_var(&q).unwrap();
        let (dm, dv) = dense_posterior(&k, &xs, &ys, 0.04, &q);
        assert!((m - dm).abs() < 1e-8 && (v - dv).abs() < 1e-8);
    }
}

#[test]
fn domain_posterior_tracks_dense_solve_with_repeats() {
    let grid = FiniteDomain::grid(&[(0.0, 1.0)], &[30]).unwrap();
    let k = KernelSpec::se(0.2);
    let mut dp = DomainPosterior::new(&k, 0.01, &grid).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (step, &i) in [3usize, 3, 3, 17, 29, 17, 0].iter().enumerate() {
        let y = step as f64 * 0.1;
        dp.observe(i, y).unwrap();
        xs.push(grid.point(i).to_vec());
        ys.push(y);
    }
    for j in 0..grid.len() {
        let (m, v) = dense_posterior(&k, &xs, &ys, 0.01, grid.point(j));
        assert!((dp.mean(j) - m).abs() < 1e-8 && (dp.variance(j) - v).abs() < 1e-8);
    }
}

#[test]
fn information_gain_is_log_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let k = KernelSpec::se(0.3);
    for n in [1, 5, 30, 60] {
        let xs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
        let got = information_gain(&k, &xs, 0.01).unwrap();
        assert!((got - dense_information_gain(&k, &xs, 0.01)).abs() < 1e-8);
    }
}

#[test]
fn log_marginal_likelihood_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let k = KernelSpec::se_ard(vec![0.3, 0.6], 1.7);
    let xs: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random(), rng.random()]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x[0] - x[1] * x[1]).collect();
    let post = posterior(&k, &ObservationSet::from_data(xs.clone(), ys.clone(), 0.05).unwrap()).unwrap();
    let n = xs.len();
    let kk = dense_gram(&k, &xs) + nalgebra::DMatrix::identity(n, n) * 0.05;
    let y = nalgebra::DVector::from_column_slice(&ys);
    let chol = kk.clone().cholesky().unwrap();
    let logdet: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let want = -0.5 * y.dot(&chol.solve(&y)) - 0.5 * logdet - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    assert!((post.log_marginal_likelihood() - want).abs() < 1e-7);
}

#[test]
fn hyperparameter_fit_recovers_lengthscale() {
    let truth = KernelSpec::se(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let xs: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random::<f64>() * 4.0]).collect();
    // one GP draw through a dense Cholesky factor
    let n = xs.len();
    let g = dense_gram(&truth, &xs) + nalgebra::DMatrix::identity(n, n) * 1e-8;
    let l = g.cholesky().unwrap().l();
    let z = nalgebra::DVector::from_fn(n, |_, _| {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    });
    let f = l * z;
    let ys: Vec<f64> = f.iter().map(|v| v + 0.05 * (rng.random::<f64>() - 0.5)).collect();
    let obs = ObservationSet::from_data(xs, ys, 0.01).unwrap();
    let fit = fit_hyperparameters(&KernelSpec::se(2.0), &obs, 500, FitBounds::default(), 3).unwrap();
    let KernelSpec::SquaredExponential { lengthscales, .. } = &fit.kernel else {
        panic!("family changed");
    };
    assert!(lengthscales[0] > 0.25 && lengthscales[0] < 1.0, "{lengthscales:?}");
    assert!(!fit.degenerate);
}
