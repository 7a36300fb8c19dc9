//! Solver and eigensolver results against independent brute-force oracles.

#![allow(clippy::needless_range_loop)]

mod common;

use approx::assert_abs_diff_eq;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkspace::duality::min_kernel;
use rkspace::kernel::{closed_form_kernel, gram, ClosedForm};
use rkspace::linalg::Matrix;
use rkspace::solvers::{fit_krr, fit_pnorm, Dataset, FitConfig};
use rkspace::symmetric_eigenvalues;

use common::{dense_solve, grid_oracle};

#[test]
fn krr_matches_dense_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let xs: Vec<f64> = (0..5).map(|_| rng.random_range(0.01..1.0)).collect();
        let ys: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lambda = 0.1;
        let fit = fit_krr(
            min_kernel(),
            &Dataset::from_scalars(&xs, &ys).unwrap(),
            &FitConfig::new(lambda),
        )
        .unwrap();
        let a: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| xs[i].min(xs[j]) + if i == j { 5.0 * lambda } else { 0.0 })
                    .collect()
            })
            .collect();
        let oracle = dense_solve(a, ys.clone());
        for (got, want) in fit.coefficients().iter().zip(&oracle) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
    }
}

#[test]
fn krr_gaussian_matches_dense_elimination() {
    let k = closed_form_kernel(ClosedForm::Gaussian { sigma: 0.5 }).unwrap();
    let xs = [-1.0, -0.3, 0.1, 0.8, 1.7, 2.0];
    let ys = [0.3, -0.2, 0.5, 1.0, -0.4, 0.0];
    let fit = fit_krr(
        k.clone().into(),
        &Dataset::from_scalars(&xs, &ys).unwrap(),
        &FitConfig::new(0.01),
    )
    .unwrap();
    let a: Vec<Vec<f64>> = (0..6)
        .map(|i| {
            (0..6)
                .map(|j| (-(xs[i] - xs[j]).powi(2) / 0.5).exp() + if i == j { 0.06 } else { 0.0 })
                .collect()
        })
        .collect();
    for (got, want) in fit.coefficients().iter().zip(dense_solve(a, ys.to_vec())) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
    }
}

#[test]
fn pnorm_matches_grid_oracle() {
    let xs = [0.2, 0.4, 0.6, 0.8];
    let ys = [0.5, 0.1, 0.9, 0.3];
    let fit = fit_pnorm(
        &Dataset::from_scalars(&xs, &ys).unwrap(),
        &FitConfig::new(0.05).with_p(1.5),
    )
    .unwrap();
    let oracle = grid_oracle(&xs, &ys, 0.05, 1.5, 400, 20_000);
    assert!(
        (fit.objective - oracle).abs() <= 1e-3,
        "solver {} oracle {}",
        fit.objective,
        oracle
    );
    // the grid space contains the solver's space
    assert!(oracle <= fit.objective + 1e-3);
}

#[test]
fn pnorm_at_two_is_krr() {
    let xs = [0.1, 0.35, 0.5, 0.72, 0.9, 1.0];
    let ys = [0.2, -0.4, 0.3, 0.8, 0.1, -0.2];
    let data = Dataset::from_scalars(&xs, &ys).unwrap();
    let lambda = 0.03;
    let p = fit_pnorm(&data, &FitConfig::new(lambda).with_p(2.0)).unwrap();
    let k = fit_krr(
        min_kernel(),
        &data,
        &FitConfig::new(lambda / xs.len() as f64),
    )
    .unwrap();
    assert_abs_diff_eq!(p.objective, k.objective * xs.len() as f64, epsilon = 1e-6);
    for (a, b) in p.coefficients().iter().zip(k.coefficients()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-4);
    }
}

/// Counts eigenvalues below `t` from the signs of an LDLᵀ factorization of
/// `A - tI` (Sylvester's law of inertia).
fn count_below(a: &Matrix, t: f64) -> usize {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a[(i, j)] - if i == j { t } else { 0.0 })
                .collect()
        })
        .collect();
    let mut negatives = 0;
    for k in 0..n {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = 1e-300;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / pivot;
            for j in k + 1..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negatives
}

#[test]
fn eigenvalues_match_inertia_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let mut a = Matrix::zeros(8, 8);
        for i in 0..8 {
            for j in 0..=i {
                let v = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let values = symmetric_eigenvalues(&a).unwrap();
        for (k, v) in values.iter().enumerate() {
            let (mut lo, mut hi) = (-10.0, 10.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(&a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            assert_abs_diff_eq!(*v, 0.5 * (lo + hi), epsilon = 1e-9);
        }
    }
}

#[test]
fn gram_examples() {
    let k = closed_form_kernel(ClosedForm::Gaussian { sigma: 2f64.sqrt() }).unwrap();
    let g = gram(&k, &[vec![0.0], vec![2.0]]).unwrap();
    assert_eq!(g.entries[(0, 0)], 1.0);
    assert_abs_diff_eq!(g.entries[(0, 1)], (-1f64).exp(), epsilon = 1e-15);
    assert_eq!(g.entries[(0, 1)], g.entries[(1, 0)]);
}
