use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::KernelSpec;
use crate::eigen::symmetric_eigen;
use crate::error::{Result, RksError};
use crate::linalg::Matrix;

/// `entries[i][j] = K(points[i], points[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub points: Vec<Vec<f64>>,
    pub entries: Matrix,
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn gram(kernel: &KernelSpec, points: &[Vec<f64>]) -> Result<GramMatrix> {
    if points.is_empty() {
        return Err(RksError::invalid("Gram matrix needs at least one point"));
    }
    for p in points {
        kernel.check_point(p)?;
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(RksError::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    let n = points.len();
    let mut entries = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            entries[(i, j)] = kernel.eval_unchecked(&points[i], &points[j])?;
        }
    }
    Ok(GramMatrix {
        points: points.to_vec(),
        entries,
    })
}

/// Outcome of a sampled positivity test.
///
/// A violation is a certificate: `coefficients` is a unit vector `α` with
/// `Σ α_i α_j K(x_i, x_j) = min_eigenvalue < 0`. A pass only says no such
/// vector exists for this sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    PositiveOnSample {
        min_eigenvalue: f64,
    },
    Violation {
        min_eigenvalue: f64,
        witness: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
    },
}

impl Verdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, Verdict::PositiveOnSample { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match *self {
            Verdict::PositiveOnSample { min_eigenvalue }
            | Verdict::Violation { min_eigenvalue, .. } => min_eigenvalue,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub verdict: Verdict,
    /// `tolerance · max(1, trace / n)`.
    pub threshold: f64,
    pub eigenvalues: Vec<f64>,
}

/// Positive on the sample iff `λ_min ≥ -tolerance · max(1, trace / n)`.
///
/// Kernels without a symmetry guarantee are refused unless `symmetrize` is
/// set, in which case `(G + Gᵀ) / 2` is tested.
pub fn positivity_check(
    kernel: &KernelSpec,
    points: &[Vec<f64>],
    tolerance: f64,
    symmetrize: bool,
) -> Result<PositivityReport> {
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(RksError::invalid(format!(
            "tolerance must be nonnegative, got {tolerance}"
        )));
    }
    if !kernel.is_symmetric_kind() && !symmetrize {
        return Err(RksError::Asymmetric(format!(
            "{} kernels are not symmetric; pass the symmetrize flag",
            kernel.kind_name()
        )));
    }
    let g = gram(kernel, points)?;
    let matrix = if symmetrize {
        g.entries.symmetrized()
    } else {
        g.entries
    };
    let n = matrix.rows();
    let eig = symmetric_eigen(&matrix)?;
    let min_eigenvalue = eig.min_value();
    let threshold = tolerance * (matrix.trace() / n as f64).max(1.0);
    let verdict = if min_eigenvalue >= -threshold {
        Verdict::PositiveOnSample { min_eigenvalue }
    } else {
        Verdict::Violation {
            min_eigenvalue,
            witness: g.points,
            coefficients: eig.vector(0),
        }
    };
    Ok(PositivityReport {
        verdict,
        threshold,
        eigenvalues: eig.values,
    })
}

/// `n` points drawn uniformly from the kernel domain clipped to
/// `[-bound, bound]` in every coordinate, reproducible from `seed`.
pub fn sample_points(
    kernel: &KernelSpec,
    n: usize,
    seed: u64,
    bound: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(RksError::invalid(format!(
            "sampling bound must be positive, got {bound}"
        )));
    }
    let dim = kernel.input_dim().unwrap_or(1);
    let domain = kernel.domain();
    let (lo, hi) = (domain.lo.max(-bound), domain.hi.min(bound));
    if !(lo < hi) {
        return Err(RksError::invalid("sampling box is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(lo..hi)).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{basis_kernel, closed_form_kernel, Basis, ClosedForm};

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn min_kernel_gram() {
        let k = closed_form_kernel(ClosedForm::Min).unwrap();
        let g = gram(&k, &pts(&[0.2, 0.5, 0.9])).unwrap();
        assert_eq!(
            g.entries.to_rows(),
            vec![
                vec![0.2, 0.2, 0.2],
                vec![0.2, 0.5, 0.5],
                vec![0.2, 0.5, 0.9]
            ]
        );
    }

    #[test]
    fn single_point_and_empty() {
        let k = closed_form_kernel(ClosedForm::Gaussian { sigma: 0.3 }).unwrap();
        let g = gram(&k, &pts(&[1.7])).unwrap();
        assert_eq!(g.entries.to_rows(), vec![vec![1.0]]);
        assert!(gram(&k, &[]).is_err());
        assert!(gram(
            &closed_form_kernel(ClosedForm::Min).unwrap(),
            &pts(&[0.1, 2.0])
        )
        .is_err());
    }

    #[test]
    fn min_kernel_is_positive_on_sample() {
        let k = closed_form_kernel(ClosedForm::Min).unwrap();
        let r = positivity_check(&k, &pts(&[0.2, 0.5, 0.9]), 1e-10, false).unwrap();
        assert!(r.verdict.is_positive());
        // det-based oracle: the 3x3 min Gram is L Lᵀ with increments 0.2, 0.3, 0.4
        assert!(r.verdict.min_eigenvalue() > 0.0);
    }

    #[test]
    fn constant_kernel_is_rank_one_psd() {
        let k = basis_kernel(Basis::Constant, None).unwrap();
        let r = positivity_check(&k, &pts(&[-1.0, 0.0, 3.0, 8.0]), 1e-10, false).unwrap();
        assert!(r.verdict.is_positive());
        assert!(r.verdict.min_eigenvalue().abs() < 1e-14);
    }

    #[test]
    fn negative_diagonal_is_a_violation() {
        let k = closed_form_kernel(ClosedForm::Tanh { a: 1.0, b: -0.5 }).unwrap();
        let r = positivity_check(&k, &pts(&[0.0]), 1e-10, false).unwrap();
        match r.verdict {
            Verdict::Violation {
                min_eigenvalue,
                witness,
                coefficients,
            } => {
                assert!((min_eigenvalue - (-0.5f64).tanh()).abs() < 1e-15);
                assert_eq!(witness, pts(&[0.0]));
                assert_eq!(coefficients.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn asymmetric_kind_requires_flag() {
        use crate::domain::Domain;
        use crate::kernel::{duality_kernel, FeatureFamily};
        use crate::quadrature::build_quadrature;
        let mu = build_quadrature(Domain::unit(), "gauss_legendre", 6, None).unwrap();
        let k = duality_kernel(
            FeatureFamily::IndicatorBelow,
            FeatureFamily::WeightedIndicatorBelow,
            mu,
        )
        .unwrap();
        let p = pts(&[0.2, 0.6]);
        assert!(matches!(
            positivity_check(&k, &p, 1e-10, false),
            Err(RksError::Asymmetric(_))
        ));
        assert!(positivity_check(&k, &p, 1e-10, true).is_ok());
    }
}
