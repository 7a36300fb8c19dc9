//! Cyclic Jacobi eigensolver for real symmetric matrices.

use crate::error::{Result, RksError};
use crate::linalg::Matrix;

/// Largest matrix order accepted by the solver.
pub const MAX_ORDER: usize = 2048;

const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order, with the matching unit eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.rows())
            .map(|i| self.vectors[(i, k)])
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }
}

pub fn symmetric_eigenvalues(matrix: &Matrix) -> Result<Vec<f64>> {
    symmetric_eigen(matrix).map(|e| e.values)
}

pub fn symmetric_eigen(matrix: &Matrix) -> Result<SymmetricEigen> {
    if !matrix.is_square() {
        return Err(RksError::invalid(format!(
            "eigensolver needs a square matrix, got {}x{}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    let n = matrix.rows();
    if n > MAX_ORDER {
        return Err(RksError::invalid(format!(
            "matrix order {n} exceeds {MAX_ORDER}"
        )));
    }
    let scale = matrix.max_abs();
    if !scale.is_finite() {
        return Err(RksError::NonFinite("matrix has non-finite entries".into()));
    }
    let asym = matrix.asymmetry();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(RksError::Asymmetric(format!(
            "max |a_ij - a_ji| = {asym:e} exceeds {SYMMETRY_TOLERANCE:e} relative"
        )));
    }

    let mut a = matrix.symmetrized();
    let mut v = Matrix::identity(n);
    let target = OFF_DIAGONAL_TOLERANCE * a.frobenius_norm();
    let mut sweeps = 0;

    while sweeps < MAX_SWEEPS && off_diagonal_norm(&a) > target {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if off_diagonal_norm(&a) > target {
        return Err(RksError::invalid(format!(
            "Jacobi did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = a[(r, p)];
            let arq = a[(r, q)];
            let new_rp = c * arp - s * arq;
            let new_rq = s * arp + c * arq;
            a[(r, p)] = new_rp;
            a[(p, r)] = new_rp;
            a[(r, q)] = new_rq;
            a[(q, r)] = new_rq;
        }
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Number of eigenvalues below `shift`, from the signs of the pivots of
    /// an LDLᵀ factorization of `A - shift·I` (Sylvester's law of inertia).
    fn count_below(a: &Matrix, shift: f64) -> usize {
        let n = a.rows();
        let mut m = Matrix::from_fn(n, n, |i, j| a[(i, j)] - if i == j { shift } else { 0.0 });
        let mut negatives = 0;
        for k in 0..n {
            let mut d = m[(k, k)];
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                negatives += 1;
            }
            for i in (k + 1)..n {
                let f = m[(i, k)] / d;
                for j in (k + 1)..n {
                    m[(i, j)] -= f * m[(k, j)];
                }
            }
        }
        negatives
    }

    fn bisection_eigenvalues(a: &Matrix) -> Vec<f64> {
        let n = a.rows();
        let bound = (0..n)
            .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1.0;
        (0..n)
            .map(|k| {
                let (mut lo, mut hi) = (-bound, bound);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if count_below(a, mid) > k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn diagonal_and_swap() {
        let d = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(symmetric_eigenvalues(&d).unwrap(), vec![2.0, 3.0]);
        let s = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let vals = symmetric_eigenvalues(&s).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_8x8_matches_inertia_bisection() {
        for seed in 0..5 {
            let a = random_symmetric(8, seed);
            let jacobi = symmetric_eigenvalues(&a).unwrap();
            let oracle = bisection_eigenvalues(&a);
            for (j, o) in jacobi.iter().zip(&oracle) {
                assert!((j - o).abs() < 1e-9, "seed {seed}: {j} vs {o}");
            }
        }
    }

    #[test]
    fn eigen_sum_equals_trace_and_vectors_diagonalize() {
        let a = random_symmetric(24, 42);
        let e = symmetric_eigen(&a).unwrap();
        let sum: f64 = e.values.iter().sum();
        assert!((sum - a.trace()).abs() <= 1e-10 * a.trace().abs().max(1.0));
        for k in [0, 11, 23] {
            let v = e.vector(k);
            let av = a.mul_vec(&v);
            for (x, y) in av.iter().zip(&v) {
                assert!((x - e.values[k] * y).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            symmetric_eigenvalues(&a),
            Err(RksError::Asymmetric(_))
        ));
    }

    #[test]
    fn empty_and_scalar() {
        assert!(symmetric_eigenvalues(&Matrix::zeros(0, 0))
            .unwrap()
            .is_empty());
        assert_eq!(
            symmetric_eigenvalues(&Matrix::from_rows(&[vec![-4.0]]).unwrap()).unwrap(),
            vec![-4.0]
        );
    }
}
