#![allow(clippy::needless_range_loop)]

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Minimizes `Σ (f(x_i) - y_i)² + λ ∫|f'|^p` over `f'` piecewise constant on
/// `cells` uniform cells by plain gradient descent. Inputs must sit on cell
/// boundaries.
pub fn grid_oracle(
    xs: &[f64],
    ys: &[f64],
    lambda: f64,
    p: f64,
    cells: usize,
    iterations: usize,
) -> f64 {
    let h = 1.0 / cells as f64;
    let idx: Vec<usize> = xs
        .iter()
        .map(|x| (x * cells as f64).round() as usize)
        .collect();
    let objective = |d: &[f64]| {
        let mut prefix = vec![0.0; cells + 1];
        for j in 0..cells {
            prefix[j + 1] = prefix[j] + h * d[j];
        }
        let sse: f64 = idx
            .iter()
            .zip(ys)
            .map(|(&k, y)| (prefix[k] - y).powi(2))
            .sum();
        sse + lambda * h * d.iter().map(|v| v.abs().powf(p)).sum::<f64>()
    };
    // Lipschitz constant of the data term: 2‖A‖² ≤ 2 Σ_i ‖A_i‖².
    let lip: f64 = 2.0 * idx.iter().map(|&k| k as f64 * h * h).sum::<f64>();
    let step = 1.0 / lip;
    let mut d = vec![0.0; cells];
    let mut best = objective(&d);
    for _ in 0..iterations {
        let mut prefix = vec![0.0; cells + 1];
        for j in 0..cells {
            prefix[j + 1] = prefix[j] + h * d[j];
        }
        let mut weight = vec![0.0; cells + 1];
        for (&k, y) in idx.iter().zip(ys) {
            weight[k] += 2.0 * (prefix[k] - y);
        }
        // suffix sums: residual weight of every data point to the right of cell j
        let mut acc = 0.0;
        let mut grad = vec![0.0; cells];
        for j in (0..cells).rev() {
            acc += weight[j + 1];
            grad[j] = h * acc + lambda * h * p * d[j].abs().powf(p - 1.0) * d[j].signum();
        }
        for j in 0..cells {
            d[j] -= step * grad[j];
        }
        best = best.min(objective(&d));
    }
    best
}
