use std::sync::Arc;

use super::{Dataset, Diagnostics, FitConfig, FitResult, SolverKind};
use crate::error::{Result, RksError};
use crate::kernel::{gram, KernelSpec};
use crate::linalg::{norm_inf, Cholesky};
use crate::rkhs::RkhsFunction;

/// Kernel ridge regression: minimizes `(1/n) Σ (f(x_i) - y_i)² + λ‖f‖²_H`.
///
/// The minimizer is `Σ α_i K(·, x_i)` with `(G + nλI) α = y`, solved by
/// Cholesky. With `λ = 0` the fit interpolates and a rank-deficient Gram is
/// reported as `Singular` rather than regularized behind the caller's back.
pub fn fit_krr(kernel: Arc<KernelSpec>, data: &Dataset, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    if !kernel.is_symmetric_kind() {
        return Err(RksError::Asymmetric(
            "kernel ridge regression needs a symmetric kernel".into(),
        ));
    }
    let n = data.len();
    let g = gram(&kernel, &data.xs)?.entries;
    let mut system = g.clone();
    let shift = n as f64 * config.lambda;
    for i in 0..n {
        system[(i, i)] += shift;
    }
    let chol = Cholesky::factor(&system).map_err(|e| match e {
        RksError::Singular(msg) if config.lambda == 0.0 => RksError::Singular(format!(
            "interpolation with a rank-deficient Gram matrix: {msg}"
        )),
        other => other,
    })?;
    let mut alpha = chol.solve(&data.ys);
    // one step of iterative refinement
    let r: Vec<f64> = data
        .ys
        .iter()
        .zip(system.mul_vec(&alpha))
        .map(|(y, a)| y - a)
        .collect();
    for (a, d) in alpha.iter_mut().zip(chol.solve(&r)) {
        *a += d;
    }

    let normal_residual: Vec<f64> = system
        .mul_vec(&alpha)
        .iter()
        .zip(&data.ys)
        .map(|(a, y)| a - y)
        .collect();
    let fitted = g.mul_vec(&alpha);
    let residuals: Vec<f64> = fitted.iter().zip(&data.ys).map(|(f, y)| f - y).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let objective = sse / n as f64 + config.lambda * g.bilinear(&alpha, &alpha);

    let model = RkhsFunction::new(kernel, data.xs.clone(), alpha)?;
    Ok(FitResult {
        solver: SolverKind::Krr,
        config: *config,
        data: data.clone(),
        model,
        sobolev: None,
        objective,
        diagnostics: Diagnostics {
            iterations: 1,
            gradient_norm: norm_inf(&normal_residual),
            residuals,
            converged: true,
        },
    })
}
