//! Regularized least squares over kernel expansions.
//!
//! Both solvers minimize `C(f(x_1), …, f(x_n), y) + λ Ω(f)` and return the
//! minimizer as an expansion over the training points:
//!
//! * [`fit_krr`]: `C` is the mean squared error and `Ω = ‖f‖²_H` for any
//!   symmetric positive kernel; solved exactly from `(G + nλI) α = y`.
//! * [`fit_pnorm`]: `C` is the sum of squared errors and `Ω = ∫_0^1 |f'|^p`
//!   over the Cameron–Martin space on `[0, 1]`, whose kernel is `min(x, y)`;
//!   solved by accelerated proximal gradient.

mod krr;
mod pnorm;
mod probe;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use krr::fit_krr;
pub use pnorm::{fit_pnorm, prox_power};
pub use probe::{representer_optimality_probe, ProbeReport};

use crate::duality::{lp_power, SobolevFunction};
use crate::error::{Result, RksError};
use crate::kernel::KernelSpec;
use crate::rkhs::RkhsFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    #[serde(with = "crate::io::points")]
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(RksError::invalid("dataset is empty"));
        }
        if xs.len() != ys.len() {
            return Err(RksError::invalid(format!(
                "{} inputs but {} targets",
                xs.len(),
                ys.len()
            )));
        }
        let dim = xs[0].len();
        if dim == 0 {
            return Err(RksError::invalid("inputs have no coordinates"));
        }
        if let Some(x) = xs.iter().find(|x| x.len() != dim) {
            return Err(RksError::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        if xs.iter().flatten().chain(&ys).any(|v| !v.is_finite()) {
            return Err(RksError::NonFinite("dataset values".into()));
        }
        Ok(Dataset { xs, ys })
    }

    pub fn from_scalars(xs: &[f64], ys: &[f64]) -> Result<Self> {
        Dataset::new(xs.iter().map(|&x| vec![x]).collect(), ys.to_vec())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.xs[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Step `1/L` with `L` estimated once by power iteration.
    Fixed,
    /// Start from `1/L` and halve until the quadratic upper bound holds.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_gradient_tolerance")]
    pub gradient_tolerance: f64,
    #[serde(default = "default_step_rule")]
    pub step_rule: StepRule,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_iterations() -> usize {
    50_000
}

fn default_gradient_tolerance() -> f64 {
    1e-8
}

fn default_step_rule() -> StepRule {
    StepRule::Backtracking
}

impl FitConfig {
    pub fn new(lambda: f64) -> Self {
        FitConfig {
            lambda,
            p: None,
            max_iterations: default_max_iterations(),
            gradient_tolerance: default_gradient_tolerance(),
            step_rule: default_step_rule(),
            seed: 0,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(RksError::invalid(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if let Some(p) = self.p {
            if p.is_nan() || p < 1.0 {
                return Err(RksError::invalid(format!(
                    "p = {p} makes the stabilizer non-convex; p must be >= 1"
                )));
            }
        }
        if !(self.gradient_tolerance > 0.0) || self.max_iterations == 0 {
            return Err(RksError::invalid("optimizer settings must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Norm of the minimum-norm subgradient of the objective (p-norm) or the
    /// max-norm residual of the normal equations (KRR).
    pub gradient_norm: f64,
    /// `f(x_i) - y_i`.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Krr,
    Pnorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub solver: SolverKind,
    pub config: FitConfig,
    pub data: Dataset,
    /// Expansion over the training inputs, in data order.
    pub model: RkhsFunction,
    /// Derivative form of the model (p-norm fits only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev: Option<SobolevFunction>,
    pub objective: f64,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    pub fn coefficients(&self) -> &[f64] {
        self.model.coefficients()
    }

    pub fn kernel(&self) -> &Arc<KernelSpec> {
        self.model.kernel()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.model.evaluate(x)
    }

    /// Objective of the expansion over the training inputs with the given
    /// coefficients, evaluated from scratch.
    pub fn objective_for(&self, coefficients: &[f64]) -> Result<f64> {
        let f = RkhsFunction::new(
            self.kernel().clone(),
            self.data.xs.clone(),
            coefficients.to_vec(),
        )?;
        self.objective_of(&f)
    }

    /// Objective of an arbitrary expansion over the model's kernel.
    pub fn objective_of(&self, f: &RkhsFunction) -> Result<f64> {
        match self.solver {
            SolverKind::Krr => krr_objective(&self.data, self.config.lambda, f),
            SolverKind::Pnorm => {
                let s = SobolevFunction::from_rkhs(f)?;
                pnorm_objective(&self.data, self.config.lambda, self.p()?, &s)
            }
        }
    }

    /// Recomputes the reported objective from the stored model.
    pub fn recompute_objective(&self) -> Result<f64> {
        self.objective_of(&self.model)
    }

    /// `Ω` of the fitted model: `‖f‖²_H` or `∫|f'|^p`.
    pub fn stabilizer(&self) -> Result<f64> {
        match self.solver {
            SolverKind::Krr => self.model.norm_squared(),
            SolverKind::Pnorm => Ok(lp_power(
                &SobolevFunction::from_rkhs(&self.model)?,
                self.p()?,
            )),
        }
    }

    fn p(&self) -> Result<f64> {
        self.config
            .p
            .ok_or_else(|| RksError::invalid("p-norm fit without p"))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit result serializes")
    }
}

/// `(1/n) Σ (f(x_i) - y_i)² + λ ‖f‖²_H`.
pub fn krr_objective(data: &Dataset, lambda: f64, f: &RkhsFunction) -> Result<f64> {
    let mut sse = 0.0;
    for (x, y) in data.xs.iter().zip(&data.ys) {
        let r = f.evaluate(x)? - y;
        sse += r * r;
    }
    Ok(sse / data.len() as f64 + lambda * f.norm_squared()?)
}

/// `Σ (f(x_i) - y_i)² + λ ∫_0^1 |f'|^p`.
pub fn pnorm_objective(data: &Dataset, lambda: f64, p: f64, f: &SobolevFunction) -> Result<f64> {
    let mut sse = 0.0;
    for (x, y) in data.xs.iter().zip(&data.ys) {
        let r = f.evaluate(x[0])? - y;
        sse += r * r;
    }
    Ok(sse + lambda * lp_power(f, p))
}
