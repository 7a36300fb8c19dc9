use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pnorm_objective, FitResult, SolverKind};
use crate::duality::{lp_power, SobolevFunction};
use crate::eigen::symmetric_eigen;
use crate::error::{Result, RksError};
use crate::rkhs::RkhsFunction;

const STEPS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub trials: usize,
    /// Largest objective decrease over all directions (0 if none decreased).
    pub max_improvement: f64,
    pub max_improvement_inside: f64,
    pub max_improvement_outside: f64,
    /// Smallest change of `Ω` along directions vanishing at every `x_i`.
    pub min_stabilizer_change_outside: f64,
    pub outside_stabilizer_nondecreasing: bool,
}

/// Perturbs a fit and reports the best objective decrease found.
///
/// Even trials move the coefficients inside the span of `K(·, x_i)`; odd
/// trials add a direction vanishing at every training input, so only `Ω`
/// can change along it. Each direction is tried with both signs at steps
/// `1e-2 … 1e-5`.
pub fn representer_optimality_probe(
    result: &FitResult,
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if !result.diagnostics.converged {
        return Err(RksError::invalid("probe needs a converged fit"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = result.recompute_objective()?;
    let base_omega = result.stabilizer()?;
    let outside = OutsideDirections::new(result)?;

    let mut report = ProbeReport {
        trials,
        max_improvement: 0.0,
        max_improvement_inside: 0.0,
        max_improvement_outside: 0.0,
        min_stabilizer_change_outside: f64::INFINITY,
        outside_stabilizer_nondecreasing: true,
    };
    let alpha = result.coefficients();

    for trial in 0..trials {
        if trial % 2 == 0 {
            let mut d: Vec<f64> = (0..alpha.len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let norm = d
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE);
            d.iter_mut().for_each(|v| *v /= norm);
            for eps in STEPS.iter().flat_map(|&e| [e, -e]) {
                let moved: Vec<f64> = alpha.iter().zip(&d).map(|(a, v)| a + eps * v).collect();
                let gain = base - result.objective_for(&moved)?;
                report.max_improvement_inside = report.max_improvement_inside.max(gain);
            }
        } else {
            let Some(direction) = outside.sample(result, &mut rng)? else {
                continue;
            };
            for eps in STEPS.iter().flat_map(|&e| [e, -e]) {
                let (objective, omega) = direction.evaluate(result, eps)?;
                report.max_improvement_outside =
                    report.max_improvement_outside.max(base - objective);
                let change = omega - base_omega;
                report.min_stabilizer_change_outside =
                    report.min_stabilizer_change_outside.min(change);
                if change < -1e-12 * base_omega.abs().max(1.0) {
                    report.outside_stabilizer_nondecreasing = false;
                }
            }
        }
    }
    report.max_improvement = report
        .max_improvement_inside
        .max(report.max_improvement_outside);
    if !report.min_stabilizer_change_outside.is_finite() {
        report.min_stabilizer_change_outside = 0.0;
    }
    Ok(report)
}

enum Direction {
    Kernel(RkhsFunction),
    Sobolev(SobolevFunction),
}

impl Direction {
    /// Objective and stabilizer of `f + eps·h`.
    fn evaluate(&self, result: &FitResult, eps: f64) -> Result<(f64, f64)> {
        match self {
            Direction::Kernel(h) => {
                let f = RkhsFunction::linear_combination(1.0, &result.model, eps, h)?;
                Ok((result.objective_of(&f)?, f.norm_squared()?))
            }
            Direction::Sobolev(h) => {
                let base = result
                    .sobolev
                    .clone()
                    .map_or_else(|| SobolevFunction::from_rkhs(&result.model), Ok)?;
                let f = SobolevFunction::combine(1.0, &base, eps, h);
                let p = result.config.p.unwrap_or(2.0);
                Ok((
                    pnorm_objective(&result.data, result.config.lambda, p, &f)?,
                    lp_power(&f, p),
                ))
            }
        }
    }
}

enum OutsideDirections {
    /// `K(·, z) − Σ β_i K(·, x_i)` with `β = G⁺ k_z`.
    Kernel {
        pinv: Vec<Vec<f64>>,
        bounds: Vec<(f64, f64)>,
    },
    /// Hats between consecutive knots and a ramp past the last one.
    Sobolev { knots: Vec<f64> },
}

impl OutsideDirections {
    fn new(result: &FitResult) -> Result<Self> {
        match result.solver {
            SolverKind::Pnorm => {
                let mut knots: Vec<f64> = vec![0.0];
                knots.extend(result.data.xs.iter().map(|x| x[0]));
                knots.sort_by(f64::total_cmp);
                knots.dedup();
                Ok(OutsideDirections::Sobolev { knots })
            }
            SolverKind::Krr => {
                let model = &result.model;
                let eig = symmetric_eigen(model.gram()?)?;
                let n = eig.values.len();
                let top = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let cutoff = 1e-12 * top.max(f64::MIN_POSITIVE) * n as f64;
                let mut pinv = vec![vec![0.0; n]; n];
                for (k, &value) in eig.values.iter().enumerate() {
                    if value <= cutoff {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            pinv[i][j] += eig.vectors[(i, k)] * eig.vectors[(j, k)] / value;
                        }
                    }
                }
                let domain = model.kernel().domain();
                let dim = result.data.dim();
                let bounds = (0..dim)
                    .map(|c| {
                        let (lo, hi) = result
                            .data
                            .xs
                            .iter()
                            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
                                (a.min(x[c]), b.max(x[c]))
                            });
                        ((lo - 1.0).max(domain.lo), (hi + 1.0).min(domain.hi))
                    })
                    .collect();
                Ok(OutsideDirections::Kernel { pinv, bounds })
            }
        }
    }

    fn sample(&self, result: &FitResult, rng: &mut ChaCha8Rng) -> Result<Option<Direction>> {
        match self {
            OutsideDirections::Sobolev { knots } => {
                let last = *knots.last().unwrap();
                let gaps = knots.len() - 1 + usize::from(last < 1.0);
                let k = rng.random_range(0..gaps);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let h = if k + 1 < knots.len() {
                    let (a, b) = (knots[k], knots[k + 1]);
                    let u = rng.random::<f64>();
                    let v = rng.random::<f64>();
                    let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                    let (l, r) = (a + lo * (b - a), a + hi * (b - a));
                    if !(l < r) {
                        return Ok(None);
                    }
                    SobolevFunction::hat(l, r)?
                } else {
                    SobolevFunction::ramp(last + rng.random::<f64>() * (1.0 - last) * 0.5)?
                };
                Ok(Some(Direction::Sobolev(h.scaled(sign))))
            }
            OutsideDirections::Kernel { pinv, bounds } => {
                let z: Vec<f64> = bounds
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect();
                let kernel = result.kernel();
                let xs = &result.data.xs;
                let kz = xs
                    .iter()
                    .map(|x| kernel.eval(x, &z))
                    .collect::<Result<Vec<_>>>()?;
                let beta: Vec<f64> = pinv
                    .iter()
                    .map(|row| row.iter().zip(&kz).map(|(a, b)| a * b).sum())
                    .collect();
                let mut centers = vec![z];
                centers.extend(xs.iter().cloned());
                let mut coefficients = vec![1.0];
                coefficients.extend(beta.iter().map(|b| -b));
                let h = RkhsFunction::new(kernel.clone(), centers, coefficients)?;
                let norm = h.norm()?;
                if !(norm > 1e-8) {
                    return Ok(None);
                }
                let scaled = RkhsFunction::new(
                    kernel.clone(),
                    h.centers().to_vec(),
                    h.coefficients().iter().map(|c| c / norm).collect(),
                )?;
                Ok(Some(Direction::Kernel(scaled)))
            }
        }
    }
}
