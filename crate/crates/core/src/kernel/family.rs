//! Feature families `x ↦ Γ_x` and their pairing `∫ Γ_x Λ_y dμ`.

use serde::{Deserialize, Serialize};

use super::basis::Basis;
use crate::error::{Result, RksError};
use crate::linalg::dot;
use crate::quadrature::QuadratureMeasure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureFamily {
    /// `Γ_x(u) = 1_{u ≤ x}`; with Lebesgue measure on `[0, 1]` this gives
    /// `min(x, y)`.
    IndicatorBelow,
    /// `Γ_x(u) = u · 1_{u ≤ x}`.
    WeightedIndicatorBelow,
    /// `Γ_x(u) = π^{-1/4} exp(-(x - u)² / 2)`, unit norm in `L²(R)`.
    Gaussian,
    /// `Γ_x(u) = Σ_j h_j(x) e_j(u)` with `h` a basis on the input set and `e`
    /// a basis of `L²(G)`, both truncated to the same length.
    Expansion { point_basis: Basis, l2_basis: Basis },
    /// `Γ_x` given by its coefficient vector `(h_j(x))_j` over an abstract
    /// orthonormal basis; pairings are plain dot products.
    Coefficients { basis: Basis },
}

impl FeatureFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            FeatureFamily::Expansion {
                point_basis,
                l2_basis,
            } => {
                point_basis.validate()?;
                l2_basis.validate()?;
                if l2_basis.input_dim().is_some_and(|d| d != 1) {
                    return Err(RksError::invalid("L² basis must act on a scalar variable"));
                }
                if point_basis.len() != l2_basis.len() {
                    return Err(RksError::invalid(format!(
                        "expansion bases differ in length ({} vs {})",
                        point_basis.len(),
                        l2_basis.len()
                    )));
                }
                Ok(())
            }
            FeatureFamily::Coefficients { basis } => basis.validate(),
            _ => Ok(()),
        }
    }

    pub fn input_dim(&self) -> Option<usize> {
        match self {
            FeatureFamily::IndicatorBelow
            | FeatureFamily::WeightedIndicatorBelow
            | FeatureFamily::Gaussian => Some(1),
            FeatureFamily::Expansion { point_basis, .. } => point_basis.input_dim(),
            FeatureFamily::Coefficients { basis } => basis.input_dim(),
        }
    }

    fn is_coefficient_form(&self) -> bool {
        matches!(self, FeatureFamily::Coefficients { .. })
    }

    /// Location in `u` where `Γ_x` jumps, if any.
    fn breakpoint(&self, x: &[f64]) -> Option<f64> {
        match self {
            FeatureFamily::IndicatorBelow | FeatureFamily::WeightedIndicatorBelow => Some(x[0]),
            _ => None,
        }
    }

    /// Pointwise value `Γ_x(u)`. Coefficient-form families have none.
    pub fn value(&self, x: &[f64], u: f64) -> f64 {
        match self {
            FeatureFamily::IndicatorBelow => {
                if u <= x[0] {
                    1.0
                } else {
                    0.0
                }
            }
            FeatureFamily::WeightedIndicatorBelow => {
                if u <= x[0] {
                    u
                } else {
                    0.0
                }
            }
            FeatureFamily::Gaussian => {
                let d = x[0] - u;
                std::f64::consts::PI.powf(-0.25) * (-0.5 * d * d).exp()
            }
            FeatureFamily::Expansion {
                point_basis,
                l2_basis,
            } => dot(&point_basis.values(x), &l2_basis.values(&[u])),
            FeatureFamily::Coefficients { .. } => f64::NAN,
        }
    }

    pub fn coefficients(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            FeatureFamily::Coefficients { basis } => Some(basis.values(x)),
            _ => None,
        }
    }
}

/// `∫ Γ_x(u) Λ_y(u) dμ(u)`.
///
/// Indicator pairs are integrated exactly by segment arithmetic; families
/// with jumps are integrated piecewise, applying the measure's rule between
/// consecutive breakpoints; smooth families use the measure's nodes directly,
/// centered on `(x + y) / 2` when the measure is. Each branch treats `(x, y)`
/// and `(y, x)` identically, so `Γ = Λ` yields an exactly symmetric kernel.
pub fn pair(
    gamma: &FeatureFamily,
    x: &[f64],
    lambda: &FeatureFamily,
    y: &[f64],
    measure: &QuadratureMeasure,
) -> Result<f64> {
    let value = match (gamma.is_coefficient_form(), lambda.is_coefficient_form()) {
        (true, true) => {
            let a = gamma.coefficients(x).unwrap_or_default();
            let b = lambda.coefficients(y).unwrap_or_default();
            if a.len() != b.len() {
                return Err(RksError::invalid(format!(
                    "coefficient families differ in length ({} vs {})",
                    a.len(),
                    b.len()
                )));
            }
            dot(&a, &b)
        }
        (false, false) => pair_pointwise(gamma, x, lambda, y, measure),
        _ => {
            return Err(RksError::invalid(
                "cannot pair a coefficient-form family with a pointwise family",
            ))
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(RksError::NonFinite(format!(
            "pairing at x={x:?}, y={y:?} is not finite; the family is not integrable on this domain"
        )))
    }
}

fn pair_pointwise(
    gamma: &FeatureFamily,
    x: &[f64],
    lambda: &FeatureFamily,
    y: &[f64],
    measure: &QuadratureMeasure,
) -> f64 {
    let center = 0.5 * (x[0] + y[0]);
    let (lo, hi) = measure.interval(center);

    if matches!(gamma, FeatureFamily::IndicatorBelow)
        && matches!(lambda, FeatureFamily::IndicatorBelow)
    {
        let top = x[0].min(y[0]).clamp(lo, hi);
        return top - lo;
    }

    let mut cuts: Vec<f64> = [gamma.breakpoint(x), lambda.breakpoint(y)]
        .into_iter()
        .flatten()
        .filter(|&b| b > lo && b < hi)
        .collect();
    if gamma.breakpoint(x).is_none() && lambda.breakpoint(y).is_none() {
        return measure.integrate(center, |u| gamma.value(x, u) * lambda.value(y, u));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    let mut a = lo;
    for b in cuts.into_iter().chain(std::iter::once(hi)) {
        // evaluate at interior nodes only, the value at a jump is irrelevant
        total += measure.integrate_on(a, b, |u| gamma.value(x, u) * lambda.value(y, u));
        a = b;
    }
    total
}
