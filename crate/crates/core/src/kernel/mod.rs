//! Kernel construction and evaluation.
//!
//! A [`KernelSpec`] is immutable once built. Kernels built from a single
//! feature family or a basis are symmetric bit-for-bit: every evaluation
//! path sums in an order that does not depend on the argument order.

mod basis;
mod closed;
mod family;
mod gram;
mod json;

use serde::{Deserialize, Serialize};

pub use basis::Basis;
pub use closed::ClosedForm;
pub use family::{pair, FeatureFamily};
pub use gram::{gram, positivity_check, sample_points, GramMatrix, PositivityReport, Verdict};
pub use json::KernelDoc;

use crate::domain::Domain;
use crate::error::{Result, RksError};
use crate::linalg::dot;
use crate::quadrature::{QuadratureConfig, QuadratureMeasure};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    ClosedForm(ClosedForm),
    /// `K(x, y) = ∫ Γ_x Γ_y dμ`.
    Carleman {
        gamma: FeatureFamily,
        measure: QuadratureMeasure,
    },
    /// `K(x, y) = Σ α_i² e_i(x) e_i(y)`.
    BasisSum {
        basis: Basis,
        weights: Option<Vec<f64>>,
    },
    /// `K(x, y) = ∫ Γ_x Λ_y dμ`; not symmetric in general.
    DualityPair {
        gamma: FeatureFamily,
        lambda: FeatureFamily,
        measure: QuadratureMeasure,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelDoc", into = "KernelDoc")]
pub struct KernelSpec {
    kind: KernelKind,
    domain: Domain,
    label: Option<String>,
}

impl KernelSpec {
    fn build(kind: KernelKind, domain: Domain) -> Result<Self> {
        match &kind {
            KernelKind::ClosedForm(c) => c.validate()?,
            KernelKind::Carleman { gamma, .. } => gamma.validate()?,
            KernelKind::BasisSum { basis, weights } => {
                basis.validate()?;
                if basis.is_empty() {
                    return Err(RksError::invalid("empty basis"));
                }
                if let Some(w) = weights {
                    if w.len() != basis.len() {
                        return Err(RksError::invalid(format!(
                            "{} weights for a basis of {} functions",
                            w.len(),
                            basis.len()
                        )));
                    }
                    if w.iter().any(|v| !v.is_finite()) {
                        return Err(RksError::NonFinite("basis weights".into()));
                    }
                }
            }
            KernelKind::DualityPair { gamma, lambda, .. } => {
                gamma.validate()?;
                lambda.validate()?;
                if gamma.input_dim() != lambda.input_dim() {
                    return Err(RksError::invalid(
                        "Γ and Λ act on inputs of different dimension",
                    ));
                }
            }
        }
        Ok(KernelSpec {
            kind,
            domain,
            label: None,
        })
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Restricts or widens the input domain.
    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Same kernel with its quadrature rebuilt at `resolution`. Only kernels
    /// integrated against a measure have a resolution.
    pub fn with_resolution(&self, resolution: usize) -> Result<Self> {
        let rebuild = |m: &QuadratureMeasure| {
            QuadratureMeasure::new(
                m.domain(),
                QuadratureConfig {
                    resolution,
                    ..*m.config()
                },
            )
        };
        let kind = match &self.kind {
            KernelKind::Carleman { gamma, measure } => KernelKind::Carleman {
                gamma: gamma.clone(),
                measure: rebuild(measure)?,
            },
            KernelKind::DualityPair {
                gamma,
                lambda,
                measure,
            } => KernelKind::DualityPair {
                gamma: gamma.clone(),
                lambda: lambda.clone(),
                measure: rebuild(measure)?,
            },
            _ => {
                return Err(RksError::invalid(format!(
                    "{} kernels have no quadrature resolution",
                    self.kind_name()
                )))
            }
        };
        Ok(KernelSpec {
            kind,
            domain: self.domain,
            label: self.label.clone(),
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            KernelKind::ClosedForm(_) => "closed_form",
            KernelKind::Carleman { .. } => "carleman",
            KernelKind::BasisSum { .. } => "basis_sum",
            KernelKind::DualityPair { .. } => "duality_pair",
        }
    }

    /// Whether the construction guarantees `K(x, y) = K(y, x)`.
    pub fn is_symmetric_kind(&self) -> bool {
        !matches!(self.kind, KernelKind::DualityPair { .. })
    }

    /// Whether the construction guarantees positivity (Gram of feature vectors).
    pub fn is_positive_by_construction(&self) -> bool {
        match &self.kind {
            KernelKind::Carleman { .. } | KernelKind::BasisSum { .. } => true,
            KernelKind::ClosedForm(c) => !matches!(c, ClosedForm::Tanh { .. }),
            KernelKind::DualityPair { .. } => false,
        }
    }

    /// Point dimension the kernel accepts, `None` for any.
    pub fn input_dim(&self) -> Option<usize> {
        match &self.kind {
            KernelKind::ClosedForm(c) => c.input_dim(),
            KernelKind::Carleman { gamma, .. } => gamma.input_dim(),
            KernelKind::BasisSum { basis, .. } => basis.input_dim(),
            KernelKind::DualityPair { gamma, .. } => gamma.input_dim(),
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.is_empty() {
            return Err(RksError::invalid("empty point"));
        }
        if let Some(d) = self.input_dim() {
            if x.len() != d {
                return Err(RksError::DimensionMismatch {
                    expected: d,
                    found: x.len(),
                });
            }
        }
        self.domain.check(x)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if x.len() != y.len() {
            return Err(RksError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        self.eval_unchecked(x, y)
    }

    /// Evaluation without domain checks; callers validate points once.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match &self.kind {
            KernelKind::ClosedForm(c) => Ok(c.eval(x, y)),
            KernelKind::Carleman { gamma, measure } => pair(gamma, x, gamma, y, measure),
            KernelKind::BasisSum { basis, weights } => {
                let (ex, ey) = (basis.values(x), basis.values(y));
                Ok(match weights {
                    None => dot(&ex, &ey),
                    Some(w) => ex
                        .iter()
                        .zip(&ey)
                        .zip(w)
                        .map(|((a, b), w)| w * w * (a * b))
                        .sum(),
                })
            }
            KernelKind::DualityPair {
                gamma,
                lambda,
                measure,
            } => pair(gamma, x, lambda, y, measure),
        }
    }
}

/// `K(x, y) = ⟨Γ_x, Γ_y⟩` over `mu`. The input domain defaults to the
/// measure's domain.
pub fn carleman_kernel(gamma: FeatureFamily, mu: QuadratureMeasure) -> Result<KernelSpec> {
    let domain = mu.domain();
    KernelSpec::build(KernelKind::Carleman { gamma, measure: mu }, domain)
}

/// `K(x, y) = Σ α_i² e_i(x) e_i(y)`, with `α_i = 1` when no weights are given.
pub fn basis_kernel(basis: Basis, weights: Option<Vec<f64>>) -> Result<KernelSpec> {
    let (lo, hi) = basis.natural_domain();
    KernelSpec::build(KernelKind::BasisSum { basis, weights }, Domain { lo, hi })
}

/// `K(x, y) = L(Γ_x, Λ_y) = ∫ Γ_x Λ_y dμ`.
pub fn duality_kernel(
    gamma: FeatureFamily,
    lambda: FeatureFamily,
    mu: QuadratureMeasure,
) -> Result<KernelSpec> {
    let domain = mu.domain();
    KernelSpec::build(
        KernelKind::DualityPair {
            gamma,
            lambda,
            measure: mu,
        },
        domain,
    )
}

/// The min kernel lives on `[0, 1]`; every other formula on the whole space.
pub fn closed_form_kernel(form: ClosedForm) -> Result<KernelSpec> {
    let domain = match form {
        ClosedForm::Min => Domain::unit(),
        _ => Domain::real_line(),
    };
    KernelSpec::build(KernelKind::ClosedForm(form), domain)
}

/// Closed form by name with JSON hyperparameters, e.g. `("gaussian", {"sigma": 1.0})`.
pub fn closed_form_by_name(
    name: &str,
    params: &serde_json::Map<String, serde_json::Value>,
) -> Result<KernelSpec> {
    closed_form_kernel(json::closed_form_from_params(name, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_quadrature, QuadratureConfig, QuadratureRule};

    fn gaussian_carleman(panels: usize) -> KernelSpec {
        let mu = QuadratureMeasure::new(
            Domain::real_line(),
            QuadratureConfig::new(QuadratureRule::GaussLegendreComposite, panels)
                .with_truncation_radius(8.0),
        )
        .unwrap();
        carleman_kernel(FeatureFamily::Gaussian, mu).unwrap()
    }

    #[test]
    fn cameron_martin_carleman_is_min() {
        let mu = build_quadrature(Domain::unit(), "gauss_legendre", 8, None).unwrap();
        let k = carleman_kernel(FeatureFamily::IndicatorBelow, mu).unwrap();
        assert_eq!(k.eval(&[0.3], &[0.7]).unwrap(), 0.3);
        assert_eq!(k.eval(&[0.7], &[0.3]).unwrap(), 0.3);
    }

    #[test]
    fn gaussian_carleman_matches_closed_form_integral() {
        let k = gaussian_carleman(64);
        // √π e^{-(x-y)²/4} / √π
        let v = k.eval(&[0.0], &[2.0]).unwrap();
        assert!((v - (-1f64).exp()).abs() <= 1e-8, "{v}");
        let d = k.eval(&[1.3], &[1.3]).unwrap();
        assert!((d - 1.0).abs() <= 1e-12);
        assert_eq!(
            k.eval(&[0.4], &[-1.1]).unwrap(),
            k.eval(&[-1.1], &[0.4]).unwrap()
        );
    }

    #[test]
    fn affine_basis_gives_polynomial_kernel() {
        let k = basis_kernel(Basis::Affine { dim: 2 }, None).unwrap();
        assert_eq!(k.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 12.0);
        assert!(k.eval(&[1.0], &[3.0]).is_err());
    }

    #[test]
    fn constant_basis_is_one() {
        let k = basis_kernel(Basis::Constant, None).unwrap();
        for (x, y) in [(0.0, 5.0), (-3.0, 2.5)] {
            assert_eq!(k.eval(&[x], &[y]).unwrap(), 1.0);
        }
    }

    #[test]
    fn weighted_basis_and_errors() {
        assert!(basis_kernel(Basis::Trigonometric { terms: 3 }, Some(vec![1.0, 2.0])).is_err());
        let k = basis_kernel(Basis::Trigonometric { terms: 2 }, Some(vec![0.5, 0.25])).unwrap();
        let x = 0.3f64;
        let s1 = 2f64.sqrt() * (std::f64::consts::PI * x).sin();
        let s2 = 2f64.sqrt() * (2.0 * std::f64::consts::PI * x).sin();
        let expected = 0.25 * s1 * s1 + 0.0625 * s2 * s2;
        assert!((k.eval(&[x], &[x]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn duality_kernels() {
        let mu = build_quadrature(Domain::unit(), "gauss_legendre", 8, None).unwrap();
        let k = duality_kernel(
            FeatureFamily::IndicatorBelow,
            FeatureFamily::IndicatorBelow,
            mu.clone(),
        )
        .unwrap();
        assert_eq!(k.eval(&[0.4], &[0.9]).unwrap(), 0.4);
        assert!(!k.is_symmetric_kind());
        let c = carleman_kernel(FeatureFamily::IndicatorBelow, mu.clone()).unwrap();
        for (x, y) in [(0.1, 0.2), (0.9, 0.35), (0.5, 0.5)] {
            assert_eq!(k.eval(&[x], &[y]).unwrap(), c.eval(&[x], &[y]).unwrap());
        }
        let w = duality_kernel(
            FeatureFamily::IndicatorBelow,
            FeatureFamily::WeightedIndicatorBelow,
            mu,
        )
        .unwrap();
        assert!((w.eval(&[1.0], &[1.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_points_are_rejected() {
        let k = closed_form_kernel(ClosedForm::Min).unwrap();
        assert!(matches!(
            k.eval(&[1.5], &[0.2]),
            Err(RksError::OutOfDomain { .. })
        ));
    }
}
