//! Finite kernel expansions `f = Σ α_i K(·, x_i)`.
//!
//! Elements of the completion are only ever represented through such finite
//! expansions. Norms are computed as `αᵀ G α` straight from the Gram matrix,
//! so duplicated centers are harmless.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RksError};
use crate::kernel::{gram, KernelSpec};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RkhsFunctionDoc", into = "RkhsFunctionDoc")]
pub struct RkhsFunction {
    kernel: Arc<KernelSpec>,
    centers: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    gram: OnceLock<Matrix>,
}

impl PartialEq for RkhsFunction {
    fn eq(&self, other: &Self) -> bool {
        self.kernel == other.kernel
            && self.centers == other.centers
            && self.coefficients == other.coefficients
    }
}

impl RkhsFunction {
    pub fn new(
        kernel: Arc<KernelSpec>,
        centers: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(RksError::invalid(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coefficients.len()
            )));
        }
        for c in &centers {
            kernel.check_point(c)?;
        }
        if coefficients.iter().any(|a| !a.is_finite()) {
            return Err(RksError::NonFinite("expansion coefficients".into()));
        }
        Ok(RkhsFunction {
            kernel,
            centers,
            coefficients,
            gram: OnceLock::new(),
        })
    }

    pub fn zero(kernel: Arc<KernelSpec>) -> Self {
        RkhsFunction {
            kernel,
            centers: Vec::new(),
            coefficients: Vec::new(),
            gram: OnceLock::new(),
        }
    }

    /// The kernel section `K(·, x)`.
    pub fn section(kernel: Arc<KernelSpec>, x: Vec<f64>) -> Result<Self> {
        RkhsFunction::new(kernel, vec![x], vec![1.0])
    }

    pub fn kernel(&self) -> &Arc<KernelSpec> {
        &self.kernel
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    fn same_kernel(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.kernel, &other.kernel) || self.kernel == other.kernel
    }

    /// Gram matrix of the centers, computed once.
    pub fn gram(&self) -> Result<&Matrix> {
        if let Some(g) = self.gram.get() {
            return Ok(g);
        }
        let g = if self.centers.is_empty() {
            Matrix::zeros(0, 0)
        } else {
            gram(&self.kernel, &self.centers)?.entries
        };
        Ok(self.gram.get_or_init(|| g))
    }

    /// `f(x) = Σ_i α_i K(x, x_i)`, summed in center order.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.kernel.check_point(x)?;
        let mut s = 0.0;
        for (c, a) in self.centers.iter().zip(&self.coefficients) {
            s += a * self.kernel.eval_unchecked(x, c)?;
        }
        Ok(s)
    }

    /// `⟨f, g⟩ = Σ_i Σ_j α_i β_j K(x_i, y_j)`.
    pub fn inner_product(&self, other: &RkhsFunction) -> Result<f64> {
        if !self.same_kernel(other) {
            return Err(RksError::KernelMismatch);
        }
        if !self.kernel.is_symmetric_kind() {
            return Err(RksError::Asymmetric(format!(
                "inner products need a symmetric kernel, got {}",
                self.kernel.kind_name()
            )));
        }
        let mut total = 0.0;
        for (xi, ai) in self.centers.iter().zip(&self.coefficients) {
            let mut s = 0.0;
            for (yj, bj) in other.centers.iter().zip(&other.coefficients) {
                s += bj * self.kernel.eval_unchecked(xi, yj)?;
            }
            total += ai * s;
        }
        Ok(total)
    }

    /// `‖f‖²_H = αᵀ G α`; may be slightly negative from rounding.
    pub fn norm_squared(&self) -> Result<f64> {
        if !self.kernel.is_symmetric_kind() {
            return Err(RksError::Asymmetric("norms need a symmetric kernel".into()));
        }
        let g = self.gram()?;
        Ok(g.bilinear(&self.coefficients, &self.coefficients))
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.norm_squared()?.max(0.0).sqrt())
    }

    /// `a·f + b·g` as the concatenated expansion (coefficients are not merged).
    pub fn linear_combination(
        a: f64,
        f: &RkhsFunction,
        b: f64,
        g: &RkhsFunction,
    ) -> Result<RkhsFunction> {
        if !f.same_kernel(g) {
            return Err(RksError::KernelMismatch);
        }
        let centers = f.centers.iter().chain(&g.centers).cloned().collect();
        let coefficients = f
            .coefficients
            .iter()
            .map(|c| a * c)
            .chain(g.coefficients.iter().map(|c| b * c))
            .collect();
        RkhsFunction::new(f.kernel.clone(), centers, coefficients)
    }
}

/// `|⟨K(·, x), f⟩ − f(x)|`.
pub fn reproducing_check(f: &RkhsFunction, x: &[f64]) -> Result<f64> {
    let section = RkhsFunction::section(f.kernel.clone(), x.to_vec())?;
    let via_inner = section.inner_product(f)?;
    Ok((via_inner - f.evaluate(x)?).abs())
}

/// Continuity constant of `δ_x`: `|f(x)| ≤ M_x ‖f‖_H` with `M_x = √K(x, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationBound {
    pub x: Vec<f64>,
    pub m_x: f64,
}

impl EvaluationBound {
    /// Whether `|f(x)| ≤ M_x ‖f‖_H + slack`.
    pub fn holds_for(&self, f: &RkhsFunction, slack: f64) -> Result<bool> {
        Ok(f.evaluate(&self.x)?.abs() <= self.m_x * f.norm()? + slack)
    }
}

pub fn evaluation_bound(kernel: &KernelSpec, x: &[f64]) -> Result<EvaluationBound> {
    let kxx = kernel.eval(x, x)?;
    if kxx < 0.0 {
        return Err(RksError::invalid(format!(
            "K(x, x) = {kxx} < 0 at x = {x:?}; the kernel is not positive and δ_x has no bound"
        )));
    }
    Ok(EvaluationBound {
        x: x.to_vec(),
        m_x: kxx.sqrt(),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RkhsFunctionDoc {
    kernel: KernelSpec,
    #[serde(with = "crate::io::points")]
    centers: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
}

impl TryFrom<RkhsFunctionDoc> for RkhsFunction {
    type Error = RksError;

    fn try_from(doc: RkhsFunctionDoc) -> Result<Self> {
        RkhsFunction::new(Arc::new(doc.kernel), doc.centers, doc.coefficients)
    }
}

impl From<RkhsFunction> for RkhsFunctionDoc {
    fn from(f: RkhsFunction) -> Self {
        RkhsFunctionDoc {
            kernel: Arc::unwrap_or_clone(f.kernel),
            centers: f.centers,
            coefficients: f.coefficients,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{closed_form_kernel, ClosedForm};

    fn min_kernel() -> Arc<KernelSpec> {
        Arc::new(closed_form_kernel(ClosedForm::Min).unwrap())
    }

    fn expansion(k: &Arc<KernelSpec>, terms: &[(f64, f64)]) -> RkhsFunction {
        RkhsFunction::new(
            k.clone(),
            terms.iter().map(|t| vec![t.0]).collect(),
            terms.iter().map(|t| t.1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let k = min_kernel();
        assert_eq!(expansion(&k, &[(0.5, 1.0)]).evaluate(&[0.3]).unwrap(), 0.3);
        let zero = expansion(&k, &[(0.2, 0.0), (0.7, 0.0)]);
        assert_eq!(zero.evaluate(&[0.9]).unwrap(), 0.0);
        let f = expansion(&k, &[(0.2, 2.0), (0.8, -1.0)]);
        assert!((f.evaluate(&[0.5]).unwrap() - (-0.1)).abs() < 1e-15);
    }

    #[test]
    fn inner_product_examples() {
        let k = min_kernel();
        let s = expansion(&k, &[(0.5, 1.0)]);
        assert_eq!(s.inner_product(&s).unwrap(), 0.5);
        assert_eq!(
            s.inner_product(&RkhsFunction::zero(k.clone())).unwrap(),
            0.0
        );
        let f = expansion(&k, &[(0.2, 1.0), (0.8, 1.0)]);
        assert!((f.inner_product(&s).unwrap() - 0.7).abs() < 1e-15);
        assert!((f.norm_squared().unwrap() - f.inner_product(&f).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn mismatched_kernels_are_rejected() {
        let f = expansion(&min_kernel(), &[(0.5, 1.0)]);
        let g = RkhsFunction::section(
            Arc::new(closed_form_kernel(ClosedForm::Gaussian { sigma: 1.0 }).unwrap()),
            vec![0.5],
        )
        .unwrap();
        assert!(matches!(f.inner_product(&g), Err(RksError::KernelMismatch)));
    }

    #[test]
    fn reproducing_residual_vanishes() {
        let k = min_kernel();
        let f = expansion(&k, &[(0.1, 0.3), (0.4, -1.2), (0.4, 0.5), (0.95, 2.0)]);
        for x in [0.0, 0.05, 0.4, 0.77, 1.0] {
            assert!(reproducing_check(&f, &[x]).unwrap() <= 1e-15);
        }
        assert_eq!(
            reproducing_check(&RkhsFunction::zero(k), &[0.3]).unwrap(),
            0.0
        );
    }

    #[test]
    fn bounds() {
        let k = min_kernel();
        let b = evaluation_bound(&k, &[0.49]).unwrap();
        assert!((b.m_x - 0.7).abs() < 1e-15);
        let tanh = closed_form_kernel(ClosedForm::Tanh { a: 1.0, b: -1.0 }).unwrap();
        assert!(evaluation_bound(&tanh, &[0.0]).is_err());
        let g = closed_form_kernel(ClosedForm::Gaussian { sigma: 1.0 }).unwrap();
        assert_eq!(evaluation_bound(&g, &[3.3]).unwrap().m_x, 1.0);
    }

    #[test]
    fn duplicate_centers_keep_separate_coefficients() {
        let k = min_kernel();
        let f = expansion(&k, &[(0.5, 1.0), (0.5, -1.0)]);
        assert_eq!(f.len(), 2);
        assert_eq!(f.norm_squared().unwrap(), 0.0);
        assert_eq!(f.evaluate(&[0.7]).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let f = expansion(&min_kernel(), &[(0.25, 1.5), (0.75, -0.5)]);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"centers\":[0.25,0.75]"));
        let back: RkhsFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let bad = s.replace("0.75]", "1.75]");
        assert!(serde_json::from_str::<RkhsFunction>(&bad).is_err());
    }
}
