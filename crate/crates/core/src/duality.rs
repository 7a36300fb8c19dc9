//! The `(H_p, H_q)` Cameron–Martin evaluation duality on `[0, 1]`.
//!
//! Functions vanish at 0 and are stored through their derivative, a
//! piecewise-constant function: `f(t) = ∫_0^t f'(s) ds`. Norms are
//! `‖f‖_{H_p} = ‖f'‖_{L^p}` and the duality map is `L(f, g) = ∫ f' g'`, so
//! every quantity here is exact segment arithmetic. The kernel of the
//! pairing is `min(x, y)`, and for `p = 2` the construction collapses onto
//! the ordinary Hilbert space with that kernel.
//!
//! The abstract subduality kernel (a map from the dual of `R^X` into `R^X`)
//! is represented only through its two-variable function `K`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Result, RksError};
use crate::kernel::{
    closed_form_kernel, duality_kernel, ClosedForm, FeatureFamily, KernelKind, KernelSpec,
};
use crate::linalg::Matrix;
use crate::quadrature::{QuadratureConfig, QuadratureMeasure, QuadratureRule};
use crate::rkhs::RkhsFunction;

/// `f` on `[0, 1]` with `f(0) = 0`, given by `f' = slopes[k]` on
/// `[breakpoints[k], breakpoints[k + 1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SobolevDoc", into = "SobolevDoc")]
pub struct SobolevFunction {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SobolevDoc {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

impl TryFrom<SobolevDoc> for SobolevFunction {
    type Error = RksError;

    fn try_from(doc: SobolevDoc) -> Result<Self> {
        SobolevFunction::new(doc.breakpoints, doc.slopes)
    }
}

impl From<SobolevFunction> for SobolevDoc {
    fn from(f: SobolevFunction) -> Self {
        SobolevDoc {
            breakpoints: f.breakpoints,
            slopes: f.slopes,
        }
    }
}

impl SobolevFunction {
    /// Breakpoints must run strictly upward from 0 to 1, with one slope per
    /// segment.
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != slopes.len() + 1 || slopes.is_empty() {
            return Err(RksError::invalid(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                slopes.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(RksError::invalid(
                "breakpoints must start at 0 and end at 1",
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(RksError::invalid("breakpoints must be strictly increasing"));
        }
        if slopes.iter().any(|s| !s.is_finite()) {
            return Err(RksError::NonFinite("slopes".into()));
        }
        Ok(SobolevFunction {
            breakpoints,
            slopes,
        })
    }

    pub fn zero() -> Self {
        SobolevFunction {
            breakpoints: vec![0.0, 1.0],
            slopes: vec![0.0],
        }
    }

    /// `min(x, ·)`, whose derivative is `1_{[0, x]}`.
    pub fn section(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(RksError::OutOfDomain {
                point: vec![x],
                lo: 0.0,
                hi: 1.0,
            });
        }
        if x == 0.0 {
            return Ok(SobolevFunction::zero());
        }
        if x == 1.0 {
            return SobolevFunction::new(vec![0.0, 1.0], vec![1.0]);
        }
        SobolevFunction::new(vec![0.0, x, 1.0], vec![1.0, 0.0])
    }

    /// Tent of unit slope rising on `[a, (a+b)/2]` and falling back to 0 at `b`.
    pub fn hat(a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(RksError::invalid(format!(
                "hat support [{a}, {b}] must lie in [0, 1]"
            )));
        }
        let m = 0.5 * (a + b);
        let mut bp = vec![0.0];
        let mut s = Vec::new();
        if a > 0.0 {
            bp.push(a);
            s.push(0.0);
        }
        bp.push(m);
        s.push(1.0);
        bp.push(b);
        s.push(-1.0);
        if b < 1.0 {
            bp.push(1.0);
            s.push(0.0);
        }
        SobolevFunction::new(bp, s)
    }

    /// `(t - a)_+`, zero on `[0, a]`.
    pub fn ramp(a: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(RksError::invalid(format!(
                "ramp start {a} must lie in [0, 1)"
            )));
        }
        if a == 0.0 {
            return SobolevFunction::new(vec![0.0, 1.0], vec![1.0]);
        }
        SobolevFunction::new(vec![0.0, a, 1.0], vec![0.0, 1.0])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// `(left, right, slope)` for every segment.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.slopes)
            .map(|(w, &s)| (w[0], w[1], s))
    }

    /// `f(x) = Σ_k slope_k · |[b_k, b_{k+1}] ∩ [0, x]|`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(RksError::OutOfDomain {
                point: vec![x],
                lo: 0.0,
                hi: 1.0,
            });
        }
        let mut s = 0.0;
        for (a, b, c) in self.segments() {
            if a >= x {
                break;
            }
            s += c * (b.min(x) - a);
        }
        Ok(s)
    }

    /// Derivative value on the segment containing `t` (right-continuous).
    pub fn derivative_at(&self, t: f64) -> f64 {
        let k = self.breakpoints[1..].partition_point(|&b| b <= t);
        self.slopes[k.min(self.slopes.len() - 1)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        SobolevFunction {
            breakpoints: self.breakpoints.clone(),
            slopes: self.slopes.iter().map(|s| c * s).collect(),
        }
    }

    /// Common refinement of both breakpoint sets with both derivatives.
    fn merged<'a>(&'a self, other: &'a SobolevFunction) -> Vec<(f64, f64, f64, f64)> {
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .copied()
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            while self.breakpoints[i + 1] <= w[0] {
                i += 1;
            }
            while other.breakpoints[j + 1] <= w[0] {
                j += 1;
            }
            out.push((w[0], w[1], self.slopes[i], other.slopes[j]));
        }
        out
    }

    /// `a·f + b·g` on the merged breakpoints.
    pub fn combine(a: f64, f: &SobolevFunction, b: f64, g: &SobolevFunction) -> SobolevFunction {
        let merged = f.merged(g);
        let mut breakpoints = vec![0.0];
        let mut slopes = Vec::with_capacity(merged.len());
        for (_, hi, fs, gs) in merged {
            breakpoints.push(hi);
            slopes.push(a * fs + b * gs);
        }
        SobolevFunction {
            breakpoints,
            slopes,
        }
    }

    /// Converts an expansion over the min kernel. Centers at 0 contribute
    /// nothing; on `(t_{k-1}, t_k)` the derivative is `Σ_{x_i ≥ t_k} α_i`.
    pub fn from_rkhs(f: &RkhsFunction) -> Result<Self> {
        if !is_min_kernel(f.kernel()) {
            return Err(RksError::invalid(
                "interconversion needs the min kernel on [0, 1]",
            ));
        }
        let mut terms: Vec<(f64, f64)> = f
            .centers()
            .iter()
            .zip(f.coefficients())
            .filter(|(c, _)| c[0] > 0.0)
            .map(|(c, &a)| (c[0], a))
            .collect();
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));

        // distinct centers with the summed coefficient of each
        let mut knots: Vec<(f64, f64)> = Vec::new();
        for (c, a) in terms {
            match knots.last_mut() {
                Some(last) if last.0 == c => last.1 += a,
                _ => knots.push((c, a)),
            }
        }

        let mut suffix = vec![0.0; knots.len()];
        let mut acc = 0.0;
        for (k, knot) in knots.iter().enumerate().rev() {
            acc += knot.1;
            suffix[k] = acc;
        }
        let mut breakpoints = vec![0.0];
        breakpoints.extend(knots.iter().map(|k| k.0));
        let mut slopes = suffix;
        if *breakpoints.last().unwrap() < 1.0 {
            breakpoints.push(1.0);
            slopes.push(0.0);
        }
        SobolevFunction::new(breakpoints, slopes)
    }

    /// The expansion `Σ_k α_k min(b_k, ·)` over the breakpoints, with `α_k`
    /// the downward jump of the derivative at `b_k`.
    pub fn to_rkhs(&self, kernel: Arc<KernelSpec>) -> Result<RkhsFunction> {
        if !is_min_kernel(&kernel) {
            return Err(RksError::invalid(
                "interconversion needs the min kernel on [0, 1]",
            ));
        }
        let m = self.slopes.len();
        let centers = self.breakpoints[1..].iter().map(|&b| vec![b]).collect();
        let coefficients = (0..m)
            .map(|k| self.slopes[k] - if k + 1 < m { self.slopes[k + 1] } else { 0.0 })
            .collect();
        RkhsFunction::new(kernel, centers, coefficients)
    }
}

/// Whether `kernel` is `min(x, y)` on `[0, 1]`, whichever recipe built it.
pub fn is_min_kernel(kernel: &KernelSpec) -> bool {
    let on_unit = kernel.domain() == Domain::unit();
    let unit_measure = |m: &QuadratureMeasure| m.domain() == Domain::unit();
    on_unit
        && match kernel.kind() {
            KernelKind::ClosedForm(ClosedForm::Min) => true,
            KernelKind::Carleman {
                gamma: FeatureFamily::IndicatorBelow,
                measure,
            } => unit_measure(measure),
            KernelKind::DualityPair {
                gamma: FeatureFamily::IndicatorBelow,
                lambda: FeatureFamily::IndicatorBelow,
                measure,
            } => unit_measure(measure),
            _ => false,
        }
}

/// Min kernel on `[0, 1]` as a shared reference.
pub fn min_kernel() -> Arc<KernelSpec> {
    Arc::new(closed_form_kernel(ClosedForm::Min).expect("min kernel is valid"))
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(RksError::invalid(format!(
            "norm exponent must be >= 1, got {p}"
        )));
    }
    Ok(())
}

/// `q` with `1/p + 1/q = 1`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}

/// `‖f‖_{H_p} = (Σ_k |c_k|^p Δ_k)^{1/p}`, or `max_k |c_k|` for `p = ∞`.
pub fn lp_norm(f: &SobolevFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(f.slopes.iter().fold(0.0, |m, s| m.max(s.abs())));
    }
    Ok(lp_power(f, p).powf(1.0 / p))
}

/// `∫ |f'|^p = Σ_k |c_k|^p Δ_k` for finite `p`.
pub fn lp_power(f: &SobolevFunction, p: f64) -> f64 {
    f.segments()
        .map(|(a, b, c)| c.abs().powf(p) * (b - a))
        .sum()
}

/// `L(f, g) = ∫_0^1 f' g'`.
pub fn duality_pairing(f: &SobolevFunction, g: &SobolevFunction) -> f64 {
    f.merged(g)
        .into_iter()
        .map(|(a, b, fs, gs)| fs * gs * (b - a))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderBound {
    pub value: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// `|f(x)| = |∫_0^x f'| ≤ ‖1_{[0,x]}‖_q ‖f'‖_p = x^{1/q} ‖f‖_{H_p}`.
pub fn holder_evaluation_bound(f: &SobolevFunction, x: f64, p: f64) -> Result<HolderBound> {
    let q = conjugate_exponent(p)?;
    let value = f.evaluate(x)?;
    let weight = if q.is_infinite() {
        1.0
    } else {
        x.powf(1.0 / q)
    };
    let bound = weight * lp_norm(f, p)?;
    Ok(HolderBound {
        value,
        bound,
        satisfied: value.abs() <= bound + 1e-12,
    })
}

/// Two families put in duality through `μ`, with norm exponent `p` on the
/// first space and its conjugate on the second.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdualitySpec {
    pub gamma: FeatureFamily,
    pub lambda: FeatureFamily,
    pub mu: QuadratureMeasure,
    pub p: f64,
    pub kernel: KernelSpec,
}

impl SubdualitySpec {
    pub fn new(
        gamma: FeatureFamily,
        lambda: FeatureFamily,
        mu: QuadratureMeasure,
        p: f64,
    ) -> Result<Self> {
        check_exponent(p)?;
        let kernel = duality_kernel(gamma.clone(), lambda.clone(), mu.clone())?;
        Ok(SubdualitySpec {
            gamma,
            lambda,
            mu,
            p,
            kernel,
        })
    }

    pub fn with_exponent(mut self, p: f64) -> Result<Self> {
        check_exponent(p)?;
        self.p = p;
        Ok(self)
    }

    pub fn conjugate(&self) -> f64 {
        conjugate_exponent(self.p).expect("exponent validated on construction")
    }

    /// `L(K(x_i, ·), K(·, x_j))` over the centers: the kernel Gram matrix.
    pub fn pairing_gram(&self, centers: &[f64]) -> Result<Matrix> {
        let points: Vec<Vec<f64>> = centers.iter().map(|&c| vec![c]).collect();
        Ok(crate::kernel::gram(&self.kernel, &points)?.entries)
    }

    /// Whether the pairing separates the spans of the given sections, i.e.
    /// the pairing Gram has full numerical rank.
    pub fn separates(&self, centers: &[f64]) -> Result<bool> {
        let g = self.pairing_gram(centers)?;
        let values = crate::eigen::symmetric_eigenvalues(&g.symmetrized())?;
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(values
            .iter()
            .all(|v| v.abs() > 1e-12 * scale.max(1.0) * centers.len() as f64))
    }
}

/// `Γ_x = Λ_x = 1_{[0, x]}` on `[0, 1]` with Lebesgue measure and `p = 1`,
/// i.e. the `(H_1, H_∞)` pair. Its kernel is `min(x, y)`, integrated exactly.
pub fn cameron_martin_subduality() -> SubdualitySpec {
    let mu = QuadratureMeasure::new(
        Domain::unit(),
        QuadratureConfig::new(QuadratureRule::GaussLegendre, 8),
    )
    .expect("unit quadrature is valid");
    SubdualitySpec::new(
        FeatureFamily::IndicatorBelow,
        FeatureFamily::IndicatorBelow,
        mu,
        1.0,
    )
    .expect("Cameron–Martin pair is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subduality_kernel_is_min() {
        let s = cameron_martin_subduality();
        assert_eq!(s.kernel.eval(&[0.3], &[0.7]).unwrap(), 0.3);
        for y in [0.0, 0.2, 1.0] {
            assert_eq!(s.kernel.eval(&[0.0], &[y]).unwrap(), 0.0);
        }
        assert_eq!(s.conjugate(), f64::INFINITY);
        assert!(s.separates(&[0.1, 0.4, 0.9]).unwrap());
        assert!(!s.separates(&[0.1, 0.4, 0.4]).unwrap());
        assert!(is_min_kernel(&s.kernel));
    }

    #[test]
    fn norms() {
        let f = SobolevFunction::section(0.5).unwrap();
        assert_eq!(lp_norm(&f, 1.0).unwrap(), 0.5);
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 1.0);
        let g = SobolevFunction::combine(
            2.0,
            &SobolevFunction::section(0.25).unwrap(),
            -1.0,
            &SobolevFunction::section(0.75).unwrap(),
        );
        assert!((lp_norm(&g, 2.0).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(lp_norm(&g, 0.5).is_err());
    }

    #[test]
    fn pairings() {
        let f = SobolevFunction::section(0.5).unwrap();
        assert_eq!(duality_pairing(&f, &f), 0.5);
        assert_eq!(duality_pairing(&f, &SobolevFunction::zero()), 0.0);
        let a = SobolevFunction::section(0.2).unwrap();
        let b = SobolevFunction::section(0.8).unwrap();
        assert_eq!(duality_pairing(&a, &b), 0.2);
    }

    #[test]
    fn holder_examples() {
        let f = SobolevFunction::section(0.5).unwrap();
        let h = holder_evaluation_bound(&f, 0.3, f64::INFINITY).unwrap();
        assert_eq!(h.value, 0.3);
        assert!((h.bound - 0.3).abs() < 1e-16 && h.satisfied);
        let h1 = holder_evaluation_bound(&f, 0.8, 1.0).unwrap();
        assert_eq!(h1.bound, 0.5);
        assert!(h1.satisfied);
        let z = holder_evaluation_bound(&SobolevFunction::zero(), 0.6, 1.5).unwrap();
        assert_eq!(z.bound, 0.0);
        assert!(z.satisfied);
        assert!(holder_evaluation_bound(&f, 0.3, 0.9).is_err());
    }

    #[test]
    fn conversions() {
        let k = min_kernel();
        let f = RkhsFunction::new(
            k.clone(),
            vec![vec![0.7], vec![0.2], vec![0.7], vec![0.0]],
            vec![1.0, -2.0, 0.5, 4.0],
        )
        .unwrap();
        let s = SobolevFunction::from_rkhs(&f).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.2, 0.7, 1.0]);
        assert_eq!(s.slopes(), &[-0.5, 1.5, 0.0]);
        let back = s.to_rkhs(k).unwrap();
        for x in [0.0, 0.1, 0.2, 0.45, 0.7, 0.99, 1.0] {
            let (a, b, c) = (
                f.evaluate(&[x]).unwrap(),
                s.evaluate(x).unwrap(),
                back.evaluate(&[x]).unwrap(),
            );
            assert!(
                (a - b).abs() < 1e-15 && (a - c).abs() < 1e-15,
                "{x}: {a} {b} {c}"
            );
        }
    }

    #[test]
    fn hat_and_ramp_vanish_outside_support() {
        let h = SobolevFunction::hat(0.2, 0.4).unwrap();
        assert_eq!(h.evaluate(0.2).unwrap(), 0.0);
        assert!((h.evaluate(0.3).unwrap() - 0.1).abs() < 1e-16);
        assert!(h.evaluate(0.4).unwrap().abs() < 1e-16);
        assert!(h.evaluate(0.9).unwrap().abs() < 1e-16);
        let r = SobolevFunction::ramp(0.8).unwrap();
        assert_eq!(r.evaluate(0.5).unwrap(), 0.0);
        assert!((r.evaluate(1.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn json_shape() {
        let f = SobolevFunction::section(0.5).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"breakpoints":[0.0,0.5,1.0],"slopes":[1.0,0.0]}"#);
        assert!(serde_json::from_str::<SobolevFunction>(
            r#"{"breakpoints":[0.0,0.5],"slopes":[1.0]}"#
        )
        .is_err());
    }
}
