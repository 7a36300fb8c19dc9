//! Discrete measures on an interval.
//!
//! Every rule is stored as a reference rule on `[-1, 1]` and mapped affinely
//! onto the integration interval, so the same rule can be reused on
//! sub-intervals when an integrand has known breakpoints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Result, RksError};

/// Nodes per panel of the composite Gauss–Legendre rule.
pub const COMPOSITE_ORDER: usize = 8;

/// Truncation radius used for unbounded domains when none is given.
pub const DEFAULT_TRUNCATION_RADIUS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Single-panel rule with `resolution` nodes.
    GaussLegendre,
    /// `resolution` equal panels, each carrying a `COMPOSITE_ORDER`-point rule.
    GaussLegendreComposite,
    /// `resolution` equispaced nodes including both endpoints.
    Trapezoid,
}

impl FromStr for QuadratureRule {
    type Err = RksError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss_legendre" => Ok(QuadratureRule::GaussLegendre),
            "gauss_legendre_composite" => Ok(QuadratureRule::GaussLegendreComposite),
            "trapezoid" => Ok(QuadratureRule::Trapezoid),
            other => Err(RksError::UnknownRule(other.to_string())),
        }
    }
}

impl fmt::Display for QuadratureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuadratureRule::GaussLegendre => "gauss_legendre",
            QuadratureRule::GaussLegendreComposite => "gauss_legendre_composite",
            QuadratureRule::Trapezoid => "trapezoid",
        })
    }
}

/// The serialized form of a quadrature measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rule: QuadratureRule,
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
}

impl QuadratureConfig {
    pub fn new(rule: QuadratureRule, resolution: usize) -> Self {
        QuadratureConfig {
            rule,
            resolution,
            truncation_radius: None,
        }
    }

    pub fn with_truncation_radius(mut self, radius: f64) -> Self {
        self.truncation_radius = Some(radius);
        self
    }
}

/// Discrete approximation of a measure on an interval.
///
/// For a domain unbounded on both sides the nodes live on `[-R, R]` and are
/// shifted onto `[c - R, c + R]` at integration time, `c` being chosen by the
/// caller (the kernel uses the midpoint of its two arguments).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMeasure {
    config: QuadratureConfig,
    domain: Domain,
    /// Integration interval, relative to the center when `centered`.
    lo: f64,
    hi: f64,
    centered: bool,
    reference_nodes: Vec<f64>,
    reference_weights: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureMeasure {
    pub fn new(domain: Domain, config: QuadratureConfig) -> Result<Self> {
        if config.resolution < 2 {
            return Err(RksError::invalid(format!(
                "quadrature resolution must be at least 2, got {}",
                config.resolution
            )));
        }
        let radius = match config.truncation_radius {
            Some(r) if !(r.is_finite() && r > 0.0) => {
                return Err(RksError::invalid(format!(
                    "truncation radius must be positive, got {r}"
                )))
            }
            r => r,
        };
        let (lo, hi, centered) = match (domain.lo.is_finite(), domain.hi.is_finite()) {
            (true, true) => (domain.lo, domain.hi, false),
            (lo_finite, hi_finite) => {
                let r = radius.ok_or_else(|| {
                    RksError::invalid("unbounded domain requires an explicit truncation radius")
                })?;
                match (lo_finite, hi_finite) {
                    (true, false) => (domain.lo, domain.lo + r, false),
                    (false, true) => (domain.hi - r, domain.hi, false),
                    _ => (-r, r, true),
                }
            }
        };

        let (reference_nodes, reference_weights) = reference_rule(config.rule, config.resolution);
        let (nodes, weights) = map_rule(&reference_nodes, &reference_weights, lo, hi);
        Ok(QuadratureMeasure {
            config,
            domain,
            lo,
            hi,
            centered,
            reference_nodes,
            reference_weights,
            nodes,
            weights,
        })
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn rule(&self) -> QuadratureRule {
        self.config.rule
    }

    /// Nodes on the truncated domain (relative to the center when the domain
    /// is the whole real line).
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integration interval for a given center.
    pub fn interval(&self, center: f64) -> (f64, f64) {
        if self.centered {
            (center + self.lo, center + self.hi)
        } else {
            (self.lo, self.hi)
        }
    }

    /// `Σ_k w_k f(u_k)` with nodes shifted by `center` on centered measures.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, center: f64, mut f: F) -> f64 {
        let shift = if self.centered { center } else { 0.0 };
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(0.0, |acc, (&u, &w)| acc + w * f(u + shift))
    }

    /// Applies the configured rule to `[a, b]` instead of the full domain.
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        if b <= a {
            return 0.0;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.reference_nodes
            .iter()
            .zip(&self.reference_weights)
            .fold(0.0, |acc, (&t, &w)| acc + half * w * f(mid + half * t))
    }
}

/// Builds a quadrature measure from a rule name.
pub fn build_quadrature(
    domain: Domain,
    rule: &str,
    resolution: usize,
    truncation_radius: Option<f64>,
) -> Result<QuadratureMeasure> {
    let rule = rule.parse()?;
    QuadratureMeasure::new(
        domain,
        QuadratureConfig {
            rule,
            resolution,
            truncation_radius,
        },
    )
}

fn reference_rule(rule: QuadratureRule, resolution: usize) -> (Vec<f64>, Vec<f64>) {
    match rule {
        QuadratureRule::GaussLegendre => gauss_legendre(resolution),
        QuadratureRule::GaussLegendreComposite => {
            let (t, w) = gauss_legendre(COMPOSITE_ORDER);
            let width = 2.0 / resolution as f64;
            let mut nodes = Vec::with_capacity(resolution * COMPOSITE_ORDER);
            let mut weights = Vec::with_capacity(resolution * COMPOSITE_ORDER);
            for panel in 0..resolution {
                let a = -1.0 + panel as f64 * width;
                let b = if panel + 1 == resolution {
                    1.0
                } else {
                    a + width
                };
                let (pn, pw) = map_rule(&t, &w, a, b);
                nodes.extend(pn);
                weights.extend(pw);
            }
            (nodes, weights)
        }
        QuadratureRule::Trapezoid => {
            let h = 2.0 / (resolution - 1) as f64;
            let nodes = (0..resolution)
                .map(|i| {
                    if i + 1 == resolution {
                        1.0
                    } else {
                        -1.0 + i as f64 * h
                    }
                })
                .collect();
            let weights = (0..resolution)
                .map(|i| {
                    if i == 0 || i + 1 == resolution {
                        0.5 * h
                    } else {
                        h
                    }
                })
                .collect();
            (nodes, weights)
        }
    }
}

fn map_rule(t: &[f64], w: &[f64], a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = t
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            // pin the outermost nodes so mapped endpoint rules hit a and b exactly
            if t == -1.0 {
                a
            } else if t == 1.0 && i + 1 == w.len() {
                b
            } else {
                mid + half * t
            }
        })
        .collect();
    let weights = w.iter().map(|&w| half * w).collect();
    (nodes, weights)
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_unit_interval_has_unit_mass() {
        let q = build_quadrature(Domain::unit(), "gauss_legendre", 16, None).unwrap();
        assert!((q.total_mass() - 1.0).abs() <= 1e-14);
        assert!(q.weights().iter().all(|&w| w >= 0.0));
        assert!(q.nodes().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn two_point_trapezoid() {
        let q = build_quadrature(Domain::unit(), "trapezoid", 2, None).unwrap();
        assert_eq!(q.nodes(), &[0.0, 1.0]);
        assert_eq!(q.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn composite_rule_on_truncated_line_integrates_gaussian() {
        let q = build_quadrature(
            Domain::real_line(),
            "gauss_legendre_composite",
            64,
            Some(8.0),
        )
        .unwrap();
        let value = q.integrate(0.0, |u| (-u * u).exp());
        // reference: sqrt(pi)
        assert!(
            (value - std::f64::consts::PI.sqrt()).abs() <= 1e-10,
            "{value}"
        );
        assert!(q.nodes().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn polynomial_exactness() {
        for n in [2usize, 5, 12, 40] {
            let q = QuadratureMeasure::new(
                Domain::new(-0.5, 2.0).unwrap(),
                QuadratureConfig::new(QuadratureRule::GaussLegendre, n),
            )
            .unwrap();
            for deg in 0..(2 * n) as i32 {
                let exact = (2.0f64.powi(deg + 1) - (-0.5f64).powi(deg + 1)) / (deg + 1) as f64;
                let approx = q.integrate(0.0, |u| u.powi(deg));
                assert_relative_eq!(approx, exact, max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn integrate_on_subinterval_is_exact_for_low_degree() {
        let q = build_quadrature(Domain::unit(), "gauss_legendre", 4, None).unwrap();
        assert_relative_eq!(
            q.integrate_on(0.2, 0.7, |u| u * u),
            (0.343 - 0.008) / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(q.integrate_on(0.7, 0.2, |_| 1.0), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            build_quadrature(Domain::unit(), "simpson", 4, None),
            Err(RksError::UnknownRule(_))
        ));
        assert!(build_quadrature(Domain::unit(), "trapezoid", 1, None).is_err());
        assert!(build_quadrature(Domain::unit(), "trapezoid", 0, None).is_err());
        assert!(build_quadrature(Domain::real_line(), "gauss_legendre", 8, None).is_err());
        assert!(build_quadrature(Domain::real_line(), "gauss_legendre", 8, Some(-1.0)).is_err());
    }

    #[test]
    fn half_line_is_truncated_from_finite_end() {
        let q = build_quadrature(
            Domain::new(0.0, f64::INFINITY).unwrap(),
            "gauss_legendre",
            40,
            Some(30.0),
        )
        .unwrap();
        assert_relative_eq!(q.integrate(0.0, |u| (-u).exp()), 1.0, epsilon = 1e-12);
    }
}
