use serde::{Deserialize, Serialize};

use crate::error::{Result, RksError};

/// Finite family of pointwise functions `h_0, …, h_{m-1}` on the input set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Basis {
    /// The single function `1`.
    Constant,
    /// `[1, x_1, …, x_d]` on `R^d`.
    Affine { dim: usize },
    /// Shifted Legendre polynomials of degree `0..order`, orthonormal in
    /// `L²([lo, hi])`.
    Legendre { order: usize, lo: f64, hi: f64 },
    /// `√2 sin(kπx)`, `k = 1..=terms`, orthonormal in `L²([0, 1])`.
    Trigonometric { terms: usize },
}

impl Basis {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Basis::Constant => Ok(()),
            Basis::Affine { dim: 0 } => Err(RksError::invalid("affine basis needs dim >= 1")),
            Basis::Legendre { order: 0, .. } => Err(RksError::invalid("empty Legendre basis")),
            Basis::Legendre { lo, hi, .. } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                Err(RksError::invalid(format!(
                    "Legendre interval [{lo}, {hi}] is invalid"
                )))
            }
            Basis::Trigonometric { terms: 0 } => {
                Err(RksError::invalid("empty trigonometric basis"))
            }
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Basis::Constant => 1,
            Basis::Affine { dim } => dim + 1,
            Basis::Legendre { order, .. } => order,
            Basis::Trigonometric { terms } => terms,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Required point dimension, `None` when any dimension is accepted.
    pub fn input_dim(&self) -> Option<usize> {
        match *self {
            Basis::Constant => None,
            Basis::Affine { dim } => Some(dim),
            Basis::Legendre { .. } | Basis::Trigonometric { .. } => Some(1),
        }
    }

    /// Interval on which the functions are naturally defined.
    pub fn natural_domain(&self) -> (f64, f64) {
        match *self {
            Basis::Constant | Basis::Affine { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Basis::Legendre { lo, hi, .. } => (lo, hi),
            Basis::Trigonometric { .. } => (0.0, 1.0),
        }
    }

    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            Basis::Constant => vec![1.0],
            Basis::Affine { .. } => std::iter::once(1.0).chain(x.iter().copied()).collect(),
            Basis::Legendre { order, lo, hi } => {
                let t = (2.0 * x[0] - lo - hi) / (hi - lo);
                let mut out = Vec::with_capacity(order);
                let (mut p0, mut p1) = (1.0, t);
                for k in 0..order {
                    let p = match k {
                        0 => 1.0,
                        1 => t,
                        _ => {
                            let kf = k as f64;
                            let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                            p0 = p1;
                            p1 = p2;
                            p2
                        }
                    };
                    out.push(((2 * k + 1) as f64 / (hi - lo)).sqrt() * p);
                }
                out
            }
            Basis::Trigonometric { terms } => (1..=terms)
                .map(|k| std::f64::consts::SQRT_2 * (k as f64 * std::f64::consts::PI * x[0]).sin())
                .collect(),
        }
    }
}
