use serde_json::{Map, Value};

use crate::error::{Result, RksError};
use crate::linalg::dot;

/// Kernels given by a formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `min(x, y)` on scalars.
    Min,
    /// `exp(-‖x - y‖² / (2σ²))`.
    Gaussian { sigma: f64 },
    /// `xᵀy + 1`.
    LinearPlusOne,
    /// `tanh(a·xᵀy + b)`, not a positive kernel in general.
    Tanh { a: f64, b: f64 },
    /// `1` when `x = y`, `0` otherwise.
    IndicatorEqual,
}

impl ClosedForm {
    pub fn name(&self) -> &'static str {
        match self {
            ClosedForm::Min => "min",
            ClosedForm::Gaussian { .. } => "gaussian",
            ClosedForm::LinearPlusOne => "linear_plus_one",
            ClosedForm::Tanh { .. } => "tanh",
            ClosedForm::IndicatorEqual => "indicator_equal",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClosedForm::Gaussian { sigma } if !(sigma.is_finite() && sigma > 0.0) => Err(
                RksError::invalid(format!("gaussian sigma must be positive, got {sigma}")),
            ),
            ClosedForm::Tanh { a, b } if !(a.is_finite() && b.is_finite()) => {
                Err(RksError::invalid("tanh parameters must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn input_dim(&self) -> Option<usize> {
        match self {
            ClosedForm::Min => Some(1),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            ClosedForm::Min => x[0].min(y[0]),
            ClosedForm::Gaussian { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            ClosedForm::LinearPlusOne => dot(x, y) + 1.0,
            ClosedForm::Tanh { a, b } => (a * dot(x, y) + b).tanh(),
            ClosedForm::IndicatorEqual => {
                if x == y {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub(crate) fn params(&self) -> Map<String, Value> {
        let mut m = Map::new();
        match *self {
            ClosedForm::Gaussian { sigma } => {
                m.insert("sigma".into(), sigma.into());
            }
            ClosedForm::Tanh { a, b } => {
                m.insert("a".into(), a.into());
                m.insert("b".into(), b.into());
            }
            _ => {}
        }
        m
    }
}
