//! Closed-form theory: moments, limit laws and deviation bounds.

pub mod deviations;
pub mod limits;
pub mod moments;

use serde::{Deserialize, Serialize};

use crate::error::{GilbertError, Result};
use crate::geometry::ConvexWindow;

/// A point value or a closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredictionValue {
    Scalar(f64),
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionParams {
    pub window: ConvexWindow,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub delta: f64,
    pub alphas: Vec<f64>,
}

/// A named theoretical quantity together with the parameters it was
/// evaluated at. `paper_anchor` names the result the value comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    pub name: String,
    pub value: PredictionValue,
    pub params: PredictionParams,
    pub paper_anchor: String,
}

/// Asymptotic regime of a radius schedule `δ_t = a t^{-γ}`, decided by the
/// behaviour of `t δ_t^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `t δ^d → 0`.
    Sparse,
    /// `t δ^d → c`.
    Thermodynamic { c: f64 },
    /// `t δ^d → ∞`.
    Dense,
}

/// Limit behaviour of the expected edge count, decided by `t² δ_t^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRegime {
    /// `t² δ^d → ∞`.
    EdgeInfinite,
    /// `t² δ^d → c`.
    EdgeConstant { c: f64 },
    /// `t² δ^d → 0`: the graph is eventually empty.
    EdgeVanishing,
}

/// `δ_t = a · t^{-γ}` in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSchedule {
    pub a: f64,
    pub gamma: f64,
    pub dim: usize,
}

const EXPONENT_TOL: f64 = 1e-12;

impl RegimeSchedule {
    pub fn new(a: f64, gamma: f64, dim: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) {
            return Err(GilbertError::InvalidParameter(format!(
                "schedule needs a > 0 and gamma > 0, got a = {a}, gamma = {gamma}"
            )));
        }
        if dim == 0 {
            return Err(GilbertError::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        Ok(Self { a, gamma, dim })
    }

    pub fn delta(&self, t: f64) -> f64 {
        self.a * t.powf(-self.gamma)
    }

    pub fn regime(&self) -> Regime {
        let critical = 1.0 / self.dim as f64;
        if (self.gamma - critical).abs() <= EXPONENT_TOL {
            Regime::Thermodynamic {
                c: self.a.powi(self.dim as i32),
            }
        } else if self.gamma > critical {
            Regime::Sparse
        } else {
            Regime::Dense
        }
    }

    pub fn edge_regime(&self) -> EdgeRegime {
        let critical = 2.0 / self.dim as f64;
        if (self.gamma - critical).abs() <= EXPONENT_TOL {
            EdgeRegime::EdgeConstant {
                c: self.a.powi(self.dim as i32),
            }
        } else if self.gamma < critical {
            EdgeRegime::EdgeInfinite
        } else {
            EdgeRegime::EdgeVanishing
        }
    }

    /// `lim t² δ_t^d` when it is finite and positive.
    pub fn edge_constant(&self) -> Option<f64> {
        match self.edge_regime() {
            EdgeRegime::EdgeConstant { c } => Some(c),
            _ => None,
        }
    }
}
