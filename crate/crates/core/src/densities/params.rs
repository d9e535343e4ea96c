use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Limit of a scaling ratio; infinite limits are explicit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Finite(f64),
    Infinite,
}

impl Limit {
    pub fn finite(self) -> Option<f64> {
        match self {
            Limit::Finite(v) => Some(v),
            Limit::Infinite => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Limit::Finite(0.0)
    }

    /// Some(v) when 0 < v < ∞.
    pub fn positive_finite(self) -> Option<f64> {
        self.finite().filter(|v| *v > 0.0)
    }
}

/// Scaling parameters at a fixed ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub kappa: f64,
    pub eps: f64,
    pub eta: f64,
    pub h: f64,
    pub omega_factor: f64,
    /// Minimal mesh angle in radians.
    pub theta0: f64,
    pub alpha: Limit,
    pub beta: Limit,
}

impl RegimeParams {
    pub fn omega(&self) -> f64 {
        self.omega_factor * self.h
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("eps", self.eps),
            ("eta", self.eta),
            ("h", self.h),
            ("theta0", self.theta0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.omega_factor >= 6.0) {
            return Err(Error::Parameter(format!(
                "omega_factor must be at least 6, got {}",
                self.omega_factor
            )));
        }
        for (name, l) in [("alpha", self.alpha), ("beta", self.beta)] {
            if let Limit::Finite(v) = l {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "{name} must lie in [0, ∞], got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}
