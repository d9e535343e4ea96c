use std::f64::consts::FRAC_PI_4;

use gamma_damage_core::densities::Limit;
use gamma_damage_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// η_ε = c_η ε^p, h_ε = c_h ε^q over a decreasing list of ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingLaw {
    pub c_eta: f64,
    pub p: f64,
    pub c_h: f64,
    pub q: f64,
    pub eps: Vec<f64>,
}

impl ScalingLaw {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_eta", self.c_eta),
            ("c_h", self.c_h),
            ("p", self.p),
            ("q", self.q),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if let Some(bad) = self.eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Parameter(format!(
                "ε values must be positive, got {bad}"
            )));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Parameter(
                "ε list must be strictly decreasing".into(),
            ));
        }
        Ok(())
    }

    pub fn eta(&self, eps: f64) -> f64 {
        self.c_eta * eps.powf(self.p)
    }

    pub fn h(&self, eps: f64) -> f64 {
        self.c_h * eps.powf(self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Elasticity,
    Trivial,
    HenckyPlasticity,
    BrittleFracture,
    Intermediate,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Elasticity => "elasticity",
            Regime::Trivial => "trivial",
            Regime::HenckyPlasticity => "hencky_plasticity",
            Regime::BrittleFracture => "brittle_fracture",
            Regime::Intermediate => "intermediate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub regime: Regime,
    pub alpha: Limit,
    pub beta: Limit,
    /// Whether θ0 satisfies the angle condition the regime's limit requires.
    pub theta0_bound_ok: bool,
}

/// lim c ε^(e−1) as ε → 0.
fn limit(c: f64, exponent: f64) -> Limit {
    if exponent < 1.0 {
        Limit::Infinite
    } else if exponent == 1.0 {
        Limit::Finite(c)
    } else {
        Limit::Finite(0.0)
    }
}

/// Regime of the limit energy from the exponents of the scaling law.
pub fn classify_regime(law: &ScalingLaw, _kappa: f64, theta0: f64) -> Classification {
    let alpha = limit(law.c_eta, law.p);
    let beta = limit(law.c_h, law.q);
    let (regime, bound) = match (alpha, beta) {
        (Limit::Infinite, _) | (_, Limit::Infinite) => (Regime::Elasticity, f64::INFINITY),
        (a, b) if a.is_zero() && b.is_zero() => (Regime::Trivial, FRAC_PI_4),
        (_, b) if b.is_zero() => (Regime::HenckyPlasticity, f64::INFINITY),
        (a, _) if a.is_zero() => (Regime::BrittleFracture, FRAC_PI_4 - 0.5f64.atan()),
        _ => (Regime::Intermediate, 0.25f64.atan()),
    };
    Classification {
        regime,
        alpha,
        beta,
        theta0_bound_ok: theta0 <= bound,
    }
}
