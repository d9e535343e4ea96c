//! Recovery constructions: explicit admissible pairs (u_ε, χ_ε) whose
//! energies converge to the predicted limit densities.

mod elastic;
mod jump;
mod lamination;
mod trivial;

use serde::{Deserialize, Serialize};

use crate::densities::{Hooke, RegimeParams};
use crate::error::Result;
use crate::fem::{energy, DamageField, DisplacementField, EnergyBreakdown};
use crate::mesh::{validate, AdmissibilityReport, Rect, Triangulation};

pub use elastic::{recover_elastic, Monomial, PolynomialField, VectorField};
pub use jump::{recover_jump, JumpOptions};
pub use lamination::{
    factor_rank_one, recover_lamination, recover_lamination_from, LaminationWindow,
};
pub use trivial::{recover_trivial, PiecewiseConstant, TrivialRecovery};

/// Mesh class a construction is declared to belong to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshClass {
    pub h: f64,
    pub omega_factor: f64,
    pub theta0: f64,
}

impl MeshClass {
    pub fn of(params: &RegimeParams) -> Self {
        Self {
            h: params.h,
            omega_factor: params.omega_factor,
            theta0: params.theta0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryOutput {
    pub mesh: Triangulation,
    pub u: DisplacementField,
    pub chi: DamageField,
    /// Limit energy over the evaluation window.
    pub predicted_limit: f64,
    /// Region the energy is integrated over; `None` means the whole mesh.
    pub clip: Option<Rect>,
    /// Area (or length, for jumps) the limit is normalized by.
    pub window_measure: f64,
    pub declared: MeshClass,
    pub predicted_rate_note: String,
}

impl RecoveryOutput {
    pub fn energy(&self, a0: &Hooke, a1: &Hooke, params: &RegimeParams) -> Result<EnergyBreakdown> {
        energy(
            &self.mesh,
            &self.u,
            &self.chi,
            a0,
            a1,
            params,
            self.clip.as_ref(),
        )
    }

    pub fn validate(&self) -> AdmissibilityReport {
        validate(
            &self.mesh,
            self.declared.h,
            self.declared.omega_factor,
            self.declared.theta0,
        )
    }
}
