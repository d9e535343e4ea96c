use super::{MeshClass, RecoveryOutput};
use crate::densities::{phi, Hooke, Limit, RegimeParams, Sym2};
use crate::error::{Error, Result};
use crate::fem::{DamageField, DisplacementField};
use crate::mesh::{jump_strip_mesh, Point2, Rect};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpOptions {
    /// Upper bound on the number of zig-zag columns in the window.
    pub max_columns: usize,
}

impl Default for JumpOptions {
    fn default() -> Self {
        Self { max_columns: 64 }
    }
}

/// Damaged band around the straight jump {y = ½} of u = [u]·1_{y>½}.
pub fn recover_jump(
    jump: [f64; 2],
    params: &RegimeParams,
    a0: &Hooke,
    opts: &JumpOptions,
) -> Result<RecoveryOutput> {
    params.validate()?;
    if jump[0] == 0.0 && jump[1] == 0.0 {
        return Err(Error::Degenerate("jump [u] = 0".into()));
    }
    let beta = params
        .beta
        .positive_finite()
        .ok_or_else(|| Error::Regime("jump recovery needs 0 < β < ∞".into()))?;
    let alpha = match params.alpha {
        Limit::Finite(a) => a,
        Limit::Infinite => return Err(Error::Regime("jump recovery needs α < ∞".into())),
    };
    let (kappa, theta0, h) = (params.kappa, params.theta0, params.h);
    let zeta = Sym2::sym_dyad(jump, [0.0, 1.0]);
    let t = a0.quad(&zeta).sqrt();
    let sin0 = theta0.sin();
    let l = if alpha > 0.0 {
        sin0.max((alpha / (2.0 * kappa)).sqrt() * t / beta)
    } else {
        sin0
    };
    let width = h * l;
    let base = 2.0 * width / theta0.tan();
    let omega = params.omega();
    if base > omega {
        return Err(Error::Parameter(format!(
            "zig-zag base {base} exceeds ω(h) = {omega}; θ0 too small for this jump"
        )));
    }
    let c_lo = h.max(base * theta0.tan());
    let c_hi = (base / theta0.tan()).min((omega * omega - base * base).max(0.0).sqrt());
    if c_lo > c_hi {
        return Err(Error::Parameter(format!(
            "no admissible bulk row height in [{c_lo}, {c_hi}]"
        )));
    }
    let row = base.clamp(c_lo, c_hi);
    let columns = ((1.0 / base).floor() as usize).clamp(1, opts.max_columns.max(1));
    let strip = jump_strip_mesh(0.5 * width, base, columns, row)?;
    let mesh = strip.mesh;
    let values = mesh
        .vertices
        .iter()
        .map(|p| if p.y > 0.5 { jump } else { [0.0, 0.0] })
        .collect();
    let chi = DamageField::from_tags(&mesh);
    let per_length = if alpha > 0.0 {
        phi(t, alpha, beta, kappa, theta0)?
    } else {
        beta * kappa * sin0
    };
    Ok(RecoveryOutput {
        mesh,
        u: DisplacementField { values },
        chi,
        predicted_limit: per_length * strip.width,
        clip: Some(Rect {
            min: Point2::new(0.0, 0.0),
            max: Point2::new(strip.width, 1.0),
        }),
        window_measure: strip.width,
        declared: MeshClass::of(params),
        predicted_rate_note:
            "dissipation exact when h_ε = βε; damaged elastic O(η_ε/h_ε) when α = 0".into(),
    })
}
