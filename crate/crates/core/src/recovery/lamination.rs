use super::{MeshClass, RecoveryOutput};
use crate::densities::{h_auto, wbar, Hooke, RegimeParams, Sym2, Wbar};
use crate::error::{Error, Result};
use crate::fem::{interpolate, DamageField, DisplacementField};
use crate::mesh::generators::{lamination_breaks, uniform_breaks};
use crate::mesh::{uniform_mesh, unit_square_frame, FrameGrid, Rect};

/// Region the laminated pair is built and evaluated on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaminationWindow {
    /// The rotated square containing the unit square; energy clipped to (0,1)².
    Full,
    /// A square of `k` whole periods in each laminated direction.
    Periods(usize),
}

/// τ = a ⊙ b with |b| = 1 for det τ ≤ 0.
pub fn factor_rank_one(tau: &Sym2) -> Result<([f64; 2], [f64; 2])> {
    let scale = tau.norm();
    if scale == 0.0 {
        return Err(Error::Degenerate(
            "τ = 0 has no lamination direction".into(),
        ));
    }
    let ((t1, t2), v1, v2) = tau.eigen();
    if t1 * t2 > 1e-12 * scale * scale {
        return Err(Error::Precondition(format!("det τ = {} > 0", tau.det())));
    }
    let tiny = 1e-12 * scale;
    if t2.abs() <= tiny {
        return Ok(([t1 * v1[0], t1 * v1[1]], v1));
    }
    if t1.abs() <= tiny {
        return Ok(([t2 * v2[0], t2 * v2[1]], v2));
    }
    let d = (t1.abs() / t2.abs()).sqrt();
    let b = [d * v1[0] + v2[0], d * v1[1] + v2[1]];
    let a = [t1 / d * v1[0] + t2 * v2[0], t1 / d * v1[1] + t2 * v2[1]];
    let nb = b[0].hypot(b[1]);
    Ok(([a[0] * nb, a[1] * nb], [b[0] / nb, b[1] / nb]))
}

/// One laminated direction: damaged proportion θ and period l.
#[derive(Clone, Copy, Debug)]
struct Layer {
    theta: f64,
    period: f64,
}

impl Layer {
    fn new(theta: f64, side: f64, h: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Regime(format!(
                "damaged proportion {theta} outside (0, 1); ε too large"
            )));
        }
        let m = (side * theta / h).floor();
        if m < 1.0 {
            return Err(Error::Regime(format!(
                "damaged stripe narrower than h = {h}; ε too large"
            )));
        }
        let period = side / m;
        if (1.0 - theta) * period < h {
            return Err(Error::Regime(format!(
                "sound stripe narrower than h = {h}; ε too large"
            )));
        }
        Ok(Self { theta, period })
    }

    fn breaks(&self, h: f64, periods: usize) -> Result<(Vec<f64>, Vec<bool>, Vec<f64>)> {
        let (s, flags) = lamination_breaks(
            self.theta * self.period,
            (1.0 - self.theta) * self.period,
            h,
            self.period * periods as f64,
        )?;
        let slope = (1.0 - self.theta) / self.theta;
        let mut saw = vec![0.0; s.len()];
        for i in 0..flags.len() {
            let w = s[i + 1] - s[i];
            saw[i + 1] = if flags[i] { slope * w } else { saw[i] - w };
            if i + 1 < flags.len() && flags[i + 1] {
                saw[i + 1] = 0.0;
            }
        }
        Ok((s, flags, saw))
    }
}

/// Laminated recovery pair for the affine target ξ·x in the Hencky regime.
pub fn recover_lamination(
    xi: &Sym2,
    params: &RegimeParams,
    a0: &Hooke,
    a1: &Hooke,
    window: LaminationWindow,
) -> Result<RecoveryOutput> {
    params.validate()?;
    let alpha = params
        .alpha
        .positive_finite()
        .ok_or_else(|| Error::Regime("lamination needs 0 < α < ∞".into()))?;
    let w = wbar(a0, a1, xi, alpha, params.kappa)?;
    recover_lamination_from(xi, &w, params, a0, window)
}

/// Laminated pair built from a precomputed W̄_α(ξ) and its minimizer τ.
pub fn recover_lamination_from(
    xi: &Sym2,
    w: &Wbar,
    params: &RegimeParams,
    a0: &Hooke,
    window: LaminationWindow,
) -> Result<RecoveryOutput> {
    params.validate()?;
    let alpha = params
        .alpha
        .positive_finite()
        .ok_or_else(|| Error::Regime("lamination needs 0 < α < ∞".into()))?;
    let tau = w.tau;
    let declared = MeshClass::of(params);
    if tau.norm() == 0.0 {
        let n = (1.0 / params.h * (1.0 + 1e-12)).floor().max(1.0) as usize;
        let mesh = uniform_mesh(n, 0);
        let u = interpolate(&mesh, |p| xi.apply([p.x, p.y]));
        let chi = DamageField::sound(mesh.n_triangles());
        return Ok(RecoveryOutput {
            mesh,
            u,
            chi,
            predicted_limit: w.value,
            clip: None,
            window_measure: 1.0,
            declared,
            predicted_rate_note: "exact: no damage".into(),
        });
    }
    let ((t1, t2), v1, _) = tau.eigen();
    let det_tol = 1e-12 * tau.norm() * tau.norm();
    let (b, laminae) = if t1 * t2 <= det_tol {
        let (a, b) = factor_rank_one(&tau)?;
        let na = a[0].hypot(a[1]);
        let (_, side) = unit_square_frame(b);
        let h_tau = h_auto(a0, &tau)?;
        let delta = 2.0 * params.kappa * alpha * (h_tau - a0.quad(&tau)).max(0.0);
        let big_theta =
            ((2.0 * alpha * params.kappa * h_tau).sqrt() + delta.sqrt()) / (2.0 * params.kappa);
        let layer = Layer::new(params.eps * big_theta, side, params.h)?;
        (b, vec![(layer, [a[0] / na, a[1] / na], na)])
    } else {
        let p_wave = a0.p_wave_modulus().ok_or_else(|| {
            Error::UnsupportedMode("double lamination requires an isotropic A0".into())
        })?;
        let (_, side) = unit_square_frame(v1);
        let perp = [-v1[1], v1[0]];
        let mut laminae = Vec::new();
        for (t, dir) in [(t1, v1), (t2, perp)] {
            let theta = params.eps / (2.0 * params.kappa)
                * (2.0 * params.kappa * alpha * p_wave).sqrt()
                * t.abs();
            laminae.push((Layer::new(theta, side, params.h)?, dir, t));
        }
        (v1, laminae)
    };
    let (origin, side) = unit_square_frame(b);
    let h = params.h;
    let (s_periods, t_periods, clip) = match window {
        LaminationWindow::Full => {
            let m = |l: &Layer| (side / l.period).round() as usize;
            let ms = m(&laminae[0].0);
            let mt = laminae.get(1).map(|x| m(&x.0)).unwrap_or(0);
            (ms, mt, Some(Rect::unit()))
        }
        LaminationWindow::Periods(k) if k > 0 => (k, k, None),
        LaminationWindow::Periods(_) => {
            return Err(Error::Parameter("window needs at least one period".into()))
        }
    };
    let (s, fs, saw_s) = laminae[0].0.breaks(h, s_periods)?;
    let (t, ft, saw_t) = match laminae.get(1) {
        Some((layer, _, _)) => layer.breaks(h, t_periods)?,
        None => {
            let len = match window {
                LaminationWindow::Full => side,
                LaminationWindow::Periods(_) => *s.last().unwrap_or(&side),
            };
            let t = uniform_breaks(h, len);
            let n = t.len();
            (t, vec![false; n - 1], vec![0.0; n])
        }
    };
    let grid = FrameGrid { origin, b, s, t };
    let mesh = grid.build(|i, j| fs[i] || ft[j]);
    let mut values = Vec::with_capacity(mesh.n_vertices());
    for j in 0..grid.t.len() {
        for i in 0..grid.s.len() {
            let p = grid.point(grid.s[i], grid.t[j]);
            let mut u = xi.apply([p.x, p.y]);
            let (_, dir, amp) = laminae[0];
            for c in 0..2 {
                u[c] += amp * dir[c] * saw_s[i];
            }
            if let Some((_, dir, amp)) = laminae.get(1) {
                for c in 0..2 {
                    u[c] += amp * dir[c] * saw_t[j];
                }
            }
            values.push(u);
        }
    }
    let window_measure = match clip {
        Some(r) => r.area(),
        None => {
            let (s, t) = (&grid.s, &grid.t);
            (s[s.len() - 1] - s[0]) * (t[t.len() - 1] - t[0])
        }
    };
    let chi = DamageField::from_tags(&mesh);
    Ok(RecoveryOutput {
        mesh,
        u: DisplacementField { values },
        chi,
        predicted_limit: w.value * window_measure,
        clip,
        window_measure,
        declared,
        predicted_rate_note: "gap O(θ_ε) = O(ε)".into(),
    })
}
