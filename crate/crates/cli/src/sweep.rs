use std::io::Write;

use gamma_damage_core::densities::{Hooke, RegimeParams};
use gamma_damage_core::fem::{
    alt_minimize, energy, AltMinOptions, AltMinOutcome, DamageField, Dirichlet, EnergyBreakdown,
};
use gamma_damage_core::recovery::{
    recover_elastic, recover_jump, recover_lamination, recover_trivial, JumpOptions,
    PolynomialField, RecoveryOutput, TrivialRecovery,
};
use gamma_damage_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AltMinConfig, ChiInit, SweepConfig, Target};
use crate::regime::{classify_regime, Classification, Regime};

pub const CSV_HEADER: [&str; 9] = [
    "eps",
    "eta",
    "h",
    "regime",
    "recovery_energy",
    "altmin_energy",
    "predicted_limit",
    "rel_gap",
    "error",
];

/// One ε of a sweep. Energies are per unit window measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub eta: f64,
    pub h: f64,
    pub regime: Regime,
    pub recovery_energy: Option<f64>,
    pub altmin_energy: Option<f64>,
    pub predicted_limit: Option<f64>,
    pub rel_gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub classification: Classification,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
    }
}

/// Recovery pair at one ε.
#[derive(Clone, Debug)]
pub enum Built {
    Mesh(RecoveryOutput),
    Trivial(TrivialRecovery),
}

/// Energies of a recovery pair, normalized by the window measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    pub breakdown: EnergyBreakdown,
    pub window: f64,
    pub predicted: f64,
}

impl Measured {
    pub fn per_unit(&self) -> f64 {
        self.breakdown.total / self.window
    }

    pub fn rel_gap(&self) -> f64 {
        let gap = (self.per_unit() - self.predicted).abs();
        if self.predicted != 0.0 {
            gap / self.predicted.abs()
        } else {
            gap
        }
    }
}

pub fn params_at(cfg: &SweepConfig, class: &Classification, eps: f64) -> RegimeParams {
    RegimeParams {
        kappa: cfg.kappa,
        eps,
        eta: cfg.law.eta(eps),
        h: cfg.law.h(eps),
        omega_factor: cfg.omega_factor,
        theta0: cfg.theta0(),
        alpha: class.alpha,
        beta: class.beta,
    }
}

fn mismatch(regime: Regime, target: &str) -> Error {
    Error::UnsupportedMode(format!(
        "{} regime has no recovery for a {target} target",
        regime.name()
    ))
}

pub fn build(cfg: &SweepConfig, class: &Classification, params: &RegimeParams) -> Result<Built> {
    let regime = class.regime;
    match (&cfg.target, regime) {
        (Target::Affine { xi }, Regime::Elasticity) => Ok(Built::Mesh(recover_elastic(
            &PolynomialField::affine(*xi),
            &cfg.a1,
            params,
        )?)),
        (Target::Polynomial(v), Regime::Elasticity) => {
            Ok(Built::Mesh(recover_elastic(v, &cfg.a1, params)?))
        }
        (Target::Affine { xi }, Regime::HenckyPlasticity) => Ok(Built::Mesh(recover_lamination(
            xi,
            params,
            &cfg.a0,
            &cfg.a1,
            cfg.window.into(),
        )?)),
        (Target::Step { jump }, Regime::BrittleFracture | Regime::Intermediate) => {
            Ok(Built::Mesh(recover_jump(
                *jump,
                params,
                &cfg.a0,
                &JumpOptions {
                    max_columns: cfg.max_columns,
                },
            )?))
        }
        (Target::PiecewiseConstant(u), Regime::Trivial) => {
            Ok(Built::Trivial(recover_trivial(u, params)?))
        }
        (Target::Affine { .. }, r) => Err(mismatch(r, "affine")),
        (Target::Polynomial(_), r) => Err(mismatch(r, "polynomial")),
        (Target::Step { .. }, r) => Err(mismatch(r, "step")),
        (Target::PiecewiseConstant(_), r) => Err(mismatch(r, "piecewise-constant")),
    }
}

pub fn measure(built: &Built, a0: &Hooke, a1: &Hooke, params: &RegimeParams) -> Result<Measured> {
    match built {
        Built::Mesh(out) => Ok(Measured {
            breakdown: out.energy(a0, a1, params)?,
            window: out.window_measure,
            predicted: out.predicted_limit / out.window_measure,
        }),
        Built::Trivial(r) => Ok(Measured {
            breakdown: r.energy(a0, params)?,
            window: 1.0,
            predicted: 0.0,
        }),
    }
}

/// Alternating minimization with the recovery field as Dirichlet data.
pub fn run_altmin(
    out: &RecoveryOutput,
    cfg: &AltMinConfig,
    a0: &Hooke,
    a1: &Hooke,
    params: &RegimeParams,
) -> Result<AltMinOutcome> {
    let dirichlet = Dirichlet::from_field(&out.mesh, &out.u);
    let chi = match cfg.init {
        ChiInit::Recovery => out.chi.clone(),
        ChiInit::Sound => DamageField::sound(out.mesh.n_triangles()),
    };
    let opts = AltMinOptions {
        max_iters: cfg.max_iters,
        energy_tol: cfg.energy_tol,
        solver: cfg.solver.unwrap_or_default(),
    };
    alt_minimize(&out.mesh, &dirichlet, a0, a1, params, &chi, &opts)
}

fn row(cfg: &SweepConfig, class: &Classification, eps: f64) -> SweepRow {
    let params = params_at(cfg, class, eps);
    let mut r = SweepRow {
        eps,
        eta: params.eta,
        h: params.h,
        regime: class.regime,
        recovery_energy: None,
        altmin_energy: None,
        predicted_limit: None,
        rel_gap: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let built = build(cfg, class, &params)?;
        if cfg.recovery {
            let m = measure(&built, &cfg.a0, &cfg.a1, &params)?;
            r.recovery_energy = Some(m.per_unit());
            r.predicted_limit = Some(m.predicted);
            r.rel_gap = Some(m.rel_gap());
        }
        if let Some(alt) = &cfg.altmin {
            let Built::Mesh(out) = &built else {
                return Err(Error::UnsupportedMode(
                    "alternating minimization needs an explicit mesh; the trivial construction is implicit".into(),
                ));
            };
            let res = run_altmin(out, alt, &cfg.a0, &cfg.a1, &params)?;
            let e = energy(
                &out.mesh,
                &res.u,
                &res.chi,
                &cfg.a0,
                &cfg.a1,
                &params,
                out.clip.as_ref(),
            )?;
            r.altmin_energy = Some(e.total / out.window_measure);
        }
        Ok(())
    })();
    if let Err(e) = result {
        r.error = Some(e.to_string());
    }
    r
}

/// Runs every ε of the law in parallel; rows keep the order of the list.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.law.validate()?;
    if !(cfg.kappa > 0.0 && cfg.theta0_deg > 0.0 && cfg.theta0_deg < 90.0) {
        return Err(Error::Parameter(
            "κ must be positive and θ0 in (0°, 90°)".into(),
        ));
    }
    cfg.a0.validate()?;
    cfg.a1.validate()?;
    let classification = classify_regime(&cfg.law, cfg.kappa, cfg.theta0());
    let rows = cfg
        .law
        .eps
        .par_iter()
        .map(|&eps| row(cfg, &classification, eps))
        .collect();
    Ok(SweepReport {
        classification,
        rows,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format!("{:e}", r.eps),
            format!("{:e}", r.eta),
            format!("{:e}", r.h),
            r.regime.name().to_string(),
            cell(r.recovery_energy),
            cell(r.altmin_energy),
            cell(r.predicted_limit),
            cell(r.rel_gap),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
