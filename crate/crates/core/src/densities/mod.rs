//! Scalar densities of the damage energies and of their limits.

mod optim;
mod params;
mod tensor;

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub(crate) use optim::{golden_min, minimize3, SearchOptions};
pub use params::{Limit, RegimeParams};
pub use tensor::{apply_hooke, quad_form, Hooke, Sym2};

/// Settings of the numeric fallbacks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    /// Angular samples for the sup defining g.
    pub k_samples: usize,
    /// Relative tolerance on optimized values.
    pub rel_tol: f64,
    pub max_iters: u64,
    /// Seed of the random multi-starts.
    pub seed: u64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            k_samples: 4096,
            rel_tol: 1e-10,
            max_iters: 10_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GMode {
    ClosedForm,
    Numeric { k_samples: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HMode {
    ClosedForm,
    Numeric(NumericOptions),
}

fn isotropic_moduli(a: &Hooke, what: &str) -> Result<(f64, f64)> {
    match *a {
        Hooke::Isotropic { lambda, mu } => Ok((lambda, mu)),
        Hooke::General { .. } => Err(Error::UnsupportedMode(format!(
            "closed form of {what} needs an isotropic tensor"
        ))),
    }
}

/// g(ξ) = sup over unit k of |Π_k(A0^{-1/2} ξ)|².
pub fn g(a0: &Hooke, xi: &Sym2, mode: GMode) -> Result<f64> {
    match mode {
        GMode::ClosedForm => {
            let (lambda, mu) = isotropic_moduli(a0, "g")?;
            Ok(g_closed(lambda, mu, xi))
        }
        GMode::Numeric { k_samples } => {
            if k_samples < 64 {
                return Err(Error::Parameter(format!(
                    "numeric g needs at least 64 samples, got {k_samples}"
                )));
            }
            Ok(g_numeric(&a0.matrix(), xi, k_samples))
        }
    }
}

fn g_closed(lambda: f64, mu: f64, xi: &Sym2) -> f64 {
    let (x1, x2) = xi.eigenvalues();
    let s = (lambda + 2.0 * mu) / (2.0 * (lambda + mu)) * (x1 + x2);
    if s < x1 {
        x1 * x1 / (lambda + 2.0 * mu)
    } else if s > x2 {
        x2 * x2 / (lambda + 2.0 * mu)
    } else {
        (x1 - x2).powi(2) / (4.0 * mu) + (x1 + x2).powi(2) / (4.0 * (lambda + mu))
    }
}

/// |Π_k(A0^{-1/2} ξ)|² for k = (cos t, sin t).
fn g_direction(a0: &Matrix3<f64>, xi: &Vector3<f64>, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let v1 = Vector3::new(c * c, s * s, SQRT_2 * c * s);
    let v2 = Vector3::new(-c * s, c * s, (c * c - s * s) / SQRT_2);
    let b = Vector2::new(v1.dot(xi), v2.dot(xi));
    let (a1, a2) = (a0 * v1, a0 * v2);
    let gram = Matrix2::new(v1.dot(&a1), v1.dot(&a2), v2.dot(&a1), v2.dot(&a2));
    match gram.try_inverse() {
        Some(inv) => (b.transpose() * inv * b)[0].max(0.0),
        None => 0.0,
    }
}

fn g_numeric(a0: &Matrix3<f64>, xi: &Sym2, k_samples: usize) -> f64 {
    let v = xi.to_vector();
    if v.norm() == 0.0 {
        return 0.0;
    }
    let dt = PI / k_samples as f64;
    let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
    for j in 0..k_samples {
        let t = j as f64 * dt;
        let q = g_direction(a0, &v, t);
        if q > best {
            best = q;
            best_t = t;
        }
    }
    let neg = |t: f64| -g_direction(a0, &v, t);
    let (_, refined) = golden_min(&neg, best_t - dt, best_t + dt, 1e-12);
    best.max(-refined)
}

/// g with the closed form for isotropic tensors and the default grid otherwise.
pub fn g_auto(a0: &Hooke, xi: &Sym2) -> f64 {
    match *a0 {
        Hooke::Isotropic { lambda, mu } => g_closed(lambda, mu, xi),
        Hooke::General { .. } => g_numeric(&a0.matrix(), xi, NumericOptions::default().k_samples),
    }
}

/// h(ξ) = g*(2ξ).
pub fn h(a0: &Hooke, xi: &Sym2, mode: HMode) -> Result<f64> {
    match mode {
        HMode::ClosedForm => {
            let (_, mu) = isotropic_moduli(a0, "h")?;
            Ok(h_closed(a0, mu, xi))
        }
        HMode::Numeric(opts) => h_numeric(a0, xi, &opts),
    }
}

fn h_closed(a0: &Hooke, mu: f64, xi: &Sym2) -> f64 {
    a0.quad(xi) + 4.0 * mu * xi.det().max(0.0)
}

fn random_starts(seed: u64, scale: f64, count: usize) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| std::array::from_fn(|_| scale * rng.random_range(-1.0..1.0)))
        .collect()
}

fn h_numeric(a0: &Hooke, xi: &Sym2, opts: &NumericOptions) -> Result<f64> {
    let m = a0.matrix();
    let (_, a_max) = a0.bounds();
    let x = xi.to_vector();
    let size = x.norm();
    if size == 0.0 {
        return Ok(0.0);
    }
    let objective = |e: &[f64; 3]| {
        let eta = Vector3::from(*e);
        -(2.0 * x.dot(&eta) - g_numeric(&m, &Sym2::from_vector(&eta), opts.k_samples))
    };
    let two = [2.0 * x[0], 2.0 * x[1], 2.0 * x[2]];
    let mut starts = vec![[0.0; 3], two, [-two[0], -two[1], -two[2]]];
    starts.extend(random_starts(opts.seed, 2.0 * size * a_max, 2));
    let search = SearchOptions {
        tol: opts.rel_tol * (a_max * size * size).max(1e-300),
        max_iters: opts.max_iters,
        max_restarts: 6,
    };
    let best = minimize3(&objective, &starts, size * a_max, &search)?;
    Ok(-best.value)
}

/// h with the closed form for isotropic tensors and the numeric transform otherwise.
pub fn h_auto(a0: &Hooke, xi: &Sym2) -> Result<f64> {
    match *a0 {
        Hooke::Isotropic { mu, .. } => Ok(h_closed(a0, mu, xi)),
        Hooke::General { .. } => h_numeric(a0, xi, &NumericOptions::default()),
    }
}

fn check_alpha(alpha: f64, kappa: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Regime(format!(
            "the set K is defined only for 0 < α < ∞ (got α = {alpha})"
        )));
    }
    if !(kappa > 0.0) {
        return Err(Error::Parameter(format!("κ must be positive, got {kappa}")));
    }
    Ok(())
}

/// Membership in K = {g ≤ 2ακ} and the support function I_K*.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KSet {
    pub member: bool,
    pub support: f64,
}

pub fn k_set(a0: &Hooke, xi: &Sym2, alpha: f64, kappa: f64) -> Result<KSet> {
    check_alpha(alpha, kappa)?;
    Ok(KSet {
        member: g_auto(a0, xi) <= 2.0 * alpha * kappa,
        support: (2.0 * alpha * kappa * h_auto(a0, xi)?).sqrt(),
    })
}

pub fn wbar_recession(a0: &Hooke, xi: &Sym2, alpha: f64, kappa: f64) -> Result<f64> {
    check_alpha(alpha, kappa)?;
    Ok((2.0 * alpha * kappa * h_auto(a0, xi)?).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wbar {
    pub value: f64,
    pub tau: Sym2,
}

/// W̄_α(ξ) = min over τ of ½A1(ξ−τ):(ξ−τ) + √(2ακ h(τ)), with its minimizer.
///
/// When A1ξ lies in K the minimizer is τ = 0 and no search is run.
pub fn wbar(a0: &Hooke, a1: &Hooke, xi: &Sym2, alpha: f64, kappa: f64) -> Result<Wbar> {
    check_alpha(alpha, kappa)?;
    if g_auto(a0, &a1.apply(xi)) <= 2.0 * alpha * kappa {
        return Ok(Wbar {
            value: 0.5 * a1.quad(xi),
            tau: Sym2::zero(),
        });
    }
    wbar_descent(a0, a1, xi, alpha, kappa)
}

/// W̄_α by direct convex minimization, without the τ = 0 shortcut.
pub fn wbar_descent(a0: &Hooke, a1: &Hooke, xi: &Sym2, alpha: f64, kappa: f64) -> Result<Wbar> {
    check_alpha(alpha, kappa)?;
    let size = xi.norm();
    if size == 0.0 {
        return Ok(Wbar {
            value: 0.0,
            tau: Sym2::zero(),
        });
    }
    let c = 2.0 * alpha * kappa;
    let failure = std::cell::RefCell::new(None);
    let objective = |t: &[f64; 3]| {
        let tau = Sym2::from_coords(*t);
        let d = *xi - tau;
        let hv = match h_auto(a0, &tau) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::INFINITY
            }
        };
        0.5 * a1.quad(&d) + (c * hv.max(0.0)).sqrt()
    };
    let x = xi.coords();
    let starts = [[0.0; 3], x, [0.5 * x[0], 0.5 * x[1], 0.5 * x[2]]];
    let scale = 0.5 * a1.quad(xi) + (c * h_auto(a0, xi)?).sqrt();
    let search = SearchOptions {
        tol: 1e-13 * scale.max(1.0),
        max_iters: 10_000,
        max_restarts: 8,
    };
    let best = minimize3(&objective, &starts, 0.5 * size, &search)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Wbar {
        value: best.value,
        tau: Sym2::from_coords(best.x),
    })
}

/// Cohesive density φ_{α,β}.
pub fn phi(t: f64, alpha: f64, beta: f64, kappa: f64, theta0: f64) -> Result<f64> {
    for (name, v) in [("α", alpha), ("β", beta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Regime(format!("φ needs 0 < {name} < ∞, got {v}")));
        }
    }
    let s = theta0.sin();
    let t = t.abs();
    if t <= beta * s * (2.0 * kappa / alpha).sqrt() {
        Ok(alpha / (2.0 * beta * s) * t * t + beta * kappa * s)
    } else {
        Ok((2.0 * kappa * alpha).sqrt() * t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sqw {
    pub value: f64,
    pub theta: f64,
}

fn inverse_spd(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    m.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Parameter("A1 − εA0 is not positive definite".into()))
}

/// 𝓗_ε(θ, ξ) under the κ = 1, η_ε = ε normalization.
pub fn hs_bound(
    a0: &Hooke,
    a1: &Hooke,
    xi: &Sym2,
    eps: f64,
    theta: f64,
    opts: &NumericOptions,
) -> Result<f64> {
    let b = a1.matrix() - a0.matrix() * eps;
    let b_inv = inverse_spd(&b)?;
    hs_bound_with(a0, &b, &b_inv, xi, eps, theta, opts)
}

fn hs_bound_with(
    a0: &Hooke,
    b: &Matrix3<f64>,
    b_inv: &Matrix3<f64>,
    xi: &Sym2,
    eps: f64,
    theta: f64,
    opts: &NumericOptions,
) -> Result<f64> {
    let x = xi.to_vector();
    let base = eps * a0.quad(xi);
    if theta >= 1.0 {
        return Ok(base);
    }
    let bx = b * x;
    let inner = if theta <= 0.0 || x.norm() == 0.0 {
        bx.dot(&x)
    } else {
        let c = theta / eps;
        let objective = |t: &[f64; 3]| {
            let tau = Vector3::from(*t);
            -(2.0 * x.dot(&tau)
                - (b_inv * tau).dot(&tau)
                - c * g_auto(a0, &Sym2::from_vector(&tau)))
        };
        let two = 2.0 * x;
        let mut starts = vec![
            [0.0; 3],
            [two[0], two[1], two[2]],
            [-two[0], -two[1], -two[2]],
            [bx[0], bx[1], bx[2]],
        ];
        starts.extend(random_starts(opts.seed, two.norm(), 2));
        let scale = bx.dot(&x).max(1e-300);
        let search = SearchOptions {
            tol: opts.rel_tol * scale,
            max_iters: opts.max_iters,
            max_restarts: 4,
        };
        -minimize3(&objective, &starts, bx.norm().max(x.norm()), &search)?.value
    };
    Ok(base + (1.0 - theta) * inner)
}

/// SQW_ε(ξ) = min over θ of θ/ε + ½𝓗_ε(θ, ξ), under the κ = 1, η_ε = ε normalization.
pub fn sqw2d(a0: &Hooke, a1: &Hooke, xi: &Sym2, eps: f64, opts: &NumericOptions) -> Result<Sqw> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("ε must be positive, got {eps}")));
    }
    let b = a1.matrix() - a0.matrix() * eps;
    let b_inv = inverse_spd(&b)?;
    let f = |theta: f64| -> Result<f64> {
        Ok(theta / eps + 0.5 * hs_bound_with(a0, &b, &b_inv, xi, eps, theta, opts)?)
    };
    const GRID: usize = 512;
    let values = (0..=GRID)
        .into_par_iter()
        .map(|j| f(j as f64 / GRID as f64))
        .collect::<Result<Vec<f64>>>()?;
    let (j, &v) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is nonempty");
    let mut best = Sqw {
        value: v,
        theta: j as f64 / GRID as f64,
    };
    let lo = (j as f64 - 1.0).max(0.0) / GRID as f64;
    let hi = (j as f64 + 1.0).min(GRID as f64) / GRID as f64;
    let g = |t: f64| f(t).unwrap_or(f64::INFINITY);
    let (t, val) = golden_min(&g, lo, hi, 1e-9);
    if val < best.value {
        best = Sqw {
            value: val,
            theta: t,
        };
    }
    Ok(best)
}

/// Closed-form 1D relaxed density and optimal damage fraction (κ = 1, η_ε = ε).
pub fn sqw1d(xi: f64, eps: f64, a0: f64, a1: f64) -> Result<Sqw> {
    if !(eps > 0.0 && a0 > 0.0 && eps * a0 < a1) {
        return Err(Error::Parameter(format!(
            "sqw1d needs ε > 0 and 0 < εa0 < a1 (ε={eps}, a0={a0}, a1={a1})"
        )));
    }
    let x = xi.abs();
    let d = a1 - eps * a0;
    let theta = (eps * (a1 * a0 / (2.0 * d)).sqrt() * (x - (2.0 * a0 / (a1 * d)).sqrt())).max(0.0);
    if theta > 1.0 {
        return Err(Error::Parameter(format!(
            "damage fraction {theta} exceeds 1: |ξ| = {x} too large for ε = {eps}"
        )));
    }
    Ok(Sqw {
        value: sqw1d_energy(theta, xi, eps, a0, a1),
        theta,
    })
}

/// θ/ε + ½(θ/(εa0) + (1−θ)/a1)⁻¹ξ².
pub fn sqw1d_energy(theta: f64, xi: f64, eps: f64, a0: f64, a1: f64) -> f64 {
    theta / eps + 0.5 * xi * xi / (theta / (eps * a0) + (1.0 - theta) / a1)
}

/// 1D cohesive lower-bound density (κ = 1, h_ε = ε = η_ε).
pub fn phi1d(t: f64) -> f64 {
    let t = t.abs();
    if t <= SQRT_2 {
        1.0 + 0.5 * t * t
    } else {
        SQRT_2 * t
    }
}
