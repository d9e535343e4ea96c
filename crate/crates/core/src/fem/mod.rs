//! P1 vector finite elements: strains, the discrete energy, the optimal
//! damage indicator, the elastic solve and alternating minimization.

mod clip;
mod solver;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{Hooke, RegimeParams, Sym2};
use crate::error::{Error, Result};
use crate::mesh::{cross, Point2, Rect, Triangulation};
pub use clip::clipped_area;
pub use solver::SolverOptions;

const CHUNK: usize = 4096;

/// Nodal values of a continuous piecewise-affine vector field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementField {
    pub values: Vec<[f64; 2]>,
}

impl DisplacementField {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![[0.0; 2]; n],
        }
    }
}

/// Per-triangle damage indicator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DamageField {
    pub chi: Vec<bool>,
}

impl DamageField {
    pub fn sound(n: usize) -> Self {
        Self {
            chi: vec![false; n],
        }
    }

    /// χ = 1 on triangles tagged 1.
    pub fn from_tags(mesh: &Triangulation) -> Self {
        Self {
            chi: (0..mesh.n_triangles()).map(|t| mesh.tag(t) == 1).collect(),
        }
    }

    pub fn damaged_area(&self, mesh: &Triangulation) -> f64 {
        self.chi
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(t, _)| mesh.area(t))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub sound_elastic: f64,
    pub damaged_elastic: f64,
    pub dissipation: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn from_parts(sound_elastic: f64, damaged_elastic: f64, dissipation: f64) -> Self {
        Self {
            sound_elastic,
            damaged_elastic,
            dissipation,
            total: sound_elastic + damaged_elastic + dissipation,
        }
    }
}

/// Prescribed displacements by vertex.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dirichlet {
    pub values: BTreeMap<usize, [f64; 2]>,
}

impl Dirichlet {
    /// Boundary values of `f` on every boundary vertex.
    pub fn from_fn(mesh: &Triangulation, f: impl Fn(Point2) -> [f64; 2]) -> Self {
        Self {
            values: mesh
                .boundary
                .iter()
                .map(|&v| (v, f(mesh.vertices[v])))
                .collect(),
        }
    }

    /// Trace of a discrete field on the boundary.
    pub fn from_field(mesh: &Triangulation, u: &DisplacementField) -> Self {
        Self {
            values: mesh.boundary.iter().map(|&v| (v, u.values[v])).collect(),
        }
    }
}

fn check_field(mesh: &Triangulation, u: &DisplacementField) -> Result<()> {
    if u.values.len() != mesh.n_vertices() {
        return Err(Error::Usage(format!(
            "displacement has {} values for {} vertices",
            u.values.len(),
            mesh.n_vertices()
        )));
    }
    Ok(())
}

fn check_damage(mesh: &Triangulation, chi: &DamageField) -> Result<()> {
    if chi.chi.len() != mesh.n_triangles() {
        return Err(Error::Usage(format!(
            "damage field has {} values for {} triangles",
            chi.chi.len(),
            mesh.n_triangles()
        )));
    }
    Ok(())
}

/// Gradients of the three barycentric basis functions and twice the area.
pub(crate) fn basis_gradients(p: &[Point2; 3]) -> Option<([[f64; 2]; 3], f64)> {
    let a2 = cross(&p[0], &p[1], &p[2]);
    if !(a2.abs() > 0.0) || !a2.is_finite() {
        return None;
    }
    let g = |i: usize, j: usize| [(p[i].y - p[j].y) / a2, (p[j].x - p[i].x) / a2];
    Some(([g(1, 2), g(2, 0), g(0, 1)], a2))
}

/// Symmetric gradient of nodal values on a triangle.
pub fn strain(p: &[Point2; 3], u: &[[f64; 2]; 3]) -> Result<Sym2> {
    let (g, _) = basis_gradients(p).ok_or_else(|| Error::Geometry("degenerate triangle".into()))?;
    let mut d = [[0.0; 2]; 2];
    for i in 0..3 {
        for c in 0..2 {
            for j in 0..2 {
                d[c][j] += u[i][c] * g[i][j];
            }
        }
    }
    Ok(Sym2::new(d[0][0], d[1][1], 0.5 * (d[0][1] + d[1][0])))
}

/// e(u) on triangle `t`.
pub fn sym_grad(mesh: &Triangulation, u: &DisplacementField, t: usize) -> Result<Sym2> {
    check_field(mesh, u)?;
    let tri = mesh
        .triangles
        .get(t)
        .ok_or_else(|| Error::Usage(format!("triangle index {t} out of range")))?;
    strain(&mesh.corners(t), &tri.map(|v| u.values[v]))
}

/// Discrete energy ½∫(ηχA0 + (1−χ)A1)e:e + (κ/ε)∫χ, integrated exactly,
/// optionally over the intersection with `clip`.
pub fn energy(
    mesh: &Triangulation,
    u: &DisplacementField,
    chi: &DamageField,
    a0: &Hooke,
    a1: &Hooke,
    params: &RegimeParams,
    clip: Option<&Rect>,
) -> Result<EnergyBreakdown> {
    check_field(mesh, u)?;
    check_damage(mesh, chi)?;
    let idx: Vec<usize> = (0..mesh.n_triangles()).collect();
    let partial = idx
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<[f64; 3]> {
            let mut acc = [0.0; 3];
            for &t in chunk {
                let p = mesh.corners(t);
                let area = match clip {
                    Some(r) => clipped_area(&p, r),
                    None => 0.5 * cross(&p[0], &p[1], &p[2]),
                };
                let e = strain(&p, &mesh.triangles[t].map(|v| u.values[v]))?;
                if chi.chi[t] {
                    acc[1] += 0.5 * params.eta * a0.quad(&e) * area;
                    acc[2] += params.kappa / params.eps * area;
                } else {
                    acc[0] += 0.5 * a1.quad(&e) * area;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = [0.0; 3];
    for p in partial {
        for k in 0..3 {
            s[k] += p[k];
        }
    }
    Ok(EnergyBreakdown::from_parts(s[0], s[1], s[2]))
}

/// χ = 1 exactly where ½A1e:e > ½ηA0e:e + κ/ε; ties stay sound.
pub fn optimal_chi(
    mesh: &Triangulation,
    u: &DisplacementField,
    a0: &Hooke,
    a1: &Hooke,
    params: &RegimeParams,
) -> Result<DamageField> {
    check_field(mesh, u)?;
    let chi = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let e = sym_grad(mesh, u, t)?;
            Ok(0.5 * a1.quad(&e) > 0.5 * params.eta * a0.quad(&e) + params.kappa / params.eps)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(DamageField { chi })
}

/// Minimizes the elastic part of the energy at fixed χ subject to `dirichlet`.
pub fn solve_elastic(
    mesh: &Triangulation,
    chi: &DamageField,
    dirichlet: &Dirichlet,
    a0: &Hooke,
    a1: &Hooke,
    params: &RegimeParams,
    opts: &SolverOptions,
    initial: Option<&DisplacementField>,
) -> Result<DisplacementField> {
    check_damage(mesh, chi)?;
    if !(params.eta > 0.0) {
        return Err(Error::Precondition("the elastic solve needs η > 0".into()));
    }
    if let Some(&v) = mesh
        .boundary
        .iter()
        .find(|v| !dirichlet.values.contains_key(v))
    {
        return Err(Error::Precondition(format!(
            "boundary vertex {v} has no Dirichlet value"
        )));
    }
    if let Some(u0) = initial {
        check_field(mesh, u0)?;
    }
    solver::solve(mesh, chi, dirichlet, a0, a1, params, opts, initial)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltMinOptions {
    pub max_iters: usize,
    pub energy_tol: f64,
    pub solver: SolverOptions,
}

impl Default for AltMinOptions {
    fn default() -> Self {
        Self {
            max_iters: 50,
            energy_tol: 1e-10,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AltMinOutcome {
    pub u: DisplacementField,
    pub chi: DamageField,
    /// Energy after every half-step, starting with the first solve.
    pub history: Vec<EnergyBreakdown>,
    pub iterations: usize,
}

/// Alternates the elastic solve and the optimal damage update from `chi_init`.
pub fn alt_minimize(
    mesh: &Triangulation,
    dirichlet: &Dirichlet,
    a0: &Hooke,
    a1: &Hooke,
    params: &RegimeParams,
    chi_init: &DamageField,
    opts: &AltMinOptions,
) -> Result<AltMinOutcome> {
    let e = |u: &DisplacementField, chi: &DamageField| energy(mesh, u, chi, a0, a1, params, None);
    let mut chi = chi_init.clone();
    let mut u = solve_elastic(mesh, &chi, dirichlet, a0, a1, params, &opts.solver, None)?;
    let mut history = vec![e(&u, &chi)?];
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let before = history.last().expect("nonempty").total;
        let next_chi = optimal_chi(mesh, &u, a0, a1, params)?;
        history.push(e(&u, &next_chi)?);
        if next_chi == chi {
            break;
        }
        chi = next_chi;
        u = solve_elastic(
            mesh,
            &chi,
            dirichlet,
            a0,
            a1,
            params,
            &opts.solver,
            Some(&u),
        )?;
        history.push(e(&u, &chi)?);
        if before - history.last().expect("nonempty").total < opts.energy_tol {
            break;
        }
    }
    Ok(AltMinOutcome {
        u,
        chi,
        history,
        iterations,
    })
}

/// Nodal (Lagrange) interpolation.
pub fn interpolate(
    mesh: &Triangulation,
    v: impl Fn(Point2) -> [f64; 2] + Sync,
) -> DisplacementField {
    DisplacementField {
        values: mesh.vertices.par_iter().map(|p| v(*p)).collect(),
    }
}

/// ∫|∇u_h − ∇v|² with the edge-midpoint rule, exact when ∇v is affine.
pub fn gradient_error_sq(
    mesh: &Triangulation,
    u: &DisplacementField,
    grad: impl Fn(Point2) -> [[f64; 2]; 2] + Sync,
) -> Result<f64> {
    check_field(mesh, u)?;
    let parts = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let p = mesh.corners(t);
            let (g, a2) =
                basis_gradients(&p).ok_or_else(|| Error::Geometry("degenerate triangle".into()))?;
            let vals = mesh.triangles[t].map(|v| u.values[v]);
            let mut du = [[0.0; 2]; 2];
            for i in 0..3 {
                for c in 0..2 {
                    for j in 0..2 {
                        du[c][j] += vals[i][c] * g[i][j];
                    }
                }
            }
            let mut s = 0.0;
            for k in 0..3 {
                let (a, b) = (p[k], p[(k + 1) % 3]);
                let dv = grad(Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)));
                for c in 0..2 {
                    for j in 0..2 {
                        s += (du[c][j] - dv[c][j]).powi(2);
                    }
                }
            }
            Ok(s / 3.0 * 0.5 * a2.abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum())
}
