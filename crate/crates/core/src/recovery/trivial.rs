use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MeshClass, RecoveryOutput};
use crate::densities::{Hooke, RegimeParams};
use crate::error::{Error, Result};
use crate::fem::{strain, DamageField, DisplacementField, EnergyBreakdown};
use crate::mesh::{bisect_longest_edges, validate, AdmissibilityReport, Point2, Triangulation};

/// Piecewise-constant field on the N×N grid of (0,1)², row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    pub n: usize,
    pub values: Vec<[f64; 2]>,
}

impl PiecewiseConstant {
    pub fn new(n: usize, values: Vec<[f64; 2]>) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(Error::Parameter(format!(
                "piecewise-constant field needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn value(&self, i: usize, j: usize) -> [f64; 2] {
        self.values[j * self.n + i]
    }

    fn max_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }
}

/// Cut-off construction on a structured grid, kept implicit.
///
/// The coarse grid has `n * n_eps` cells of side `pitch` per direction, each
/// split along its rising diagonal; the admissible mesh refines every
/// coarse triangle `refine_steps` times by longest-edge bisection.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivialRecovery {
    pub target: PiecewiseConstant,
    pub delta: f64,
    pub n_eps: usize,
    pub pitch: f64,
    pub refine_steps: usize,
    pub declared: MeshClass,
}

pub fn recover_trivial(u: &PiecewiseConstant, params: &RegimeParams) -> Result<TrivialRecovery> {
    params.validate()?;
    let delta = (params.eps * (params.eta + params.h)).sqrt();
    let n = u.n;
    if !(delta < 0.5 / n as f64) {
        return Err(Error::Parameter(format!(
            "δ_ε = {delta} is not below 1/(2N) = {}; ε too large",
            0.5 / n as f64
        )));
    }
    let n_eps = (1.0 / (delta * n as f64)).floor() as usize;
    let pitch = 1.0 / (n_eps * n) as f64;
    let mut refine_steps = 0;
    while params.h / delta <= std::f64::consts::FRAC_1_SQRT_2.powi(refine_steps as i32 + 1) {
        refine_steps += 1;
    }
    Ok(TrivialRecovery {
        target: u.clone(),
        delta,
        n_eps,
        pitch,
        refine_steps,
        declared: MeshClass::of(params),
    })
}

impl TrivialRecovery {
    /// Cells per side of the coarse grid.
    pub fn cells(&self) -> usize {
        self.target.n * self.n_eps
    }

    fn vertex_value(&self, a: usize, b: usize) -> [f64; 2] {
        let k = self.n_eps;
        if a % k == 0 || b % k == 0 {
            return [0.0, 0.0];
        }
        self.target.value(a / k, b / k)
    }

    fn damaged_cell(&self, i: usize, j: usize) -> bool {
        let k = self.n_eps;
        [i % k, j % k].iter().any(|&r| r == 0 || r == k - 1)
    }

    fn point(&self, a: usize, b: usize) -> Point2 {
        Point2::new(a as f64 * self.pitch, b as f64 * self.pitch)
    }

    /// Damaged cells of big cell (bi, bj), in a fixed order.
    fn frame_cells(&self, bi: usize, bj: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.n_eps;
        (0..k)
            .flat_map(move |j| (0..k).map(move |i| (i, j)))
            .filter(move |&(i, j)| i == 0 || j == 0 || i == k - 1 || j == k - 1)
            .map(move |(i, j)| (bi * k + i, bj * k + j))
    }

    fn cell_triangles(&self, i: usize, j: usize) -> [[(usize, usize); 3]; 2] {
        let (a, b, c, d) = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1));
        [[a, b, c], [a, c, d]]
    }

    /// Energy of the construction, streamed over the damaged frame only.
    pub fn energy(&self, a0: &Hooke, params: &RegimeParams) -> Result<EnergyBreakdown> {
        let n = self.target.n;
        let area = 0.5 * self.pitch * self.pitch;
        let parts = (0..n * n)
            .into_par_iter()
            .map(|big| -> Result<f64> {
                let mut acc = 0.0;
                for (i, j) in self.frame_cells(big % n, big / n) {
                    for tri in self.cell_triangles(i, j) {
                        let p = tri.map(|(a, b)| self.point(a, b));
                        let u = tri.map(|(a, b)| self.vertex_value(a, b));
                        acc += 0.5 * params.eta * a0.quad(&strain(&p, &u)?) * area;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        let damaged_elastic = parts.iter().sum();
        Ok(EnergyBreakdown::from_parts(
            0.0,
            damaged_elastic,
            params.kappa / params.eps * self.chi_mass(),
        ))
    }

    /// ‖χ_ε‖_{L¹}.
    pub fn chi_mass(&self) -> f64 {
        let n = self.target.n as f64;
        let l = self.pitch;
        4.0 * n * l - 4.0 * n * n * l * l
    }

    /// C with energy ≤ C(η_ε/δ_ε + δ_ε/ε).
    pub fn bound_constant(&self, a0: &Hooke, kappa: f64) -> f64 {
        let (_, upper) = a0.bounds();
        let u = self.target.max_norm();
        8.0 * self.target.n as f64 * (upper * u * u).max(kappa)
    }

    pub fn bound(&self, a0: &Hooke, params: &RegimeParams) -> f64 {
        self.bound_constant(a0, params.kappa) * (params.eta / self.delta + self.delta / params.eps)
    }

    fn build(
        &self,
        cells: impl Iterator<Item = (usize, usize)>,
        origin: (usize, usize),
        span: usize,
    ) -> Triangulation {
        let idx = |a: usize, b: usize| (b - origin.1) * (span + 1) + (a - origin.0);
        let mut vertices = Vec::with_capacity((span + 1) * (span + 1));
        for b in origin.1..=origin.1 + span {
            for a in origin.0..=origin.0 + span {
                vertices.push(self.point(a, b));
            }
        }
        let mut triangles = Vec::new();
        let mut tags = Vec::new();
        for (i, j) in cells {
            let tag = u8::from(self.damaged_cell(i, j));
            for tri in self.cell_triangles(i, j) {
                triangles.push(tri.map(|(a, b)| idx(a, b)));
                tags.push(tag);
            }
        }
        let mut mesh = Triangulation::new(vertices, triangles, Some(tags));
        for _ in 0..self.refine_steps {
            mesh = bisect_longest_edges(&mesh);
        }
        mesh
    }

    /// Explicit refined mesh with fields; fails above `max_triangles`.
    pub fn materialize(&self, max_triangles: usize) -> Result<RecoveryOutput> {
        let m = self.cells();
        let count = 2 * m * m * (1usize << self.refine_steps.min(62));
        if self.refine_steps >= 62 || count > max_triangles {
            return Err(Error::Budget(format!(
                "refined mesh would have {count} triangles (limit {max_triangles})"
            )));
        }
        let mesh = self.build((0..m).flat_map(|j| (0..m).map(move |i| (i, j))), (0, 0), m);
        let values = mesh.vertices.iter().map(|p| self.value_at(*p)).collect();
        let chi = DamageField::from_tags(&mesh);
        Ok(RecoveryOutput {
            mesh,
            u: DisplacementField { values },
            chi,
            predicted_limit: 0.0,
            clip: None,
            window_measure: 1.0,
            declared: self.declared,
            predicted_rate_note: "energy O(η_ε/δ_ε + δ_ε/ε)".into(),
        })
    }

    /// Value of the coarse P1 interpolant at p.
    pub fn value_at(&self, p: Point2) -> [f64; 2] {
        let m = self.cells();
        let (x, y) = (p.x / self.pitch, p.y / self.pitch);
        let i = (x.floor().max(0.0) as usize).min(m - 1);
        let j = (y.floor().max(0.0) as usize).min(m - 1);
        let (fx, fy) = (x - i as f64, y - j as f64);
        let u00 = self.vertex_value(i, j);
        let u10 = self.vertex_value(i + 1, j);
        let u11 = self.vertex_value(i + 1, j + 1);
        let u01 = self.vertex_value(i, j + 1);
        let mut out = [0.0; 2];
        for c in 0..2 {
            out[c] = if fx >= fy {
                u00[c] + fx * (u10[c] - u00[c]) + fy * (u11[c] - u10[c])
            } else {
                u00[c] + fy * (u01[c] - u00[c]) + fx * (u11[c] - u01[c])
            };
        }
        out
    }

    /// Validates a 2×2-cell corner patch of the refined mesh; every coarse
    /// cell is congruent, so this covers all element shapes and interfaces.
    pub fn validate_patch(&self) -> AdmissibilityReport {
        let span = 2.min(self.cells());
        let mesh = self.build(
            (0..span).flat_map(|j| (0..span).map(move |i| (i, j))),
            (0, 0),
            span,
        );
        validate(
            &mesh,
            self.declared.h,
            self.declared.omega_factor,
            self.declared.theta0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::Limit;

    fn params(eps: f64) -> RegimeParams {
        RegimeParams {
            kappa: 1.0,
            eps,
            eta: eps * eps,
            h: eps * eps,
            omega_factor: 6.0,
            theta0: 30f64.to_radians(),
            alpha: Limit::Finite(0.0),
            beta: Limit::Finite(0.0),
        }
    }

    fn target() -> PiecewiseConstant {
        PiecewiseConstant::new(2, vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.5], [0.3, 0.3]]).unwrap()
    }

    #[test]
    fn streamed_matches_materialized() {
        let p = params(0.05);
        let r = recover_trivial(&target(), &p).unwrap();
        let a0 = Hooke::isotropic(1.0, 1.0);
        let out = r.materialize(1 << 22).unwrap();
        let full = out.energy(&a0, &a0, &p).unwrap();
        let streamed = r.energy(&a0, &p).unwrap();
        assert!((full.total - streamed.total).abs() < 1e-10 * full.total);
        assert!((out.chi.damaged_area(&out.mesh) - r.chi_mass()).abs() < 1e-12);
        assert!(
            out.validate().valid,
            "{:?}",
            out.validate().violations.first()
        );
        assert!(r.validate_patch().valid);
    }

    #[test]
    fn mass_and_bound() {
        for eps in [0.1, 0.01, 0.001] {
            let p = params(eps);
            let r = recover_trivial(&target(), &p).unwrap();
            assert!(r.delta <= r.pitch && r.pitch <= 2.0 * r.delta);
            assert!(r.chi_mass() <= 8.0 * 2.0 * r.delta);
            let a0 = Hooke::isotropic(1.0, 1.0);
            let e = r.energy(&a0, &p).unwrap();
            assert!(e.total <= r.bound(&a0, &p));
        }
    }

    #[test]
    fn too_coarse_rejected() {
        let p = params(0.9);
        assert!(recover_trivial(&target(), &p).is_err());
    }
}
