use serde::{Deserialize, Serialize};

use super::{MeshClass, RecoveryOutput};
use crate::densities::{Hooke, RegimeParams, Sym2};
use crate::error::{Error, Result};
use crate::fem::{interpolate, DamageField};
use crate::mesh::{uniform_mesh, Point2};

/// Smooth displacement with an exact gradient.
pub trait VectorField: Sync {
    fn value(&self, p: Point2) -> [f64; 2];
    /// Row c holds ∇u_c.
    fn gradient(&self, p: Point2) -> [[f64; 2]; 2];

    fn sym_grad(&self, p: Point2) -> Sym2 {
        let g = self.gradient(p);
        Sym2::new(g[0][0], g[1][1], 0.5 * (g[0][1] + g[1][0]))
    }
}

/// c·x^px·y^py.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub px: u32,
    pub py: u32,
}

/// Vector field with polynomial components.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolynomialField {
    pub ux: Vec<Monomial>,
    pub uy: Vec<Monomial>,
}

impl PolynomialField {
    /// u(x) = ξx.
    pub fn affine(xi: Sym2) -> Self {
        let m = |coef, px, py| Monomial { coef, px, py };
        Self {
            ux: vec![m(xi.xx, 1, 0), m(xi.xy, 0, 1)],
            uy: vec![m(xi.xy, 1, 0), m(xi.yy, 0, 1)],
        }
    }

    /// Highest total degree.
    pub fn degree(&self) -> u32 {
        self.ux
            .iter()
            .chain(&self.uy)
            .map(|m| m.px + m.py)
            .max()
            .unwrap_or(0)
    }
}

fn powi(x: f64, k: u32) -> f64 {
    x.powi(k as i32)
}

fn eval(terms: &[Monomial], p: Point2) -> f64 {
    terms
        .iter()
        .map(|m| m.coef * powi(p.x, m.px) * powi(p.y, m.py))
        .sum()
}

fn grad(terms: &[Monomial], p: Point2) -> [f64; 2] {
    let mut g = [0.0; 2];
    for m in terms {
        if m.px > 0 {
            g[0] += m.coef * m.px as f64 * powi(p.x, m.px - 1) * powi(p.y, m.py);
        }
        if m.py > 0 {
            g[1] += m.coef * m.py as f64 * powi(p.x, m.px) * powi(p.y, m.py - 1);
        }
    }
    g
}

impl VectorField for PolynomialField {
    fn value(&self, p: Point2) -> [f64; 2] {
        [eval(&self.ux, p), eval(&self.uy, p)]
    }

    fn gradient(&self, p: Point2) -> [[f64; 2]; 2] {
        [grad(&self.ux, p), grad(&self.uy, p)]
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (x + 1.0), 0.5 * w)
        })
        .collect()
}

/// ½∫_{(0,1)²} A1 e(v):e(v), exact for polynomials of degree ≤ 16.
pub(crate) fn elastic_limit(v: &dyn VectorField, a1: &Hooke) -> f64 {
    let q = gauss_legendre(10);
    let mut s = 0.0;
    for &(x, wx) in &q {
        for &(y, wy) in &q {
            s += wx * wy * 0.5 * a1.quad(&v.sym_grad(Point2::new(x, y)));
        }
    }
    s
}

/// Lagrange interpolation on a uniform mesh of pitch in [h, 2h).
pub fn recover_elastic(
    v: &dyn VectorField,
    a1: &Hooke,
    params: &RegimeParams,
) -> Result<RecoveryOutput> {
    if !(params.h > 0.0 && params.h <= 1.0) {
        return Err(Error::Parameter(format!(
            "h must lie in (0, 1], got {}",
            params.h
        )));
    }
    let n = (1.0 / params.h * (1.0 + 1e-12)).floor().max(1.0) as usize;
    let mesh = uniform_mesh(n, 0);
    let u = interpolate(&mesh, |p| v.value(p));
    let chi = DamageField::sound(mesh.n_triangles());
    Ok(RecoveryOutput {
        mesh,
        u,
        chi,
        predicted_limit: elastic_limit(v, a1),
        clip: None,
        window_measure: 1.0,
        declared: MeshClass::of(params),
        predicted_rate_note: "interpolation error O(h) in H¹".into(),
    })
}
