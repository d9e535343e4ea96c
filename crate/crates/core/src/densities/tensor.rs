use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric 2×2 matrix with a single stored off-diagonal entry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Sym2 {
    pub const fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Self { xx, yy, xy }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 1.0, 0.0)
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, b, 0.0)
    }

    /// Coordinates in the orthonormal basis (xx, yy, √2·xy).
    pub fn coords(&self) -> [f64; 3] {
        [self.xx, self.yy, std::f64::consts::SQRT_2 * self.xy]
    }

    pub fn from_coords(c: [f64; 3]) -> Self {
        Self::new(c[0], c[1], c[2] / std::f64::consts::SQRT_2)
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::from(self.coords())
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::from_coords([v[0], v[1], v[2]])
    }

    /// Symmetric dyad a ⊙ b = (a⊗b + b⊗a)/2.
    pub fn sym_dyad(a: [f64; 2], b: [f64; 2]) -> Self {
        Self::new(a[0] * b[0], a[1] * b[1], 0.5 * (a[0] * b[1] + a[1] * b[0]))
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Frobenius product ξ:ζ.
    pub fn dot(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + self.yy * other.yy + 2.0 * self.xy * other.xy
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    /// Ordered eigenvalues (ξ1 ≤ ξ2).
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * (self.xx + self.yy);
        let r = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (m - r, m + r)
    }

    /// Ordered eigenvalues with unit eigenvectors (v1 for ξ1, v2 for ξ2).
    /// Multiples of the identity return the canonical basis (e₁ for ξ1).
    pub fn eigen(&self) -> ((f64, f64), [f64; 2], [f64; 2]) {
        let (l1, l2) = self.eigenvalues();
        let r = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        if r <= 1e-15 * self.norm() || r == 0.0 {
            return ((l1, l2), [1.0, 0.0], [0.0, 1.0]);
        }
        let phi = 0.5 * (2.0 * self.xy).atan2(self.xx - self.yy);
        let v2 = [phi.cos(), phi.sin()];
        let v1 = [-v2[1], v2[0]];
        ((l1, l2), v1, v2)
    }

    pub fn to_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.xx, self.xy, self.xy, self.yy)
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.yy + o.yy, self.xy + o.xy)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.yy - o.yy, self.xy - o.xy)
    }
}

impl Neg for Sym2 {
    type Output = Sym2;
    fn neg(self) -> Sym2 {
        Sym2::new(-self.xx, -self.yy, -self.xy)
    }
}

impl Mul<f64> for Sym2 {
    type Output = Sym2;
    fn mul(self, s: f64) -> Sym2 {
        Sym2::new(self.xx * s, self.yy * s, self.xy * s)
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, x: Sym2) -> Sym2 {
        x * self
    }
}

/// Fourth-order stiffness tensor acting on symmetric 2×2 matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hooke {
    /// Aξ = 2μξ + λ tr(ξ) I.
    Isotropic { lambda: f64, mu: f64 },
    /// SPD matrix in the orthonormal basis (xx, yy, √2·xy).
    General { matrix: [[f64; 3]; 3] },
}

impl Hooke {
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        Hooke::Isotropic { lambda, mu }
    }

    pub fn general(matrix: [[f64; 3]; 3]) -> Self {
        Hooke::General { matrix }
    }

    /// c·Id.
    pub fn scaled_identity(c: f64) -> Self {
        Hooke::General {
            matrix: [[c, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, c]],
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self, Hooke::Isotropic { .. })
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        match *self {
            Hooke::Isotropic { lambda, mu } => {
                let t = Vector3::new(1.0, 1.0, 0.0);
                Matrix3::identity() * (2.0 * mu) + t * t.transpose() * lambda
            }
            Hooke::General { matrix } => Matrix3::from_fn(|i, j| matrix[i][j]),
        }
    }

    /// Checks symmetry, finiteness and positive definiteness.
    pub fn validate(&self) -> Result<()> {
        if let Hooke::Isotropic { lambda, mu } = *self {
            if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
                return Err(Error::Parameter(format!(
                    "isotropic tensor needs λ, μ > 0 (got λ={lambda}, μ={mu})"
                )));
            }
        }
        let m = self.matrix();
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("tensor has non-finite entries".into()));
        }
        if (m - m.transpose()).abs().max() > 1e-12 * m.abs().max().max(1.0) {
            return Err(Error::Parameter("tensor matrix is not symmetric".into()));
        }
        let (lo, _) = self.bounds();
        if lo <= 0.0 {
            return Err(Error::Parameter(format!(
                "tensor is not positive definite (smallest eigenvalue {lo})"
            )));
        }
        Ok(())
    }

    /// (a, a') with a·Id ≤ A ≤ a'·Id.
    pub fn bounds(&self) -> (f64, f64) {
        let eig = SymmetricEigen::new(self.matrix()).eigenvalues;
        (eig.min(), eig.max())
    }

    pub fn apply(&self, xi: &Sym2) -> Sym2 {
        match *self {
            Hooke::Isotropic { lambda, mu } => {
                let t = lambda * xi.trace();
                Sym2::new(2.0 * mu * xi.xx + t, 2.0 * mu * xi.yy + t, 2.0 * mu * xi.xy)
            }
            Hooke::General { .. } => Sym2::from_vector(&(self.matrix() * xi.to_vector())),
        }
    }

    /// Aξ:ξ.
    pub fn quad(&self, xi: &Sym2) -> f64 {
        self.apply(xi).dot(xi)
    }

    /// λ + 2μ for isotropic tensors.
    pub fn p_wave_modulus(&self) -> Option<f64> {
        match *self {
            Hooke::Isotropic { lambda, mu } => Some(lambda + 2.0 * mu),
            Hooke::General { .. } => None,
        }
    }
}

pub fn apply_hooke(a: &Hooke, xi: &Sym2) -> Sym2 {
    a.apply(xi)
}

pub fn quad_form(a: &Hooke, xi: &Sym2) -> f64 {
    a.quad(xi)
}
