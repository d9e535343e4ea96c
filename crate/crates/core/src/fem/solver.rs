use nalgebra::{Matrix3, SMatrix};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{basis_gradients, DamageField, Dirichlet, DisplacementField, CHUNK};
use crate::densities::{Hooke, RegimeParams};
use crate::error::{Error, Result};
use crate::mesh::Triangulation;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target relative residual ‖r‖/‖b‖.
    pub rel_tol: f64,
    /// Iteration cap; 0 selects 20·n + 1000 for n unknowns.
    pub max_iters: usize,
    /// Parallel matrix-vector products.
    pub parallel: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iters: 0,
            parallel: false,
        }
    }
}

type Elem = SMatrix<f64, 6, 6>;

fn element_stiffness(p: &[crate::mesh::Point2; 3], c: &Matrix3<f64>) -> Result<Elem> {
    let (g, a2) =
        basis_gradients(p).ok_or_else(|| Error::Geometry("degenerate triangle".into()))?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = SMatrix::<f64, 3, 6>::zeros();
    for i in 0..3 {
        b[(0, 2 * i)] = g[i][0];
        b[(1, 2 * i + 1)] = g[i][1];
        b[(2, 2 * i)] = r * g[i][1];
        b[(2, 2 * i + 1)] = r * g[i][0];
    }
    Ok(b.transpose() * c * b * (0.5 * a2.abs()))
}

struct Reduced {
    matrix: CsrMatrix<f64>,
    rhs: Vec<f64>,
    free: Vec<usize>,
}

fn assemble(
    mesh: &Triangulation,
    chi: &DamageField,
    dirichlet: &Dirichlet,
    a0: &Hooke,
    a1: &Hooke,
    params: &RegimeParams,
) -> Result<(Reduced, Vec<Option<[f64; 2]>>)> {
    let n_dof = 2 * mesh.n_vertices();
    let mut fixed: Vec<Option<[f64; 2]>> = vec![None; mesh.n_vertices()];
    for (&v, &val) in &dirichlet.values {
        if v >= mesh.n_vertices() {
            return Err(Error::Usage(format!("Dirichlet vertex {v} out of range")));
        }
        fixed[v] = Some(val);
    }
    let mut map = vec![usize::MAX; n_dof];
    let mut free = Vec::new();
    for v in 0..mesh.n_vertices() {
        if fixed[v].is_none() {
            for c in 0..2 {
                map[2 * v + c] = free.len();
                free.push(2 * v + c);
            }
        }
    }
    let (c_damaged, c_sound) = (a0.matrix() * params.eta, a1.matrix());
    let idx: Vec<usize> = (0..mesh.n_triangles()).collect();
    type Chunk = (Vec<(usize, usize, f64)>, Vec<(usize, f64)>);
    let chunks = idx
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<Chunk> {
            let mut trip = Vec::with_capacity(chunk.len() * 36);
            let mut rhs = Vec::new();
            for &t in chunk {
                let tri = mesh.triangles[t];
                let c = if chi.chi[t] { &c_damaged } else { &c_sound };
                let k = element_stiffness(&mesh.corners(t), c)?;
                for a in 0..6 {
                    let ga = 2 * tri[a / 2] + a % 2;
                    let ia = map[ga];
                    if ia == usize::MAX {
                        continue;
                    }
                    for bcol in 0..6 {
                        let vb = tri[bcol / 2];
                        match fixed[vb] {
                            None => trip.push((ia, map[2 * vb + bcol % 2], k[(a, bcol)])),
                            Some(val) => rhs.push((ia, -k[(a, bcol)] * val[bcol % 2])),
                        }
                    }
                }
            }
            Ok((trip, rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = free.len();
    let mut coo = CooMatrix::new(n, n);
    let mut rhs = vec![0.0; n];
    for (trip, r) in chunks {
        for (i, j, v) in trip {
            coo.push(i, j, v);
        }
        for (i, v) in r {
            rhs[i] += v;
        }
    }
    Ok((
        Reduced {
            matrix: CsrMatrix::from(&coo),
            rhs,
            free,
        },
        fixed,
    ))
}

fn matvec(a: &CsrMatrix<f64>, x: &[f64], y: &mut [f64], parallel: bool) {
    let (offsets, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    let row = |i: usize| -> f64 {
        (offsets[i]..offsets[i + 1])
            .map(|k| vals[k] * x[cols[k]])
            .sum()
    };
    if parallel {
        y.par_iter_mut()
            .enumerate()
            .for_each(|(i, yi)| *yi = row(i));
    } else {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = row(i);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients.
fn pcg(a: &CsrMatrix<f64>, b: &[f64], x: &mut [f64], opts: &SolverOptions) -> Result<usize> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if n == 0 {
        return Ok(0);
    }
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut diag = vec![0.0; n];
    for (i, j, v) in a.triplet_iter() {
        if i == j {
            diag[i] += *v;
        }
    }
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Precondition(
            "stiffness matrix has a non-positive diagonal entry".into(),
        ));
    }
    let cap = if opts.max_iters == 0 {
        20 * n + 1000
    } else {
        opts.max_iters
    };
    let mut r = vec![0.0; n];
    matvec(a, x, &mut r, opts.parallel);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    for it in 0..cap {
        let res = dot(&r, &r).sqrt() / b_norm;
        if history.len() < 64 || it % 100 == 0 {
            history.push(res);
        }
        if res <= opts.rel_tol {
            return Ok(it);
        }
        matvec(a, &p, &mut ap, opts.parallel);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let final_residual = dot(&r, &r).sqrt() / b_norm;
    if final_residual <= opts.rel_tol {
        return Ok(cap);
    }
    history.push(final_residual);
    Err(Error::Solver {
        iterations: cap,
        final_residual,
        residual_history: history,
    })
}

pub(super) fn solve(
    mesh: &Triangulation,
    chi: &DamageField,
    dirichlet: &Dirichlet,
    a0: &Hooke,
    a1: &Hooke,
    params: &RegimeParams,
    opts: &SolverOptions,
    initial: Option<&DisplacementField>,
) -> Result<DisplacementField> {
    let (reduced, fixed) = assemble(mesh, chi, dirichlet, a0, a1, params)?;
    let mut x: Vec<f64> = match initial {
        Some(u0) => reduced
            .free
            .iter()
            .map(|&d| u0.values[d / 2][d % 2])
            .collect(),
        None => vec![0.0; reduced.free.len()],
    };
    pcg(&reduced.matrix, &reduced.rhs, &mut x, opts)?;
    let mut values: Vec<[f64; 2]> = fixed.iter().map(|f| f.unwrap_or([0.0; 2])).collect();
    for (k, &d) in reduced.free.iter().enumerate() {
        values[d / 2][d % 2] = x[k];
    }
    Ok(DisplacementField { values })
}
