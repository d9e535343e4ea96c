//! The one-dimensional model: exact per-pattern energies, exhaustive search
//! and explicit recovery constructions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{sqw1d, RegimeParams};
use crate::error::{Error, Result};

/// Largest grid accepted by [`brute_min_1d`].
pub const MAX_BRUTE_INTERVALS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subdivision1D {
    pub breakpoints: Vec<f64>,
}

impl Subdivision1D {
    pub fn uniform(n: usize) -> Self {
        Self {
            breakpoints: (0..=n).map(|k| k as f64 / n as f64).collect(),
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.breakpoints.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn n_intervals(&self) -> usize {
        self.breakpoints.len().saturating_sub(1)
    }

    /// Checks 0 = x₀ < … < x_n = 1 with every length in [h, ω_factor·h].
    pub fn validate(&self, h: f64, omega_factor: f64) -> Result<()> {
        let b = &self.breakpoints;
        if b.len() < 2 || b[0] != 0.0 || (b[b.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter("subdivision must run from 0 to 1".into()));
        }
        for (i, l) in self.lengths().into_iter().enumerate() {
            if l < h * (1.0 - 1e-9) || l > omega_factor * h * (1.0 + 1e-9) {
                return Err(Error::Parameter(format!(
                    "interval {i} has length {l}, outside [{h}, {}]",
                    omega_factor * h
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern1D {
    pub chi: Vec<bool>,
}

/// Minimal energy at fixed χ with u(0) = 0, u(1) = ξ (constant flux).
pub fn pattern_energy(
    xi: f64,
    sub: &Subdivision1D,
    pattern: &Pattern1D,
    params: &RegimeParams,
    a0: f64,
    a1: f64,
) -> Result<f64> {
    if pattern.chi.len() != sub.n_intervals() {
        return Err(Error::Usage(format!(
            "pattern has {} entries for {} intervals",
            pattern.chi.len(),
            sub.n_intervals()
        )));
    }
    if !(params.eta > 0.0) {
        return Err(Error::Precondition("η must be positive".into()));
    }
    let (mut compliance, mut damaged) = (0.0, 0.0);
    for (l, &c) in sub.lengths().iter().zip(&pattern.chi) {
        if c {
            compliance += l / (params.eta * a0);
            damaged += l;
        } else {
            compliance += l / a1;
        }
    }
    Ok(0.5 * xi * xi / compliance + params.kappa / params.eps * damaged)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteMin {
    pub best_energy: f64,
    pub best_pattern: Pattern1D,
}

/// Pattern bits with interval 0 most significant, so smaller means
/// lexicographically smaller.
fn lex_key(bits: u64, n: usize) -> u64 {
    bits.reverse_bits() >> (64 - n)
}

fn better(a: (f64, u64), b: (f64, u64), n: usize) -> bool {
    let tol = 1e-12 * a.0.abs().max(b.0.abs());
    if (a.0 - b.0).abs() <= tol {
        lex_key(a.1, n) < lex_key(b.1, n)
    } else {
        a.0 < b.0
    }
}

/// Exhaustive minimum of [`pattern_energy`] over all 2ⁿ patterns on the
/// uniform grid with n intervals; ties go to the lexicographically smallest.
pub fn brute_min_1d(
    xi: f64,
    n: usize,
    params: &RegimeParams,
    a0: f64,
    a1: f64,
) -> Result<BruteMin> {
    if n == 0 {
        return Err(Error::Parameter("need at least one interval".into()));
    }
    if n > MAX_BRUTE_INTERVALS {
        return Err(Error::Budget(format!(
            "{n} intervals exceed the exhaustive-search budget of {MAX_BRUTE_INTERVALS}"
        )));
    }
    let sub = Subdivision1D::uniform(n);
    sub.validate(params.h, params.omega_factor)?;
    if !(params.eta > 0.0) {
        return Err(Error::Precondition("η must be positive".into()));
    }
    let l = 1.0 / n as f64;
    let (c_damaged, c_sound) = (l / (params.eta * a0), l / a1);
    let cost = params.kappa / params.eps * l;
    let eval = |ones: u32| {
        let k = ones as f64;
        let compliance = k * c_damaged + (n as f64 - k) * c_sound;
        0.5 * xi * xi / compliance + cost * k
    };
    let high = n.min(10);
    let low = n - high;
    let blocks: Vec<(f64, u64)> = (0..1u64 << high)
        .into_par_iter()
        .map(|top| {
            let base = top << low;
            let mut bits = base;
            let mut best = (eval(bits.count_ones()), bits);
            for m in 1..(1u64 << low) {
                bits ^= 1 << m.trailing_zeros();
                let cand = (eval(bits.count_ones()), bits);
                if better(cand, best, n) {
                    best = cand;
                }
            }
            best
        })
        .collect();
    let mut best = blocks[0];
    for &b in &blocks[1..] {
        if better(b, best, n) {
            best = b;
        }
    }
    let chi: Vec<bool> = (0..n).map(|i| best.1 >> i & 1 == 1).collect();
    let pattern = Pattern1D { chi };
    Ok(BruteMin {
        best_energy: pattern_energy(xi, &sub, &pattern, params, a0, a1)?,
        best_pattern: pattern,
    })
}

/// Uniform grid size for the exhaustive search: `preferred` when its pitch is
/// admissible, otherwise the coarsest admissible grid.
pub fn admissible_grid_size(h: f64, omega_factor: f64, preferred: usize) -> Option<usize> {
    let finest = (1.0 / h * (1.0 + 1e-9)).floor() as usize;
    let coarsest = (1.0 / (omega_factor * h) * (1.0 - 1e-9)).ceil().max(1.0) as usize;
    if coarsest > finest {
        return None;
    }
    Some(preferred.clamp(coarsest, finest))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recovery1D {
    pub subdivision: Subdivision1D,
    pub pattern: Pattern1D,
    /// Nodal values at the breakpoints.
    pub u: Vec<f64>,
    pub energy: f64,
}

fn split(start: f64, end: f64, max_len: f64, out: &mut Vec<f64>) -> usize {
    let k = ((end - start) / max_len * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    for j in 1..=k {
        out.push(if j == k {
            end
        } else {
            start + (end - start) * j as f64 / k as f64
        });
    }
    k
}

/// Periodic lamination realizing the relaxed 1D density at u = ξx.
pub fn recover_affine_1d(xi: f64, params: &RegimeParams, a0: f64, a1: f64) -> Result<Recovery1D> {
    let theta = sqw1d(xi, params.eps, a0, a1)?.theta;
    let w = params.omega();
    let mut breaks = vec![0.0];
    let mut chi = Vec::new();
    if theta == 0.0 {
        let k = split(0.0, 1.0, w, &mut breaks);
        chi.resize(k, false);
    } else {
        let m = (theta / params.h * (1.0 + 1e-12)).floor() as usize;
        if m == 0 {
            return Err(Error::Precondition(format!(
                "damage fraction {theta} is below the mesh size {}",
                params.h
            )));
        }
        let l = 1.0 / m as f64;
        for k in 0..m {
            let start = k as f64 * l;
            breaks.push(start + theta * l);
            chi.push(true);
            let pieces = split(
                start + theta * l,
                if k + 1 == m { 1.0 } else { (k + 1) as f64 * l },
                w,
                &mut breaks,
            );
            chi.extend(std::iter::repeat_n(false, pieces));
        }
    }
    let subdivision = Subdivision1D {
        breakpoints: breaks,
    };
    let pattern = Pattern1D { chi };
    let lengths = subdivision.lengths();
    let stiff = |c: bool| if c { params.eta * a0 } else { a1 };
    let compliance: f64 = lengths
        .iter()
        .zip(&pattern.chi)
        .map(|(l, &c)| l / stiff(c))
        .sum();
    let flux = xi / compliance;
    let mut u = vec![0.0];
    for (l, &c) in lengths.iter().zip(&pattern.chi) {
        u.push(u.last().expect("nonempty") + flux / stiff(c) * l);
    }
    let energy = pattern_energy(xi, &subdivision, &pattern, params, a0, a1)?;
    Ok(Recovery1D {
        subdivision,
        pattern,
        u,
        energy,
    })
}

/// Damaged ramp of width δ = √(ε(h+η)) centered at ½ carrying the full jump.
pub fn recover_step_1d(jump: f64, params: &RegimeParams, a0: f64) -> Result<Recovery1D> {
    let delta = (params.eps * (params.h + params.eta)).sqrt();
    if delta >= 0.5 {
        return Err(Error::Parameter(format!(
            "ramp width {delta} is not below 1/2"
        )));
    }
    let w = params.omega();
    let (x0, x1) = (0.5 - 0.5 * delta, 0.5 + 0.5 * delta);
    let mut breaks = vec![0.0];
    let mut chi = Vec::new();
    let mut u = vec![0.0];
    let k = split(0.0, x0, w, &mut breaks);
    chi.extend(std::iter::repeat_n(false, k));
    u.extend(std::iter::repeat_n(0.0, k));
    let k = split(x0, x1, w, &mut breaks);
    chi.extend(std::iter::repeat_n(true, k));
    for j in 1..=k {
        u.push(jump * j as f64 / k as f64);
    }
    let k = split(x1, 1.0, w, &mut breaks);
    chi.extend(std::iter::repeat_n(false, k));
    u.extend(std::iter::repeat_n(jump, k));
    let energy = 0.5 * params.eta * a0 * jump * jump / delta + params.kappa * delta / params.eps;
    Ok(Recovery1D {
        subdivision: Subdivision1D {
            breakpoints: breaks,
        },
        pattern: Pattern1D { chi },
        u,
        energy,
    })
}
