//! Thin wrappers around argmin's derivative-free solvers.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};

struct Objective<'a, F>(&'a F);

impl<F: Fn(&[f64; 3]) -> f64> CostFunction for Objective<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(&[p[0], p[1], p[2]]))
    }
}

struct Scalar<'a, F>(&'a F);

impl<F: Fn(f64) -> f64> CostFunction for Scalar<'_, F> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(*p))
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Minimum {
    pub x: [f64; 3],
    pub value: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SearchOptions {
    /// Absolute tolerance on the objective value.
    pub tol: f64,
    pub max_iters: u64,
    pub max_restarts: usize,
}

fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(
    f: &F,
    start: [f64; 3],
    scale: f64,
    opts: &SearchOptions,
) -> Result<(Minimum, bool)> {
    let mut simplex = vec![start.to_vec()];
    for i in 0..3 {
        let mut v = start.to_vec();
        v[i] += scale;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.tol)
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let res = Executor::new(Objective(f), solver)
        .configure(|s| s.max_iters(opts.max_iters))
        .run()
        .map_err(|e| Error::NonConvergence {
            message: e.to_string(),
            best_value: f64::NAN,
        })?;
    let state = res.state();
    let p = state
        .get_best_param()
        .cloned()
        .unwrap_or_else(|| start.to_vec());
    let exhausted = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::MaxItersReached)
    );
    Ok((
        Minimum {
            x: [p[0], p[1], p[2]],
            value: state.get_best_cost(),
        },
        exhausted,
    ))
}

/// Multi-start Nelder-Mead with shrinking restarts from each start.
pub(crate) fn minimize3<F: Fn(&[f64; 3]) -> f64>(
    f: &F,
    starts: &[[f64; 3]],
    scale: f64,
    opts: &SearchOptions,
) -> Result<Minimum> {
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut best: Option<Minimum> = None;
    let mut any_converged = false;
    for &s in starts {
        let mut current = Minimum { x: s, value: f(&s) };
        let mut step = scale;
        let mut converged = false;
        for _ in 0..=opts.max_restarts {
            let (m, exhausted) = nelder_mead(f, current.x, step, opts)?;
            let improvement = current.value - m.value;
            if m.value <= current.value {
                current = m;
            }
            if !exhausted {
                converged = true;
            }
            if improvement.abs() <= opts.tol {
                break;
            }
            step *= 0.25;
        }
        any_converged |= converged;
        if best.is_none_or(|b| current.value < b.value) {
            best = Some(current);
        }
    }
    let best = best.ok_or_else(|| Error::Usage("no starting points".into()))?;
    if !any_converged {
        return Err(Error::NonConvergence {
            message: "iteration budget exhausted from every start".into(),
            best_value: best.value,
        });
    }
    Ok(best)
}

/// Golden-section minimization of a unimodal function on [lo, hi].
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let mid = 0.5 * (lo + hi);
    let run = || -> std::result::Result<(f64, f64), argmin::core::Error> {
        let solver = GoldenSectionSearch::new(lo, hi)?.with_tolerance(tol)?;
        let res = Executor::new(Scalar(f), solver)
            .configure(|s| s.param(mid).max_iters(500))
            .run()?;
        let x = res.state().get_best_param().copied().unwrap_or(mid);
        Ok((x, f(x)))
    };
    run().unwrap_or_else(|_| (mid, f(mid)))
}
