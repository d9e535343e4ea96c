use gamma_damage_core::densities::{wbar, Hooke, Limit, RegimeParams, Sym2, Wbar};
use gamma_damage_core::recovery::{
    factor_rank_one, recover_elastic, recover_jump, recover_lamination, recover_lamination_from,
    recover_trivial, JumpOptions, LaminationWindow, Monomial, PiecewiseConstant, PolynomialField,
};
use gamma_damage_core::Error;

fn geometric(start: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| start * 0.5f64.powi(k as i32)).collect()
}

fn hencky(eps: f64) -> RegimeParams {
    RegimeParams {
        kappa: 1.0,
        eps,
        eta: eps,
        h: eps * eps,
        omega_factor: 6.0,
        theta0: 20f64.to_radians(),
        alpha: Limit::Finite(1.0),
        beta: Limit::Finite(0.0),
    }
}

#[test]
fn elastic_affine_is_exact() {
    let xi = Sym2::new(0.5, -1.0, 0.25);
    let a1 = Hooke::isotropic(1.0, 2.0);
    for eps in geometric(0.2, 4) {
        let mut p = hencky(eps);
        p.h = eps;
        p.alpha = Limit::Infinite;
        let out = recover_elastic(&PolynomialField::affine(xi), &a1, &p).unwrap();
        let e = out.energy(&a1, &a1, &p).unwrap();
        assert!((e.total - out.predicted_limit).abs() <= 1e-12 * out.predicted_limit);
    }
}

#[test]
fn elastic_quadratic_converges() {
    let v = PolynomialField {
        ux: vec![Monomial {
            coef: 1.0,
            px: 2,
            py: 0,
        }],
        uy: vec![],
    };
    let a1 = Hooke::scaled_identity(1.0);
    let gaps: Vec<f64> = geometric(0.1, 4)
        .into_iter()
        .map(|eps| {
            let mut p = hencky(eps);
            p.h = eps;
            let out = recover_elastic(&v, &a1, &p).unwrap();
            assert!((out.predicted_limit - 2.0 / 3.0).abs() < 1e-14);
            (out.energy(&a1, &a1, &p).unwrap().total - out.predicted_limit).abs()
        })
        .collect();
    for w in gaps.windows(2) {
        assert!((w[0] / w[1]).log2() >= 0.9, "{gaps:?}");
    }
}

#[test]
fn factorization_matches_wbar_tau() {
    let (a0, a1) = (Hooke::isotropic(1.0, 1.0), Hooke::scaled_identity(1.0));
    let tau = wbar(&a0, &a1, &Sym2::diag(3.0, -3.0), 1.0, 1.0)
        .unwrap()
        .tau;
    let (a, b) = factor_rank_one(&tau).unwrap();
    assert!((Sym2::sym_dyad(a, b) - tau).norm() < 1e-10);
}

fn lamination_sweep(xi: Sym2) {
    let (a0, a1) = (Hooke::isotropic(1.0, 1.0), Hooke::scaled_identity(1.0));
    let mut gaps = Vec::new();
    let mut masses = Vec::new();
    for eps in geometric(0.1, 6) {
        let p = hencky(eps);
        let out = recover_lamination(&xi, &p, &a0, &a1, LaminationWindow::Periods(1)).unwrap();
        let report = out.validate();
        assert!(report.valid, "ε = {eps}: {:?}", report.violations.first());
        let e = out.energy(&a0, &a1, &p).unwrap();
        gaps.push((e.total - out.predicted_limit).abs() / out.predicted_limit);
        masses.push(out.chi.damaged_area(&out.mesh) / out.window_measure);
    }
    for w in gaps.windows(2) {
        assert!(w[1] <= w[0], "{gaps:?}");
    }
    assert!(*gaps.last().unwrap() < 0.05, "{gaps:?}");
    for w in masses.windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn single_lamination_converges() {
    lamination_sweep(Sym2::diag(3.0, -3.0));
}

#[test]
fn double_lamination_converges() {
    lamination_sweep(Sym2::diag(3.0, 3.0));
}

#[test]
fn non_isotropic_double_lamination_is_unsupported() {
    let a0 = Hooke::general([[3.0, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0, 0.0, 1.5]]);
    let w = Wbar {
        value: 1.0,
        tau: Sym2::diag(0.5, 0.4),
    };
    let r = recover_lamination_from(
        &Sym2::diag(3.0, 3.0),
        &w,
        &hencky(0.05),
        &a0,
        LaminationWindow::Periods(1),
    );
    assert!(matches!(r, Err(Error::UnsupportedMode(_))));
}

fn jump_params(eps: f64, alpha: f64, eta: f64, theta0: f64) -> RegimeParams {
    RegimeParams {
        kappa: 1.0,
        eps,
        eta,
        h: eps,
        omega_factor: 6.0,
        theta0,
        alpha: Limit::Finite(alpha),
        beta: Limit::Finite(1.0),
    }
}

#[test]
fn fracture_sweep() {
    let theta0 = 20f64.to_radians();
    let a0 = Hooke::isotropic(1.0, 1.0);
    let mut damaged = Vec::new();
    for eps in geometric(1e-2, 4) {
        let p = jump_params(eps, 0.0, eps * eps, theta0);
        let out = recover_jump([0.0, 1.0], &p, &a0, &JumpOptions::default()).unwrap();
        assert!(out.validate().valid);
        let e = out.energy(&a0, &a0, &p).unwrap();
        assert!((e.dissipation / out.window_measure / theta0.sin() - 1.0).abs() < 0.02);
        damaged.push(e.damaged_elastic / out.window_measure);
    }
    for w in damaged.windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn cohesive_sweep() {
    let a0 = Hooke::scaled_identity(1.0);
    let theta0 = 0.5f64.asin();
    for (jump, limit) in [(0.3, 0.59), (2.0, 2.0 * 2f64.sqrt())] {
        for eps in geometric(1e-2, 3) {
            let p = jump_params(eps, 1.0, eps, theta0);
            let out = recover_jump([0.0, jump], &p, &a0, &JumpOptions::default()).unwrap();
            assert!(out.validate().valid);
            let per = out.energy(&a0, &a0, &p).unwrap().total / out.window_measure;
            assert!((per - limit).abs() < 0.05 * limit, "{jump}: {per}");
        }
    }
}

#[test]
fn trivial_sweep() {
    let u =
        PiecewiseConstant::new(2, vec![[1.0, 0.0], [0.0, -1.0], [0.5, 0.5], [-1.0, 1.0]]).unwrap();
    let a0 = Hooke::isotropic(1.0, 1.0);
    let mut energies = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3] {
        let p = RegimeParams {
            kappa: 1.0,
            eps,
            eta: eps * eps,
            h: eps * eps,
            omega_factor: 6.0,
            theta0: 45f64.to_radians(),
            alpha: Limit::Finite(0.0),
            beta: Limit::Finite(0.0),
        };
        let r = recover_trivial(&u, &p).unwrap();
        assert!(r.validate_patch().valid);
        let e = r.energy(&a0, &p).unwrap();
        assert!(e.total <= r.bound(&a0, &p));
        assert!(r.chi_mass() <= 16.0 * r.delta);
        energies.push(e.total);
    }
    for w in energies.windows(2) {
        assert!(w[1] < w[0], "{energies:?}");
    }
}
