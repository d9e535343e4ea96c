use std::collections::HashMap;

use gamma_damage_core::mesh::{
    cohesive_mesh, double_stripe_mesh, mesh_from_json, mesh_to_json, stripe_mesh, uniform_mesh,
    unit_square_frame, validate, Point2, Triangulation,
};
use proptest::prelude::*;

/// Edge multiplicities recomputed from scratch.
fn edge_counts(mesh: &Triangulation) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    m
}

fn assert_conforming(mesh: &Triangulation, boundary_edges: usize) {
    let counts = edge_counts(mesh);
    assert!(counts.values().all(|&c| c == 1 || c == 2));
    assert_eq!(counts.values().filter(|&&c| c == 1).count(), boundary_edges);
}

#[test]
fn uniform_grid_family() {
    for n in [2, 5, 9] {
        for refine in [0, 1, 2] {
            let mesh = uniform_mesh(n, refine);
            let h = (1.0 / n as f64) * std::f64::consts::FRAC_1_SQRT_2.powi(refine as i32);
            let r = validate(&mesh, h, 6.0, 45f64.to_radians());
            assert!(r.valid, "n={n} refine={refine}: {:?}", r.violations.first());
            assert_conforming(&mesh, 4 * (n << (refine / 2)));
            assert!((mesh.total_area() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn stripe_family() {
    let h = 0.02;
    for angle in [0.0f64, 0.3, 0.7] {
        let b = [angle.cos(), angle.sin()];
        let (_, side) = unit_square_frame(b);
        for periods in [4usize, 7, 10] {
            let period = side / periods as f64;
            let damaged = 1.5 * h;
            let mesh = stripe_mesh(b, (damaged, period - damaged), h, side).unwrap();
            let r = validate(&mesh, h, 6.0, 26f64.to_radians());
            assert!(r.valid, "{angle} {periods}: {:?}", r.violations.first());
            assert!((mesh.total_area() / (side * side) - 1.0).abs() < 1e-9);
            let frac = mesh
                .triangles
                .iter()
                .enumerate()
                .filter(|(t, _)| mesh.tag(*t) == 1)
                .map(|(t, _)| mesh.area(t))
                .sum::<f64>()
                / (side * side);
            assert!((frac - damaged / period).abs() < 1e-9);
            let counts = edge_counts(&mesh);
            assert!(counts.values().all(|&c| c <= 2));
        }
    }
}

#[test]
fn double_stripe_family() {
    let h = 0.02;
    for angle in [0.0f64, 0.2, 0.6] {
        let b = [angle.cos(), angle.sin()];
        let (_, side) = unit_square_frame(b);
        for (p1, p2) in [(4usize, 4usize), (5, 8), (9, 3)] {
            let (l1, l2) = (side / p1 as f64, side / p2 as f64);
            let mesh =
                double_stripe_mesh(b, (1.2 * h, l1 - 1.2 * h), (1.7 * h, l2 - 1.7 * h), h, side)
                    .unwrap();
            let r = validate(&mesh, h, 6.0, 26f64.to_radians());
            assert!(r.valid, "{:?}", r.violations.first());
            let damaged: f64 = (0..mesh.n_triangles())
                .filter(|&t| mesh.tag(t) == 1)
                .map(|t| mesh.area(t))
                .sum();
            let (f1, f2) = (1.2 * h / l1, 1.7 * h / l2);
            assert!((damaged / (side * side) - (f1 + f2 - f1 * f2)).abs() < 1e-9);
        }
    }
}

#[test]
fn degenerate_second_direction_is_single_stripe() {
    let b = [1.0, 0.0];
    let single = stripe_mesh(b, (0.03, 0.22), 0.02, 1.0).unwrap();
    let double = double_stripe_mesh(b, (0.03, 0.22), (0.0, 0.0), 0.02, 1.0).unwrap();
    assert_eq!(single, double);
}

#[test]
fn json_round_trip_is_exact() {
    let side = unit_square_frame([0.8, 0.6]).1;
    let mesh = stripe_mesh([0.8, 0.6], (0.05, side / 5.0 - 0.05), 0.03, side).unwrap();
    let back = mesh_from_json(&mesh_to_json(&mesh)).unwrap();
    assert_eq!(mesh, back);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cohesive_count_bound(theta_deg in 31.0f64..60.0, l in 0.6f64..3.0, h in 0.005f64..0.05, len in 0.3f64..1.5) {
        let theta = theta_deg.to_radians();
        prop_assume!(l >= theta.sin());
        let seg = (Point2::new(0.0, 0.0), Point2::new(len, 0.0));
        if let Ok(f) = cohesive_mesh(seg, &|_| l, h, theta, 30f64.to_radians()) {
            let m = f.mesh.n_triangles() as f64;
            prop_assert!(m >= 1.0);
            prop_assert!(m <= len / (h * theta.cos()) + 1.0);
            prop_assert!(f.diagnostics.min_edge_over_h >= 1.0 - 1e-9);
            prop_assert!(f.diagnostics.min_angle >= 30f64.to_radians());
        }
    }
}
