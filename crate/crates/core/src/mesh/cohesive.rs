use std::collections::HashMap;
use std::f64::consts::PI;

use super::{Point2, Triangulation};
use crate::error::{Error, Result};

/// Shape statistics of a zig-zag fan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FanDiagnostics {
    /// Shortest edge divided by h.
    pub min_edge_over_h: f64,
    pub min_angle: f64,
    pub max_angle: f64,
    /// Largest deviation of sorted triangle angles from (θ, θ, π − 2θ).
    pub angle_spread: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohesiveFragment {
    pub mesh: Triangulation,
    /// Points a^j along the segment.
    pub incremental_points: Vec<Point2>,
    pub diagnostics: FanDiagnostics,
}

/// Zig-zag fan along a segment with local amplitude `amplitude(s)`, s the
/// arc length from the first endpoint.
pub fn cohesive_mesh(
    segment: (Point2, Point2),
    amplitude: &dyn Fn(f64) -> f64,
    h: f64,
    theta: f64,
    theta0: f64,
) -> Result<CohesiveFragment> {
    if !(theta0 < theta && theta <= PI / 3.0 + 1e-15) {
        return Err(Error::Precondition(format!(
            "need θ0 < θ ≤ π/3 (θ0 = {theta0}, θ = {theta})"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("h must be positive, got {h}")));
    }
    let (p, q) = segment;
    let length = p.dist(&q);
    if !(length > 0.0) {
        return Err(Error::Degenerate("segment has zero length".into()));
    }
    let tangent = [(q.x - p.x) / length, (q.y - p.y) / length];
    let normal = [-tangent[1], tangent[0]];
    let (sin_t, tan_t) = (theta.sin(), theta.tan());

    let mut s = 0.0;
    let mut stations = Vec::new();
    loop {
        let l = amplitude(s);
        if !(l >= sin_t * (1.0 - 1e-12)) {
            return Err(Error::Precondition(format!(
                "amplitude {l} below sin θ = {sin_t} at arc length {s}"
            )));
        }
        stations.push((s, l));
        let next = s + h * l / tan_t;
        if next > length * (1.0 + 1e-12) {
            break;
        }
        s = next;
    }
    if stations.len() < 3 {
        return Err(Error::Parameter(
            "segment too short for one zig-zag triangle".into(),
        ));
    }
    let at = |s: f64| Point2::new(p.x + s * tangent[0], p.y + s * tangent[1]);
    let incremental_points: Vec<Point2> = stations.iter().map(|&(s, _)| at(s)).collect();
    let offset = |j: usize, sign: f64| {
        let (s, l) = stations[j];
        let a = at(s);
        Point2::new(
            a.x + sign * 0.5 * h * l * normal[0],
            a.y + sign * 0.5 * h * l * normal[1],
        )
    };

    let mut vertices = Vec::new();
    let mut index: HashMap<(usize, bool), usize> = HashMap::new();
    let mut vertex = |j: usize, upper: bool| {
        *index.entry((j, upper)).or_insert_with(|| {
            vertices.push(offset(j, if upper { 1.0 } else { -1.0 }));
            vertices.len() - 1
        })
    };
    let m = stations.len() - 2;
    let mut triangles = Vec::with_capacity(m);
    for j in 1..=m {
        if j % 2 == 1 {
            triangles.push([vertex(j + 1, false), vertex(j, true), vertex(j - 1, false)]);
        } else {
            triangles.push([vertex(j + 1, true), vertex(j, false), vertex(j - 1, true)]);
        }
    }
    let n_tri = triangles.len();
    let mesh = Triangulation::new(vertices, triangles, Some(vec![1; n_tri]));

    let mut d = FanDiagnostics {
        min_edge_over_h: f64::INFINITY,
        min_angle: f64::INFINITY,
        max_angle: 0.0,
        angle_spread: 0.0,
    };
    let target = [theta, theta, PI - 2.0 * theta];
    let mut sorted_target = target;
    sorted_target.sort_by(f64::total_cmp);
    for t in 0..mesh.n_triangles() {
        let c = mesh.corners(t);
        let len = [c[1].dist(&c[2]), c[2].dist(&c[0]), c[0].dist(&c[1])];
        let mut ang = [0.0; 3];
        for k in 0..3 {
            let (a, b, cc) = (len[k], len[(k + 1) % 3], len[(k + 2) % 3]);
            ang[k] = ((b * b + cc * cc - a * a) / (2.0 * b * cc))
                .clamp(-1.0, 1.0)
                .acos();
            d.min_edge_over_h = d.min_edge_over_h.min(a / h);
        }
        ang.sort_by(f64::total_cmp);
        d.min_angle = d.min_angle.min(ang[0]);
        d.max_angle = d.max_angle.max(ang[2]);
        for k in 0..3 {
            d.angle_spread = d.angle_spread.max((ang[k] - sorted_target[k]).abs());
        }
    }
    Ok(CohesiveFragment {
        mesh,
        incremental_points,
        diagnostics: d,
    })
}
