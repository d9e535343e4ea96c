//! Triangulations, admissibility checks and structured generators.

mod cohesive;
pub(crate) mod generators;
mod io;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use cohesive::{cohesive_mesh, CohesiveFragment, FanDiagnostics};
pub use generators::{
    bisect_longest_edges, double_stripe_mesh, jump_strip_mesh, stripe_mesh, uniform_mesh,
    unit_square_frame, FrameGrid, JumpStrip,
};
pub use io::{mesh_from_json, mesh_to_json};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, o: &Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// Twice the signed area of (a, b, c).
pub fn cross(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub const fn unit() -> Self {
        Self {
            min: Point2::new(0.0, 0.0),
            max: Point2::new(1.0, 1.0),
        }
    }

    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }
}

/// Conforming triangle mesh with counterclockwise triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    /// Sorted indices of vertices on boundary edges.
    pub boundary: Vec<usize>,
    /// Optional per-triangle label (1 marks damaged regions).
    pub tags: Option<Vec<u8>>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Triangulation {
    /// Orients every triangle counterclockwise and derives the boundary.
    pub fn new(
        vertices: Vec<Point2>,
        mut triangles: Vec<[usize; 3]>,
        tags: Option<Vec<u8>>,
    ) -> Self {
        for t in &mut triangles {
            if cross(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]) < 0.0 {
                t.swap(1, 2);
            }
        }
        let boundary = boundary_vertices(&triangles);
        Self {
            vertices,
            triangles,
            boundary,
            tags,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * cross(&a, &b, &c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn tag(&self, t: usize) -> u8 {
        self.tags.as_ref().map_or(0, |g| g[t])
    }

    pub fn bounding_box(&self) -> Rect {
        let mut r = Rect {
            min: Point2::new(f64::INFINITY, f64::INFINITY),
            max: Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for p in &self.vertices {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        r
    }

    /// Number of triangles using each undirected edge.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::with_capacity(3 * self.triangles.len() / 2 + 8);
        for t in &self.triangles {
            for k in 0..3 {
                *m.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        m
    }
}

fn boundary_vertices(triangles: &[[usize; 3]]) -> Vec<usize> {
    let mut counts: HashMap<(usize, usize), usize> =
        HashMap::with_capacity(3 * triangles.len() / 2 + 8);
    for t in triangles {
        for k in 0..3 {
            *counts.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    let mut b: Vec<usize> = counts
        .into_iter()
        .filter(|(_, c)| *c == 1)
        .flat_map(|((a, b), _)| [a, b])
        .collect();
    b.sort_unstable();
    b.dedup();
    b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ViolationKind {
    NonPositiveArea { area: f64 },
    ShortEdge { length: f64 },
    LongEdge { length: f64 },
    SmallAngle { angle: f64 },
    EdgeOveruse { edge: (usize, usize), count: usize },
    Overlap { edge: (usize, usize) },
    CoincidentVertex { vertex: usize, other: usize },
    HangingVertex { vertex: usize, edge: (usize, usize) },
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveArea { area } => write!(f, "non-positive area {area:e}"),
            Self::ShortEdge { length } => write!(f, "edge of length {length:e} below h"),
            Self::LongEdge { length } => write!(f, "edge of length {length:e} above ω(h)"),
            Self::SmallAngle { angle } => write!(f, "angle {:.6}° below θ0", angle.to_degrees()),
            Self::EdgeOveruse { edge, count } => {
                write!(f, "edge {edge:?} shared by {count} triangles")
            }
            Self::Overlap { edge } => write!(f, "triangles on edge {edge:?} overlap"),
            Self::CoincidentVertex { vertex, other } => {
                write!(f, "vertex {vertex} coincides with vertex {other}")
            }
            Self::HangingVertex { vertex, edge } => {
                write!(f, "vertex {vertex} lies inside edge {edge:?}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub triangle: usize,
    pub reason: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub valid: bool,
    pub min_edge: f64,
    pub max_edge: f64,
    /// Radians.
    pub min_angle: f64,
    pub violations: Vec<Violation>,
}

/// Checks membership in the admissible class: edges in [h, ω_factor·h],
/// angles at least θ0, positive areas and conformity.
pub fn validate(
    mesh: &Triangulation,
    h: f64,
    omega_factor: f64,
    theta0: f64,
) -> AdmissibilityReport {
    const SLACK: f64 = 1e-9;
    let (lo, hi, amin) = (
        h * (1.0 - SLACK),
        omega_factor * h * (1.0 + SLACK),
        theta0 * (1.0 - SLACK),
    );
    let mut violations = Vec::new();
    let (mut min_edge, mut max_edge, mut min_angle) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.vertices[i]);
        let area = 0.5 * cross(&p[0], &p[1], &p[2]);
        if !(area > 0.0) {
            violations.push(Violation {
                triangle: t,
                reason: ViolationKind::NonPositiveArea { area },
            });
            continue;
        }
        let len = [p[1].dist(&p[2]), p[2].dist(&p[0]), p[0].dist(&p[1])];
        for &l in &len {
            min_edge = min_edge.min(l);
            max_edge = max_edge.max(l);
            if l < lo {
                violations.push(Violation {
                    triangle: t,
                    reason: ViolationKind::ShortEdge { length: l },
                });
            } else if l > hi {
                violations.push(Violation {
                    triangle: t,
                    reason: ViolationKind::LongEdge { length: l },
                });
            }
        }
        // The angle opposite edge k.
        let small = (0..3)
            .map(|k| {
                let (a, b, c) = (len[k], len[(k + 1) % 3], len[(k + 2) % 3]);
                (2.0 * area).atan2(0.5 * (b * b + c * c - a * a))
            })
            .fold(f64::INFINITY, f64::min);
        min_angle = min_angle.min(small);
        if small < amin {
            violations.push(Violation {
                triangle: t,
                reason: ViolationKind::SmallAngle { angle: small },
            });
        }
    }
    conformity_violations(mesh, &mut violations);
    violations.sort_by_key(|v| v.triangle);
    AdmissibilityReport {
        valid: violations.is_empty(),
        min_edge,
        max_edge,
        min_angle,
        violations,
    }
}

fn conformity_violations(mesh: &Triangulation, out: &mut Vec<Violation>) {
    let mut edges: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            edges.entry(edge_key(a, b)).or_default().push((t, a < b));
        }
    }
    let mut sorted: Vec<_> = edges.iter().collect();
    sorted.sort_by_key(|(k, _)| **k);
    for (&edge, users) in &sorted {
        if users.len() > 2 {
            out.push(Violation {
                triangle: users[0].0,
                reason: ViolationKind::EdgeOveruse {
                    edge,
                    count: users.len(),
                },
            });
        } else if users.len() == 2 && users[0].1 == users[1].1 {
            out.push(Violation {
                triangle: users[1].0,
                reason: ViolationKind::Overlap { edge },
            });
        }
    }

    let used: Vec<usize> = {
        let mut u: Vec<usize> = mesh.triangles.iter().flatten().copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    };
    if used.is_empty() {
        return;
    }
    let max_len = sorted
        .iter()
        .map(|((a, b), _)| mesh.vertices[*a].dist(&mesh.vertices[*b]))
        .fold(0.0f64, f64::max);
    let min_len = sorted
        .iter()
        .map(|((a, b), _)| mesh.vertices[*a].dist(&mesh.vertices[*b]))
        .fold(f64::INFINITY, f64::min);
    if !(max_len > 0.0) {
        return;
    }
    let cell = max_len;
    let key = |p: &Point2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for &v in &used {
        buckets.entry(key(&mesh.vertices[v])).or_default().push(v);
    }
    let owner: HashMap<usize, usize> = mesh
        .triangles
        .iter()
        .enumerate()
        .flat_map(|(t, tri)| tri.map(|v| (v, t)))
        .collect();
    let tol = 1e-9 * min_len.max(f64::MIN_POSITIVE);
    for &v in &used {
        let p = mesh.vertices[v];
        let (kx, ky) = key(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for &w in buckets.get(&(kx + dx, ky + dy)).map_or(&[][..], |b| &b[..]) {
                    if w > v && p.dist(&mesh.vertices[w]) <= tol {
                        out.push(Violation {
                            triangle: owner[&w],
                            reason: ViolationKind::CoincidentVertex {
                                vertex: w,
                                other: v,
                            },
                        });
                    }
                }
            }
        }
    }
    for (&(a, b), users) in &sorted {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let len = pa.dist(&pb);
        let (x0, x1) = (pa.x.min(pb.x), pa.x.max(pb.x));
        let (y0, y1) = (pa.y.min(pb.y), pa.y.max(pb.y));
        let (k0, k1) = (key(&Point2::new(x0, y0)), key(&Point2::new(x1, y1)));
        for kx in k0.0..=k1.0 {
            for ky in k0.1..=k1.1 {
                for &w in buckets.get(&(kx, ky)).map_or(&[][..], |b| &b[..]) {
                    if w == a || w == b {
                        continue;
                    }
                    let q = mesh.vertices[w];
                    let s =
                        ((q.x - pa.x) * (pb.x - pa.x) + (q.y - pa.y) * (pb.y - pa.y)) / (len * len);
                    if s <= 1e-9 || s >= 1.0 - 1e-9 {
                        continue;
                    }
                    let dist = cross(&pa, &pb, &q).abs() / len;
                    if dist <= tol {
                        out.push(Violation {
                            triangle: users[0].0,
                            reason: ViolationKind::HangingVertex {
                                vertex: w,
                                edge: (a, b),
                            },
                        });
                    }
                }
            }
        }
    }
}
