use std::collections::HashMap;

use super::{edge_key, Point2, Triangulation};
use crate::error::{Error, Result};

/// n×n squares on the unit square, each split along its rising diagonal,
/// followed by `refine_steps` rounds of hypotenuse bisection.
pub fn uniform_mesh(n: usize, refine_steps: usize) -> Triangulation {
    let n = n.max(1);
    let l = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let vertices = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| Point2::new(i as f64 * l, j as f64 * l)))
        .collect();
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut mesh = Triangulation::new(vertices, triangles, None);
    for _ in 0..refine_steps {
        mesh = bisect_longest_edges(&mesh);
    }
    mesh
}

/// Splits every triangle through the midpoint of its longest edge.
///
/// Conforming when longest edges pair up across neighbours, as in meshes of
/// right isoceles triangles built by `uniform_mesh`.
pub fn bisect_longest_edges(mesh: &Triangulation) -> Triangulation {
    let mut vertices = mesh.vertices.clone();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triangles = Vec::with_capacity(2 * mesh.n_triangles());
    let mut tags = mesh
        .tags
        .as_ref()
        .map(|_| Vec::with_capacity(2 * mesh.n_triangles()));
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.vertices[i]);
        let k = (0..3)
            .max_by(|&a, &b| {
                let la = p[(a + 1) % 3].dist(&p[(a + 2) % 3]);
                let lb = p[(b + 1) % 3].dist(&p[(b + 2) % 3]);
                la.total_cmp(&lb)
            })
            .expect("three edges");
        let (apex, u, w) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
        let m = *mids.entry(edge_key(u, w)).or_insert_with(|| {
            let (pu, pw) = (vertices[u], vertices[w]);
            vertices.push(Point2::new(0.5 * (pu.x + pw.x), 0.5 * (pu.y + pw.y)));
            vertices.len() - 1
        });
        triangles.push([apex, u, m]);
        triangles.push([apex, m, w]);
        if let Some(tags) = tags.as_mut() {
            let tag = mesh.tag(t);
            tags.extend([tag, tag]);
        }
    }
    Triangulation::new(vertices, triangles, tags)
}

/// Tensor grid in the rotated frame x = origin + s·b + t·b⊥.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameGrid {
    pub origin: Point2,
    pub b: [f64; 2],
    /// Breakpoints along b.
    pub s: Vec<f64>,
    /// Breakpoints along b⊥.
    pub t: Vec<f64>,
}

impl FrameGrid {
    pub fn b_perp(&self) -> [f64; 2] {
        [-self.b[1], self.b[0]]
    }

    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        j * self.s.len() + i
    }

    pub fn point(&self, s: f64, t: f64) -> Point2 {
        let p = self.b_perp();
        Point2::new(
            self.origin.x + s * self.b[0] + t * p[0],
            self.origin.y + s * self.b[1] + t * p[1],
        )
    }

    /// Triangulates every rectangle along its rising diagonal; `damaged(i, j)`
    /// tags the rectangle [s_i, s_{i+1}] × [t_j, t_{j+1}].
    pub fn build(&self, damaged: impl Fn(usize, usize) -> bool) -> Triangulation {
        let (ns, nt) = (self.s.len(), self.t.len());
        let vertices = (0..nt)
            .flat_map(|j| (0..ns).map(move |i| (i, j)))
            .map(|(i, j)| self.point(self.s[i], self.t[j]))
            .collect();
        let cells = (ns.saturating_sub(1)) * (nt.saturating_sub(1));
        let mut triangles = Vec::with_capacity(2 * cells);
        let mut tags = Vec::with_capacity(2 * cells);
        for j in 0..nt.saturating_sub(1) {
            for i in 0..ns - 1 {
                let a = self.vertex_index(i, j);
                let b = self.vertex_index(i + 1, j);
                let c = self.vertex_index(i + 1, j + 1);
                let d = self.vertex_index(i, j + 1);
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
                let tag = u8::from(damaged(i, j));
                tags.extend([tag, tag]);
            }
        }
        Triangulation::new(vertices, triangles, Some(tags))
    }
}

/// Origin and side of the smallest square with sides along (b, b⊥)
/// containing the unit square.
pub fn unit_square_frame(b: [f64; 2]) -> (Point2, f64) {
    let p = [-b[1], b[0]];
    let corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    let s_min = corners
        .iter()
        .map(|c| c.0 * b[0] + c.1 * b[1])
        .fold(f64::INFINITY, f64::min);
    let t_min = corners
        .iter()
        .map(|c| c.0 * p[0] + c.1 * p[1])
        .fold(f64::INFINITY, f64::min);
    let origin = Point2::new(s_min * b[0] + t_min * p[0], s_min * b[1] + t_min * p[1]);
    (origin, b[0].abs() + b[1].abs())
}

fn unit(b: [f64; 2]) -> Result<[f64; 2]> {
    let n = b[0].hypot(b[1]);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Parameter(
            "direction must be a nonzero vector".into(),
        ));
    }
    Ok([b[0] / n, b[1] / n])
}

/// Breakpoints of periods (damaged, sound) over [0, length]; sound parts
/// are cut into equal pieces of width in [cross, 2·cross). Returns the
/// breakpoints and whether each interval is damaged.
pub(crate) fn lamination_breaks(
    damaged: f64,
    sound: f64,
    cross: f64,
    length: f64,
) -> Result<(Vec<f64>, Vec<bool>)> {
    if !(damaged > 0.0 && sound >= 0.0 && cross > 0.0 && length > 0.0) {
        return Err(Error::Parameter(format!(
            "stripe widths must be positive (damaged {damaged}, sound {sound}, cross {cross})"
        )));
    }
    let period = damaged + sound;
    let periods = (length / period).round();
    if periods < 1.0 || ((periods * period - length) / length).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "period {period} does not divide side {length}"
        )));
    }
    let pieces = if sound > 0.0 {
        ((sound / cross) * (1.0 + 1e-12)).floor().max(1.0) as usize
    } else {
        0
    };
    let mut breaks = vec![0.0];
    let mut damaged_flags = Vec::new();
    let periods = periods as usize;
    for k in 0..periods {
        let start = k as f64 * period;
        breaks.push(start + damaged);
        damaged_flags.push(true);
        for p in 1..=pieces {
            breaks.push(if p == pieces {
                (k + 1) as f64 * period
            } else {
                start + damaged + sound * p as f64 / pieces as f64
            });
            damaged_flags.push(false);
        }
    }
    Ok((breaks, damaged_flags))
}

/// Equal pieces of width in [cross, 2·cross) covering [0, length].
pub(crate) fn uniform_breaks(cross: f64, length: f64) -> Vec<f64> {
    let n = ((length / cross) * (1.0 + 1e-12)).floor().max(1.0) as usize;
    (0..=n).map(|k| length * k as f64 / n as f64).collect()
}

/// Single lamination along b on the rotated square containing the unit square.
pub fn stripe_mesh(
    b: [f64; 2],
    period_widths: (f64, f64),
    cross_width: f64,
    bounding_square_side: f64,
) -> Result<Triangulation> {
    let b = unit(b)?;
    let (origin, _) = unit_square_frame(b);
    let (s, flags) = lamination_breaks(
        period_widths.0,
        period_widths.1,
        cross_width,
        bounding_square_side,
    )?;
    let grid = FrameGrid {
        origin,
        b,
        s,
        t: uniform_breaks(cross_width, bounding_square_side),
    };
    Ok(grid.build(|i, _| flags[i]))
}

/// Lamination along b₁ and b₂ = b₁⊥; a rectangle is damaged when either
/// direction's damaged band covers it.
pub fn double_stripe_mesh(
    b1: [f64; 2],
    widths1: (f64, f64),
    widths2: (f64, f64),
    cross_width: f64,
    bounding_square_side: f64,
) -> Result<Triangulation> {
    let b = unit(b1)?;
    let (origin, _) = unit_square_frame(b);
    let (s, f1) = lamination_breaks(widths1.0, widths1.1, cross_width, bounding_square_side)?;
    let (t, f2) = if widths2.0 > 0.0 {
        lamination_breaks(widths2.0, widths2.1, cross_width, bounding_square_side)?
    } else {
        let t = uniform_breaks(cross_width, bounding_square_side);
        let n = t.len() - 1;
        (t, vec![false; n])
    };
    let grid = FrameGrid { origin, b, s, t };
    Ok(grid.build(|i, j| f1[i] || f2[j]))
}

/// Zig-zag band around the line y = ½ with structured bulk rows above and below.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpStrip {
    pub mesh: Triangulation,
    /// Width of the window [0, width] × [0, 1] covered by whole columns.
    pub width: f64,
    pub row_height: f64,
}

/// Builds the band mesh: `n_columns` zig-zag columns of base `layer_height`,
/// band of total width 2·`band_halfwidth` centered on y = ½, bulk rows of
/// height `row_height` (the outermost rows may overhang y = 0 and y = 1).
pub fn jump_strip_mesh(
    band_halfwidth: f64,
    layer_height: f64,
    n_columns: usize,
    row_height: f64,
) -> Result<JumpStrip> {
    if !(band_halfwidth > 0.0 && layer_height > 0.0 && row_height > 0.0 && n_columns > 0) {
        return Err(Error::Parameter(
            "band sizes and column count must be positive".into(),
        ));
    }
    if band_halfwidth > 0.125 {
        return Err(Error::Parameter(format!(
            "band of width {} exceeds 1/4",
            2.0 * band_halfwidth
        )));
    }
    let (b, n) = (layer_height, n_columns);
    let (y0, y1) = (0.5 - band_halfwidth, 0.5 + band_halfwidth);
    let rows_below = (y0 / row_height * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let rows_above = ((1.0 - y1) / row_height * (1.0 - 1e-12)).ceil().max(1.0) as usize;

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut tags = Vec::new();

    // Bottom block: columns x = k·b, rows descending from y0.
    let below = |r: usize, k: usize| r * (n + 1) + k;
    for r in 0..=rows_below {
        for k in 0..=n {
            vertices.push(Point2::new(k as f64 * b, y0 - r as f64 * row_height));
        }
    }
    for r in 0..rows_below {
        for k in 0..n {
            let (a, bb, c, d) = (
                below(r + 1, k),
                below(r + 1, k + 1),
                below(r, k + 1),
                below(r, k),
            );
            triangles.extend([[a, bb, c], [a, c, d]]);
            tags.extend([0, 0]);
        }
    }
    // Top block: columns x = (k − ½)·b, rows ascending from y1.
    let offset = vertices.len();
    let above = |r: usize, k: usize| offset + r * (n + 2) + k;
    for r in 0..=rows_above {
        for k in 0..=n + 1 {
            vertices.push(Point2::new(
                (k as f64 - 0.5) * b,
                y1 + r as f64 * row_height,
            ));
        }
    }
    for r in 0..rows_above {
        for k in 0..=n {
            let (a, bb, c, d) = (
                above(r, k),
                above(r, k + 1),
                above(r + 1, k + 1),
                above(r + 1, k),
            );
            triangles.extend([[a, bb, c], [a, c, d]]);
            tags.extend([0, 0]);
        }
    }
    // Band: apexes alternate across the line.
    for k in 0..n {
        triangles.push([below(0, k), below(0, k + 1), above(0, k + 1)]);
        tags.push(1);
    }
    for k in 0..=n {
        triangles.push([above(0, k), below(0, k), above(0, k + 1)]);
        tags.push(1);
    }
    Ok(JumpStrip {
        mesh: Triangulation::new(vertices, triangles, Some(tags)),
        width: n as f64 * b,
        row_height,
    })
}

#[cfg(test)]
mod tests {
    use super::super::validate;
    use super::*;

    #[test]
    fn uniform_counts() {
        let m = uniform_mesh(1, 0);
        assert_eq!((m.n_vertices(), m.n_triangles()), (4, 2));
        let m = uniform_mesh(4, 0);
        assert_eq!((m.n_vertices(), m.n_triangles()), (25, 32));
    }

    #[test]
    fn uniform_admissibility() {
        let m = uniform_mesh(4, 0);
        let r = validate(&m, 0.25, 6.0, 30f64.to_radians());
        assert!(r.valid, "{:?}", r.violations);
        assert!((r.min_angle - 45f64.to_radians()).abs() < 1e-12);
        let r = validate(&m, 0.25, 6.0, 50f64.to_radians());
        assert!(!r.valid);
        let flagged: std::collections::BTreeSet<_> =
            r.violations.iter().map(|v| v.triangle).collect();
        assert_eq!(flagged.len(), 32);
    }

    #[test]
    fn bisection_twice() {
        let m = uniform_mesh(1, 2);
        assert_eq!(m.n_triangles(), 8);
        for t in 0..8 {
            let [a, b, c] = m.corners(t);
            for l in [a.dist(&b), b.dist(&c), c.dist(&a)] {
                assert!((l - 0.5).abs() < 1e-15 || (l - 0.5 * 2f64.sqrt()).abs() < 1e-15);
            }
        }
        assert!(validate(&m, 0.5, 6.0, 45f64.to_radians()).valid);
    }

    #[test]
    fn stripe_axis_aligned() {
        let m = stripe_mesh([1.0, 0.0], (0.25, 0.25), 0.25, 1.0).unwrap();
        let r = validate(&m, 0.25, 6.0, 30f64.to_radians());
        assert!(r.valid, "{:?}", r.violations);
        let damaged: f64 = (0..m.n_triangles())
            .filter(|&t| m.tag(t) == 1)
            .map(|t| m.area(t))
            .sum();
        assert!((damaged - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stripe_rejects_nondividing_period() {
        assert!(matches!(
            stripe_mesh([1.0, 0.0], (0.3, 0.3), 0.25, 1.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn rotated_square_contains_unit_square() {
        let g = 30f64.to_radians();
        let b = [g.cos(), g.sin()];
        let (_, side) = unit_square_frame(b);
        let m = stripe_mesh(b, (side / 8.0, side / 8.0), side / 8.0, side).unwrap();
        let bb = m.bounding_box();
        assert!(
            bb.min.x <= 1e-12
                && bb.min.y <= 1e-12
                && bb.max.x >= 1.0 - 1e-12
                && bb.max.y >= 1.0 - 1e-12
        );
        assert!((m.total_area() - side * side).abs() < 1e-12);
    }

    #[test]
    fn double_stripe_fraction() {
        let m = double_stripe_mesh([1.0, 0.0], (0.25, 0.25), (0.25, 0.25), 0.25, 1.0).unwrap();
        assert!(validate(&m, 0.25, 6.0, 30f64.to_radians()).valid);
        let damaged: f64 = (0..m.n_triangles())
            .filter(|&t| m.tag(t) == 1)
            .map(|t| m.area(t))
            .sum();
        assert!((damaged - 0.75).abs() < 1e-12);
    }

    #[test]
    fn jump_strip_band_geometry() {
        let h = 0.01;
        let theta = 20f64.to_radians();
        let w = h * theta.sin();
        let base = 2.0 * w / theta.tan();
        let s = jump_strip_mesh(0.5 * w, base, 20, base).unwrap();
        let r = validate(&s.mesh, h, 6.0, theta);
        assert!(r.valid, "{:?}", &r.violations[..r.violations.len().min(3)]);
        let band: f64 = (0..s.mesh.n_triangles())
            .filter(|&t| s.mesh.tag(t) == 1)
            .map(|t| s.mesh.area(t))
            .sum();
        assert!((band - w * (s.width + 0.5 * base)).abs() < 1e-12);
        assert!(jump_strip_mesh(0.2, 0.1, 4, 0.1).is_err());
    }
}
