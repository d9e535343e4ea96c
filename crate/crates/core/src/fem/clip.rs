use crate::mesh::{Point2, Rect};

/// Area of the intersection of a counterclockwise triangle with a rectangle.
pub fn clipped_area(tri: &[Point2; 3], rect: &Rect) -> f64 {
    let mut poly: Vec<Point2> = tri.to_vec();
    // Each half-plane is {p : s·(coord(p) − bound) ≥ 0}.
    let planes: [(bool, f64, f64); 4] = [
        (true, rect.min.x, 1.0),
        (true, rect.max.x, -1.0),
        (false, rect.min.y, 1.0),
        (false, rect.max.y, -1.0),
    ];
    for (is_x, bound, sign) in planes {
        if poly.is_empty() {
            return 0.0;
        }
        let side = |p: &Point2| sign * (if is_x { p.x } else { p.y } - bound);
        let mut next = Vec::with_capacity(poly.len() + 2);
        for i in 0..poly.len() {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            let (da, db) = (side(&a), side(&b));
            if da >= 0.0 {
                next.push(a);
            }
            if (da >= 0.0) != (db >= 0.0) {
                let t = da / (da - db);
                next.push(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
            }
        }
        poly = next;
    }
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inside_outside_and_straddling() {
        let r = Rect::unit();
        let inside = [
            Point2::new(0.1, 0.1),
            Point2::new(0.5, 0.1),
            Point2::new(0.1, 0.5),
        ];
        assert!((clipped_area(&inside, &r) - 0.08).abs() < 1e-15);
        let outside = [
            Point2::new(2.0, 2.0),
            Point2::new(3.0, 2.0),
            Point2::new(2.0, 3.0),
        ];
        assert_eq!(clipped_area(&outside, &r), 0.0);
        // Half of this triangle lies left of x = 0.
        let straddle = [
            Point2::new(-0.5, 0.2),
            Point2::new(0.5, 0.2),
            Point2::new(0.0, 0.7),
        ];
        assert!((clipped_area(&straddle, &r) - 0.125).abs() < 1e-15);
    }
}
