//! Minimal 2D primitives for validating partitioned environments.
//!
//! All tolerance-sensitive comparisons take an explicit epsilon; the
//! environment module derives one from the partition's bounding box so the
//! checks are scale-invariant.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn close_to(self, other: Point, eps: f64) -> bool {
        self.dist(other) <= eps
    }
}

/// Cross product of (b - a) x (c - a); positive when `c` lies to the left of
/// the directed line a -> b.
pub fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Signed area of a polygon (positive for counter-clockwise orientation).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    s / 2.0
}

/// Checks that the polygon is convex with no repeated or collinear
/// consecutive vertices, in counter-clockwise order.
pub fn is_strictly_convex_ccw(poly: &[Point], eps: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        // Scale-aware strictness: the turn must be clearly left.
        if cross(a, b, c) <= eps * (a.dist(b) * b.dist(c)).max(f64::MIN_POSITIVE) {
            return false;
        }
    }
    true
}

/// True if `p` lies inside or on the boundary of a convex CCW polygon.
pub fn convex_contains(poly: &[Point], p: Point, eps: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if cross(a, b, p) < -eps * a.dist(b).max(f64::MIN_POSITIVE) {
            return false;
        }
    }
    true
}

/// True if `p` lies strictly inside a convex CCW polygon.
pub fn convex_contains_strict(poly: &[Point], p: Point, eps: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if cross(a, b, p) <= eps * a.dist(b).max(f64::MIN_POSITIVE) {
            return false;
        }
    }
    true
}

/// A closed segment.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// True if the two segments have identical endpoint sets (either
    /// orientation) within `eps`.
    pub fn same_endpoints(&self, other: &Segment, eps: f64) -> bool {
        (self.a.close_to(other.a, eps) && self.b.close_to(other.b, eps))
            || (self.a.close_to(other.b, eps) && self.b.close_to(other.a, eps))
    }

    /// True if the segments are collinear within `eps`.
    pub fn collinear_with(&self, other: &Segment, eps: f64) -> bool {
        let scale = self.len().max(other.len()).max(f64::MIN_POSITIVE);
        cross(self.a, self.b, other.a).abs() <= eps * scale * self.len().max(f64::MIN_POSITIVE)
            && cross(self.a, self.b, other.b).abs()
                <= eps * scale * self.len().max(f64::MIN_POSITIVE)
    }

    /// Length of the overlap of two collinear segments (0 when they only
    /// touch at a point or are disjoint). Meaningless for non-collinear
    /// segments.
    pub fn collinear_overlap_len(&self, other: &Segment) -> f64 {
        // Project everything on this segment's direction.
        let dx = self.b.x - self.a.x;
        let dy = self.b.y - self.a.y;
        let len = self.len();
        if len == 0.0 {
            return 0.0;
        }
        let proj = |p: Point| ((p.x - self.a.x) * dx + (p.y - self.a.y) * dy) / len;
        let (s0, s1) = (0.0f64, len);
        let (mut t0, mut t1) = (proj(other.a), proj(other.b));
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        (s1.min(t1) - s0.max(t0)).max(0.0)
    }
}

/// Whether two convex polygons share interior points, by separating axes:
/// the interiors intersect exactly when the projections onto every edge
/// normal of both polygons overlap by more than `eps`. Shared edges and
/// corner touches project to zero-width overlaps and do not count.
pub fn convex_interiors_intersect(a: &[Point], b: &[Point], eps: f64) -> bool {
    let mut axes = Vec::with_capacity(a.len() + b.len());
    for poly in [a, b] {
        let n = poly.len();
        for i in 0..n {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            let len = p.dist(q);
            if len <= f64::MIN_POSITIVE {
                continue;
            }
            // Unit normal, so projected widths stay in coordinate units.
            axes.push(((q.y - p.y) / len, (p.x - q.x) / len));
        }
    }
    for (nx, ny) in axes {
        let project = |poly: &[Point]| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in poly {
                let v = p.x * nx + p.y * ny;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        };
        let (alo, ahi) = project(a);
        let (blo, bhi) = project(b);
        if ahi.min(bhi) - alo.max(blo) <= eps {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn orientation_and_area() {
        let ccw = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)];
        let cw: Vec<Point> = ccw.iter().rev().cloned().collect();
        assert!(signed_area(&ccw) > 0.0);
        assert!(signed_area(&cw) < 0.0);
        assert!(is_strictly_convex_ccw(&ccw, 1e-12));
        assert!(!is_strictly_convex_ccw(&cw, 1e-12));
    }

    #[test]
    fn rejects_collinear_and_reflex() {
        let collinear = [p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0), p(1.0, 1.0)];
        assert!(!is_strictly_convex_ccw(&collinear, 1e-12));
        let reflex = [p(0.0, 0.0), p(2.0, 0.0), p(1.0, 0.5), p(2.0, 2.0), p(0.0, 2.0)];
        assert!(!is_strictly_convex_ccw(&reflex, 1e-12));
    }

    #[test]
    fn containment() {
        let tri = [p(0.0, 0.0), p(2.0, 0.0), p(0.0, 2.0)];
        assert!(convex_contains(&tri, p(0.5, 0.5), 1e-12));
        assert!(convex_contains(&tri, p(1.0, 1.0), 1e-12)); // on hypotenuse
        assert!(!convex_contains_strict(&tri, p(1.0, 1.0), 1e-12));
        assert!(!convex_contains(&tri, p(1.5, 1.5), 1e-12));
    }

    #[test]
    fn segment_overlap() {
        let s = Segment::new(p(0.0, 0.0), p(2.0, 0.0));
        let t = Segment::new(p(1.0, 0.0), p(3.0, 0.0));
        assert!(s.collinear_with(&t, 1e-12));
        assert!((s.collinear_overlap_len(&t) - 1.0).abs() < 1e-12);
        let touch = Segment::new(p(2.0, 0.0), p(3.0, 0.0));
        assert_eq!(s.collinear_overlap_len(&touch), 0.0);
        let same = Segment::new(p(2.0, 0.0), p(0.0, 0.0));
        assert!(s.same_endpoints(&same, 1e-12));
        assert!((s.collinear_overlap_len(&same) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interior_intersection_by_separating_axes() {
        let unit = |x: f64, y: f64| {
            vec![
                p(x, y),
                p(x + 1.0, y),
                p(x + 1.0, y + 1.0),
                p(x, y + 1.0),
            ]
        };
        let a = unit(0.0, 0.0);
        // Same-height horizontal shift: proper overlap despite every edge
        // intersection being degenerate.
        assert!(convex_interiors_intersect(&a, &unit(0.5, 0.0), 1e-12));
        // Identical polygons.
        assert!(convex_interiors_intersect(&a, &a.clone(), 1e-12));
        // Shared full edge only.
        assert!(!convex_interiors_intersect(&a, &unit(1.0, 0.0), 1e-12));
        // Corner touch only.
        assert!(!convex_interiors_intersect(&a, &unit(1.0, 1.0), 1e-12));
        // Disjoint.
        assert!(!convex_interiors_intersect(&a, &unit(3.0, 0.0), 1e-12));
        // Triangle poking into the square.
        let tri = [p(0.5, 0.5), p(2.0, 0.0), p(2.0, 1.0)];
        assert!(convex_interiors_intersect(&a, &tri, 1e-12));
        // Triangle sharing only a diagonal with another triangle.
        let t1 = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)];
        let t2 = [p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert!(!convex_interiors_intersect(&t1, &t2, 1e-12));
    }
}
