//! Planar geometry primitives: points, angles, robust orientation,
//! segment intersection, polygon predicates and half-plane clipping.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) in the plane, length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Unit vector at angle `theta` (radians, CCW from +x).
    pub fn from_angle(theta: f64) -> Self {
        Point2::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// 2D cross product (z-component of the 3D cross).
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn dist2(self, o: Point2) -> f64 {
        (self - o).norm2()
    }

    /// Angle of this vector, in (-π, π].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Interior angle at vertex `v` between rays `v->a` and `v->b`, in [0, π].
pub fn angle_at(v: Point2, a: Point2, b: Point2) -> f64 {
    let u = a - v;
    let w = b - v;
    u.cross(w).abs().atan2(u.dot(w))
}

/// Direction angle of the ray `from -> to`.
pub fn direction(from: Point2, to: Point2) -> f64 {
    (to - from).angle()
}

/// Exact sign of the orientation of the triple (a, b, c):
/// positive for counter-clockwise, negative for clockwise, zero for collinear.
/// Uses adaptive-precision arithmetic, so the sign is reliable on doubles.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    )
}

fn on_segment_collinear(p: Point2, a: Point2, b: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// True if closed segments [a1,a2] and [b1,b2] share any point
/// (proper crossing, endpoint touching, or collinear overlap).
pub fn segments_intersect(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment_collinear(a1, b1, b2))
        || (d2 == 0.0 && on_segment_collinear(a2, b1, b2))
        || (d3 == 0.0 && on_segment_collinear(b1, a1, a2))
        || (d4 == 0.0 && on_segment_collinear(b2, a1, a2))
}

/// Signed area of a polygon (positive when counter-clockwise).
pub fn polygon_signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a.cross(b);
    }
    acc / 2.0
}

/// Crossing-number point-in-polygon test. Intended for points that are not
/// within rounding distance of the boundary.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let t = (p.y - a.y) / (b.y - a.y);
            let x = a.x + t * (b.x - a.x);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// The half-plane { p : a·x + b·y ≤ c }.
#[derive(Debug, Clone, Copy)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfPlane {
    /// Points at least as close to `keep` as to `other`:
    /// |p - keep| ≤ |p - other|.
    pub fn bisector_keeping(keep: Point2, other: Point2) -> HalfPlane {
        HalfPlane {
            a: 2.0 * (other.x - keep.x),
            b: 2.0 * (other.y - keep.y),
            c: other.norm2() - keep.norm2(),
        }
    }

    /// Signed value; ≤ 0 means inside.
    pub fn eval(&self, p: Point2) -> f64 {
        self.a * p.x + self.b * p.y - self.c
    }
}

/// Sutherland–Hodgman clip of a polygon against one half-plane.
pub fn clip_polygon(poly: &[Point2], hp: &HalfPlane) -> Vec<Point2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let cur = poly[i];
        let nxt = poly[(i + 1) % n];
        let sc = hp.eval(cur);
        let sn = hp.eval(nxt);
        if sc <= 0.0 {
            out.push(cur);
        }
        if (sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0) {
            let t = sc / (sc - sn);
            out.push(cur + (nxt - cur) * t);
        }
    }
    out
}
