//! Exact geometric primitives.
//!
//! Obstacle vertices and query points are integer [`Point`]s. Points derived
//! from ray shooting may land on sloped edges and are carried as [`RPoint`]
//! with rational coordinates. Every predicate here is exact.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Largest admissible coordinate magnitude (exclusive).
pub const COORD_LIMIT: i64 = 1 << 62;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub fn to_rational(self) -> RPoint {
        RPoint::from(self)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(i64, i64)> for Point {
    fn from((x, y): (i64, i64)) -> Self {
        Point { x, y }
    }
}

/// A point with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RPoint {
    pub x: Rational,
    pub y: Rational,
}

impl RPoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        RPoint { x, y }
    }

    /// The integer point, when both coordinates are integral.
    pub fn to_point(&self) -> Option<Point> {
        Some(Point::new(self.x.to_i64()?, self.y.to_i64()?))
    }
}

impl From<Point> for RPoint {
    fn from(p: Point) -> Self {
        RPoint { x: Rational::from_int(p.x), y: Rational::from_int(p.y) }
    }
}

impl From<&Point> for RPoint {
    fn from(p: &Point) -> Self {
        RPoint::from(*p)
    }
}

impl fmt::Debug for RPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A closed segment between two integer points. `a == b` is a legal,
/// degenerate segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn is_axis_parallel(&self) -> bool {
        self.a.x == self.b.x || self.a.y == self.b.y
    }
}

/// A simple polygon with counterclockwise vertex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1` (cyclically).
    pub fn edge(&self, i: usize) -> Segment {
        let n = self.vertices.len();
        Segment::new(self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    /// Twice the signed area; positive for counterclockwise order.
    pub fn doubled_area(&self) -> i128 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                p.x as i128 * q.y as i128 - q.x as i128 * p.y as i128
            })
            .sum()
    }

    pub fn bounds(&self) -> (Point, Point) {
        let xs = self.vertices.iter().map(|p| p.x);
        let ys = self.vertices.iter().map(|p| p.y);
        (
            Point::new(xs.clone().min().unwrap_or(0), ys.clone().min().unwrap_or(0)),
            Point::new(xs.max().unwrap_or(0), ys.max().unwrap_or(0)),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Left,
    Right,
    Collinear,
}

impl Orientation {
    fn from_sign(s: i32) -> Self {
        match s.cmp(&0) {
            Ordering::Greater => Orientation::Left,
            Ordering::Less => Orientation::Right,
            Ordering::Equal => Orientation::Collinear,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Left => Orientation::Right,
            Orientation::Right => Orientation::Left,
            Orientation::Collinear => Orientation::Collinear,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

/// L1 distance between two integer points.
pub fn l1_length(a: Point, b: Point) -> u128 {
    (a.x as i128 - b.x as i128).unsigned_abs() + (a.y as i128 - b.y as i128).unsigned_abs()
}

/// L1 distance between two rational points.
pub fn l1_length_r(a: &RPoint, b: &RPoint) -> Rational {
    (&a.x - &b.x).abs() + (&a.y - &b.y).abs()
}

/// Exact cross product `(b - a) x (c - a)`.
pub fn cross(a: Point, b: Point, c: Point) -> i128 {
    (b.x as i128 - a.x as i128) * (c.y as i128 - a.y as i128)
        - (b.y as i128 - a.y as i128) * (c.x as i128 - a.x as i128)
}

pub fn cross_r(a: &RPoint, b: &RPoint, c: &RPoint) -> Rational {
    let l = &(&b.x - &a.x) * &(&c.y - &a.y);
    let r = &(&b.y - &a.y) * &(&c.x - &a.x);
    l - r
}

pub fn orientation(a: Point, b: Point, c: Point) -> Orientation {
    Orientation::from_sign(cross(a, b, c).signum() as i32)
}

pub fn orientation_r(a: &RPoint, b: &RPoint, c: &RPoint) -> Orientation {
    Orientation::from_sign(cross_r(a, b, c).signum())
}

/// Whether `p` lies on the closed segment `ab`.
pub fn on_segment_r(p: &RPoint, a: &RPoint, b: &RPoint) -> bool {
    if orientation_r(a, b, p) != Orientation::Collinear {
        return false;
    }
    let (lx, hx) = if a.x <= b.x { (&a.x, &b.x) } else { (&b.x, &a.x) };
    let (ly, hy) = if a.y <= b.y { (&a.y, &b.y) } else { (&b.y, &a.y) };
    *lx <= p.x && p.x <= *hx && *ly <= p.y && p.y <= *hy
}

pub fn on_segment(p: Point, s: Segment) -> bool {
    cross(s.a, s.b, p) == 0
        && s.a.x.min(s.b.x) <= p.x
        && p.x <= s.a.x.max(s.b.x)
        && s.a.y.min(s.b.y) <= p.y
        && p.y <= s.a.y.max(s.b.y)
}

/// Result of intersecting two closed segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Intersection {
    Disjoint,
    /// The segments cross at a single point interior to both.
    Proper(RPoint),
    /// The segments share exactly one point, which is an endpoint of at
    /// least one of them.
    Touch(RPoint),
    /// Collinear overlap; endpoints in lexicographic order.
    Overlap(RPoint, RPoint),
}

/// Exact intersection of two closed segments.
pub fn segments_intersect(s1: Segment, s2: Segment) -> Intersection {
    let (a, b, c, d) = (s1.a, s1.b, s2.a, s2.b);
    let o1 = cross(a, b, c).signum();
    let o2 = cross(a, b, d).signum();
    let o3 = cross(c, d, a).signum();
    let o4 = cross(c, d, b).signum();

    if s1.is_degenerate() || s2.is_degenerate() {
        let (p, s) = if s1.is_degenerate() { (a, s2) } else { (c, s1) };
        if s1.is_degenerate() && s2.is_degenerate() {
            return if a == c { Intersection::Touch(a.into()) } else { Intersection::Disjoint };
        }
        return if on_segment(p, s) { Intersection::Touch(p.into()) } else { Intersection::Disjoint };
    }

    if o1 == 0 && o2 == 0 {
        // Collinear: order the four endpoints along the common line.
        let key = |p: Point| (p.x, p.y);
        let (mut p1, mut p2) = (a, b);
        if key(p2) < key(p1) {
            std::mem::swap(&mut p1, &mut p2);
        }
        let (mut q1, mut q2) = (c, d);
        if key(q2) < key(q1) {
            std::mem::swap(&mut q1, &mut q2);
        }
        let lo = if key(p1) > key(q1) { p1 } else { q1 };
        let hi = if key(p2) < key(q2) { p2 } else { q2 };
        return match key(lo).cmp(&key(hi)) {
            Ordering::Greater => Intersection::Disjoint,
            Ordering::Equal => Intersection::Touch(lo.into()),
            Ordering::Less => Intersection::Overlap(lo.into(), hi.into()),
        };
    }

    if o1 * o2 < 0 && o3 * o4 < 0 {
        let denom = (b.x as i128 - a.x as i128) * (d.y as i128 - c.y as i128)
            - (b.y as i128 - a.y as i128) * (d.x as i128 - c.x as i128);
        let numer = (c.x as i128 - a.x as i128) * (d.y as i128 - c.y as i128)
            - (c.y as i128 - a.y as i128) * (d.x as i128 - c.x as i128);
        let t = Rational::new(numer, denom);
        let x = &Rational::from_int(a.x) + &(&t * &Rational::from_int(b.x as i128 - a.x as i128));
        let y = &Rational::from_int(a.y) + &(&t * &Rational::from_int(b.y as i128 - a.y as i128));
        return Intersection::Proper(RPoint::new(x, y));
    }

    for (p, s) in [(a, s2), (b, s2), (c, s1), (d, s1)] {
        if on_segment(p, s) {
            return Intersection::Touch(p.into());
        }
    }
    Intersection::Disjoint
}

/// Classifies `p` against a polygon by crossing count, with exact boundary
/// detection.
pub fn point_in_polygon_r(p: &RPoint, poly: &Polygon) -> Location {
    let n = poly.vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = RPoint::from(poly.vertices[i]);
        let b = RPoint::from(poly.vertices[(i + 1) % n]);
        if on_segment_r(p, &a, &b) {
            return Location::Boundary;
        }
        if (a.y > p.y) != (b.y > p.y) {
            // x of the edge at height p.y compared with p.x, sign-corrected.
            let lhs = &(&p.x - &a.x) * &(&b.y - &a.y);
            let rhs = &(&b.x - &a.x) * &(&p.y - &a.y);
            let edge_right = if b.y > a.y { lhs < rhs } else { lhs > rhs };
            if edge_right {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Interior
    } else {
        Location::Exterior
    }
}

pub fn point_in_polygon(p: Point, poly: &Polygon) -> Location {
    point_in_polygon_r(&p.into(), poly)
}

/// Winding number of `poly` around `p` (undefined when `p` is on the
/// boundary). Used as an independent check on [`point_in_polygon`].
pub fn winding_number(p: Point, poly: &Polygon) -> i32 {
    let n = poly.vertices.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly.vertices[i];
        let b = poly.vertices[(i + 1) % n];
        if a.y <= p.y {
            if b.y > p.y && cross(a, b, p) > 0 {
                wn += 1;
            }
        } else if b.y <= p.y && cross(a, b, p) < 0 {
            wn -= 1;
        }
    }
    wn
}

/// Whether the closed segment `ab` stays out of the interior of `poly`
/// (touching the boundary is allowed). Brute force: the segment is cut at
/// every boundary contact and each open piece is classified at its
/// midpoint.
pub fn segment_avoids_interior(a: &RPoint, b: &RPoint, poly: &Polygon) -> bool {
    let (lo, hi) = poly.bounds();
    let (lo, hi) = (RPoint::from(lo), RPoint::from(hi));
    if a.x.clone().max(b.x.clone()) < lo.x
        || a.x.clone().min(b.x.clone()) > hi.x
        || a.y.clone().max(b.y.clone()) < lo.y
        || a.y.clone().min(b.y.clone()) > hi.y
    {
        return true;
    }
    if a == b {
        return point_in_polygon_r(a, poly) != Location::Interior;
    }
    let dx = &b.x - &a.x;
    let dy = &b.y - &a.y;
    // Parameter of a point known to be on the line through a and b.
    let param = |p: &RPoint| -> Rational {
        if !dx.is_zero() {
            &(&p.x - &a.x) / &dx
        } else {
            &(&p.y - &a.y) / &dy
        }
    };
    let mut ts = vec![Rational::ZERO, Rational::ONE];
    let n = poly.vertices.len();
    for i in 0..n {
        let c = RPoint::from(poly.vertices[i]);
        let d = RPoint::from(poly.vertices[(i + 1) % n]);
        let o1 = orientation_r(a, b, &c);
        let o2 = orientation_r(a, b, &d);
        let o3 = orientation_r(&c, &d, a);
        let o4 = orientation_r(&c, &d, b);
        let opposite = |x: Orientation, y: Orientation| {
            matches!((x, y), (Orientation::Left, Orientation::Right) | (Orientation::Right, Orientation::Left))
        };
        if opposite(o1, o2) && opposite(o3, o4) {
            // A proper crossing always enters the interior.
            return false;
        }
        if o1 == Orientation::Collinear && on_segment_r(&c, a, b) {
            ts.push(param(&c));
        }
        if o2 == Orientation::Collinear && on_segment_r(&d, a, b) {
            ts.push(param(&d));
        }
    }
    ts.sort();
    ts.dedup();
    for w in ts.windows(2) {
        let t = Rational::midpoint(&w[0], &w[1]);
        let m = RPoint::new(&a.x + &(&t * &dx), &a.y + &(&t * &dy));
        if point_in_polygon_r(&m, poly) == Location::Interior {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn p(x: i64, y: i64) -> Point {
        Point::new(x, y)
    }

    fn scene_a_polygon() -> Polygon {
        Polygon::new(vec![p(2, 1), p(5, 2), p(4, 6), p(1, 5)])
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_length(p(0, 0), p(3, 4)), 7);
        assert_eq!(l1_length(p(5, 5), p(5, 5)), 0);
        assert_eq!(l1_length(p(-2, 3), p(4, -1)), 10);
    }

    #[test]
    fn orientation_examples() {
        assert_eq!(orientation(p(0, 0), p(1, 0), p(0, 1)), Orientation::Left);
        assert_eq!(orientation(p(0, 0), p(1, 1), p(2, 2)), Orientation::Collinear);
        assert_eq!(orientation(p(0, 0), p(0, 1), p(1, 0)), Orientation::Right);
    }

    #[test]
    fn intersection_examples() {
        let s = |a: (i64, i64), b: (i64, i64)| Segment::new(a.into(), b.into());
        assert_eq!(segments_intersect(s((0, 0), (4, 0)), s((2, -1), (2, 1))), Intersection::Proper(p(2, 0).into()));
        assert_eq!(segments_intersect(s((0, 0), (1, 0)), s((2, 0), (3, 0))), Intersection::Disjoint);
        assert_eq!(
            segments_intersect(s((0, 0), (2, 2)), s((1, 1), (3, 3))),
            Intersection::Overlap(p(1, 1).into(), p(2, 2).into())
        );
        assert_eq!(segments_intersect(s((0, 0), (2, 0)), s((2, 0), (2, 5))), Intersection::Touch(p(2, 0).into()));
        // Non-integer crossing of two sloped segments.
        assert_eq!(
            segments_intersect(s((0, 0), (1, 1)), s((0, 1), (1, 0))),
            Intersection::Proper(RPoint::new(q(1, 2), q(1, 2)))
        );
    }

    #[test]
    fn point_in_polygon_examples() {
        let poly = scene_a_polygon();
        assert!(poly.doubled_area() > 0);
        assert_eq!(point_in_polygon(p(0, 0), &poly), Location::Exterior);
        assert_eq!(point_in_polygon(p(2, 1), &poly), Location::Boundary);
        assert_eq!(point_in_polygon(p(3, 3), &poly), Location::Interior);
        assert_eq!(point_in_polygon_r(&RPoint::new(q(3, 2), q(3, 1)), &poly), Location::Boundary);
    }

    #[test]
    fn segment_interior_avoidance() {
        let poly = scene_a_polygon();
        let r = |x: i64, y: i64| RPoint::from(p(x, y));
        // Along an edge.
        assert!(segment_avoids_interior(&r(2, 1), &r(5, 2), &poly));
        // Diagonal through the interior between opposite vertices.
        assert!(!segment_avoids_interior(&r(2, 1), &r(4, 6), &poly));
        // Outside entirely.
        assert!(segment_avoids_interior(&r(0, 0), &r(6, 0), &poly));
        // Crossing.
        assert!(!segment_avoids_interior(&r(0, 3), &r(6, 3), &poly));
        // Touching a vertex from outside.
        assert!(segment_avoids_interior(&r(0, 1), &r(2, 1), &poly));
    }

    fn small_point() -> impl Strategy<Value = Point> {
        (-50i64..50, -50i64..50).prop_map(|(x, y)| Point::new(x, y))
    }

    fn star_polygon() -> impl Strategy<Value = Polygon> {
        prop::collection::vec((1i64..30, 0u32..360), 3..9).prop_filter_map("simple star polygon", |mut spokes| {
            spokes.sort_by_key(|s| s.1);
            spokes.dedup_by_key(|s| s.1);
            if spokes.len() < 3 {
                return None;
            }
            let verts: Vec<Point> = spokes
                .iter()
                .map(|&(r, deg)| {
                    let a = (deg as f64).to_radians();
                    Point::new((r as f64 * a.cos()).round() as i64, (r as f64 * a.sin()).round() as i64)
                })
                .collect();
            let poly = Polygon::new(verts);
            crate::scene::check_polygon(&poly).ok().map(|_| poly)
        })
    }

    proptest! {
        #[test]
        fn l1_symmetric_and_triangle(a in small_point(), b in small_point(), c in small_point()) {
            prop_assert_eq!(l1_length(a, b), l1_length(b, a));
            prop_assert!(l1_length(a, c) <= l1_length(a, b) + l1_length(b, c));
        }

        #[test]
        fn orientation_antisymmetric(a in small_point(), b in small_point(), c in small_point()) {
            prop_assert_eq!(orientation(a, b, c), orientation(a, c, b).reversed());
        }

        #[test]
        fn intersection_symmetric(a in small_point(), b in small_point(), c in small_point(), d in small_point()) {
            let s1 = Segment::new(a, b);
            let s2 = Segment::new(c, d);
            let norm = |i: Intersection| match i {
                Intersection::Overlap(x, y) => Intersection::Overlap(x.clone().min(y.clone()), x.max(y)),
                other => other,
            };
            prop_assert_eq!(norm(segments_intersect(s1, s2)), norm(segments_intersect(s2, s1)));
        }

        #[test]
        fn pip_agrees_with_winding(poly in star_polygon(), pts in prop::collection::vec(small_point(), 200)) {
            for pt in pts {
                match point_in_polygon(pt, &poly) {
                    Location::Boundary => {}
                    Location::Interior => prop_assert_eq!(winding_number(pt, &poly), 1),
                    Location::Exterior => prop_assert_eq!(winding_number(pt, &poly), 0),
                }
            }
        }
    }
}
