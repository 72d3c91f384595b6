//! Planar primitives: points, lines, circles, polygons and the distance and
//! intersection predicates the rest of the crate is built on.
//!
//! Regions are closed sets bounded by a circle or a simple polygon. A
//! [`SceneComponent`] with `bounded == false` denotes the *exterior* of its
//! boundary curve (the unbounded complementary component).

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Incidence tolerance shared by every predicate unless overridden per call.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(p: Point, a: Point, b: Point, tol: f64) -> bool {
    point_segment_distance(p, a, b) <= tol
}

pub fn segments_intersect(a0: Point, a1: Point, b0: Point, b1: Point, tol: f64) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(a0, b0, b1, tol)
        || on_segment(a1, b0, b1, tol)
        || on_segment(b0, a0, a1, tol)
        || on_segment(b1, a0, a1, tol)
}

pub fn segment_segment_distance(a0: Point, a1: Point, b0: Point, b1: Point) -> f64 {
    if segments_intersect(a0, a1, b0, b1, 0.0) {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

/// Intersection of two closed segments as a (possibly degenerate) segment.
pub fn segment_overlap(
    a0: Point,
    a1: Point,
    b0: Point,
    b1: Point,
    tol: f64,
) -> Option<(Point, Point)> {
    let da = a1 - a0;
    let la = da.norm();
    if la == 0.0 {
        return on_segment(a0, b0, b1, tol).then_some((a0, a0));
    }
    let u = da * (1.0 / la);
    let collinear = (b0 - a0).cross(u).abs() <= tol && (b1 - a0).cross(u).abs() <= tol;
    if collinear {
        let (mut s0, mut s1) = ((b0 - a0).dot(u), (b1 - a0).dot(u));
        if s0 > s1 {
            std::mem::swap(&mut s0, &mut s1);
        }
        let lo = s0.max(0.0);
        let hi = s1.min(la);
        if lo > hi + tol {
            return None;
        }
        let hi = hi.max(lo);
        return Some((a0 + u * lo, a0 + u * hi));
    }
    if !segments_intersect(a0, a1, b0, b1, tol) {
        return None;
    }
    // Proper crossing or touching at an endpoint.
    for p in [a0, a1] {
        if on_segment(p, b0, b1, tol) {
            return Some((p, p));
        }
    }
    for p in [b0, b1] {
        if on_segment(p, a0, a1, tol) {
            return Some((p, p));
        }
    }
    let db = b1 - b0;
    let t = (b0 - a0).cross(db) / da.cross(db);
    let p = a0 + da * t;
    Some((p, p))
}

/// Oriented line in arc-length parameterization `t ↦ offset·n + t·direction`
/// where `n = direction.perp()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    direction: Point,
    offset: f64,
}

impl Line {
    /// Builds the canonical form: unit direction with `y > 0`, or `y == 0`
    /// and `x > 0`.
    pub fn new(direction: Point, offset: f64) -> Result<Self> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) || !offset.is_finite() {
            return Err(Error::InvalidInput(
                "line direction must be non-zero".into(),
            ));
        }
        let mut d = direction * (1.0 / n);
        let mut offset = offset;
        if d.y < 0.0 || (d.y == 0.0 && d.x < 0.0) {
            d = -d;
            offset = -offset;
        }
        Ok(Self {
            direction: d,
            offset,
        })
    }

    pub fn through(p: Point, direction: Point) -> Result<Self> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput(
                "line direction must be non-zero".into(),
            ));
        }
        let d = direction * (1.0 / n);
        Self::new(d, p.dot(d.perp()))
    }

    pub fn horizontal(y: f64) -> Self {
        Self {
            direction: Point::new(1.0, 0.0),
            offset: y,
        }
    }

    pub fn vertical(x: f64) -> Self {
        Self {
            direction: Point::new(0.0, 1.0),
            offset: -x,
        }
    }

    pub fn direction(&self) -> Point {
        self.direction
    }

    pub fn normal(&self) -> Point {
        self.direction.perp()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.normal() * self.offset + self.direction * t
    }

    pub fn param_of(&self, p: Point) -> f64 {
        p.dot(self.direction)
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        p.dot(self.normal()) - self.offset
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.signed_distance(p).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval1D {
    pub lo: f64,
    pub hi: f64,
}

impl Interval1D {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi <= self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Circle {
        center: Point,
        radius: f64,
    },
    /// Simple polygon, counter-clockwise.
    Polygon(Vec<Point>),
}

impl Shape {
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() {
            return Err(Error::InvalidShape(format!("circle radius {radius}")));
        }
        Ok(Shape::Circle { center, radius })
    }

    /// Validates and orients a polygon counter-clockwise.
    pub fn polygon(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidShape(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidShape("non-finite polygon vertex".into()));
        }
        let area = signed_area(&vertices);
        if area == 0.0 {
            return Err(Error::InvalidShape("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if self_intersects(&vertices) {
            return Err(Error::InvalidShape("polygon is self-intersecting".into()));
        }
        Ok(Shape::Polygon(vertices))
    }

    /// Skips validation; for generators that produce known-good polygons.
    pub(crate) fn polygon_unchecked(vertices: Vec<Point>) -> Self {
        debug_assert!(vertices.len() >= 3 && signed_area(&vertices) > 0.0);
        Shape::Polygon(vertices)
    }

    fn check(&self) -> Result<()> {
        match self {
            Shape::Polygon(v) if v.len() < 3 => Err(Error::InvalidShape(format!(
                "polygon needs at least 3 vertices, got {}",
                v.len()
            ))),
            Shape::Circle { radius, .. } if *radius <= 0.0 => {
                Err(Error::InvalidShape(format!("circle radius {radius}")))
            }
            _ => Ok(()),
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let v: &[Point] = match self {
            Shape::Polygon(v) => v,
            Shape::Circle { .. } => &[],
        };
        (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
    }

    /// Distance from `p` to the boundary curve.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self {
            Shape::Circle { center, radius } => (p.dist(*center) - radius).abs(),
            Shape::Polygon(_) => self
                .edges()
                .map(|(a, b)| point_segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Strict interior test (points on the boundary may go either way).
    pub fn interior_contains(&self, p: Point) -> bool {
        match self {
            Shape::Circle { center, radius } => p.dist(*center) < *radius,
            Shape::Polygon(v) => {
                let mut inside = false;
                let n = v.len();
                let mut j = n - 1;
                for i in 0..n {
                    let (a, b) = (v[i], v[j]);
                    if (a.y > p.y) != (b.y > p.y) {
                        let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                        if p.x < x {
                            inside = !inside;
                        }
                    }
                    j = i;
                }
                inside
            }
        }
    }

    /// Closed-region membership with tolerance.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.interior_contains(p) || self.boundary_distance(p) <= tol
    }

    /// Distance from `p` to the closed region.
    pub fn region_distance(&self, p: Point) -> f64 {
        if self.interior_contains(p) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Shape::Circle { radius, .. } => 2.0 * radius,
            Shape::Polygon(v) => {
                let mut d: f64 = 0.0;
                for (i, a) in v.iter().enumerate() {
                    for b in &v[i + 1..] {
                        d = d.max(a.dist(*b));
                    }
                }
                d
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Circle { radius, .. } => std::f64::consts::PI * radius * radius,
            Shape::Polygon(v) => signed_area(v).abs(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Shape::Circle { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            Shape::Polygon(_) => self.edges().map(|(a, b)| a.dist(b)).sum(),
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            Shape::Circle { center, radius } => (
                Point::new(center.x - radius, center.y - radius),
                Point::new(center.x + radius, center.y + radius),
            ),
            Shape::Polygon(v) => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in v {
                    lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
                }
                (lo, hi)
            }
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            Shape::Circle { center, .. } => *center,
            Shape::Polygon(v) => {
                let a = signed_area(v);
                let mut c = Point::default();
                for (p, q) in self.edges() {
                    let w = p.cross(q);
                    c = c + (p + q) * w;
                }
                c * (1.0 / (6.0 * a))
            }
        }
    }

    /// `n` points on the boundary spaced by arc length. Polygon vertices are
    /// always included.
    pub fn boundary_samples(&self, n: usize) -> Vec<Point> {
        match self {
            Shape::Circle { center, radius } => (0..n)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    *center + Point::new(th.cos(), th.sin()) * *radius
                })
                .collect(),
            Shape::Polygon(v) => {
                let per = self.perimeter();
                let mut out = Vec::with_capacity(n.max(v.len()));
                let edges: Vec<_> = self.edges().collect();
                let mut remaining = n.saturating_sub(v.len());
                for (k, (a, b)) in edges.iter().enumerate() {
                    let share = if k + 1 == edges.len() {
                        remaining
                    } else {
                        ((a.dist(*b) / per) * n.saturating_sub(v.len()) as f64).round() as usize
                    };
                    let share = share.min(remaining);
                    remaining -= share;
                    out.push(*a);
                    for j in 1..=share {
                        out.push(a.lerp(*b, j as f64 / (share + 1) as f64));
                    }
                }
                out
            }
        }
    }

    /// Applies `p ↦ origin + (p - origin)·factor`.
    pub fn scaled_about(&self, origin: Point, factor: f64) -> Shape {
        let map = |p: Point| origin + (p - origin) * factor;
        match self {
            Shape::Circle { center, radius } => Shape::Circle {
                center: map(*center),
                radius: radius * factor.abs(),
            },
            Shape::Polygon(v) => Shape::Polygon(v.iter().map(|p| map(*p)).collect()),
        }
    }

    /// Parameter intervals of `line` inside the closed region. Tangency
    /// yields a degenerate interval.
    pub fn line_hits(&self, line: &Line) -> Vec<Interval1D> {
        match self {
            Shape::Circle { center, radius } => {
                let d = line.signed_distance(*center).abs();
                let tc = line.param_of(*center);
                if d > *radius {
                    if d - radius <= TOL {
                        vec![Interval1D::new(tc, tc)]
                    } else {
                        vec![]
                    }
                } else {
                    let half = (radius * radius - d * d).max(0.0).sqrt();
                    vec![Interval1D::new(tc - half, tc + half)]
                }
            }
            Shape::Polygon(_) => self.polygon_line_hits(line),
        }
    }

    fn polygon_line_hits(&self, line: &Line) -> Vec<Interval1D> {
        let mut ts = Vec::new();
        for (a, b) in self.edges() {
            let (sa, sb) = (line.signed_distance(a), line.signed_distance(b));
            let (ta, tb) = (line.param_of(a), line.param_of(b));
            if sa.abs() <= TOL && sb.abs() <= TOL {
                ts.push(ta);
                ts.push(tb);
            } else if sa.abs() <= TOL {
                ts.push(ta);
            } else if sb.abs() <= TOL {
                ts.push(tb);
            } else if (sa < 0.0) != (sb < 0.0) {
                ts.push(ta + (tb - ta) * sa / (sa - sb));
            }
        }
        if ts.is_empty() {
            return vec![];
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|b, a| (*b - *a).abs() <= TOL);

        let mut out: Vec<Interval1D> = Vec::new();
        let mut covered = vec![false; ts.len()];
        for i in 0..ts.len().saturating_sub(1) {
            let mid = line.point_at(0.5 * (ts[i] + ts[i + 1]));
            if self.contains(mid, TOL) {
                covered[i] = true;
                covered[i + 1] = true;
                match out.last_mut() {
                    Some(last) if (last.hi - ts[i]).abs() <= TOL => last.hi = ts[i + 1],
                    _ => out.push(Interval1D::new(ts[i], ts[i + 1])),
                }
            }
        }
        for (i, t) in ts.iter().enumerate() {
            if !covered[i] {
                out.push(Interval1D::new(*t, *t));
            }
        }
        out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        out
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn self_intersects(v: &[Point]) -> bool {
    let n = v.len();
    for i in 0..n {
        let (a0, a1) = (v[i], v[(i + 1) % n]);
        for j in i + 1..n {
            // skip edges sharing a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (b0, b1) = (v[j], v[(j + 1) % n]);
            if segments_intersect(a0, a1, b0, b1, 0.0) {
                return true;
            }
        }
    }
    false
}

/// One complementary component Ω_k: a region bounded by a circle or simple
/// polygon. The unbounded component (`index == 0`) is the exterior of its
/// boundary curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneComponent {
    pub index: usize,
    pub shape: Shape,
    pub bounded: bool,
}

impl SceneComponent {
    pub fn new(index: usize, shape: Shape, bounded: bool) -> Result<Self> {
        shape.check()?;
        if (index == 0) == bounded {
            return Err(Error::InvalidShape(format!(
                "component {index}: index 0 must be exactly the unbounded component"
            )));
        }
        Ok(Self {
            index,
            shape,
            bounded,
        })
    }

    pub fn bounded(index: usize, shape: Shape) -> Self {
        debug_assert!(index != 0);
        Self {
            index,
            shape,
            bounded: true,
        }
    }

    pub fn unbounded(shape: Shape) -> Self {
        Self {
            index: 0,
            shape,
            bounded: false,
        }
    }

    /// Distance from `p` to the closure of this component.
    pub fn closure_distance(&self, p: Point) -> f64 {
        if self.bounded {
            self.shape.region_distance(p)
        } else if self.shape.interior_contains(p) {
            self.shape.boundary_distance(p)
        } else {
            0.0
        }
    }

    /// Intervals of `line` inside the closure; infinite ends for the
    /// unbounded component.
    pub fn closure_hits(&self, line: &Line) -> Vec<Interval1D> {
        let inner = self.shape.line_hits(line);
        if self.bounded {
            return inner;
        }
        let mut out = Vec::new();
        let mut lo = f64::NEG_INFINITY;
        for iv in &inner {
            out.push(Interval1D::new(lo, iv.lo));
            lo = iv.hi;
        }
        out.push(Interval1D::new(lo, f64::INFINITY));
        out
    }
}

/// δ(p): Euclidean distance from `p` to the boundary curve of `c`.
pub fn distance_to_component(p: Point, c: &SceneComponent) -> Result<f64> {
    c.shape.check()?;
    Ok(c.shape.boundary_distance(p))
}

/// Parameter intervals of `line` inside the closed region bounded by `c`'s
/// curve, sorted and disjoint.
pub fn line_component_hits(line: &Line, c: &SceneComponent) -> Result<Vec<Interval1D>> {
    c.shape.check()?;
    Ok(c.shape.line_hits(line))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HausdorffDistance {
    /// sup over a ∈ A of dist(a, B)
    pub directed: f64,
    /// max of the two directed distances
    pub symmetric: f64,
}

fn directed(a: &[Point], b: &[Point]) -> f64 {
    a.iter()
        .map(|p| b.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> Result<HausdorffDistance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let ab = directed(a, b);
    let ba = directed(b, a);
    Ok(HausdorffDistance {
        directed: ab,
        symmetric: ab.max(ba),
    })
}

fn circle_segment_distance(c: Point, r: f64, a: Point, b: Point) -> f64 {
    let dmin = point_segment_distance(c, a, b);
    let dmax = c.dist(a).max(c.dist(b));
    if dmin > r {
        dmin - r
    } else if dmax < r {
        r - dmax
    } else {
        0.0
    }
}

/// Distance between two boundary curves.
pub fn curve_distance(a: &Shape, b: &Shape) -> f64 {
    match (a, b) {
        (
            Shape::Circle {
                center: c1,
                radius: r1,
            },
            Shape::Circle {
                center: c2,
                radius: r2,
            },
        ) => {
            let d = c1.dist(*c2);
            if d >= r1 + r2 {
                d - r1 - r2
            } else if d <= (r1 - r2).abs() {
                (r1 - r2).abs() - d
            } else {
                0.0
            }
        }
        (Shape::Circle { center, radius }, poly @ Shape::Polygon(_))
        | (poly @ Shape::Polygon(_), Shape::Circle { center, radius }) => poly
            .edges()
            .map(|(p, q)| circle_segment_distance(*center, *radius, p, q))
            .fold(f64::INFINITY, f64::min),
        (Shape::Polygon(_), Shape::Polygon(_)) => {
            let mut d = f64::INFINITY;
            for (a0, a1) in a.edges() {
                for (b0, b1) in b.edges() {
                    d = d.min(segment_segment_distance(a0, a1, b0, b1));
                    if d == 0.0 {
                        return 0.0;
                    }
                }
            }
            d
        }
    }
}

fn any_boundary_point(s: &Shape) -> Point {
    match s {
        Shape::Circle { center, radius } => *center + Point::new(*radius, 0.0),
        Shape::Polygon(v) => v[0],
    }
}

/// Distance between the closures of two components.
pub fn closure_distance(a: &SceneComponent, b: &SceneComponent) -> f64 {
    match (a.bounded, b.bounded) {
        (false, false) => 0.0,
        (true, true) => {
            let d = curve_distance(&a.shape, &b.shape);
            if d == 0.0
                || a.shape.interior_contains(any_boundary_point(&b.shape))
                || b.shape.interior_contains(any_boundary_point(&a.shape))
            {
                0.0
            } else {
                d
            }
        }
        (false, true) | (true, false) => {
            let (ext, inner) = if a.bounded { (b, a) } else { (a, b) };
            let d = curve_distance(&ext.shape, &inner.shape);
            if d > 0.0
                && ext
                    .shape
                    .interior_contains(any_boundary_point(&inner.shape))
            {
                d
            } else {
                0.0
            }
        }
    }
}

/// Distance from the segment [a, b] to the closure of `c`.
pub fn segment_closure_distance(a: Point, b: Point, c: &SceneComponent) -> f64 {
    let boundary = |shape: &Shape| match shape {
        Shape::Circle { center, radius } => (point_segment_distance(*center, a, b) - radius).abs(),
        Shape::Polygon(_) => shape
            .edges()
            .map(|(e0, e1)| segment_segment_distance(a, b, e0, e1))
            .fold(f64::INFINITY, f64::min),
    };
    if c.bounded {
        if c.shape.contains(a, 0.0) || c.shape.contains(b, 0.0) {
            return 0.0;
        }
        if let Shape::Circle { center, radius } = c.shape {
            return (point_segment_distance(center, a, b) - radius).max(0.0);
        }
        boundary(&c.shape)
    } else {
        if !c.shape.interior_contains(a) || !c.shape.interior_contains(b) {
            return 0.0;
        }
        if let Shape::Circle { center, radius } = c.shape {
            // |p − c| is convex along the segment, so its max is at an end
            return radius - center.dist(a).max(center.dist(b));
        }
        boundary(&c.shape)
    }
}

/// True iff the closed regions come within `tol` of each other.
pub fn component_closures_intersect(a: &SceneComponent, b: &SceneComponent, tol: f64) -> bool {
    closure_distance(a, b) <= tol
}

/// Bounding box of a set of points.
pub fn points_bbox(points: impl IntoIterator<Item = Point>) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

pub fn diameter_of(points: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max(a.dist(*b));
        }
    }
    d
}
