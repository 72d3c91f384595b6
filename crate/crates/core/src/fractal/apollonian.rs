use num_complex::Complex64;
use serde::Serialize;

use super::{FractalApproximation, FractalKind, Hole, Solid};
use crate::error::{Error, Result};
use crate::geometry::{Point, SceneComponent, Shape, TOL};

const NEWTON_TOL: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e8;
const ARC_SAMPLES: usize = 24;

/// A circle with signed radius: negative means the circle encloses the
/// others it is tangent to.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Disc {
    center: Point,
    s: f64,
}

impl Disc {
    fn radius(self) -> f64 {
        self.s.abs()
    }

    fn curvature(self) -> f64 {
        1.0 / self.s
    }

    fn tangency_residual(self, o: Disc) -> f64 {
        (self.center.dist(o.center) - (self.s + o.s).abs()).abs()
    }
}

fn disc_of(c: &SceneComponent) -> Result<Disc> {
    match c.shape {
        Shape::Circle { center, radius } => Ok(Disc {
            center,
            s: if c.bounded { radius } else { -radius },
        }),
        Shape::Polygon(_) => Err(Error::InvalidShape("tangent triples need circles".into())),
    }
}

/// Three mutually tangent circles with disjoint interiors.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCircleTriple {
    pub c1: SceneComponent,
    pub c2: SceneComponent,
    pub c3: SceneComponent,
}

impl TangentCircleTriple {
    pub fn new(c1: SceneComponent, c2: SceneComponent, c3: SceneComponent) -> Result<Self> {
        let t = Self { c1, c2, c3 };
        let d = t.discs()?;
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let r = d[i].tangency_residual(d[j]);
            if r > TOL {
                return Err(Error::InvalidInput(format!(
                    "circles {} and {} are not tangent (residual {r:.3e})",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(t)
    }

    /// Three unit circles centred at (0,0), (2,0), (1,√3).
    pub fn unit() -> Self {
        let c = |i, x, y| {
            SceneComponent::bounded(
                i,
                Shape::Circle {
                    center: Point::new(x, y),
                    radius: 1.0,
                },
            )
        };
        Self::new(c(1, 0.0, 0.0), c(2, 2.0, 0.0), c(3, 1.0, 3f64.sqrt()))
            .expect("unit triple is tangent")
    }

    fn discs(&self) -> Result<[Disc; 3]> {
        Ok([disc_of(&self.c1)?, disc_of(&self.c2)?, disc_of(&self.c3)?])
    }
}

/// Complex Descartes seeds for the circles tangent to `t` with curvature
/// `k`; both sign choices of the centre root.
fn descartes_centers(t: [Disc; 3], k: f64) -> [Point; 2] {
    let z = t.map(|d| Complex64::new(d.center.x, d.center.y));
    let b = t.map(Disc::curvature);
    let w = z[0] * b[0] + z[1] * b[1] + z[2] * b[2];
    let q =
        (z[0] * z[1] * (b[0] * b[1]) + z[1] * z[2] * (b[1] * b[2]) + z[2] * z[0] * (b[2] * b[0]))
            .sqrt()
            * 2.0;
    [(w + q) / k, (w - q) / k].map(|c| Point::new(c.re, c.im))
}

fn residuals(t: &[Disc; 3], c: Point, s: f64) -> [f64; 3] {
    t.map(|d| c.dist(d.center) - (d.s + s).abs())
}

fn max_abs(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn jacobian(t: &[Disc; 3], c: Point, s: f64) -> [[f64; 3]; 3] {
    t.map(|d| {
        let v = c - d.center;
        let n = v.norm();
        let sg = (d.s + s).signum();
        [v.x / n, v.y / n, -sg]
    })
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inverse3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = det3(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(inv)
}

fn inf_norm(m: &[[f64; 3]; 3]) -> f64 {
    m.iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Damped Newton on |c − cᵢ| = |sᵢ + s| from the Descartes seed with
/// curvature `k`.
fn solve_tangent(t: [Disc; 3], k: f64) -> Result<Disc> {
    if !k.is_finite() || k.abs() < 1e-8 {
        return Err(Error::IllConditioned(format!(
            "tangent circle curvature {k:.3e} is a line"
        )));
    }
    let seed = descartes_centers(t, k)
        .into_iter()
        .min_by(|a, b| {
            max_abs(&residuals(&t, *a, 1.0 / k)).total_cmp(&max_abs(&residuals(&t, *b, 1.0 / k)))
        })
        .unwrap();
    polish_tangent(t, k, seed)
}

/// The second circle tangent to `t` besides `old`: curvature and centre from
/// the Vieta reflection of the Descartes relations, then Newton.
fn reflect_tangent(t: [Disc; 3], old: Disc) -> Result<Disc> {
    let k = 2.0 * t.iter().map(|d| d.curvature()).sum::<f64>() - old.curvature();
    if !k.is_finite() || k.abs() < 1e-8 {
        return Err(Error::IllConditioned(format!(
            "tangent circle curvature {k:.3e} is a line"
        )));
    }
    let zk = |d: &Disc| Complex64::new(d.center.x, d.center.y) * d.curvature();
    let z = (t.iter().map(zk).sum::<Complex64>() * 2.0 - zk(&old)) / k;
    polish_tangent(t, k, Point::new(z.re, z.im))
}

fn polish_tangent(t: [Disc; 3], k: f64, seed: Point) -> Result<Disc> {
    let (mut c, mut s) = (seed, 1.0 / k);
    let scale = t
        .iter()
        .map(|d| d.center.norm() + d.radius())
        .fold(1.0, f64::max);
    let mut r = residuals(&t, c, s);
    for _ in 0..100 {
        if max_abs(&r) <= NEWTON_TOL * scale {
            break;
        }
        let Some(inv) = inverse3(&jacobian(&t, c, s)) else {
            return Err(Error::IllConditioned("singular tangency Jacobian".into()));
        };
        let step: [f64; 3] =
            std::array::from_fn(|i| -(0..3).map(|j| inv[i][j] * r[j]).sum::<f64>());
        let mut lambda = 1.0;
        loop {
            let cn = c + Point::new(step[0], step[1]) * lambda;
            let sn = s + step[2] * lambda;
            let rn = residuals(&t, cn, sn);
            if max_abs(&rn) < max_abs(&r) || lambda < 1e-9 {
                c = cn;
                s = sn;
                r = rn;
                break;
            }
            lambda *= 0.5;
        }
    }
    if max_abs(&r) > NEWTON_TOL * scale {
        return Err(Error::IllConditioned(format!(
            "Newton stalled at residual {:.3e}",
            max_abs(&r)
        )));
    }
    let j = jacobian(&t, c, s);
    let cond = inverse3(&j)
        .map(|inv| inf_norm(&j) * inf_norm(&inv))
        .unwrap_or(f64::INFINITY);
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned(format!(
            "tangency system condition number {cond:.3e}"
        )));
    }
    Ok(Disc { center: c, s })
}

fn descartes_curvatures(t: [Disc; 3]) -> (f64, f64) {
    let b = t.map(Disc::curvature);
    let sum = b[0] + b[1] + b[2];
    let root = 2.0 * (b[0] * b[1] + b[1] * b[2] + b[2] * b[0]).max(0.0).sqrt();
    (sum + root, sum - root)
}

/// The two circles tangent to all three of `t`: the one in the gap between
/// them and the other one, flagged unbounded when it encloses the triple.
pub fn soddy_circles(t: &TangentCircleTriple) -> Result<(SceneComponent, SceneComponent)> {
    let d = TangentCircleTriple::new(t.c1.clone(), t.c2.clone(), t.c3.clone())?.discs()?;
    let (k_in, k_out) = descartes_curvatures(d);
    let inner = solve_tangent(d, k_in)?;
    let outer = solve_tangent(d, k_out)?;
    let inner = SceneComponent::bounded(
        4,
        Shape::Circle {
            center: inner.center,
            radius: inner.radius(),
        },
    );
    let shape = Shape::Circle {
        center: outer.center,
        radius: outer.radius(),
    };
    let outer = if outer.s < 0.0 {
        SceneComponent::unbounded(shape)
    } else {
        SceneComponent::bounded(5, shape)
    };
    Ok((inner, outer))
}

fn tangency_point(a: Disc, b: Disc) -> Point {
    let dir = b.center - a.center;
    let dir = dir * (1.0 / dir.norm());
    if b.s < 0.0 {
        a.center - dir * a.radius()
    } else {
        a.center + dir * a.radius()
    }
}

fn angle_of(d: Disc, p: Point) -> f64 {
    (p.y - d.center.y).atan2(p.x - d.center.x)
}

/// Arc of `d` from `from` to `to` through `via`, endpoints included except `to`.
fn arc_samples(d: Disc, from: Point, to: Point, via: Point, out: &mut Vec<Point>) {
    use std::f64::consts::TAU;
    let a0 = angle_of(d, from);
    let ccw = |p: Point| (angle_of(d, p) - a0).rem_euclid(TAU);
    let (span_to, span_via) = (ccw(to), ccw(via));
    let sweep = if span_via <= span_to {
        span_to
    } else {
        span_to - TAU
    };
    for i in 0..ARC_SAMPLES {
        let a = a0 + sweep * i as f64 / ARC_SAMPLES as f64;
        out.push(d.center + Point::new(a.cos(), a.sin()) * d.radius());
    }
}

struct Gap {
    sides: [usize; 3],
    incircle: Disc,
}

struct Builder {
    discs: Vec<Disc>,
    outer: SceneComponent,
    holes: Vec<Hole>,
}

impl Builder {
    /// The gap bounded by `sides` on the far side from `opposite`.
    fn gap(&self, sides: [usize; 3], opposite: usize) -> Result<Gap> {
        let t = sides.map(|i| self.discs[i]);
        Ok(Gap {
            sides,
            incircle: reflect_tangent(t, self.discs[opposite])?,
        })
    }

    fn solid(&self, g: &Gap, parent: Option<usize>) -> Solid {
        let [a, b, c] = g.sides.map(|i| self.discs[i]);
        let (tab, tbc, tca) = (
            tangency_point(a, b),
            tangency_point(b, c),
            tangency_point(c, a),
        );
        let mut poly = Vec::with_capacity(3 * ARC_SAMPLES);
        arc_samples(a, tca, tab, tangency_point(a, g.incircle), &mut poly);
        arc_samples(b, tab, tbc, tangency_point(b, g.incircle), &mut poly);
        arc_samples(c, tbc, tca, tangency_point(c, g.incircle), &mut poly);
        let area2: f64 = (0..poly.len())
            .map(|i| poly[i].cross(poly[(i + 1) % poly.len()]))
            .sum();
        if area2 < 0.0 {
            poly.reverse();
        }
        Solid {
            shape: Shape::Polygon(poly),
            corners: vec![tab, tbc, tca],
            parent,
            carried: false,
            bounding: g.sides.to_vec(),
        }
    }
}

fn build(
    seed: &TangentCircleTriple,
    min_radius: f64,
    max_depth: u32,
) -> Result<FractalApproximation> {
    if !(min_radius.is_finite() && min_radius > 0.0) && max_depth == u32::MAX {
        return Err(Error::InvalidInput(format!(
            "min_radius must be positive, got {min_radius}"
        )));
    }
    let d = TangentCircleTriple::new(seed.c1.clone(), seed.c2.clone(), seed.c3.clone())?.discs()?;
    let (_, k_out) = descartes_curvatures(d);
    let c0 = solve_tangent(d, k_out)?;
    if c0.s > 0.0 {
        return Err(Error::InvalidInput(
            "seed triple does not have an enclosing Soddy circle".into(),
        ));
    }
    let outer = SceneComponent::unbounded(Shape::Circle {
        center: c0.center,
        radius: c0.radius(),
    });
    let mut b = Builder {
        discs: vec![c0],
        outer,
        holes: Vec::new(),
    };
    for disc in d {
        let index = b.discs.len();
        b.discs.push(disc);
        b.holes.push(Hole {
            component: SceneComponent::bounded(
                index,
                Shape::Circle {
                    center: disc.center,
                    radius: disc.radius(),
                },
            ),
            level: 0,
            parent: None,
            diam_sq_exact: None,
        });
    }
    let mut gaps = Vec::new();
    for (sides, opposite) in [
        ([1, 2, 3], 0),
        ([0, 1, 2], 3),
        ([0, 2, 3], 1),
        ([0, 3, 1], 2),
    ] {
        gaps.push(b.gap(sides, opposite)?);
    }
    let mut solids = vec![gaps.iter().map(|g| b.solid(g, None)).collect::<Vec<_>>()];
    // `live[i]` mirrors solids.last()[i]: the gap still open for expansion.
    let mut live: Vec<Option<Gap>> = gaps.into_iter().map(Some).collect();
    let mut level = 0;
    while level < max_depth {
        level += 1;
        let prev = solids.last().unwrap();
        let mut next_solids = Vec::new();
        let mut next_live = Vec::new();
        let mut added = false;
        for (pi, slot) in live.iter().enumerate() {
            match slot {
                Some(g) if g.incircle.radius() >= min_radius => {
                    added = true;
                    let index = b.discs.len();
                    b.discs.push(g.incircle);
                    b.holes.push(Hole {
                        component: SceneComponent::bounded(
                            index,
                            Shape::Circle {
                                center: g.incircle.center,
                                radius: g.incircle.radius(),
                            },
                        ),
                        level,
                        parent: Some(pi),
                        diam_sq_exact: None,
                    });
                    let [x, y, z] = g.sides;
                    for (sides, opposite) in
                        [([x, y, index], z), ([y, z, index], x), ([z, x, index], y)]
                    {
                        let child = b.gap(sides, opposite)?;
                        next_solids.push(b.solid(&child, Some(pi)));
                        next_live.push(Some(child));
                    }
                }
                _ => {
                    let mut s = prev[pi].clone();
                    s.parent = Some(pi);
                    s.carried = true;
                    next_solids.push(s);
                    next_live.push(None);
                }
            }
        }
        if !added {
            break;
        }
        solids.push(next_solids);
        live = next_live;
    }
    Ok(FractalApproximation {
        kind: FractalKind::Apollonian,
        outer: b.outer,
        solids,
        holes: b.holes,
    })
}

/// All gasket circles of radius ≥ `min_radius` generated from `seed`. The
/// enclosing Soddy circle is Ω₀; the seed circles are level-0 holes.
pub fn apollonian(seed: &TangentCircleTriple, min_radius: f64) -> Result<FractalApproximation> {
    if !(min_radius.is_finite() && min_radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "min_radius must be positive, got {min_radius}"
        )));
    }
    build(seed, min_radius, u32::MAX)
}

/// Every circle of generation ≤ `depth`, no radius cutoff.
pub fn apollonian_depth(seed: &TangentCircleTriple, depth: u32) -> Result<FractalApproximation> {
    if depth > 10 {
        return Err(Error::ResourceLimit {
            what: "apollonian depth",
            requested: depth as usize,
            max: 10,
        });
    }
    build(seed, 0.0, depth)
}

#[derive(Debug, Clone, Serialize)]
pub struct TangencyReport {
    pub circles: usize,
    /// Pairs that must be tangent: seed pairs and each circle with the three
    /// sides of the gap it fills.
    pub tangent_pairs: usize,
    pub max_residual: f64,
    /// Largest overlap between two bounded circles, or of one with the
    /// outside of C₀ (0 when all are disjoint).
    pub max_overlap: f64,
    /// Σ πr² over bounded circles.
    pub area_sum: f64,
    /// Area enclosed by C₀.
    pub area_inside: f64,
}

pub fn tangency_report(f: &FractalApproximation) -> Result<TangencyReport> {
    if f.kind != FractalKind::Apollonian {
        return Err(Error::InvalidInput(
            "tangency report needs an Apollonian construction".into(),
        ));
    }
    let discs: Vec<Disc> = std::iter::once(&f.outer)
        .chain(f.holes.iter().map(|h| &h.component))
        .map(disc_of)
        .collect::<Result<_>>()?;
    let mut pairs = 0;
    let mut max_residual: f64 = 0.0;
    let seed: Vec<usize> = std::iter::once(0)
        .chain(
            f.holes
                .iter()
                .filter(|h| h.level == 0)
                .map(|h| h.component.index),
        )
        .collect();
    for (a, &i) in seed.iter().enumerate() {
        for &j in &seed[a + 1..] {
            pairs += 1;
            max_residual = max_residual.max(discs[i].tangency_residual(discs[j]));
        }
    }
    for h in f.holes.iter().filter(|h| h.level > 0) {
        let Some(parent) = h.parent else { continue };
        for &k in &f.solids_at(h.level - 1)[parent].bounding {
            pairs += 1;
            max_residual = max_residual.max(discs[h.component.index].tangency_residual(discs[k]));
        }
    }
    let mut max_overlap: f64 = 0.0;
    for (i, a) in discs.iter().enumerate().skip(1) {
        max_overlap =
            max_overlap.max(a.center.dist(discs[0].center) + a.radius() - discs[0].radius());
        for b in &discs[i + 1..] {
            max_overlap = max_overlap.max(a.radius() + b.radius() - a.center.dist(b.center));
        }
    }
    let area_sum = discs[1..]
        .iter()
        .map(|d| std::f64::consts::PI * d.radius().powi(2))
        .sum();
    Ok(TangencyReport {
        circles: discs.len(),
        tangent_pairs: pairs,
        max_residual,
        max_overlap,
        area_sum,
        area_inside: std::f64::consts::PI * discs[0].radius().powi(2),
    })
}

pub(crate) fn circle_disc(f: &FractalApproximation, index: usize) -> Option<(Point, f64)> {
    let c = f.component(index)?;
    let d = disc_of(c).ok()?;
    Some((d.center, d.s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radius(c: &SceneComponent) -> f64 {
        match c.shape {
            Shape::Circle { radius, .. } => radius,
            _ => unreachable!(),
        }
    }

    #[test]
    fn unit_triple_soddy_radii() {
        let (inner, outer) = soddy_circles(&TangentCircleTriple::unit()).unwrap();
        // by symmetry both centres sit at the centroid, 2/√3 from each seed centre
        let d = Point::new(1.0, 3f64.sqrt() / 3.0).dist(Point::new(0.0, 0.0));
        assert!((radius(&inner) - (d - 1.0)).abs() < 1e-12);
        assert!((radius(&outer) - (d + 1.0)).abs() < 1e-12);
        assert!((radius(&inner) - 0.15470).abs() < 1e-5);
        assert!(!outer.bounded && outer.index == 0);
    }

    #[test]
    fn gap_in_triple_is_rejected() {
        let c = |i, x| SceneComponent::bounded(i, Shape::circle(Point::new(x, 0.0), 1.0).unwrap());
        let far = SceneComponent::bounded(3, Shape::circle(Point::new(1.0, 5.0), 1.0).unwrap());
        let t = TangentCircleTriple {
            c1: c(1, 0.0),
            c2: c(2, 2.0),
            c3: far,
        };
        assert!(soddy_circles(&t).is_err());
    }

    #[test]
    fn unequal_triple_is_tangent() {
        // radii 1, 2, 3 with centres placed by the law of cosines
        let (r1, r2, r3) = (1.0, 2.0, 3.0);
        let c1 = Point::new(0.0, 0.0);
        let c2 = Point::new(r1 + r2, 0.0);
        let (a, b, c) = (r1 + r3, r2 + r3, r1 + r2);
        let x = (a * a - b * b + c * c) / (2.0 * c);
        let c3 = Point::new(x, (a * a - x * x).sqrt());
        let t = TangentCircleTriple::new(
            SceneComponent::bounded(1, Shape::circle(c1, r1).unwrap()),
            SceneComponent::bounded(2, Shape::circle(c2, r2).unwrap()),
            SceneComponent::bounded(3, Shape::circle(c3, r3).unwrap()),
        )
        .unwrap();
        let (inner, outer) = soddy_circles(&t).unwrap();
        // Descartes: 1 + 1/2 + 1/3 ± 2·sqrt(1/2 + 1/6 + 1/3) = 11/6 ± 2
        assert!((radius(&inner) - 6.0 / 23.0).abs() < 1e-12);
        assert!((radius(&outer) - 6.0).abs() < 1e-10);
        for comp in [&inner, &outer] {
            let d = disc_of(comp).unwrap();
            for s in t.discs().unwrap() {
                assert!(d.tangency_residual(s) < 1e-9);
            }
        }
    }

    #[test]
    fn cutoff_and_generation_layout() {
        let seed = TangentCircleTriple::unit();
        let g = apollonian(&seed, 0.1).unwrap();
        let r_in = 1.0 / (3.0 + 2.0 * 3f64.sqrt());
        let gen1: Vec<_> = g.holes_at(1).collect();
        assert!(gen1
            .iter()
            .any(|h| (radius(&h.component) - r_in).abs() < 1e-12));
        // children of the central gap are smaller than the central circle
        let central = gen1.iter().position(|h| h.parent == Some(0)).unwrap();
        let central_solid_range = 3 * central..3 * central + 3;
        for h in g.holes_at(2) {
            if central_solid_range.contains(&h.parent.unwrap()) {
                assert!(radius(&h.component) < r_in);
            }
        }
        // a cutoff above every generation-1 radius leaves the four seed circles
        let g = apollonian(&seed, 0.5).unwrap();
        assert_eq!(g.holes.len() + 1, 4);
    }

    #[test]
    fn circles_are_tangent_and_disjoint() {
        let g = apollonian_depth(&TangentCircleTriple::unit(), 3).unwrap();
        assert_eq!(g.holes.len(), 3 + 4 + 12 + 36);
        let discs: Vec<_> = (0..=g.holes.len())
            .map(|i| circle_disc(&g, i).unwrap())
            .collect();
        for (i, a) in discs.iter().enumerate().skip(1) {
            for b in &discs[i + 1..] {
                assert!(a.0.dist(b.0) >= a.1 + b.1 - 1e-9);
            }
            assert!(discs[0].0.dist(a.0) <= -discs[0].1 - a.1 + 1e-9);
        }
        let area: f64 = discs[1..]
            .iter()
            .map(|d| std::f64::consts::PI * d.1 * d.1)
            .sum();
        assert!(area <= std::f64::consts::PI * discs[0].1 * discs[0].1);
        let r = tangency_report(&g).unwrap();
        assert_eq!(r.tangent_pairs, 6 + 3 * (4 + 12 + 36));
        assert!(r.max_residual <= 1e-9 && r.max_overlap <= 1e-9);
        assert!((r.area_sum - area).abs() < 1e-12);
    }
}
