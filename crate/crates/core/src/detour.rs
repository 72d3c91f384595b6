//! Detour paths for lines against a leveled fractal approximation: the
//! interval cover of L ∩ int(K_m), arc replacement along solid boundaries,
//! an independent verifier and the grouping of paths by closure contact.
//!
//! Touched sets range over the components created at levels ≤ m, the
//! working level. Closures of deeper holes can meet ∂V at isolated points
//! (edge midpoints in the gasket) and are not counted.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractal::{FractalApproximation, FractalKind};
use crate::geometry::{
    component_closures_intersect, diameter_of, point_segment_distance, segment_closure_distance,
    Interval1D, Line, Point, SceneComponent, Shape,
};

/// Lines closer than this to a corner of a level-≤m solid are exceptional.
pub const EXCEPTIONAL_TOL: f64 = 1e-9;
/// Points checked per polyline segment by the verifier, endpoints included.
const SEGMENT_SAMPLES: usize = 17;

/// Closed parameter interval of L with both ends on ∂V for one solid V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverInterval {
    pub interval: Interval1D,
    pub solid: usize,
    pub entry: Point,
    pub exit: Point,
    /// L only touches V here.
    pub degenerate: bool,
}

/// Parameter hits of L on the closed solid, sorted.
fn solid_hits(line: &Line, shape: &Shape) -> Vec<Interval1D> {
    let (lo, hi) = shape.bbox();
    let corners = [lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];
    let s: Vec<f64> = corners.iter().map(|c| line.signed_distance(*c)).collect();
    let (smin, smax) = s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if smin > EXCEPTIONAL_TOL || smax < -EXCEPTIONAL_TOL {
        return Vec::new();
    }
    shape.line_hits(line)
}

/// Covers L ∩ int(K_m) by intervals, sweeping solids by first entry: each
/// interval runs from the first entry into a solid (at or after the end of
/// the previous interval) to its last exit.
pub fn interval_cover(line: &Line, f: &FractalApproximation, m: u32) -> Result<Vec<CoverInterval>> {
    if m > f.depth() {
        return Err(Error::Resolution(format!(
            "level {m} exceeds construction depth {}",
            f.depth()
        )));
    }
    let mut hits: Vec<(usize, Vec<Interval1D>)> = f
        .solids_at(m)
        .iter()
        .enumerate()
        .map(|(i, s)| (i, solid_hits(line, &s.shape)))
        .filter(|(_, h)| !h.is_empty())
        .collect();
    hits.sort_by(|a, b| a.1[0].lo.total_cmp(&b.1[0].lo).then(a.0.cmp(&b.0)));

    let mut out: Vec<CoverInterval> = Vec::new();
    let mut end = f64::NEG_INFINITY;
    for (solid, h) in hits {
        let last = h.iter().map(|iv| iv.hi).fold(f64::NEG_INFINITY, f64::max);
        let solid_pieces = h.iter().any(|iv| !iv.is_degenerate());
        if last <= end && !(last == end && !solid_pieces) {
            continue;
        }
        let Some(first) = h.iter().find(|iv| iv.hi > end) else {
            continue;
        };
        let lo = first.lo.max(end);
        let interval = Interval1D::new(lo, last);
        let degenerate = !h.iter().any(|iv| !iv.is_degenerate() && iv.hi > end);
        out.push(CoverInterval {
            interval,
            solid,
            entry: line.point_at(lo),
            exit: line.point_at(last),
            degenerate,
        });
        end = last;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DetourArc {
    pub solid: usize,
    pub points: Vec<Point>,
    pub diameter: f64,
    /// Walked in the polygon's counter-clockwise order.
    pub positive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetourPath {
    pub line: Line,
    pub epsilon: f64,
    /// Working level: the first with every solid diameter below epsilon.
    pub level: u32,
    pub polyline: Vec<Point>,
    /// Component indices whose closures the path meets, sorted.
    pub touched: Vec<usize>,
    pub arcs: Vec<DetourArc>,
}

/// Constructor-side condition failure, reported instead of a path.
#[derive(Debug, Clone, Serialize)]
pub struct DetourFailure {
    pub line: Line,
    pub epsilon: f64,
    pub level: u32,
    pub hausdorff: f64,
    /// Touched components the line itself never meets.
    pub off_line: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum DetourOutcome {
    Path(DetourPath),
    Failure(DetourFailure),
}

impl DetourOutcome {
    pub fn path(&self) -> Option<&DetourPath> {
        match self {
            DetourOutcome::Path(p) => Some(p),
            DetourOutcome::Failure(_) => None,
        }
    }
}

/// Smallest level whose solids all have diameter < epsilon.
pub fn working_level(f: &FractalApproximation, epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    (0..=f.depth())
        .find(|&m| f.max_solid_diameter(m) < epsilon)
        .ok_or_else(|| {
            Error::Resolution(format!(
                "epsilon {epsilon} is below the construction floor {:.3e}; build more levels",
                f.max_solid_diameter(f.depth())
            ))
        })
}

/// Components of levels ≤ m, Ω₀ first.
fn components_through(f: &FractalApproximation, m: u32) -> Vec<&SceneComponent> {
    std::iter::once(&f.outer)
        .chain(f.holes_through(m).map(|h| &h.component))
        .collect()
}

/// L ∩ Ω̄ ≠ ∅ up to `tol`. A closed polygonal curve meets the line iff its
/// vertices do not all lie strictly on one side.
fn line_meets(line: &Line, c: &SceneComponent, tol: f64) -> bool {
    if !c.bounded {
        return true;
    }
    match &c.shape {
        Shape::Circle { center, radius } => line.distance(*center) <= radius + tol,
        Shape::Polygon(v) => {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in v {
                let s = line.signed_distance(*p);
                lo = lo.min(s);
                hi = hi.max(s);
            }
            lo <= tol && hi >= -tol
        }
    }
}

fn edge_of(v: &[Point], p: Point) -> usize {
    let n = v.len();
    (0..n)
        .min_by(|&i, &j| {
            point_segment_distance(p, v[i], v[(i + 1) % n]).total_cmp(&point_segment_distance(
                p,
                v[j],
                v[(j + 1) % n],
            ))
        })
        .expect("polygon has edges")
}

/// The two boundary arcs of a CCW polygon from `x` to `y`.
fn boundary_arcs(v: &[Point], x: Point, y: Point) -> (Vec<Point>, Vec<Point>) {
    let n = v.len();
    let (ex, ey) = (edge_of(v, x), edge_of(v, y));
    let along = |e: usize, p: Point| (p - v[e]).dot(v[(e + 1) % n] - v[e]);
    let mut fwd = vec![x];
    if !(ex == ey && along(ex, y) >= along(ex, x)) {
        let mut i = (ex + 1) % n;
        loop {
            fwd.push(v[i]);
            if i == ey {
                break;
            }
            i = (i + 1) % n;
        }
    }
    fwd.push(y);
    let mut bwd = vec![x];
    if !(ex == ey && along(ex, y) <= along(ex, x)) {
        let mut i = ex;
        loop {
            bwd.push(v[i]);
            if i == (ey + 1) % n {
                break;
            }
            i = (i + n - 1) % n;
        }
    }
    bwd.push(y);
    (fwd, bwd)
}

/// Parameter range of L across the fractal's bounding box, widened by `pad`.
fn sweep_range(line: &Line, f: &FractalApproximation, pad: f64) -> (f64, f64) {
    let (lo, hi) = f.bbox();
    let ts = [lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)].map(|c| line.param_of(c));
    let (a, b) = ts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| {
            (a.min(t), b.max(t))
        });
    (a - pad, b + pad)
}

/// Components of levels ≤ m whose closures come within `tol` of the polyline.
fn touched_by(polyline: &[Point], comps: &[&SceneComponent], tol: f64) -> Vec<usize> {
    let boxes: Vec<(Point, Point)> = comps.iter().map(|c| c.shape.bbox()).collect();
    let mut out = BTreeSet::new();
    for w in polyline.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (slo, shi) = (
            Point::new(a.x.min(b.x), a.y.min(b.y)),
            Point::new(a.x.max(b.x), a.y.max(b.y)),
        );
        for (c, bx) in comps.iter().zip(&boxes) {
            if out.contains(&c.index) {
                continue;
            }
            let near_box = bx.0.x <= shi.x + tol
                && slo.x <= bx.1.x + tol
                && bx.0.y <= shi.y + tol
                && slo.y <= bx.1.y + tol;
            if c.bounded && !near_box {
                continue;
            }
            if segment_closure_distance(a, b, c) <= tol {
                out.insert(c.index);
            }
        }
    }
    out.into_iter().collect()
}

/// Follows L outside int(K_m) and replaces each cover interval by the
/// boundary arc of its solid with the smaller diameter (counter-clockwise
/// on ties).
pub fn detour_path(line: &Line, f: &FractalApproximation, epsilon: f64) -> Result<DetourOutcome> {
    let m = working_level(f, epsilon)?;
    for c in f.corners_through(m) {
        if line.distance(c) <= EXCEPTIONAL_TOL {
            return Err(Error::ExceptionalLine { near: c });
        }
    }
    let tol = f.contact_tolerance();
    let cover = interval_cover(line, f, m)?;
    let (t0, t1) = sweep_range(line, f, epsilon);
    let mut polyline = vec![line.point_at(t0)];
    let mut arcs = Vec::new();
    for ci in cover.iter().filter(|c| !c.degenerate) {
        let Shape::Polygon(v) = &f.solids_at(m)[ci.solid].shape else {
            return Err(Error::InvalidShape(
                "detour arcs need polygonal solids".into(),
            ));
        };
        let (fwd, bwd) = boundary_arcs(v, ci.entry, ci.exit);
        let (df, db) = (diameter_of(&fwd), diameter_of(&bwd));
        let (points, diameter, positive) = if df <= db {
            (fwd, df, true)
        } else {
            (bwd, db, false)
        };
        polyline.extend_from_slice(&points);
        arcs.push(DetourArc {
            solid: ci.solid,
            points,
            diameter,
            positive,
        });
    }
    polyline.push(line.point_at(t1));
    polyline.dedup();

    let comps = components_through(f, m);
    let touched = touched_by(&polyline, &comps, tol);
    let hausdorff = polyline
        .iter()
        .map(|p| line.distance(*p))
        .fold(0.0, f64::max);
    let off_line: Vec<usize> = touched
        .iter()
        .copied()
        .filter(|&k| !line_meets(line, f.component(k).expect("touched index exists"), tol))
        .collect();
    let arcs_ok = arcs.iter().all(|a| a.diameter < epsilon);
    if hausdorff > epsilon || !off_line.is_empty() || !arcs_ok {
        return Ok(DetourOutcome::Failure(DetourFailure {
            line: *line,
            epsilon,
            level: m,
            hausdorff,
            off_line,
        }));
    }
    Ok(DetourOutcome::Path(DetourPath {
        line: *line,
        epsilon,
        level: m,
        polyline,
        touched,
        arcs,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct DetourReport {
    pub epsilon: f64,
    pub tolerance: f64,
    /// sup over the path of dist(·, L).
    pub hausdorff: f64,
    pub hausdorff_ok: bool,
    /// Largest distance from a sampled path point to the nearest touched
    /// closure (condition i).
    pub worst_cover_gap: f64,
    pub cover_ok: bool,
    pub samples: usize,
    /// Condition ii, explicit.
    pub touched_count: usize,
    pub finite_ok: bool,
    /// Touched components that L does not meet (condition iii).
    pub off_line: Vec<usize>,
    pub line_ok: bool,
    /// Components the path meets that the touched list omits.
    pub unlisted: Vec<usize>,
    pub pass: bool,
}

/// Re-checks a path from raw geometry.
pub fn verify_detour(p: &DetourPath, f: &FractalApproximation) -> DetourReport {
    let tol = f.contact_tolerance();
    let line = &p.line;
    let hausdorff = p
        .polyline
        .iter()
        .map(|q| line.distance(*q))
        .fold(0.0, f64::max);

    let touched: Vec<&SceneComponent> = p.touched.iter().filter_map(|&k| f.component(k)).collect();
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for w in p.polyline.windows(2) {
        for s in 0..SEGMENT_SAMPLES {
            let q = w[0].lerp(w[1], s as f64 / (SEGMENT_SAMPLES - 1) as f64);
            let d = touched
                .iter()
                .map(|c| c.closure_distance(q))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
            samples += 1;
        }
    }
    if p.polyline.len() == 1 {
        worst = touched
            .iter()
            .map(|c| c.closure_distance(p.polyline[0]))
            .fold(f64::INFINITY, f64::min);
        samples = 1;
    }

    let off_line: Vec<usize> = p
        .touched
        .iter()
        .copied()
        .filter(|&k| !f.component(k).is_some_and(|c| line_meets(line, c, tol)))
        .collect();
    let unlisted: Vec<usize> = touched_by(
        &p.polyline,
        &components_through(f, p.level.min(f.depth())),
        tol,
    )
    .into_iter()
    .filter(|k| p.touched.binary_search(k).is_err())
    .collect();

    let hausdorff_ok = hausdorff <= p.epsilon;
    let cover_ok = worst <= tol;
    let finite_ok = p.touched.len() == touched.len();
    let line_ok = off_line.is_empty();
    DetourReport {
        epsilon: p.epsilon,
        tolerance: tol,
        hausdorff,
        hausdorff_ok,
        worst_cover_gap: worst,
        cover_ok,
        samples,
        touched_count: p.touched.len(),
        finite_ok,
        line_ok,
        pass: hausdorff_ok && cover_ok && finite_ok && line_ok && unlisted.is_empty(),
        off_line,
        unlisted,
    }
}

/// `n` lines with offsets uniform over the bounding interval of `f`,
/// alternating horizontal and vertical, from a ChaCha8 stream keyed by `seed`.
pub fn sample_lines(f: &FractalApproximation, n: usize, seed: u64) -> Vec<Line> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = f.bbox();
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                Line::horizontal(rng.gen_range(lo.y..hi.y))
            } else {
                Line::vertical(rng.gen_range(lo.x..hi.x))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LineResult {
    Exceptional {
        line: Line,
        near: Point,
    },
    Path {
        path: DetourPath,
        report: DetourReport,
    },
    Failure {
        failure: DetourFailure,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct DetourBatch {
    pub epsilon: f64,
    pub lines: Vec<LineResult>,
    pub exceptional: usize,
    pub constructed: usize,
    pub verified: usize,
}

impl DetourBatch {
    /// Every constructed path verified and at least one line was usable.
    pub fn pass(&self) -> bool {
        self.constructed == self.verified && self.exceptional < self.lines.len()
    }
}

/// Runs `detour_path` and `verify_detour` on each line; exceptional lines
/// are recorded, other errors abort.
pub fn detour_batch(f: &FractalApproximation, lines: &[Line], epsilon: f64) -> Result<DetourBatch> {
    let mut out = Vec::with_capacity(lines.len());
    let (mut exceptional, mut constructed, mut verified) = (0, 0, 0);
    for line in lines {
        match detour_path(line, f, epsilon) {
            Err(Error::ExceptionalLine { near }) => {
                exceptional += 1;
                out.push(LineResult::Exceptional { line: *line, near });
            }
            Err(e) => return Err(e),
            Ok(DetourOutcome::Failure(failure)) => out.push(LineResult::Failure { failure }),
            Ok(DetourOutcome::Path(path)) => {
                constructed += 1;
                let report = verify_detour(&path, f);
                verified += report.pass as usize;
                out.push(LineResult::Path { path, report });
            }
        }
    }
    Ok(DetourBatch {
        epsilon,
        lines: out,
        exceptional,
        constructed,
        verified,
    })
}

/// Contact proving two paths' closure unions meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Contact {
    pub paths: (usize, usize),
    pub components: (usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupPartition {
    /// Path ids per group, each sorted; groups ordered by smallest id.
    pub groups: Vec<Vec<usize>>,
    /// Spanning contacts per group.
    pub witness: Vec<Vec<Contact>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn first_contact(
    a: &[usize],
    b: &[usize],
    f: &FractalApproximation,
    tol: f64,
) -> Option<(usize, usize)> {
    for &k in a {
        if b.binary_search(&k).is_ok() {
            return Some((k, k));
        }
    }
    for &k in a {
        let ck = f.component(k)?;
        for &l in b {
            let cl = f.component(l)?;
            if component_closures_intersect(ck, cl, tol) {
                return Some((k, l));
            }
        }
    }
    None
}

/// Merges paths whose touched closures meet, to a fixpoint.
pub fn group_paths(paths: &[DetourPath], f: &FractalApproximation) -> GroupPartition {
    let tol = f.contact_tolerance();
    let n = paths.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if find(&mut parent, i) == find(&mut parent, j) {
                continue;
            }
            if let Some(components) = first_contact(&paths[i].touched, &paths[j].touched, f, tol) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
                edges.push(Contact {
                    paths: (i, j),
                    components,
                });
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    let mut witness = vec![Vec::new(); groups.len()];
    for e in edges {
        let r = find(&mut parent, e.paths.0);
        witness[slot[r]].push(e);
    }
    GroupPartition { groups, witness }
}

/// Checks the partition invariants geometrically: disjoint touched sets
/// across groups and a witness tree per group whose contacts hold.
pub fn validate_partition(
    p: &GroupPartition,
    paths: &[DetourPath],
    f: &FractalApproximation,
) -> bool {
    let tol = f.contact_tolerance();
    let mut seen = vec![false; paths.len()];
    for g in &p.groups {
        for &i in g {
            if i >= paths.len() || std::mem::replace(&mut seen[i], true) {
                return false;
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return false;
    }
    let sets: Vec<BTreeSet<usize>> = p
        .groups
        .iter()
        .map(|g| {
            g.iter()
                .flat_map(|&i| paths[i].touched.iter().copied())
                .collect()
        })
        .collect();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if !sets[a].is_disjoint(&sets[b]) {
                return false;
            }
        }
    }
    for (g, w) in p.groups.iter().zip(&p.witness) {
        if w.len() + 1 != g.len() {
            return false;
        }
        let mut parent: Vec<usize> = (0..paths.len()).collect();
        for c in w {
            let (k, l) = c.components;
            let ok = paths[c.paths.0].touched.binary_search(&k).is_ok()
                && paths[c.paths.1].touched.binary_search(&l).is_ok()
                && match (f.component(k), f.component(l)) {
                    (Some(ck), Some(cl)) => component_closures_intersect(ck, cl, tol),
                    _ => false,
                };
            if !ok {
                return false;
            }
            let (ri, rj) = (find(&mut parent, c.paths.0), find(&mut parent, c.paths.1));
            parent[ri] = rj;
        }
        let root = find(&mut parent, g[0]);
        if g.iter().any(|&i| find(&mut parent, i) != root) {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct StructuralLevel {
    pub level: u32,
    /// Largest diameter among holes created at this level (0 at level 0).
    pub max_hole_diameter: f64,
    pub solid_area: f64,
    pub area_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructuralReport {
    pub kind: FractalKind,
    pub levels: Vec<StructuralLevel>,
    pub hole_diameters_decreasing: bool,
    pub areas_decreasing: bool,
}

/// Per-level hole diameters and solid areas of K_m.
pub fn structural_checks(f: &FractalApproximation) -> StructuralReport {
    let a0 = f.solid_area(0);
    let levels: Vec<StructuralLevel> = (0..=f.depth())
        .map(|m| {
            let solid_area = f.solid_area(m);
            StructuralLevel {
                level: m,
                max_hole_diameter: f.holes_at(m).map(|h| h.diameter()).fold(0.0, f64::max),
                solid_area,
                area_ratio: solid_area / a0,
            }
        })
        .collect();
    let hole_diameters_decreasing = levels
        .windows(2)
        .skip(1)
        .all(|w| w[1].max_hole_diameter < w[0].max_hole_diameter || w[1].max_hole_diameter == 0.0);
    let areas_decreasing = levels
        .windows(2)
        .all(|w| w[1].solid_area <= w[0].solid_area * (1.0 + 1e-12));
    StructuralReport {
        kind: f.kind,
        levels,
        hole_diameters_decreasing,
        areas_decreasing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{apollonian_depth, carpet_levels, gasket_levels, TangentCircleTriple};

    const H: f64 = 0.866_025_403_784_438_6;

    #[test]
    fn mid_height_cover_on_level_one() {
        let g = gasket_levels(1).unwrap();
        let line = Line::horizontal(H / 2.0 - 1e-3);
        let cover = interval_cover(&line, &g, 1).unwrap();
        assert_eq!(cover.len(), 2);
        assert_ne!(cover[0].solid, cover[1].solid);
        // the hole crossing sits between the two intervals
        let hole = g.holes[0].component.shape.line_hits(&line)[0];
        assert!(cover[0].interval.hi <= hole.lo + 1e-12 && hole.hi <= cover[1].interval.lo + 1e-12);
        for c in &cover {
            let s = &g.solids_at(1)[c.solid].shape;
            assert!(s.boundary_distance(c.entry) < 1e-12 && s.boundary_distance(c.exit) < 1e-12);
        }
    }

    #[test]
    fn cover_of_missing_and_single_solid() {
        let g = gasket_levels(2).unwrap();
        assert!(interval_cover(&Line::horizontal(-1.0), &g, 2)
            .unwrap()
            .is_empty());
        let g0 = gasket_levels(0).unwrap();
        let c = interval_cover(&Line::horizontal(0.3), &g0, 0).unwrap();
        assert_eq!(c.len(), 1);
        let t = g0.solids_at(0)[0].shape.line_hits(&Line::horizontal(0.3))[0];
        assert_eq!(c[0].interval, t);
    }

    #[test]
    fn tangent_line_gives_degenerate_interval() {
        let g = apollonian_depth(&TangentCircleTriple::unit(), 0).unwrap();
        // top of the upper seed circle
        let line = Line::horizontal(3f64.sqrt() + 1.0);
        let cover = interval_cover(&line, &g, 0).unwrap();
        assert!(cover.iter().all(|c| c.interval.lo <= c.interval.hi));
    }

    #[test]
    fn horizontal_gasket_path() {
        let g = gasket_levels(6).unwrap();
        let out = detour_path(&Line::horizontal(0.3), &g, 0.1).unwrap();
        let p = out.path().expect("path");
        assert_eq!(p.level, 4);
        assert!(p.touched.len() <= 40, "{}", p.touched.len());
        let r = verify_detour(p, &g);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn corridor_line_is_straight() {
        let g = gasket_levels(5).unwrap();
        let p = detour_path(&Line::horizontal(-1.0), &g, 0.1).unwrap();
        let p = p.path().unwrap();
        assert_eq!(p.polyline.len(), 2);
        assert_eq!(p.touched, vec![0]);
        assert!(verify_detour(p, &g).pass);
    }

    #[test]
    fn exceptional_and_resolution_errors() {
        let g = gasket_levels(4).unwrap();
        assert!(matches!(
            detour_path(&Line::horizontal(H / 2.0), &g, 0.1),
            Err(Error::ExceptionalLine { .. })
        ));
        assert!(matches!(
            detour_path(&Line::horizontal(0.3), &g, 0.01),
            Err(Error::Resolution(_))
        ));
        assert!(detour_path(&Line::horizontal(0.3), &g, 0.0).is_err());
    }

    #[test]
    fn planted_violations_are_caught() {
        let g = gasket_levels(5).unwrap();
        let mut p = detour_path(&Line::horizontal(0.3), &g, 0.05)
            .unwrap()
            .path()
            .unwrap()
            .clone();
        let mut wander = p.clone();
        let mid = wander.polyline.len() / 2;
        wander.polyline[mid] = wander.polyline[mid] + Point::new(0.0, 0.1);
        let r = verify_detour(&wander, &g);
        assert!(!r.hausdorff_ok && !r.pass);

        // a hole far from y = 0.3
        let far = g
            .holes
            .iter()
            .find(|h| h.component.shape.bbox().0.y > 0.6)
            .unwrap()
            .component
            .index;
        p.touched.push(far);
        p.touched.sort();
        let r = verify_detour(&p, &g);
        assert!(!r.line_ok && r.off_line == vec![far]);
    }

    #[test]
    fn halving_epsilon_does_not_shrink_touched() {
        let g = gasket_levels(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 20 {
            let y = rng.gen_range(0.01..0.85);
            let line = Line::horizontal(y);
            let (Ok(a), Ok(b)) = (detour_path(&line, &g, 0.1), detour_path(&line, &g, 0.05)) else {
                continue;
            };
            let (a, b) = (a.path().unwrap().clone(), b.path().unwrap().clone());
            assert!(b.touched.len() >= a.touched.len(), "y = {y}");
            checked += 1;
        }
    }

    #[test]
    fn carpet_paths_fail_cover_condition() {
        let c = carpet_levels(3).unwrap();
        let line = Line::horizontal(0.5 + 1e-3);
        let p = detour_path(&line, &c, 0.2).unwrap();
        let p = p.path().unwrap();
        let r = verify_detour(p, &c);
        assert!(!r.cover_ok, "{r:?}");
    }

    #[test]
    fn apollonian_path_within_chord_tolerance() {
        let a = apollonian_depth(&TangentCircleTriple::unit(), 5).unwrap();
        let line = Line::horizontal(0.61);
        let eps = 2.0 * a.max_solid_diameter(a.depth()).max(0.1);
        let p = detour_path(&line, &a, eps).unwrap();
        let r = verify_detour(p.path().unwrap(), &a);
        assert!(r.pass, "{r:?}");
        assert!(r.tolerance < 1e-2);
    }

    #[test]
    fn grouping_cases() {
        let g = gasket_levels(6).unwrap();
        let path = |y: f64| {
            detour_path(&Line::horizontal(y), &g, 0.1)
                .unwrap()
                .path()
                .unwrap()
                .clone()
        };
        // far apart lines still share Ω₀
        let two = vec![path(0.1), path(0.7)];
        let part = group_paths(&two, &g);
        assert_eq!(part.groups.len(), 1);
        assert!(validate_partition(&part, &two, &g));

        let mut lone = two.clone();
        lone[0].touched = vec![5];
        lone[1].touched = vec![40];
        let d = closure_gap(&g, 5, 40);
        let part = group_paths(&lone, &g);
        assert_eq!(part.groups.len(), if d > 1e-9 { 2 } else { 1 });
        assert!(validate_partition(&part, &lone, &g));

        let close: Vec<DetourPath> = (0..5)
            .map(|i| path(0.3 + 0.002 * i as f64 + 1e-4))
            .collect();
        let part = group_paths(&close, &g);
        assert!(part.groups.len() <= 5);
        assert!(validate_partition(&part, &close, &g));
    }

    fn closure_gap(f: &FractalApproximation, a: usize, b: usize) -> f64 {
        crate::geometry::closure_distance(f.component(a).unwrap(), f.component(b).unwrap())
    }

    #[test]
    fn bad_witness_is_rejected() {
        let g = gasket_levels(4).unwrap();
        let p = detour_path(&Line::horizontal(0.2), &g, 0.1)
            .unwrap()
            .path()
            .unwrap()
            .clone();
        let paths = vec![p.clone(), p];
        let mut part = group_paths(&paths, &g);
        assert!(validate_partition(&part, &paths, &g));
        part.groups = vec![vec![0], vec![1]];
        part.witness = vec![vec![], vec![]];
        assert!(!validate_partition(&part, &paths, &g));
    }

    #[test]
    fn structural_gasket_and_apollonian() {
        let r = structural_checks(&gasket_levels(6).unwrap());
        assert!(r.hole_diameters_decreasing && r.areas_decreasing);
        for l in &r.levels[1..] {
            assert!((l.max_hole_diameter - 0.5f64.powi(l.level as i32)).abs() < 1e-14);
            assert!((l.area_ratio - 0.75f64.powi(l.level as i32)).abs() < 1e-12);
        }
        let a = structural_checks(&apollonian_depth(&TangentCircleTriple::unit(), 4).unwrap());
        assert!(a.hole_diameters_decreasing);
    }
}
