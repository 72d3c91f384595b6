//! Dyadic Whitney decomposition of a bounded planar domain.
//!
//! A cube is accepted when every sampled point (4 corners and the centre)
//! is inside the domain and the smallest sampled boundary distance is at
//! least its diameter. Candidates are refined top-down from a single dyadic
//! level covering the bounding box until the level cutoff.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, Shape};

pub const MAX_CUTOFF: i32 = 24;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// A bounded open set given by an inside test and a boundary-distance
/// oracle.
pub trait Domain: Send + Sync + fmt::Debug {
    fn contains(&self, p: Point) -> bool;
    /// δ(p) = dist(p, ∂D).
    fn boundary_distance(&self, p: Point) -> f64;
    fn bbox(&self) -> (Point, Point);
    fn area(&self) -> Option<f64> {
        None
    }
    /// `n` points of ∂D, roughly evenly spaced.
    fn boundary_samples(&self, n: usize) -> Vec<Point>;
}

/// The interior of a circle or simple polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDomain(pub Shape);

impl ShapeDomain {
    pub fn unit_disk() -> Self {
        ShapeDomain(Shape::Circle {
            center: Point::new(0.0, 0.0),
            radius: 1.0,
        })
    }

    pub fn unit_square() -> Self {
        ShapeDomain(Shape::Polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]))
    }

    /// Equilateral triangle of side 1 on (0,0)–(1,0).
    pub fn equilateral_triangle() -> Self {
        ShapeDomain(Shape::Polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ]))
    }

    /// Spine [0,1]×[0,0.2] with five square rooms of side 0.18 on top, each
    /// reached through a neck of height 0.6 and width 2^-(6+i).
    pub fn comb(teeth: usize) -> Result<Self> {
        let (spine, neck_len, room) = (0.2, 0.6, 0.18);
        let pitch = 1.0 / teeth as f64;
        let mut v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, spine),
        ];
        for i in (0..teeth).rev() {
            let mid = (i as f64 + 0.5) * pitch;
            let w = 0.5f64.powi(6 + i as i32);
            let top = spine + neck_len;
            v.push(Point::new(mid + w / 2.0, spine));
            v.push(Point::new(mid + w / 2.0, top));
            v.push(Point::new(mid + room / 2.0, top));
            v.push(Point::new(mid + room / 2.0, top + room));
            v.push(Point::new(mid - room / 2.0, top + room));
            v.push(Point::new(mid - room / 2.0, top));
            v.push(Point::new(mid - w / 2.0, top));
            v.push(Point::new(mid - w / 2.0, spine));
        }
        v.push(Point::new(0.0, spine));
        Ok(ShapeDomain(Shape::polygon(v)?))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ShapeDomain(self.0.scaled_about(Point::new(0.0, 0.0), factor))
    }
}

impl Domain for ShapeDomain {
    fn contains(&self, p: Point) -> bool {
        self.0.interior_contains(p) && self.0.boundary_distance(p) > 0.0
    }

    fn boundary_distance(&self, p: Point) -> f64 {
        self.0.boundary_distance(p)
    }

    fn bbox(&self) -> (Point, Point) {
        self.0.bbox()
    }

    fn area(&self) -> Option<f64> {
        Some(self.0.area())
    }

    fn boundary_samples(&self, n: usize) -> Vec<Point> {
        self.0.boundary_samples(n)
    }
}

/// [ix·2^-level, (ix+1)·2^-level] × [iy·2^-level, (iy+1)·2^-level].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DyadicCube {
    pub level: i32,
    pub ix: i64,
    pub iy: i64,
}

impl DyadicCube {
    pub fn new(level: i32, ix: i64, iy: i64) -> Self {
        Self { level, ix, iy }
    }

    pub fn containing(p: Point, level: i32) -> Self {
        let n = 2f64.powi(level);
        Self {
            level,
            ix: (p.x * n).floor() as i64,
            iy: (p.y * n).floor() as i64,
        }
    }

    pub fn side(&self) -> f64 {
        2f64.powi(-self.level)
    }

    pub fn diameter(&self) -> f64 {
        SQRT2 * self.side()
    }

    pub fn area(&self) -> f64 {
        self.side() * self.side()
    }

    pub fn lo(&self) -> Point {
        let s = self.side();
        Point::new(self.ix as f64 * s, self.iy as f64 * s)
    }

    pub fn center(&self) -> Point {
        let s = self.side();
        Point::new((self.ix as f64 + 0.5) * s, (self.iy as f64 + 0.5) * s)
    }

    pub fn corners(&self) -> [Point; 4] {
        let s = self.side();
        let lo = self.lo();
        [
            lo,
            Point::new(lo.x + s, lo.y),
            Point::new(lo.x + s, lo.y + s),
            Point::new(lo.x, lo.y + s),
        ]
    }

    pub fn children(&self) -> [DyadicCube; 4] {
        let (l, x, y) = (self.level + 1, 2 * self.ix, 2 * self.iy);
        [
            Self::new(l, x, y),
            Self::new(l, x + 1, y),
            Self::new(l, x, y + 1),
            Self::new(l, x + 1, y + 1),
        ]
    }

    /// The cube `k` levels coarser containing this one.
    pub fn ancestor(&self, k: u32) -> DyadicCube {
        Self::new(self.level - k as i32, self.ix >> k, self.iy >> k)
    }

    pub fn contains_point(&self, p: Point) -> bool {
        let lo = self.lo();
        let s = self.side();
        p.x >= lo.x && p.x <= lo.x + s && p.y >= lo.y && p.y <= lo.y + s
    }

    /// Euclidean distance from `p` to the closed cube.
    pub fn distance_to(&self, p: Point) -> f64 {
        let lo = self.lo();
        let s = self.side();
        let dx = (lo.x - p.x).max(0.0).max(p.x - lo.x - s);
        let dy = (lo.y - p.y).max(0.0).max(p.y - lo.y - s);
        dx.hypot(dy)
    }

    /// Integer extent at a finer level.
    fn span_at(&self, level: i32) -> (i64, i64, i64, i64) {
        let k = level - self.level;
        debug_assert!((0..62).contains(&k));
        (
            self.ix << k,
            (self.ix + 1) << k,
            self.iy << k,
            (self.iy + 1) << k,
        )
    }

    fn overlaps(&self, o: &DyadicCube) -> (i64, i64) {
        let l = self.level.max(o.level);
        let (a0, a1, b0, b1) = self.span_at(l);
        let (c0, c1, d0, d1) = o.span_at(l);
        (a1.min(c1) - a0.max(c0), b1.min(d1) - b0.max(d0))
    }

    /// Closed cubes share a boundary segment of positive length.
    pub fn is_adjacent(&self, o: &DyadicCube) -> bool {
        let (ox, oy) = self.overlaps(o);
        (ox > 0 && oy == 0) || (ox == 0 && oy > 0)
    }

    /// Closed cubes intersect (possibly at a single corner).
    pub fn touches(&self, o: &DyadicCube) -> bool {
        let (ox, oy) = self.overlaps(o);
        ox >= 0 && oy >= 0
    }

    pub fn interiors_intersect(&self, o: &DyadicCube) -> bool {
        let (ox, oy) = self.overlaps(o);
        ox > 0 && oy > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubeRow {
    pub level: i32,
    pub ix: i64,
    pub iy: i64,
    pub side: f64,
    pub dist_lo: f64,
    pub dist_hi: f64,
}

#[derive(Debug, Clone)]
pub struct WhitneyDecomposition {
    domain: Arc<dyn Domain>,
    /// Canonical order (level, ix, iy).
    pub cubes: Vec<DyadicCube>,
    /// Smallest boundary distance over the 5 sample points.
    pub dist_lo: Vec<f64>,
    /// Largest boundary distance over the 5 sample points.
    pub dist_hi: Vec<f64>,
    /// δ at the cube centre.
    pub delta_center: Vec<f64>,
    /// Pairs (i, j), i < j, sharing a boundary segment of positive length.
    pub adjacency: Vec<(usize, usize)>,
    neighbor_offsets: Vec<usize>,
    neighbor_ids: Vec<usize>,
    index: HashMap<DyadicCube, usize>,
    pub min_level_cutoff: i32,
    pub covered_area: f64,
    /// area(D) − covered area, when the domain knows its area.
    pub uncovered_area: Option<f64>,
    pub warnings: Vec<String>,
}

struct Sampled {
    inside: bool,
    dist_lo: f64,
    dist_hi: f64,
    center: f64,
    center_inside: bool,
}

fn sample(domain: &dyn Domain, q: &DyadicCube) -> Result<Sampled> {
    let c = q.center();
    let pts = [
        q.corners()[0],
        q.corners()[1],
        q.corners()[2],
        q.corners()[3],
        c,
    ];
    let mut inside = true;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut center = 0.0;
    let mut center_inside = false;
    for (k, p) in pts.iter().enumerate() {
        let d = domain.boundary_distance(*p);
        let inn = domain.contains(*p);
        if inn && d <= 0.0 {
            return Err(Error::Oracle {
                at: *p,
                distance: d,
            });
        }
        inside &= inn;
        lo = lo.min(d);
        hi = hi.max(d);
        if k == 4 {
            center = d;
            center_inside = inn;
        }
    }
    Ok(Sampled {
        inside,
        dist_lo: lo,
        dist_hi: hi,
        center,
        center_inside,
    })
}

impl WhitneyDecomposition {
    pub fn domain(&self) -> &Arc<dyn Domain> {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn id_of(&self, q: &DyadicCube) -> Option<usize> {
        self.index.get(q).copied()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbor_ids[self.neighbor_offsets[i]..self.neighbor_offsets[i + 1]]
    }

    pub fn coarsest_level(&self) -> Option<i32> {
        self.cubes.first().map(|c| c.level)
    }

    pub fn finest_level(&self) -> Option<i32> {
        self.cubes.last().map(|c| c.level)
    }

    pub fn min_side(&self) -> f64 {
        self.finest_level().map_or(0.0, |l| 2f64.powi(-l))
    }

    /// Accepted cube containing `p`, searching every level present.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let (lo, hi) = (self.coarsest_level()?, self.finest_level()?);
        (lo..=hi).find_map(|l| self.id_of(&DyadicCube::containing(p, l)))
    }

    fn locate_near(&self, p: Point, level: i32) -> Option<usize> {
        (level - 2..=level + 2).find_map(|l| self.id_of(&DyadicCube::containing(p, l)))
    }

    /// Cubes whose closures meet cube `i`, corners included, in id order.
    pub fn touching(&self, i: usize) -> Vec<usize> {
        let q = self.cubes[i];
        let (c, h) = (q.center(), q.side() / 2.0 * (1.0 + 1.0 / 64.0));
        let mut out: Vec<usize> = self.neighbors(i).to_vec();
        // a cube meeting Q only at a corner contains the point just past it
        for (dx, dy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            out.extend(self.locate_near(Point::new(c.x + dx * h, c.y + dy * h), q.level));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Cube whose centre is closest to `p`; ties go to the lowest id.
    pub fn nearest_cube(&self, p: Point) -> Option<usize> {
        (0..self.cubes.len()).min_by(|&a, &b| {
            p.dist(self.cubes[a].center())
                .total_cmp(&p.dist(self.cubes[b].center()))
        })
    }

    /// Edges with weight |x₁ − x₂|·2/(δ̂₁ + δ̂₂), δ̂ the centre distance.
    pub fn adjacency_edges(&self) -> Vec<(usize, usize, f64)> {
        self.adjacency
            .iter()
            .map(|&(i, j)| (i, j, self.edge_weight(i, j)))
            .collect()
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> f64 {
        let d = self.cubes[i].center().dist(self.cubes[j].center());
        d * 2.0 / (self.delta_center[i] + self.delta_center[j])
    }

    pub fn rows(&self) -> Vec<CubeRow> {
        (0..self.cubes.len())
            .map(|i| {
                let c = self.cubes[i];
                CubeRow {
                    level: c.level,
                    ix: c.ix,
                    iy: c.iy,
                    side: c.side(),
                    dist_lo: self.dist_lo[i],
                    dist_hi: self.dist_hi[i],
                }
            })
            .collect()
    }

    fn assemble(
        domain: Arc<dyn Domain>,
        mut entries: Vec<(DyadicCube, f64, f64, f64)>,
        cutoff: i32,
        uncovered_hint: Option<f64>,
        warnings: Vec<String>,
    ) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let cubes: Vec<_> = entries.iter().map(|e| e.0).collect();
        let index: HashMap<_, _> = cubes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let coarsest = cubes.first().map_or(0, |c| c.level);
        let mut adjacency = Vec::new();
        for (i, q) in cubes.iter().enumerate() {
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let n = DyadicCube::new(q.level, q.ix + dx, q.iy + dy);
                for k in 0..=(q.level - coarsest) as u32 {
                    if let Some(&j) = index.get(&n.ancestor(k)) {
                        if k > 0 || i < j {
                            adjacency.push((i.min(j), i.max(j)));
                        }
                        break;
                    }
                }
            }
        }
        adjacency.sort_unstable();
        adjacency.dedup();
        let mut degree = vec![0usize; cubes.len() + 1];
        for &(i, j) in &adjacency {
            degree[i + 1] += 1;
            degree[j + 1] += 1;
        }
        for i in 0..cubes.len() {
            degree[i + 1] += degree[i];
        }
        let mut fill = degree.clone();
        let mut ids = vec![0; adjacency.len() * 2];
        for &(i, j) in &adjacency {
            ids[fill[i]] = j;
            fill[i] += 1;
            ids[fill[j]] = i;
            fill[j] += 1;
        }
        let covered_area: f64 = cubes.iter().map(DyadicCube::area).sum();
        let uncovered_area = uncovered_hint.or_else(|| domain.area().map(|a| a - covered_area));
        WhitneyDecomposition {
            dist_lo: entries.iter().map(|e| e.1).collect(),
            dist_hi: entries.iter().map(|e| e.2).collect(),
            delta_center: entries.iter().map(|e| e.3).collect(),
            domain,
            cubes,
            adjacency,
            neighbor_offsets: degree,
            neighbor_ids: ids,
            index,
            min_level_cutoff: cutoff,
            covered_area,
            uncovered_area,
            warnings,
        }
    }
}

/// Whitney cubes of `domain` down to side 2^-cutoff.
pub fn whitney_decompose(domain: Arc<dyn Domain>, cutoff: i32) -> Result<WhitneyDecomposition> {
    if cutoff > MAX_CUTOFF {
        return Err(Error::ResourceLimit {
            what: "whitney cutoff",
            requested: cutoff.max(0) as usize,
            max: MAX_CUTOFF as usize,
        });
    }
    let (lo, hi) = domain.bbox();
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    let mut warnings = Vec::new();
    if !(extent.is_finite() && extent > 0.0) {
        warnings.push("empty domain: degenerate bounding box".to_string());
        return Ok(WhitneyDecomposition::assemble(
            domain,
            Vec::new(),
            cutoff,
            None,
            warnings,
        ));
    }
    let start = (-extent.log2()).floor() as i32;
    let mut frontier = Vec::new();
    let (a, b) = (
        DyadicCube::containing(lo, start),
        DyadicCube::containing(hi, start),
    );
    for ix in a.ix..=b.ix {
        for iy in a.iy..=b.iy {
            frontier.push(DyadicCube::new(start, ix, iy));
        }
    }
    let mut accepted = Vec::new();
    let mut level = start;
    while !frontier.is_empty() && level <= cutoff {
        let mut next = Vec::new();
        for q in frontier {
            let s = sample(domain.as_ref(), &q)?;
            if !s.center_inside && s.center >= q.diameter() / 2.0 {
                continue;
            }
            if s.inside && s.dist_lo >= q.diameter() {
                accepted.push((q, s.dist_lo, s.dist_hi, s.center));
            } else if level < cutoff {
                next.extend(q.children());
            }
        }
        frontier = next;
        level += 1;
    }
    if accepted.is_empty() {
        warnings.push(format!(
            "no cube accepted down to level {cutoff}; domain empty at this resolution"
        ));
    }
    Ok(WhitneyDecomposition::assemble(
        domain, accepted, cutoff, None, warnings,
    ))
}

type Cells = HashMap<DyadicCube, (f64, f64, f64)>;

fn cells_of(w: &WhitneyDecomposition) -> Cells {
    (0..w.len())
        .map(|i| (w.cubes[i], (w.dist_lo[i], w.dist_hi[i], w.delta_center[i])))
        .collect()
}

fn split_into(domain: &dyn Domain, cells: &mut Cells, q: DyadicCube) -> Result<[DyadicCube; 4]> {
    cells.remove(&q);
    let children = q.children();
    for child in children {
        let s = sample(domain, &child)?;
        cells.insert(child, (s.dist_lo, s.dist_hi, s.center));
    }
    Ok(children)
}

/// Splits the larger cube of any touching pair whose side ratio exceeds 4,
/// until none is left.
fn balance(domain: &dyn Domain, cells: &mut Cells, mut seed: Vec<DyadicCube>) -> Result<()> {
    let coarsest = cells.keys().map(|c| c.level).min().unwrap_or(0);
    seed.sort();
    seed.dedup();
    let mut queue: VecDeque<DyadicCube> = seed.into();
    let mut queued: HashSet<DyadicCube> = queue.iter().copied().collect();
    while let Some(q) = queue.pop_front() {
        queued.remove(&q);
        if !cells.contains_key(&q) {
            continue;
        }
        let mut split = None;
        'search: for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let n = DyadicCube::new(q.level, q.ix + dx, q.iy + dy);
                if (0..3).any(|k| cells.contains_key(&n.ancestor(k))) {
                    continue;
                }
                for k in 3..=(q.level - coarsest).max(2) as u32 {
                    let a = n.ancestor(k);
                    if cells.contains_key(&a) {
                        split = Some(a);
                        break 'search;
                    }
                }
            }
        }
        if let Some(big) = split {
            for child in split_into(domain, cells, big)? {
                if queued.insert(child) {
                    queue.push_back(child);
                }
            }
            if queued.insert(q) {
                queue.push_back(q);
            }
        }
    }
    Ok(())
}

fn rebuild(w: &WhitneyDecomposition, cells: Cells) -> WhitneyDecomposition {
    let entries = cells
        .into_iter()
        .map(|(q, (lo, hi, c))| (q, lo, hi, c))
        .collect();
    WhitneyDecomposition::assemble(
        w.domain.clone(),
        entries,
        w.min_level_cutoff,
        w.uncovered_area,
        w.warnings.clone(),
    )
}

/// Splits cubes until diag(Q)/min δ ≤ 1/3 on the samples, then splits the
/// larger cube of any touching pair whose side ratio exceeds 4.
pub fn refine_for_qh(w: &WhitneyDecomposition) -> Result<WhitneyDecomposition> {
    let domain = w.domain.clone();
    let mut cells: Cells = HashMap::default();
    cells.reserve(w.len() * 4);
    let mut stack: Vec<(DyadicCube, (f64, f64, f64))> = cells_of(w).into_iter().collect();
    while let Some((q, (lo, hi, c))) = stack.pop() {
        if q.diameter() > lo / 3.0 {
            for child in q.children() {
                let s = sample(domain.as_ref(), &child)?;
                stack.push((child, (s.dist_lo, s.dist_hi, s.center)));
            }
        } else {
            cells.insert(q, (lo, hi, c));
        }
    }
    let all = cells.keys().copied().collect();
    balance(domain.as_ref(), &mut cells, all)?;
    Ok(rebuild(w, cells))
}

/// Splits the cubes containing each point until diag(Q)/min δ ≤ `ratio`,
/// then rebalances. Shrinks the endpoint legs of distance queries at those
/// points without touching the rest of the graph.
pub fn refine_around(
    w: &WhitneyDecomposition,
    points: &[Point],
    ratio: f64,
) -> Result<WhitneyDecomposition> {
    if !(ratio > 0.0) {
        return Err(Error::InvalidInput(format!(
            "refinement ratio must be positive, got {ratio}"
        )));
    }
    let domain = w.domain.clone();
    let mut cells = cells_of(w);
    let mut fresh = Vec::new();
    for &p in points {
        let Some(i) = w.locate(p) else {
            return Err(Error::UncoveredPoint {
                at: p,
                nearest: w.nearest_cube(p).unwrap_or(0),
            });
        };
        let mut q = w.cubes[i];
        // the point may have moved into a finer cube from an earlier split
        while !cells.contains_key(&q) {
            q = *q
                .children()
                .iter()
                .find(|c| c.contains_point(p))
                .expect("children tile the parent");
        }
        while q.diameter() > cells[&q].0 * ratio {
            let children = split_into(domain.as_ref(), &mut cells, q)?;
            fresh.extend(children);
            q = *children
                .iter()
                .find(|c| c.contains_point(p))
                .expect("children tile the parent");
        }
    }
    fresh.retain(|c| cells.contains_key(c));
    balance(domain.as_ref(), &mut cells, fresh)?;
    Ok(rebuild(w, cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(cutoff: i32) -> WhitneyDecomposition {
        whitney_decompose(Arc::new(ShapeDomain::unit_disk()), cutoff).unwrap()
    }

    fn brute_overlap(a: &DyadicCube, b: &DyadicCube) -> (f64, f64) {
        let (al, bl) = (a.lo(), b.lo());
        let ox = (al.x + a.side()).min(bl.x + b.side()) - al.x.max(bl.x);
        let oy = (al.y + a.side()).min(bl.y + b.side()) - al.y.max(bl.y);
        (ox, oy)
    }

    #[test]
    fn adjacency_predicate_cases() {
        let a = DyadicCube::new(3, 0, 0);
        assert!(a.is_adjacent(&DyadicCube::new(3, 1, 0)));
        assert!(!a.is_adjacent(&DyadicCube::new(3, 1, 1)));
        assert!(a.touches(&DyadicCube::new(3, 1, 1)));
        // side 1/4 with side 1/16 on its right face
        let big = DyadicCube::new(2, 0, 0);
        assert!(big.is_adjacent(&DyadicCube::new(4, 4, 1)));
        assert!(!big.is_adjacent(&DyadicCube::new(4, 4, 4)));
        for (p, q) in [
            (a, DyadicCube::new(4, 2, 1)),
            (big, DyadicCube::new(5, 8, 3)),
        ] {
            let (ox, oy) = brute_overlap(&p, &q);
            assert_eq!(
                p.is_adjacent(&q),
                (ox > 0.0 && oy == 0.0) || (ox == 0.0 && oy > 0.0)
            );
        }
    }

    #[test]
    fn square_largest_cube_is_an_eighth() {
        let w = whitney_decompose(Arc::new(ShapeDomain::unit_square()), 6).unwrap();
        let max_side = w.cubes.iter().map(DyadicCube::side).fold(0.0, f64::max);
        assert_eq!(max_side, 0.125);
    }

    #[test]
    fn disk_invariants_at_small_cutoff() {
        let w = disk(8);
        for (i, a) in w.cubes.iter().enumerate() {
            assert!(w.dist_lo[i] >= a.diameter());
            assert!(w.dist_lo[i] <= 4.0 * SQRT2 * a.side() * (1.0 + 1e-9));
            for b in &w.cubes[i + 1..] {
                assert!(!a.interiors_intersect(b));
                if a.touches(b) {
                    let r = a.side() / b.side();
                    assert!((0.25..=4.0).contains(&r));
                }
            }
        }
        for &(i, j) in &w.adjacency {
            assert!(w.cubes[i].is_adjacent(&w.cubes[j]));
        }
        // every geometrically adjacent pair is an edge
        let edges: HashSet<_> = w.adjacency.iter().copied().collect();
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if w.cubes[i].is_adjacent(&w.cubes[j]) {
                    assert!(edges.contains(&(i, j)));
                }
            }
        }
    }

    #[test]
    fn disk_coverage_improves_with_cutoff() {
        let areas: Vec<f64> = (6..=10).map(|c| disk(c).uncovered_area.unwrap()).collect();
        for w in areas.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(disk(8).covered_area < 0.999 * std::f64::consts::PI);
    }

    #[test]
    fn graph_connected_on_coarse_levels() {
        let w = disk(9);
        let keep: Vec<bool> = w.cubes.iter().map(|c| c.level <= 7).collect();
        let start = keep.iter().position(|&k| k).unwrap();
        let mut seen = vec![false; w.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for &j in w.neighbors(i) {
                if keep[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        assert!((0..w.len()).all(|i| !keep[i] || seen[i]));
    }

    #[test]
    fn refinement_meets_one_third_and_ratio_bounds() {
        let w = disk(7);
        let r = refine_for_qh(&w).unwrap();
        assert!(r.len() > w.len());
        for (i, a) in r.cubes.iter().enumerate() {
            assert!(a.diameter() <= r.dist_lo[i] / 3.0 * (1.0 + 1e-12));
            assert!(a.side() <= r.dist_lo[i]);
            for b in &r.cubes[i + 1..] {
                assert!(!a.interiors_intersect(b));
                if a.touches(b) {
                    assert!((0.25..=4.0).contains(&(a.side() / b.side())));
                }
            }
        }
        assert!((r.covered_area - w.covered_area).abs() < 1e-12);
        // well-separated Whitney cubes stay whole
        for (i, q) in w.cubes.iter().enumerate() {
            if w.dist_lo[i] >= 3.0 * q.diameter() {
                assert!(r.id_of(q).is_some() || q.children().iter().all(|c| r.id_of(c).is_some()));
            }
        }
    }

    #[test]
    fn local_refinement_shrinks_cubes_at_points() {
        let r = refine_for_qh(&disk(6)).unwrap();
        let pts = [Point::new(0.0, 0.0), Point::new(0.3, -0.2)];
        let a = refine_around(&r, &pts, 0.01).unwrap();
        for p in pts {
            let i = a.locate(p).unwrap();
            assert!(a.cubes[i].diameter() <= 0.01 * a.dist_lo[i]);
        }
        for (i, x) in a.cubes.iter().enumerate() {
            for y in &a.cubes[i + 1..] {
                assert!(!x.interiors_intersect(y));
                if x.touches(y) {
                    assert!((0.25..=4.0).contains(&(x.side() / y.side())));
                }
            }
        }
        assert!((a.covered_area - r.covered_area).abs() < 1e-12);
        let i = a.locate(Point::new(0.3, -0.2)).unwrap();
        let t = a.touching(i);
        let brute: Vec<usize> = (0..a.len())
            .filter(|&j| j != i && a.cubes[i].touches(&a.cubes[j]))
            .collect();
        assert_eq!(t, brute);
        assert!(refine_around(&r, &pts, 0.0).is_err());
    }

    #[test]
    fn split_replaces_parent_with_children() {
        // a cube near the boundary always needs splitting
        let w = disk(6);
        let r = refine_for_qh(&w).unwrap();
        let i = (0..w.len())
            .find(|&i| w.dist_lo[i] < 3.0 * w.cubes[i].diameter())
            .unwrap();
        let q = w.cubes[i];
        assert!(r.id_of(&q).is_none());
        let covered: f64 = r
            .cubes
            .iter()
            .filter(|c| c.level > q.level && c.ancestor((c.level - q.level) as u32) == q)
            .map(DyadicCube::area)
            .sum();
        assert!((covered - q.area()).abs() < 1e-15);
    }

    #[test]
    fn cutoff_guard_and_empty_domain() {
        assert!(whitney_decompose(Arc::new(ShapeDomain::unit_disk()), 25).is_err());
        let tiny = ShapeDomain(Shape::Circle {
            center: Point::new(0.3, 0.3),
            radius: 1e-6,
        });
        let w = whitney_decompose(Arc::new(tiny), 4).unwrap();
        assert!(w.is_empty() && !w.warnings.is_empty());
    }

    #[derive(Debug)]
    struct Liar;
    impl Domain for Liar {
        fn contains(&self, _: Point) -> bool {
            true
        }
        fn boundary_distance(&self, _: Point) -> f64 {
            0.0
        }
        fn bbox(&self) -> (Point, Point) {
            (Point::new(0.0, 0.0), Point::new(1.0, 1.0))
        }
        fn boundary_samples(&self, _: usize) -> Vec<Point> {
            Vec::new()
        }
    }

    #[test]
    fn inconsistent_oracle_is_reported() {
        assert!(matches!(
            whitney_decompose(Arc::new(Liar), 3),
            Err(Error::Oracle { .. })
        ));
    }
}
