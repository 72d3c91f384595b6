//! Quasihyperbolic distance as a shortest path on the Whitney adjacency
//! graph, geodesics to the boundary, Hölder-constant fitting and shadows.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{diameter_of, Point};
use crate::whitney::{DyadicCube, WhitneyDecomposition};

/// Largest additive constant a Hölder fit may use.
pub const C_MAX: f64 = 1000.0;
pub const ALPHA_MIN: f64 = 1e-3;
/// Boundary points farther than this many cutoff-level sides from every
/// cube cannot be reached.
const BOUNDARY_RANGE: f64 = 8.0;
/// Two-step edges are kept only when the centres are within this fraction
/// of the smaller δ̂, so the straight segment stays well inside the domain.
const REACH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths over cube ids.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    pred: Vec<usize>,
}

impl ShortestPaths {
    /// Cube chain from the source to `target`, inclusive.
    pub fn chain_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut chain = vec![target];
        let mut at = target;
        while at != self.source {
            at = self.pred[at];
            chain.push(at);
        }
        chain.reverse();
        Some(chain)
    }
}

/// Cube chain plus the polyline through the endpoints and cube centres.
#[derive(Debug, Clone, Serialize)]
pub struct Geodesic {
    pub cubes: Vec<usize>,
    pub polyline: Vec<Point>,
    /// Graph distance from the first cube to each chain cube.
    pub prefix: Vec<f64>,
    pub length: f64,
}

/// Whitney graph with quasihyperbolic edge weights and a spatial index for
/// boundary queries.
#[derive(Debug, Clone)]
pub struct QhGraph {
    pub w: WhitneyDecomposition,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    bucket_level: i32,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl QhGraph {
    /// Edges join cubes whose closures meet, plus two-step pairs whose
    /// centres are close compared with δ̂.
    pub fn new(w: WhitneyDecomposition) -> Self {
        let touching: Vec<Vec<usize>> = (0..w.len()).map(|i| w.touching(i)).collect();
        let mut offsets = Vec::with_capacity(w.len() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut reach = Vec::new();
        offsets.push(0);
        for i in 0..w.len() {
            let (ci, di) = (w.cubes[i].center(), w.delta_center[i]);
            reach.clear();
            reach.extend_from_slice(&touching[i]);
            for &j in &touching[i] {
                reach.extend(touching[j].iter().copied().filter(|&k| {
                    k != i && ci.dist(w.cubes[k].center()) <= REACH * di.min(w.delta_center[k])
                }));
            }
            reach.sort_unstable();
            reach.dedup();
            for &j in &reach {
                targets.push(j as u32);
                weights.push(w.edge_weight(i, j));
            }
            offsets.push(targets.len());
        }
        let bucket_level = w.min_level_cutoff - 3;
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, c) in w.cubes.iter().enumerate() {
            let b = DyadicCube::containing(c.center(), bucket_level);
            buckets.entry((b.ix, b.iy)).or_default().push(i);
        }
        Self {
            w,
            offsets,
            targets,
            weights,
            bucket_level,
            buckets,
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn center(&self, i: usize) -> Point {
        self.w.cubes[i].center()
    }

    pub fn delta_hat(&self, i: usize) -> f64 {
        self.w.delta_center[i]
    }

    pub fn side(&self, i: usize) -> f64 {
        self.w.cubes[i].side()
    }

    pub fn delta(&self, p: Point) -> f64 {
        self.w.domain().boundary_distance(p)
    }

    pub fn locate(&self, p: Point) -> Result<usize> {
        self.w.locate(p).ok_or_else(|| Error::UncoveredPoint {
            at: p,
            nearest: self.w.nearest_cube(p).unwrap_or(0),
        })
    }

    /// |p − x_Q| / δ̂(Q)
    pub fn leg(&self, p: Point, q: usize) -> f64 {
        p.dist(self.center(q)) / self.delta_hat(q)
    }

    pub fn dijkstra(&self, source: usize) -> ShortestPaths {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        pred[source] = source;
        heap.push(State {
            cost: 0.0,
            node: source,
        });
        while let Some(State { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for e in self.offsets[node]..self.offsets[node + 1] {
                let j = self.targets[e] as usize;
                let c = cost + self.weights[e];
                if c < dist[j] {
                    dist[j] = c;
                    pred[j] = node;
                    heap.push(State { cost: c, node: j });
                }
            }
        }
        ShortestPaths { source, dist, pred }
    }

    fn combine(&self, a: Point, ia: usize, b: Point, ib: usize, sp: &ShortestPaths) -> f64 {
        if ia == ib {
            return a.dist(b) / self.delta_hat(ia);
        }
        // sum in cube-id order so that k(a, b) and k(b, a) agree bit for bit
        let ((p, ip), (q, iq)) = if ia < ib {
            ((a, ia), (b, ib))
        } else {
            ((b, ib), (a, ia))
        };
        debug_assert_eq!(sp.source, ip);
        (self.leg(p, ip) + sp.dist[iq]) + self.leg(q, iq)
    }

    /// Pairwise distances with one Dijkstra run per point.
    pub fn pairwise(&self, points: &[Point]) -> Result<Vec<Vec<f64>>> {
        let ids = points
            .iter()
            .map(|p| self.locate(*p))
            .collect::<Result<Vec<_>>>()?;
        let mut runs: HashMap<usize, ShortestPaths> = HashMap::new();
        for &i in &ids {
            runs.entry(i).or_insert_with(|| self.dijkstra(i));
        }
        let n = points.len();
        let mut out = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let src = ids[a].min(ids[b]);
                out[a][b] = self.combine(points[a], ids[a], points[b], ids[b], &runs[&src]);
            }
        }
        Ok(out)
    }

    /// Cube of smallest side nearest to a boundary point `b`.
    pub fn boundary_target(&self, b: Point) -> Result<usize> {
        let range = BOUNDARY_RANGE * 2f64.powi(-self.w.min_level_cutoff);
        let home = DyadicCube::containing(b, self.bucket_level);
        let mut best: Option<(f64, f64, usize)> = None;
        for dx in -2..=2 {
            for dy in -2..=2 {
                let Some(ids) = self.buckets.get(&(home.ix + dx, home.iy + dy)) else {
                    continue;
                };
                for &i in ids {
                    let d = self.w.cubes[i].distance_to(b);
                    if d > range {
                        continue;
                    }
                    let key = (d, self.side(i), i);
                    if best.map_or(true, |bk| (key.0, key.1, key.2) < bk) {
                        best = Some(key);
                    }
                }
            }
        }
        best.map(|b| b.2).ok_or_else(|| {
            Error::Resolution(format!(
                "no cube within {range:.3e} of boundary point ({}, {}); raise the cutoff",
                b.x, b.y
            ))
        })
    }
}

/// k̂(a, b): graph distance plus endpoint legs.
pub fn qh_distance(g: &QhGraph, a: Point, b: Point) -> Result<f64> {
    let (ia, ib) = (g.locate(a)?, g.locate(b)?);
    if ia == ib {
        return Ok(a.dist(b) / g.delta_hat(ia));
    }
    let sp = g.dijkstra(ia.min(ib));
    Ok(g.combine(a, ia, b, ib, &sp))
}

fn geodesic_from(g: &QhGraph, sp: &ShortestPaths, a: Point, target: usize, end: Point) -> Geodesic {
    let cubes = sp.chain_to(target).expect("graph is connected");
    let mut polyline = vec![a];
    polyline.extend(cubes.iter().map(|&i| g.center(i)));
    polyline.push(end);
    let prefix: Vec<f64> = cubes.iter().map(|&i| sp.dist[i]).collect();
    let length = if cubes.len() == 1 {
        a.dist(end) / g.delta_hat(target)
    } else {
        g.leg(a, sp.source) + sp.dist[target] + g.leg(end, target)
    };
    Geodesic {
        cubes,
        polyline,
        prefix,
        length,
    }
}

/// Minimizing cube chain from a to b.
pub fn qh_geodesic(g: &QhGraph, a: Point, b: Point) -> Result<Geodesic> {
    let (ia, ib) = (g.locate(a)?, g.locate(b)?);
    let sp = g.dijkstra(ia);
    Ok(geodesic_from(g, &sp, a, ib, b))
}

/// Shortest-path tree rooted at the cube of a basepoint.
#[derive(Debug, Clone)]
pub struct BasepointTree {
    pub basepoint: Point,
    pub delta0: f64,
    pub root: usize,
    leg: f64,
    pub paths: ShortestPaths,
}

impl BasepointTree {
    pub fn new(g: &QhGraph, x0: Point) -> Result<Self> {
        let root = g.locate(x0)?;
        Ok(Self {
            basepoint: x0,
            delta0: g.delta(x0),
            root,
            leg: g.leg(x0, root),
            paths: g.dijkstra(root),
        })
    }

    /// k̂(x_Q, x₀)
    pub fn k_hat(&self, q: usize) -> f64 {
        if q == self.root {
            self.leg
        } else {
            self.leg + self.paths.dist[q]
        }
    }

    pub fn to_boundary(&self, g: &QhGraph, b: Point) -> Result<Geodesic> {
        let target = g.boundary_target(b)?;
        Ok(geodesic_from(g, &self.paths, self.basepoint, target, b))
    }
}

/// Chain from the cube of `x0` to the cube nearest the boundary point `b`.
pub fn geodesic_to_boundary(g: &QhGraph, x0: Point, b: Point) -> Result<Geodesic> {
    BasepointTree::new(g, x0)?.to_boundary(g, b)
}

/// Centre of the cube with the largest δ̂; ties go to the canonical first.
pub fn default_basepoint(g: &QhGraph) -> Option<Point> {
    let mut best: Option<usize> = None;
    for i in 0..g.len() {
        if best.map_or(true, |b| g.delta_hat(i) > g.delta_hat(b)) {
            best = Some(i);
        }
    }
    best.map(|i| g.center(i))
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderFit {
    pub basepoint: Point,
    pub alpha: f64,
    pub c: f64,
    pub samples: usize,
    pub boundary_samples: usize,
    /// max over samples of k̂ − (1/α)·log(δ(x₀)/δ(x)) − c
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NotHolderReport {
    pub basepoint: Point,
    pub samples: usize,
    /// Smallest admissible c at α = ALPHA_MIN.
    pub c_required: f64,
    pub worst_point: Point,
    pub worst_k: f64,
    pub worst_log_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderOutcome {
    Holder(HolderFit),
    NotHolder(NotHolderReport),
}

impl HolderOutcome {
    pub fn fit(&self) -> Option<&HolderFit> {
        match self {
            HolderOutcome::Holder(f) => Some(f),
            HolderOutcome::NotHolder(_) => None,
        }
    }
}

/// (k̂, log(δ₀/δ̂), centre) at every cube met by the N boundary geodesics.
fn holder_samples(g: &QhGraph, tree: &BasepointTree, n: usize) -> Result<Vec<(f64, f64, Point)>> {
    let mut seen = vec![false; g.len()];
    let mut out = Vec::new();
    for b in g.w.domain().boundary_samples(n) {
        let geo = tree.to_boundary(g, b)?;
        for q in geo.cubes {
            if !std::mem::replace(&mut seen[q], true) {
                out.push((
                    tree.k_hat(q),
                    (tree.delta0 / g.delta_hat(q)).ln(),
                    g.center(q),
                ));
            }
        }
    }
    Ok(out)
}

fn c_of(samples: &[(f64, f64, Point)], alpha: f64) -> f64 {
    samples
        .iter()
        .map(|s| s.0 - s.1 / alpha)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest α ∈ [ALPHA_MIN, 1], then smallest c ≥ 0, such that
/// k̂(x, x₀) ≤ (1/α)·log(δ(x₀)/δ(x)) + c on every sample with c ≤ C_MAX.
pub fn holder_fit(g: &QhGraph, x0: Point, n: usize) -> Result<HolderOutcome> {
    if n < 16 {
        return Err(Error::InvalidInput(format!(
            "holder_fit needs at least 16 boundary samples, got {n}"
        )));
    }
    let tree = BasepointTree::new(g, x0)?;
    let samples = holder_samples(g, &tree, n)?;
    let feasible = |a: f64| c_of(&samples, a) <= C_MAX;
    let alpha = if feasible(1.0) {
        Some(1.0)
    } else {
        const GRID: usize = 200;
        let grid: Vec<f64> = (0..=GRID)
            .map(|i| ALPHA_MIN * (1.0 / ALPHA_MIN).powf(i as f64 / GRID as f64))
            .collect();
        grid.iter().rposition(|&a| feasible(a)).map(|k| {
            let (mut lo, mut hi) = (grid[k], grid[(k + 1).min(GRID)]);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        })
    };
    Ok(match alpha {
        Some(alpha) => {
            let c = c_of(&samples, alpha).max(0.0);
            let max_residual = samples
                .iter()
                .map(|s| s.0 - s.1 / alpha - c)
                .fold(f64::NEG_INFINITY, f64::max);
            HolderOutcome::Holder(HolderFit {
                basepoint: x0,
                alpha,
                c,
                samples: samples.len(),
                boundary_samples: n,
                max_residual,
            })
        }
        None => {
            let worst = samples
                .iter()
                .max_by(|a, b| (a.0 - a.1 / ALPHA_MIN).total_cmp(&(b.0 - b.1 / ALPHA_MIN)))
                .expect("at least the root cube is sampled");
            HolderOutcome::NotHolder(NotHolderReport {
                basepoint: x0,
                samples: samples.len(),
                c_required: c_of(&samples, ALPHA_MIN),
                worst_point: worst.2,
                worst_k: worst.0,
                worst_log_ratio: worst.1,
            })
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubeSum {
    pub sum: f64,
    pub delta0_pow: f64,
    pub ratio: f64,
    pub terms: usize,
}

/// Σ ℓ(Q)^β over a chain against δ(x₀)^β.
pub fn geodesic_cube_sum(g: &QhGraph, chain: &[usize], beta: f64, delta0: f64) -> CubeSum {
    let sum: f64 = chain.iter().map(|&q| g.side(q).powf(beta)).sum();
    let delta0_pow = delta0.powf(beta);
    CubeSum {
        sum,
        delta0_pow,
        ratio: sum / delta0_pow,
        terms: chain.len(),
    }
}

/// Per-cube shadow: boundary samples whose geodesic passes the cube, and
/// the diameter s(Q) of those samples.
#[derive(Debug, Clone, Serialize)]
pub struct ShadowTable {
    pub basepoint: Point,
    pub samples: Vec<Point>,
    #[serde(skip)]
    pub marks: Vec<Vec<u32>>,
    pub s: Vec<f64>,
    #[serde(skip)]
    pub k_hat: Vec<f64>,
}

impl ShadowTable {
    /// Sparse (cube id, sample indices, s) entries for non-empty shadows.
    pub fn entries(&self) -> Vec<(usize, &[u32], f64)> {
        (0..self.s.len())
            .filter(|&i| !self.marks[i].is_empty())
            .map(|i| (i, self.marks[i].as_slice(), self.s[i]))
            .collect()
    }
}

pub fn shadows(g: &QhGraph, x0: Point, n: usize) -> Result<ShadowTable> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "shadows need at least one boundary sample".into(),
        ));
    }
    let tree = BasepointTree::new(g, x0)?;
    let samples = g.w.domain().boundary_samples(n);
    let mut marks = vec![Vec::new(); g.len()];
    for (k, b) in samples.iter().enumerate() {
        for q in tree.to_boundary(g, *b)?.cubes {
            marks[q].push(k as u32);
        }
    }
    let s = marks
        .iter()
        .map(|m| {
            let pts: Vec<Point> = m.iter().map(|&k| samples[k as usize]).collect();
            diameter_of(&pts)
        })
        .collect();
    let k_hat = (0..g.len()).map(|q| tree.k_hat(q)).collect();
    Ok(ShadowTable {
        basepoint: x0,
        samples,
        marks,
        s,
        k_hat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShadowSum {
    /// Σ s(Q)²
    pub lhs: f64,
    /// Σ k̂(x_Q, x₀)²·area(Q)
    pub rhs: f64,
    pub ratio: f64,
}

pub fn shadow_sum_check(g: &QhGraph, table: &ShadowTable) -> ShadowSum {
    let lhs: f64 = table.s.iter().map(|s| s * s).sum();
    let rhs: f64 = (0..g.len())
        .map(|q| table.k_hat[q].powi(2) * g.w.cubes[q].area())
        .sum();
    ShadowSum {
        lhs,
        rhs,
        ratio: lhs / rhs,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::whitney::{refine_around, refine_for_qh, whitney_decompose, ShapeDomain};

    fn disk_graph(cutoff: i32) -> QhGraph {
        let w = whitney_decompose(Arc::new(ShapeDomain::unit_disk()), cutoff).unwrap();
        QhGraph::new(refine_for_qh(&w).unwrap())
    }

    #[test]
    fn identity_and_symmetry() {
        let g = disk_graph(8);
        let a = Point::new(0.1, 0.2);
        assert_eq!(qh_distance(&g, a, a).unwrap(), 0.0);
        let b = Point::new(-0.6, 0.3);
        assert_eq!(
            qh_distance(&g, a, b).unwrap(),
            qh_distance(&g, b, a).unwrap()
        );
        let geo = qh_geodesic(&g, a, a).unwrap();
        assert_eq!(geo.cubes.len(), 1);
        assert_eq!(geo.length, 0.0);
    }

    #[test]
    fn radial_distance_is_close_to_log() {
        let (a, b) = (Point::new(0.0, 0.0), Point::new(0.5, 0.0));
        let w = whitney_decompose(Arc::new(ShapeDomain::unit_disk()), 10).unwrap();
        let w = refine_around(&refine_for_qh(&w).unwrap(), &[a, b], 0.01).unwrap();
        let d = qh_distance(&QhGraph::new(w), a, b).unwrap();
        assert!((d / 2f64.ln() - 1.0).abs() < 0.07, "{d}");
    }

    #[test]
    fn geodesic_prefix_property() {
        let g = disk_graph(9);
        let geo = qh_geodesic(&g, Point::new(0.0, 0.0), Point::new(0.9, 0.0)).unwrap();
        let mut acc = 0.0;
        for w in geo.cubes.windows(2) {
            acc += g.w.edge_weight(w[0], w[1]);
        }
        assert!((acc - geo.prefix.last().unwrap()).abs() < 1e-12);
        for (i, j) in [(1usize, 5usize), (3, 10)] {
            let sub: f64 = geo.cubes[i..=j]
                .windows(2)
                .map(|w| g.w.edge_weight(w[0], w[1]))
                .sum();
            assert!((sub - (geo.prefix[j] - geo.prefix[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn uncovered_point_names_a_cube() {
        let g = disk_graph(6);
        match qh_distance(&g, Point::new(0.0, 0.0), Point::new(0.9999, 0.0)) {
            Err(Error::UncoveredPoint { nearest, .. }) => assert!(nearest < g.len()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lower_bound_by_log_ratio() {
        let g = disk_graph(9);
        for (a, b) in [((0.0, 0.0), (0.8, 0.1)), ((0.3, -0.3), (-0.5, 0.6))] {
            let (a, b) = (Point::new(a.0, a.1), Point::new(b.0, b.1));
            let k = qh_distance(&g, a, b).unwrap();
            assert!(k >= (g.delta(a) / g.delta(b)).ln().abs() - 0.7);
        }
    }

    #[test]
    fn dyadic_scaling_leaves_distance_unchanged() {
        let base = ShapeDomain::unit_disk();
        let (a, b) = (Point::new(0.1, 0.05), Point::new(-0.4, 0.5));
        let g = QhGraph::new(whitney_decompose(Arc::new(base.clone()), 8).unwrap());
        let k = qh_distance(&g, a, b).unwrap();
        for (s, cutoff) in [(2.0, 7), (0.5, 9)] {
            let gs = QhGraph::new(whitney_decompose(Arc::new(base.scaled(s)), cutoff).unwrap());
            let ks = qh_distance(&gs, a * s, b * s).unwrap();
            assert!((k - ks).abs() < 1e-9, "s = {s}: {k} vs {ks}");
        }
    }

    #[test]
    fn disk_fit_from_center() {
        let g = disk_graph(9);
        let out = holder_fit(&g, Point::new(0.0, 0.0), 64).unwrap();
        let fit = out.fit().unwrap();
        assert!(fit.alpha >= 0.9 && fit.c <= 0.5, "{fit:?}");
        assert!(fit.max_residual <= 1e-6);
        assert!(holder_fit(&g, Point::new(0.0, 0.0), 8).is_err());
    }

    #[test]
    fn shadows_of_root_and_single_sample() {
        let g = disk_graph(8);
        let x0 = Point::new(0.0, 0.0);
        let t = shadows(&g, x0, 64).unwrap();
        let root = g.locate(x0).unwrap();
        assert!((t.s[root] - 2.0).abs() < 1e-3);
        let one = shadows(&g, x0, 1).unwrap();
        assert!(one.s.iter().all(|&s| s == 0.0));
        assert_eq!(shadow_sum_check(&g, &one).lhs, 0.0);
        let more = shadows(&g, x0, 128).unwrap();
        // 128 equally spaced samples contain the 64
        for q in 0..g.len() {
            assert!(more.s[q] >= t.s[q] - 1e-12);
        }
    }

    #[test]
    fn cube_sum_single_cube() {
        let g = disk_graph(6);
        let s = geodesic_cube_sum(&g, &[0], 2.0, 1.0);
        assert_eq!(s.sum, g.side(0).powi(2));
        assert_eq!(s.terms, 1);
    }
}
