//! Leveled approximations K_m of the example sets: Sierpiński gasket,
//! square carpet and Apollonian gasket, plus the Cantor staircase and an
//! escape-time Julia raster.

mod apollonian;
mod julia;
mod nested;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, SceneComponent, Shape, TOL};
use crate::scene::Scene;

pub use apollonian::{
    apollonian, apollonian_depth, soddy_circles, tangency_report, TangencyReport,
    TangentCircleTriple,
};
pub use julia::{julia_raster, JuliaGrid, JuliaMap, JuliaRaster};
pub use nested::{verify_nested_construction, NestedLevel, NestedReport, NestedViolation};

pub const MAX_GASKET_LEVEL: u32 = 20;
pub const MAX_CARPET_LEVEL: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FractalKind {
    Gasket,
    Carpet,
    Apollonian,
}

/// A closed piece V_{i,m} of K_m.
#[derive(Debug, Clone, PartialEq)]
pub struct Solid {
    pub shape: Shape,
    /// Cusps or polygon vertices.
    pub corners: Vec<Point>,
    /// Index of the solid at the previous level containing this one.
    pub parent: Option<usize>,
    /// Copied unchanged from the previous level (Apollonian radius cutoff).
    pub carried: bool,
    /// Component indices whose boundary arcs make up this solid's boundary
    /// (Apollonian only).
    pub bounding: Vec<usize>,
}

/// A removed component Ω_{j,m}.
#[derive(Debug, Clone, PartialEq)]
pub struct Hole {
    pub component: SceneComponent,
    pub level: u32,
    /// Index of the level-(level-1) solid it was cut from.
    pub parent: Option<usize>,
    /// Exact squared diameter when the construction forces it.
    pub diam_sq_exact: Option<Ratio<i128>>,
}

impl Hole {
    pub fn diameter(&self) -> f64 {
        self.component.shape.diameter()
    }
}

#[derive(Debug, Clone)]
pub struct FractalApproximation {
    pub kind: FractalKind,
    /// Ω₀, the exterior of the outer curve.
    pub outer: SceneComponent,
    /// `solids[m]` are the pieces of K_m.
    pub solids: Vec<Vec<Solid>>,
    /// Holes in creation order; `holes[k-1].component.index == k`.
    pub holes: Vec<Hole>,
}

impl FractalApproximation {
    pub fn depth(&self) -> u32 {
        (self.solids.len() - 1) as u32
    }

    pub fn solids_at(&self, m: u32) -> &[Solid] {
        &self.solids[m as usize]
    }

    pub fn holes_through(&self, m: u32) -> impl Iterator<Item = &Hole> {
        self.holes.iter().filter(move |h| h.level <= m)
    }

    pub fn holes_at(&self, m: u32) -> impl Iterator<Item = &Hole> {
        self.holes.iter().filter(move |h| h.level == m)
    }

    /// Component by scene index: 0 is Ω₀, k ≥ 1 is `holes[k-1]`.
    pub fn component(&self, index: usize) -> Option<&SceneComponent> {
        if index == 0 {
            Some(&self.outer)
        } else {
            self.holes.get(index - 1).map(|h| &h.component)
        }
    }

    /// Level of a component; Ω₀ reports 0.
    pub fn level_of(&self, index: usize) -> Option<u32> {
        if index == 0 {
            Some(0)
        } else {
            self.holes.get(index - 1).map(|h| h.level)
        }
    }

    pub fn max_solid_diameter(&self, m: u32) -> f64 {
        self.solids_at(m)
            .iter()
            .map(|s| s.shape.diameter())
            .fold(0.0, f64::max)
    }

    pub fn solid_area(&self, m: u32) -> f64 {
        self.solids_at(m).iter().map(|s| s.shape.area()).sum()
    }

    pub fn bbox(&self) -> (Point, Point) {
        self.outer.shape.bbox()
    }

    /// Slack for contact tests against component closures. Polygonal
    /// constructions are exact up to rounding; Apollonian solids are
    /// polygons inscribed in their arcs, so chords on the outer circle sit
    /// up to one sagitta inside it.
    pub fn contact_tolerance(&self) -> f64 {
        let Shape::Circle { center, radius } = self.outer.shape else {
            return TOL;
        };
        let on_outer = |p: Point| (p.dist(center) - radius).abs() <= 1e-9 * radius.max(1.0);
        let mut sag: f64 = 0.0;
        for level in &self.solids {
            for s in level.iter().filter(|s| s.bounding.contains(&0)) {
                for (p, q) in s.shape.edges() {
                    if on_outer(p) && on_outer(q) {
                        sag = sag.max(radius - p.lerp(q, 0.5).dist(center));
                    }
                }
            }
        }
        TOL + sag
    }

    /// Every solid corner (polygon vertex or cusp) at levels ≤ m.
    pub fn corners_through(&self, m: u32) -> impl Iterator<Item = Point> + '_ {
        self.solids[..=m.min(self.depth()) as usize]
            .iter()
            .flatten()
            .flat_map(|s| s.corners.iter().copied())
    }

    pub fn to_scene(&self) -> Scene {
        Scene::from_components(
            std::iter::once((&self.outer, Some(0)))
                .chain(self.holes.iter().map(|h| (&h.component, Some(h.level)))),
        )
    }
}

fn push_hole(
    holes: &mut Vec<Hole>,
    shape: Shape,
    level: u32,
    parent: usize,
    exact: Option<Ratio<i128>>,
) {
    let index = holes.len() + 1;
    holes.push(Hole {
        component: SceneComponent::bounded(index, shape),
        level,
        parent: Some(parent),
        diam_sq_exact: exact,
    });
}

fn polygon_solid(corners: Vec<Point>, parent: Option<usize>) -> Solid {
    Solid {
        shape: Shape::polygon_unchecked(corners.clone()),
        corners,
        parent,
        carried: false,
        bounding: Vec::new(),
    }
}

/// Sierpiński gasket through level `m`, outer triangle (0,0), (1,0), (1/2, √3/2).
pub fn gasket_levels(m: u32) -> Result<FractalApproximation> {
    if m > MAX_GASKET_LEVEL {
        return Err(Error::ResourceLimit {
            what: "gasket level",
            requested: m as usize,
            max: MAX_GASKET_LEVEL as usize,
        });
    }
    let top = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(0.5, 3f64.sqrt() / 2.0),
    ];
    let outer = SceneComponent::unbounded(Shape::polygon_unchecked(top.clone()));
    let mut solids = vec![vec![polygon_solid(top, None)]];
    let mut holes = Vec::new();
    for level in 1..=m {
        let diam_sq = Ratio::new(1, 4i128.pow(level));
        let prev = &solids[level as usize - 1];
        let mut next = Vec::with_capacity(prev.len() * 3);
        for (pi, s) in prev.iter().enumerate() {
            let [a, b, c] = [s.corners[0], s.corners[1], s.corners[2]];
            let (ab, bc, ca) = (a.lerp(b, 0.5), b.lerp(c, 0.5), c.lerp(a, 0.5));
            next.push(polygon_solid(vec![a, ab, ca], Some(pi)));
            next.push(polygon_solid(vec![ab, b, bc], Some(pi)));
            next.push(polygon_solid(vec![ca, bc, c], Some(pi)));
            push_hole(
                &mut holes,
                Shape::polygon_unchecked(vec![ab, bc, ca]),
                level,
                pi,
                Some(diam_sq),
            );
        }
        solids.push(next);
    }
    Ok(FractalApproximation {
        kind: FractalKind::Gasket,
        outer,
        solids,
        holes,
    })
}

/// Square Sierpiński carpet through level `m` on the unit square.
pub fn carpet_levels(m: u32) -> Result<FractalApproximation> {
    if m > MAX_CARPET_LEVEL {
        return Err(Error::ResourceLimit {
            what: "carpet level",
            requested: m as usize,
            max: MAX_CARPET_LEVEL as usize,
        });
    }
    let square = |x: f64, y: f64, s: f64| {
        vec![
            Point::new(x, y),
            Point::new(x + s, y),
            Point::new(x + s, y + s),
            Point::new(x, y + s),
        ]
    };
    let outer = SceneComponent::unbounded(Shape::polygon_unchecked(square(0.0, 0.0, 1.0)));
    // integer cells (ix, iy) at level j: [ix/3^j, (ix+1)/3^j] × ...
    let mut cells: Vec<(u64, u64)> = vec![(0, 0)];
    let mut solids = vec![vec![polygon_solid(square(0.0, 0.0, 1.0), None)]];
    let mut holes = Vec::new();
    for level in 1..=m {
        let n = 3f64.powi(level as i32);
        let side = 1.0 / n;
        let diam_sq = Ratio::new(2, 9i128.pow(level));
        let mut next_cells = Vec::with_capacity(cells.len() * 8);
        let mut next = Vec::with_capacity(cells.len() * 8);
        for (pi, &(cx, cy)) in cells.iter().enumerate() {
            for b in 0..3u64 {
                for a in 0..3u64 {
                    let (ix, iy) = (3 * cx + a, 3 * cy + b);
                    let sq = square(ix as f64 / n, iy as f64 / n, side);
                    if a == 1 && b == 1 {
                        push_hole(
                            &mut holes,
                            Shape::polygon_unchecked(sq),
                            level,
                            pi,
                            Some(diam_sq),
                        );
                    } else {
                        next_cells.push((ix, iy));
                        next.push(polygon_solid(sq, Some(pi)));
                    }
                }
            }
        }
        cells = next_cells;
        solids.push(next);
    }
    Ok(FractalApproximation {
        kind: FractalKind::Carpet,
        outer,
        solids,
        holes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaircaseValue {
    pub value: f64,
    /// Input was outside [0, 1] and got clamped.
    pub clamped: bool,
}

pub const MAX_STAIRCASE_ITERATIONS: u32 = 64;

/// Cantor staircase h(x) from the first `iterations` ternary digits of x.
pub fn cantor_staircase(x: f64, iterations: u32) -> Result<StaircaseValue> {
    if iterations == 0 || iterations > MAX_STAIRCASE_ITERATIONS {
        return Err(Error::ResourceLimit {
            what: "staircase iterations",
            requested: iterations as usize,
            max: MAX_STAIRCASE_ITERATIONS as usize,
        });
    }
    if x.is_nan() {
        return Err(Error::InvalidInput("staircase argument is NaN".into()));
    }
    let clamped = !(0.0..=1.0).contains(&x);
    let mut x = x.clamp(0.0, 1.0);
    if x == 1.0 {
        return Ok(StaircaseValue {
            value: 1.0,
            clamped,
        });
    }
    let mut value = 0.0;
    let mut weight = 0.5;
    for _ in 0..iterations {
        x *= 3.0;
        let d = x.floor().min(2.0);
        x -= d;
        if d == 1.0 {
            value += weight;
            break;
        }
        value += weight * (d / 2.0);
        weight *= 0.5;
    }
    Ok(StaircaseValue { value, clamped })
}
