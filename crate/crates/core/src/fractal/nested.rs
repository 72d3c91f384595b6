use serde::Serialize;

use super::apollonian::circle_disc;
use super::{FractalApproximation, FractalKind};
use crate::geometry::{segment_overlap, segment_segment_distance, Point, Shape, TOL};

#[derive(Debug, Clone, Serialize)]
pub struct NestedLevel {
    pub level: u32,
    pub solids: usize,
    pub holes: usize,
    pub max_solid_diameter: f64,
    pub max_hole_diameter: f64,
}

/// A hole that misses a non-empty contact set ∂V ∩ ∂Ω_k of its parent.
#[derive(Debug, Clone, Serialize)]
pub struct NestedViolation {
    pub hole: usize,
    pub level: u32,
    pub contact_with: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NestedReport {
    pub kind: FractalKind,
    pub levels: Vec<NestedLevel>,
    /// Number of (hole, earlier component) pairs with a non-empty contact set.
    pub contacts_checked: usize,
    /// Largest distance from a hole boundary to a contact set it must meet.
    pub worst_margin: f64,
    pub violations: Vec<NestedViolation>,
    pub pass: bool,
}

fn boxes_meet(a: (Point, Point), b: (Point, Point), tol: f64) -> bool {
    a.0.x <= b.1.x + tol && b.0.x <= a.1.x + tol && a.0.y <= b.1.y + tol && b.0.y <= a.1.y + tol
}

/// Pieces of ∂a ∩ ∂b for polygons, each a (possibly degenerate) segment.
fn polygon_contacts(a: &Shape, b: &Shape, tol: f64) -> Vec<(Point, Point)> {
    let mut out = Vec::new();
    for (a0, a1) in a.edges() {
        for (b0, b1) in b.edges() {
            if let Some(piece) = segment_overlap(a0, a1, b0, b1, tol) {
                out.push(piece);
            }
        }
    }
    out
}

fn distance_to_pieces(shape: &Shape, pieces: &[(Point, Point)]) -> f64 {
    let mut d = f64::INFINITY;
    for (p, q) in pieces {
        for (e0, e1) in shape.edges() {
            d = d.min(segment_segment_distance(*p, *q, e0, e1));
        }
    }
    d
}

/// Checks that every hole cut from a solid V meets each non-empty contact
/// set between ∂V and an earlier hole (or Ω₀), and reports per-level solid
/// counts and diameters. Geometric failures are listed, never raised.
pub fn verify_nested_construction(f: &FractalApproximation) -> NestedReport {
    let mut levels = Vec::new();
    for m in 0..=f.depth() {
        levels.push(NestedLevel {
            level: m,
            solids: f.solids_at(m).len(),
            holes: f.holes_at(m).count(),
            max_solid_diameter: f.max_solid_diameter(m),
            max_hole_diameter: f.holes_at(m).map(|h| h.diameter()).fold(0.0, f64::max),
        });
    }
    let mut violations = Vec::new();
    let mut contacts_checked = 0;
    let mut worst_margin: f64 = 0.0;
    let mut record = |hole: usize, level: u32, contact_with: usize, margin: f64| {
        contacts_checked += 1;
        worst_margin = worst_margin.max(margin);
        if margin > TOL {
            violations.push(NestedViolation {
                hole,
                level,
                contact_with,
                margin,
            });
        }
    };

    for h in &f.holes {
        let Some(parent) = h.parent else { continue };
        if h.level == 0 {
            continue;
        }
        let v = &f.solids_at(h.level - 1)[parent];
        let hole_index = h.component.index;
        match f.kind {
            FractalKind::Apollonian => {
                let Shape::Circle { center, radius } = h.component.shape else {
                    continue;
                };
                for &k in &v.bounding {
                    let Some((c, s)) = circle_disc(f, k) else {
                        continue;
                    };
                    let margin = (center.dist(c) - (s + radius).abs()).abs();
                    record(hole_index, h.level, k, margin);
                }
            }
            FractalKind::Gasket | FractalKind::Carpet => {
                let vbox = v.shape.bbox();
                let earlier = std::iter::once(&f.outer).chain(
                    f.holes
                        .iter()
                        .filter(|o| o.level < h.level)
                        .map(|o| &o.component),
                );
                for other in earlier {
                    if other.bounded && !boxes_meet(vbox, other.shape.bbox(), TOL) {
                        continue;
                    }
                    let pieces = polygon_contacts(&v.shape, &other.shape, TOL);
                    if pieces.is_empty() {
                        continue;
                    }
                    let margin = distance_to_pieces(&h.component.shape, &pieces);
                    record(hole_index, h.level, other.index, margin);
                }
            }
        }
    }
    let pass = violations.is_empty();
    NestedReport {
        kind: f.kind,
        levels,
        contacts_checked,
        worst_margin,
        violations,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{apollonian_depth, carpet_levels, gasket_levels, TangentCircleTriple};

    #[test]
    fn gasket_passes_with_halving_diameters() {
        let r = verify_nested_construction(&gasket_levels(3).unwrap());
        assert!(r.pass, "{:?}", r.violations);
        assert!(r.contacts_checked >= 13);
        for l in &r.levels {
            assert!((l.max_solid_diameter - 0.5f64.powi(l.level as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn shrunken_hole_is_flagged() {
        let mut g = gasket_levels(3).unwrap();
        let target = 5;
        let c = g.holes[target].component.shape.centroid();
        g.holes[target].component.shape = g.holes[target].component.shape.scaled_about(c, 0.5);
        let r = verify_nested_construction(&g);
        assert!(!r.pass);
        assert!(r.violations.iter().all(|v| v.hole == target + 1));
    }

    #[test]
    fn apollonian_contacts_are_tangent() {
        let r =
            verify_nested_construction(&apollonian_depth(&TangentCircleTriple::unit(), 2).unwrap());
        assert!(r.pass);
        assert!(r.worst_margin <= 1e-9);
        assert_eq!(r.contacts_checked, 3 * (4 + 12));
    }

    #[test]
    fn carpet_middle_squares_miss_the_parent_boundary() {
        let r = verify_nested_construction(&carpet_levels(1).unwrap());
        assert!(!r.pass);
        assert!((r.violations[0].margin - 1.0 / 3.0).abs() < 1e-12);
    }
}
