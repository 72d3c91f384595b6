//! Planar geometric analysis for detour sets: fractal generators, Whitney
//! decompositions, quasihyperbolic geodesics, Hölder fits and the numerical
//! certificates built on top of them.

pub mod certify;
pub mod detour;
mod error;
pub mod fractal;
pub mod geometry;
pub mod qhyp;
pub mod scene;
pub mod whitney;

pub use error::{Error, Result};
pub use fractal::{FractalApproximation, FractalKind, Hole, Solid, TangentCircleTriple};
pub use geometry::{Interval1D, Line, Point, SceneComponent, Shape};
pub use qhyp::{HolderFit, QhGraph, ShadowTable};
pub use whitney::{DyadicCube, WhitneyDecomposition};
