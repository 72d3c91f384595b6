use crate::geometry::Point;

/// Errors raised by the toolkit. Geometric *failures* (a condition that does
/// not hold) are reported through report structs instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("empty point set")]
    EmptySet,

    #[error("resource limit: {what} = {requested} exceeds {max}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        max: usize,
    },

    #[error("ill-conditioned tangency system: {0}")]
    IllConditioned(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("distance oracle inconsistent at ({}, {}): inside but distance {distance}", .at.x, .at.y)]
    Oracle { at: Point, distance: f64 },

    #[error("point ({}, {}) is not covered by any accepted cube; nearest cube id {nearest}", .at.x, .at.y)]
    UncoveredPoint { at: Point, nearest: usize },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("exceptional line: passes within tolerance of ({}, {})", .near.x, .near.y)]
    ExceptionalLine { near: Point },

    #[error("cubes {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),

    #[error("a Hölder fit is required for this certificate")]
    RequiresHolderFit,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
