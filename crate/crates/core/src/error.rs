use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid construction parameters (grid sizes, cones, radii, policies).
    #[error("configuration error: {0}")]
    Config(String),
    /// Arguments that do not fit together (mismatched grids, objects, sample counts).
    #[error("usage error: {0}")]
    Usage(String),
    /// A mathematically undefined request, e.g. the norm of a charged vector.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two routes to the same quantity disagreed beyond tolerance.
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
