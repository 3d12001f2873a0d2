use std::path::PathBuf;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty cloud")]
    EmptyCloud,

    #[error("degenerate extent: bounding box has zero size on every axis")]
    DegenerateExtent,

    #[error("need >= 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("structured cloud required: merge is anchored on it")]
    StructuredCloudRequired,

    #[error("origin tag count {tags} does not match point count {points}")]
    TagLengthMismatch { tags: usize, points: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("surface unreachable: no visible surface sample accepted within the oversampling budget")]
    SurfaceUnreachable,

    #[error("normals required: input has no nx/ny/nz properties")]
    NormalsRequired,

    #[error("cloud fails validation: {0} point(s) violate invariants")]
    InvalidCloud(usize),

    #[error("non-unit normal at index {index}: |n| = {norm}")]
    NonUnitNormal { index: usize, norm: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
