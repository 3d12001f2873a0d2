//! Half-structured point cloud construction.
//!
//! A *structured* point cloud comes from data lying on a regular 3-D grid
//! (typically the iso-surface of a CT volume); its nearest-neighbor distances
//! are bounded by the grid geometry. An *unstructured* cloud comes from an
//! optical scan: denser, but with holes wherever light could not reach.
//! This crate merges the two into a *half-structured* cloud: around every
//! structured anchor the best-supported unstructured points are selected, and
//! anchors with no support are retained as fill, so cracks and occluded
//! regions end up covered by grid points while well-scanned areas keep the
//! high-resolution scan points.
//!
//! The crate also ships the tooling needed to check the construction:
//!
//! - [`kdtree::SpatialIndex`]: exact k-NN / radius queries over a cloud.
//! - [`synth`]: synthetic scan scenarios (implicit surfaces, occlusion by
//!   ray-marching, outlier injection) that provide ground truth.
//! - [`merge`]: the candidate selection, fill, and outlier passes.
//! - [`bounds`]: verifiers for the nearest-neighbor distance bound and the
//!   per-cell / sliding-cube density bounds of the half-structured cloud.
//! - [`io`]: PLY (ascii + binary little-endian) and XYZN readers/writers.
//!
//! The `halfcloud` binary wires these together into reproducible batch runs.

pub mod bounds;
pub mod cloud;
pub mod error;
pub mod io;
pub mod kdtree;
pub mod merge;
pub mod synth;

pub use cloud::{GridSpec, MergeParams, OrientedPoint, PointCloud, Source};
pub use error::{Error, Result};
pub use kdtree::SpatialIndex;
