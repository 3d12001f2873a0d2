//! Core point, cloud, grid, and parameter types shared by every module.

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// Absolute tolerance on `| ||n|| - 1 |` for a normal to count as unit length.
///
/// Loose enough to admit normals that were stored as 32-bit floats.
pub const NORMAL_UNIT_TOL: f64 = 1e-6;

/// A 3-D position paired with a unit surface normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedPoint {
    pub position: Point3<f64>,
    pub normal: Vector3<f64>,
}

impl OrientedPoint {
    pub fn new(position: Point3<f64>, normal: Vector3<f64>) -> Self {
        Self { position, normal }
    }

    /// All six components finite and the normal unit length within
    /// [`NORMAL_UNIT_TOL`].
    pub fn is_valid(&self) -> bool {
        self.position.iter().all(|c| c.is_finite())
            && self.normal.iter().all(|c| c.is_finite())
            && (self.normal.norm() - 1.0).abs() <= NORMAL_UNIT_TOL
    }
}

/// Where a cloud's points came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Reconstructed from data on a regular grid (e.g. a CT iso-surface).
    Structured,
    /// Scan-derived, irregular point placement.
    Unstructured,
    /// Output of the merge: selected unstructured points plus structured fill.
    HalfStructured,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Structured => "structured",
            Source::Unstructured => "unstructured",
            Source::HalfStructured => "half-structured",
        }
    }
}

/// A regular axis-aligned grid: `dims` cells of side `spacing` starting at
/// `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Point3<f64>,
    pub spacing: f64,
    pub dims: [u32; 3],
}

impl GridSpec {
    pub fn new(origin: Point3<f64>, spacing: f64, dims: [u32; 3]) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter {
                name: "spacing",
                reason: format!("must be finite and > 0, got {spacing}"),
            });
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter {
                name: "dims",
                reason: format!("every cell count must be >= 1, got {dims:?}"),
            });
        }
        Ok(Self {
            origin,
            spacing,
            dims,
        })
    }

    /// Position of grid vertex `(i, j, k)`; valid for `i <= dims[0]` etc.
    pub fn vertex(&self, i: u32, j: u32, k: u32) -> Point3<f64> {
        Point3::new(
            self.origin.x + f64::from(i) * self.spacing,
            self.origin.y + f64::from(j) * self.spacing,
            self.origin.z + f64::from(k) * self.spacing,
        )
    }

    /// Far corner of the grid box.
    pub fn max_corner(&self) -> Point3<f64> {
        self.vertex(self.dims[0], self.dims[1], self.dims[2])
    }

    /// Length of a cell diagonal, `h * sqrt(3)` -- the nearest-neighbor
    /// distance bound for grid-derived clouds of simply connected surfaces.
    pub fn cell_diagonal(&self) -> f64 {
        self.spacing * 3.0f64.sqrt()
    }

    /// Half-open cell containing `p`: a point on a cell boundary belongs to
    /// the cell with the lower index along that axis.
    pub fn cell_of(&self, p: &Point3<f64>) -> [i64; 3] {
        [
            ((p.x - self.origin.x) / self.spacing).floor() as i64,
            ((p.y - self.origin.y) / self.spacing).floor() as i64,
            ((p.z - self.origin.z) / self.spacing).floor() as i64,
        ]
    }
}

/// All thresholds the merge needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeParams {
    /// Unstructured neighbors retrieved per structured anchor.
    pub k: usize,
    /// Maximum anchor-to-candidate distance (world units).
    pub d_un: f64,
    /// Minimum `dot(n_anchor, n_candidate)` for a candidate to be accepted.
    pub cos_theta_min: f64,
    /// An anchor with fewer accepted candidates than this is retained as fill.
    pub fill_min_support: usize,
    /// An unstructured point with no structured point within this radius is
    /// an outlier (structured cloud trusted as the model).
    pub outlier_radius_un: f64,
    /// A structured point whose nearest structured neighbor is farther than
    /// this is an outlier (isolated grid artifact, e.g. CT scatter).
    pub outlier_radius_struct: f64,
}

impl MergeParams {
    /// Defaults for a structured cloud sampled on a grid of spacing `h`:
    /// `k = 8`, `d_un = 2h`, `cos_theta_min = 0.8` (about 37 degrees),
    /// `fill_min_support = 1`, `outlier_radius_un = 2h`,
    /// `outlier_radius_struct = h * sqrt(3)` (the grid diagonal bound).
    pub fn for_grid_spacing(h: f64) -> Self {
        Self {
            k: 8,
            d_un: 2.0 * h,
            cos_theta_min: 0.8,
            fill_min_support: 1,
            outlier_radius_un: 2.0 * h,
            outlier_radius_struct: h * 3.0f64.sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "must be >= 1".into(),
            });
        }
        for (name, v) in [
            ("d_un", self.d_un),
            ("outlier_radius_un", self.outlier_radius_un),
            ("outlier_radius_struct", self.outlier_radius_struct),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if !(-1.0..=1.0).contains(&self.cos_theta_min) {
            return Err(Error::InvalidParameter {
                name: "cos_theta_min",
                reason: format!("must lie in [-1, 1], got {}", self.cos_theta_min),
            });
        }
        Ok(())
    }
}

/// An ordered collection of oriented points with a source tag and, for
/// structured clouds of known provenance, the grid they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<OrientedPoint>,
    pub source: Source,
    /// Present only when `source == Structured` and the grid is known.
    pub grid: Option<GridSpec>,
}

impl PointCloud {
    pub fn new(points: Vec<OrientedPoint>, source: Source) -> Self {
        Self {
            points,
            source,
            grid: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Why a point failed validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    /// A position or normal component is NaN or infinite.
    NonFinite,
    /// `||n||` deviates from 1 by more than [`NORMAL_UNIT_TOL`].
    NonUnitNormal { norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

/// Indices and reasons for every point violating the oriented-point
/// invariants. Violations are data, not errors.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every point against the oriented-point invariants.
pub fn validate_cloud(cloud: &PointCloud) -> ValidationReport {
    let mut violations = Vec::new();
    for (index, p) in cloud.points.iter().enumerate() {
        let finite =
            p.position.iter().all(|c| c.is_finite()) && p.normal.iter().all(|c| c.is_finite());
        if !finite {
            violations.push(Violation {
                index,
                kind: ViolationKind::NonFinite,
            });
            continue;
        }
        let norm = p.normal.norm();
        if (norm - 1.0).abs() > NORMAL_UNIT_TOL {
            violations.push(Violation {
                index,
                kind: ViolationKind::NonUnitNormal { norm },
            });
        }
    }
    ValidationReport { violations }
}

/// Component-wise min/max over all positions.
pub fn bounding_box(cloud: &PointCloud) -> Result<(Point3<f64>, Point3<f64>)> {
    let first = cloud.points.first().ok_or(Error::EmptyCloud)?;
    let mut min = first.position;
    let mut max = first.position;
    for p in &cloud.points[1..] {
        for i in 0..3 {
            min[i] = min[i].min(p.position[i]);
            max[i] = max[i].max(p.position[i]);
        }
    }
    Ok((min, max))
}

/// Uniformly rescales and translates `moving` so that its bounding-box center
/// coincides with `reference`'s and its largest box extent matches
/// `reference`'s largest extent.
///
/// Clouds from different scanners image the same object at different volume,
/// i.e. a scale discrepancy on all axes; this removes it without touching
/// normals (uniform scaling preserves directions) or point order. The grid
/// metadata, if any, is dropped: it no longer describes the scaled positions.
pub fn scale_normalize(moving: &PointCloud, reference: &PointCloud) -> Result<PointCloud> {
    let (mov_min, mov_max) = bounding_box(moving)?;
    let (ref_min, ref_max) = bounding_box(reference)?;

    let mov_extent = (mov_max - mov_min).max();
    let ref_extent = (ref_max - ref_min).max();
    if mov_extent <= 0.0 || ref_extent <= 0.0 {
        return Err(Error::DegenerateExtent);
    }

    let scale = ref_extent / mov_extent;
    let mov_center = nalgebra::center(&mov_min, &mov_max);
    let ref_center = nalgebra::center(&ref_min, &ref_max);

    let points = moving
        .points
        .iter()
        .map(|p| OrientedPoint {
            position: ref_center + (p.position - mov_center) * scale,
            normal: p.normal,
        })
        .collect();

    Ok(PointCloud {
        points,
        source: moving.source,
        grid: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(p: [f64; 3], n: [f64; 3]) -> OrientedPoint {
        OrientedPoint::new(Point3::new(p[0], p[1], p[2]), Vector3::new(n[0], n[1], n[2]))
    }

    #[test]
    fn validate_accepts_unit_normals() {
        let cloud = PointCloud::new(
            vec![pt([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]), pt([1.0, 2.0, 3.0], [1.0, 0.0, 0.0])],
            Source::Unstructured,
        );
        assert!(validate_cloud(&cloud).ok());
    }

    #[test]
    fn validate_flags_zero_normal_with_index() {
        let mut points = vec![pt([0.0; 3], [0.0, 0.0, 1.0]); 4];
        points[3].normal = Vector3::zeros();
        let cloud = PointCloud::new(points, Source::Unstructured);
        let report = validate_cloud(&cloud);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].index, 3);
        assert!(matches!(
            report.violations[0].kind,
            ViolationKind::NonUnitNormal { norm } if norm == 0.0
        ));
    }

    #[test]
    fn validate_flags_nan_position() {
        let mut points = vec![pt([0.0; 3], [0.0, 0.0, 1.0]); 2];
        points[0].position.x = f64::NAN;
        let cloud = PointCloud::new(points, Source::Unstructured);
        let report = validate_cloud(&cloud);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].index, 0);
        assert_eq!(report.violations[0].kind, ViolationKind::NonFinite);
    }

    #[test]
    fn bounding_box_single_point_is_degenerate() {
        let cloud = PointCloud::new(vec![pt([1.0, 2.0, 3.0], [0.0, 0.0, 1.0])], Source::Unstructured);
        let (min, max) = bounding_box(&cloud).unwrap();
        assert_eq!(min, Point3::new(1.0, 2.0, 3.0));
        assert_eq!(max, Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn bounding_box_componentwise_extrema() {
        let cloud = PointCloud::new(
            vec![pt([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]), pt([1.0, -1.0, 2.0], [0.0, 0.0, 1.0])],
            Source::Unstructured,
        );
        let (min, max) = bounding_box(&cloud).unwrap();
        assert_eq!(min, Point3::new(0.0, -1.0, 0.0));
        assert_eq!(max, Point3::new(1.0, 0.0, 2.0));
    }

    #[test]
    fn bounding_box_empty_cloud_errors() {
        let cloud = PointCloud::new(vec![], Source::Unstructured);
        assert!(matches!(bounding_box(&cloud), Err(Error::EmptyCloud)));
    }

    #[test]
    fn bounding_box_matches_direct_scan() {
        let mut points = Vec::new();
        // Deterministic pseudo-random points in the unit cube.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            points.push(pt([next(), next(), next()], [0.0, 0.0, 1.0]));
        }
        let cloud = PointCloud::new(points.clone(), Source::Unstructured);
        let (min, max) = bounding_box(&cloud).unwrap();

        for i in 0..3 {
            let lo = points.iter().map(|p| p.position[i]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p.position[i]).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(min[i], lo);
            assert_eq!(max[i], hi);
            assert!(lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn scale_normalize_identity() {
        let reference = PointCloud::new(
            vec![
                pt([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
                pt([2.0, 1.0, 0.5], [0.0, 0.0, 1.0]),
                pt([1.0, -1.0, 0.0], [0.0, 0.0, 1.0]),
            ],
            Source::Unstructured,
        );
        let out = scale_normalize(&reference, &reference).unwrap();
        for (a, b) in out.points.iter().zip(&reference.points) {
            assert!((a.position - b.position).norm() <= 1e-9);
            assert_eq!(a.normal, b.normal);
        }
    }

    #[test]
    fn scale_normalize_inverts_uniform_scale_about_center() {
        let reference = PointCloud::new(
            vec![
                pt([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
                pt([2.0, 1.0, 0.5], [0.0, 0.0, 1.0]),
                pt([1.0, -1.0, 0.0], [0.0, 0.0, 1.0]),
            ],
            Source::Unstructured,
        );
        let (min, max) = bounding_box(&reference).unwrap();
        let center = nalgebra::center(&min, &max);
        let moving = PointCloud::new(
            reference
                .points
                .iter()
                .map(|p| OrientedPoint::new(center + (p.position - center) * 2.0, p.normal))
                .collect(),
            Source::Unstructured,
        );
        let out = scale_normalize(&moving, &reference).unwrap();
        for (a, b) in out.points.iter().zip(&reference.points) {
            assert!((a.position - b.position).norm() <= 1e-9);
        }
    }

    #[test]
    fn scale_normalize_recovers_known_affine_transform() {
        // Points on a sphere, transformed by a known uniform scale + offset.
        let mut original = Vec::new();
        for i in 0..200 {
            let theta = 0.031 * i as f64;
            let phi = 0.017 * i as f64;
            let n = Vector3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            );
            original.push(OrientedPoint::new(Point3::origin() + n, n));
        }
        let reference = PointCloud::new(original.clone(), Source::Unstructured);
        let moving = PointCloud::new(
            original
                .iter()
                .map(|p| {
                    OrientedPoint::new(
                        Point3::new(
                            p.position.x * 1.37 + 4.0,
                            p.position.y * 1.37 - 2.0,
                            p.position.z * 1.37 + 0.25,
                        ),
                        p.normal,
                    )
                })
                .collect(),
            Source::Unstructured,
        );
        let out = scale_normalize(&moving, &reference).unwrap();
        let (min, max) = bounding_box(&reference).unwrap();
        let extent = (max - min).max();
        for (a, b) in out.points.iter().zip(&original) {
            assert!((a.position - b.position).norm() <= 1e-6 * extent);
        }
    }

    #[test]
    fn scale_normalize_idempotent_and_order_preserving() {
        let reference = PointCloud::new(
            vec![
                pt([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
                pt([1.0, 3.0, 2.0], [0.0, 0.0, 1.0]),
                pt([-1.0, 0.5, 0.25], [0.0, 0.0, 1.0]),
            ],
            Source::Unstructured,
        );
        let moving = PointCloud::new(
            vec![
                pt([10.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
                pt([12.0, 6.0, 4.0], [0.0, 0.0, 1.0]),
                pt([8.0, 1.0, 0.5], [0.0, 0.0, 1.0]),
            ],
            Source::Unstructured,
        );
        let once = scale_normalize(&moving, &reference).unwrap();
        let twice = scale_normalize(&once, &reference).unwrap();
        assert_eq!(once.len(), moving.len());
        for (a, b) in twice.points.iter().zip(&once.points) {
            assert!((a.position - b.position).norm() <= 1e-9);
        }
    }

    #[test]
    fn scale_normalize_rejects_degenerate_moving_box() {
        let reference = PointCloud::new(
            vec![pt([0.0; 3], [0.0, 0.0, 1.0]), pt([1.0, 1.0, 1.0], [0.0, 0.0, 1.0])],
            Source::Unstructured,
        );
        let moving = PointCloud::new(vec![pt([5.0, 5.0, 5.0], [0.0, 0.0, 1.0]); 3], Source::Unstructured);
        assert!(matches!(
            scale_normalize(&moving, &reference),
            Err(Error::DegenerateExtent)
        ));
    }

    #[test]
    fn grid_spec_rejects_bad_spacing_and_dims() {
        assert!(GridSpec::new(Point3::origin(), 0.0, [1, 1, 1]).is_err());
        assert!(GridSpec::new(Point3::origin(), -1.0, [1, 1, 1]).is_err());
        assert!(GridSpec::new(Point3::origin(), 1.0, [0, 1, 1]).is_err());
        assert!(GridSpec::new(Point3::origin(), 1.0, [4, 4, 4]).is_ok());
    }

    #[test]
    fn merge_params_validation() {
        let mut p = MergeParams::for_grid_spacing(0.2);
        assert!(p.validate().is_ok());
        p.k = 0;
        assert!(p.validate().is_err());
        p.k = 1;
        p.cos_theta_min = 1.5;
        assert!(p.validate().is_err());
        p.cos_theta_min = -1.0;
        p.d_un = 0.0;
        assert!(p.validate().is_err());
    }
}
