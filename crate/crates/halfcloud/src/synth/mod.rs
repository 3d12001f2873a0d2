//! Synthetic scan scenarios: the ground-truth factory for all verification.
//!
//! An [`ImplicitSurface`] stands in for the scanned object. From it two
//! clouds are produced:
//!
//! - [`sample_structured`] mimics iso-surface extraction from grid data: one
//!   point per grid-cell edge whose endpoints straddle the surface, placed at
//!   the linear-interpolation zero crossing (the marching-cubes vertex
//!   positions, without the triangles).
//! - [`sample_unstructured`] mimics an optical scan: rejection-sampled
//!   surface points kept only when some view direction can actually reach
//!   them, so cracks and undercuts produce the same holes a light scanner
//!   would leave.
//!
//! Visibility is decided by ray-marching with a Lipschitz safety margin
//! proportional to the step, biased toward occlusion: a point the coarse
//! march accepts stays visible under any finer march
//! ([`is_visible_lattice`] with a tenth of the step re-checks this in tests).
//! [`inject_outliers`] adds uniformly scattered junk points with known
//! indices for outlier-detection ground truth.
//!
//! Everything here is a pure function of (configuration, seed).

mod scenario;
mod shapes;

pub use scenario::{parse_scenario, Scenario, ScenarioClouds};
pub use shapes::{builtin_shape, builtin_shapes};
pub use shapes::{
    BOX_HALF, DOMAIN_MAX, DOMAIN_MIN, MULTI_CHAMBER_A_CENTER, MULTI_CHAMBER_A_HALF,
    MULTI_CHAMBER_B_CENTER, MULTI_CHAMBER_B_HALF, MULTI_ENTRANCE_CENTER, MULTI_ENTRANCE_HALF,
    SLOT_CENTER, SLOT_HALF, SLOT_TILT, SPHERE_RADIUS, UNDERCUT_CHAMBER_CENTER,
    UNDERCUT_CHAMBER_HALF, UNDERCUT_ENTRANCE_CENTER, UNDERCUT_ENTRANCE_HALF,
};

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cloud::{GridSpec, OrientedPoint, PointCloud, Source};
use crate::error::{Error, Result};

/// A scalar field over 3-space whose zero level set is the object surface.
/// Convention: negative inside, positive outside.
pub struct ImplicitSurface {
    pub name: String,
    pub domain_min: Point3<f64>,
    pub domain_max: Point3<f64>,
    /// Bound on `|f(a) - f(b)| / |a - b|`; all built-ins are 1-Lipschitz.
    /// The visibility margin scales with this.
    pub lipschitz: f64,
    field: Box<dyn Fn(&Point3<f64>) -> f64 + Send + Sync>,
    analytic_gradient: Option<Box<dyn Fn(&Point3<f64>) -> Vector3<f64> + Send + Sync>>,
}

impl ImplicitSurface {
    pub fn new(
        name: &str,
        field: impl Fn(&Point3<f64>) -> f64 + Send + Sync + 'static,
        domain_min: Point3<f64>,
        domain_max: Point3<f64>,
    ) -> Self {
        Self {
            name: name.to_string(),
            domain_min,
            domain_max,
            lipschitz: 1.0,
            field: Box::new(field),
            analytic_gradient: None,
        }
    }

    pub fn with_gradient(
        name: &str,
        field: impl Fn(&Point3<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Point3<f64>) -> Vector3<f64> + Send + Sync + 'static,
        domain_min: Point3<f64>,
        domain_max: Point3<f64>,
    ) -> Self {
        Self {
            name: name.to_string(),
            domain_min,
            domain_max,
            lipschitz: 1.0,
            field: Box::new(field),
            analytic_gradient: Some(Box::new(gradient)),
        }
    }

    pub fn value(&self, p: &Point3<f64>) -> f64 {
        (self.field)(p)
    }

    /// Analytic gradient when available, otherwise central differences with
    /// the given step.
    pub fn gradient(&self, p: &Point3<f64>, step: f64) -> Vector3<f64> {
        if let Some(g) = &self.analytic_gradient {
            return g(p);
        }
        let mut out = Vector3::zeros();
        for axis in 0..3 {
            let mut hi = *p;
            let mut lo = *p;
            hi[axis] += step;
            lo[axis] -= step;
            out[axis] = (self.value(&hi) - self.value(&lo)) / (2.0 * step);
        }
        out
    }

    /// Largest axis length of the sampling domain.
    pub fn extent(&self) -> f64 {
        (self.domain_max - self.domain_min).max()
    }

    /// Canonical ray-march step: extent / 1000.
    pub fn visibility_step(&self) -> f64 {
        self.extent() / 1000.0
    }

    /// Surface-membership tolerance for projected samples: 1e-9 * extent.
    pub fn projection_tolerance(&self) -> f64 {
        1e-9 * self.extent()
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|a| p[a] >= self.domain_min[a] && p[a] <= self.domain_max[a])
    }
}

impl std::fmt::Debug for ImplicitSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImplicitSurface")
            .field("name", &self.name)
            .field("domain_min", &self.domain_min)
            .field("domain_max", &self.domain_max)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

/// One synthetic scan: which surface, from where, how many points, which
/// seed.
#[derive(Debug)]
pub struct ScanConfig<'a> {
    pub surface: &'a ImplicitSurface,
    /// Directions the scan rays travel (camera toward scene), unit length.
    pub view_directions: Vec<Vector3<f64>>,
    pub samples: usize,
    pub seed: u64,
}

impl<'a> ScanConfig<'a> {
    pub fn new(surface: &'a ImplicitSurface, view_directions: Vec<Vector3<f64>>) -> Self {
        Self {
            surface,
            view_directions,
            samples: 0,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.view_directions.is_empty() {
            return Err(Error::InvalidParameter {
                name: "view_directions",
                reason: "at least one view direction required".into(),
            });
        }
        for v in &self.view_directions {
            if !((v.norm() - 1.0).abs() <= 1e-9) {
                return Err(Error::InvalidParameter {
                    name: "view_directions",
                    reason: format!("direction {v:?} is not unit length"),
                });
            }
        }
        Ok(())
    }
}

/// Emits one point per grid-cell edge whose endpoint field values straddle
/// the surface (an endpoint exactly on the surface counts as outside), at
/// the linear-interpolation zero crossing. Shared edges are enumerated once.
/// Normals come from the field gradient (central-difference step `1e-5 h`).
///
/// Edge enumeration order is fixed -- x-edges, then y-, then z-edges, each
/// in lexicographic vertex order -- so the output is a pure function of
/// (surface, grid). A grid that misses the surface yields an empty cloud.
pub fn sample_structured(surface: &ImplicitSurface, grid: &GridSpec) -> PointCloud {
    let dims = grid.dims.map(|d| d as usize);
    let verts = [dims[0] + 1, dims[1] + 1, dims[2] + 1];
    let vertex_index = |i: usize, j: usize, k: usize| (i * verts[1] + j) * verts[2] + k;

    let values: Vec<f64> = (0..verts[0] * verts[1] * verts[2])
        .into_par_iter()
        .map(|idx| {
            let k = idx % verts[2];
            let j = (idx / verts[2]) % verts[1];
            let i = idx / (verts[1] * verts[2]);
            surface.value(&grid.vertex(i as u32, j as u32, k as u32))
        })
        .collect();

    let grad_step = 1e-5 * grid.spacing;
    let inside = |v: f64| v < 0.0;
    let mut points = Vec::new();

    for axis in 0..3usize {
        let mut limit = verts;
        limit[axis] -= 1;
        for i in 0..limit[0] {
            for j in 0..limit[1] {
                for k in 0..limit[2] {
                    let v0 = values[vertex_index(i, j, k)];
                    let (i1, j1, k1) = match axis {
                        0 => (i + 1, j, k),
                        1 => (i, j + 1, k),
                        _ => (i, j, k + 1),
                    };
                    let v1 = values[vertex_index(i1, j1, k1)];
                    if inside(v0) == inside(v1) {
                        continue;
                    }
                    let t = v0 / (v0 - v1);
                    let mut position = grid.vertex(i as u32, j as u32, k as u32);
                    position[axis] += t * grid.spacing;

                    let gradient = surface.gradient(&position, grad_step);
                    let normal = if gradient.norm() > 1e-12 {
                        gradient.normalize()
                    } else {
                        // Degenerate gradient: fall back to the edge
                        // direction, oriented from inside to outside.
                        let mut n = Vector3::zeros();
                        n[axis] = if inside(v0) { 1.0 } else { -1.0 };
                        n
                    };
                    points.push(OrientedPoint::new(position, normal));
                }
            }
        }
    }

    PointCloud {
        points,
        source: Source::Structured,
        grid: Some(*grid),
    }
}

/// Offset, in multiples of the canonical step, at which occlusion rays start.
/// Shared by every marcher so that refining the step never shrinks the
/// marched interval.
const RAY_START_STEPS: f64 = 2.0;

fn ray_start(surface: &ImplicitSurface) -> f64 {
    RAY_START_STEPS * surface.visibility_step()
}

/// Distance at which the ray `origin + t * dir` leaves the sampling domain.
fn ray_exit(surface: &ImplicitSurface, origin: &Point3<f64>, dir: &Vector3<f64>) -> f64 {
    let mut t_exit = f64::INFINITY;
    for axis in 0..3 {
        if dir[axis] > 0.0 {
            t_exit = t_exit.min((surface.domain_max[axis] - origin[axis]) / dir[axis]);
        } else if dir[axis] < 0.0 {
            t_exit = t_exit.min((surface.domain_min[axis] - origin[axis]) / dir[axis]);
        }
    }
    t_exit.max(0.0)
}

/// Whether the surface point `p` can be reached by scan rays traveling along
/// `view_direction`: the escape ray from `p` back toward the scanner must
/// clear the field by a Lipschitz margin at every sample until it leaves the
/// domain.
///
/// The margin is `lipschitz * step`, so a coarse accept guarantees the field
/// stays positive between samples; marching advances by the Lipschitz cone
/// radius where the field allows, which changes nothing about that
/// guarantee. Grazing and back-facing points fail the first samples and are
/// conservatively reported occluded.
pub fn is_visible(
    surface: &ImplicitSurface,
    p: &Point3<f64>,
    view_direction: &Vector3<f64>,
    step: f64,
) -> bool {
    let dir = -view_direction;
    let margin = surface.lipschitz * step;
    let t_exit = ray_exit(surface, p, &dir);
    let mut t = ray_start(surface);
    while t <= t_exit + step {
        let v = surface.value(&(p + dir * t));
        if v <= margin {
            return false;
        }
        t += step.max((v - margin) / surface.lipschitz);
    }
    true
}

/// Reference marcher: plain fixed-step lattice, no cone acceleration. Used
/// as the independent re-check that visibility classifications survive a
/// finer march.
pub fn is_visible_lattice(
    surface: &ImplicitSurface,
    p: &Point3<f64>,
    view_direction: &Vector3<f64>,
    step: f64,
) -> bool {
    let dir = -view_direction;
    let margin = surface.lipschitz * step;
    let t_exit = ray_exit(surface, p, &dir);
    let mut t = ray_start(surface);
    while t <= t_exit + step {
        let v = surface.value(&(p + dir * t));
        if v <= margin {
            return false;
        }
        // Exact early out: the field exceeds what any surface could close
        // before the ray exits, plus the margin.
        if v > surface.lipschitz * (t_exit - t) + margin {
            return true;
        }
        t += step;
    }
    true
}

/// Visible along at least one of the given view directions.
pub fn visible_by_any(
    surface: &ImplicitSurface,
    p: &Point3<f64>,
    views: &[Vector3<f64>],
    step: f64,
) -> bool {
    views.iter().any(|v| is_visible(surface, p, v, step))
}

/// Projects `origin` onto the surface by damped Newton steps on the field.
/// Returns the surface point when `|f|` converges below the projection
/// tolerance within 50 steps and the point stays inside the domain.
fn project_to_surface(surface: &ImplicitSurface, origin: &Point3<f64>) -> Option<Point3<f64>> {
    let tol = surface.projection_tolerance();
    let grad_step = 1e-5 * surface.extent();
    let mut x = *origin;
    for _ in 0..50 {
        let v = surface.value(&x);
        if v.abs() <= tol {
            return surface.contains(&x).then_some(x);
        }
        let g = surface.gradient(&x, grad_step);
        let g2 = g.norm_squared();
        if g2 < 1e-12 || !g2.is_finite() {
            return None;
        }
        x -= g * (v / g2);
    }
    None
}

/// Rejection-samples visible surface points: uniform candidates in the
/// domain box are projected onto `f = 0` and kept when some view direction
/// reaches them. Deterministic for a fixed config; candidates are processed
/// in draw order regardless of parallelism. Fails with `SurfaceUnreachable`
/// when a 100x oversampling budget produces no accepted point.
pub fn sample_unstructured(config: &ScanConfig) -> Result<PointCloud> {
    config.validate()?;
    let surface = config.surface;
    let step = surface.visibility_step();
    let grad_step = 1e-5 * surface.extent();
    let span = surface.domain_max - surface.domain_min;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let budget = config.samples.saturating_mul(100);
    let chunk_size = 4096.min(budget.max(1));

    let mut points: Vec<OrientedPoint> = Vec::with_capacity(config.samples);
    let mut attempts = 0usize;
    while points.len() < config.samples && attempts < budget {
        let n = chunk_size.min(budget - attempts);
        let origins: Vec<Point3<f64>> = (0..n)
            .map(|_| {
                Point3::new(
                    surface.domain_min.x + rng.gen::<f64>() * span.x,
                    surface.domain_min.y + rng.gen::<f64>() * span.y,
                    surface.domain_min.z + rng.gen::<f64>() * span.z,
                )
            })
            .collect();
        let accepted: Vec<Option<OrientedPoint>> = origins
            .par_iter()
            .map(|origin| {
                let p = project_to_surface(surface, origin)?;
                if !visible_by_any(surface, &p, &config.view_directions, step) {
                    return None;
                }
                let g = surface.gradient(&p, grad_step);
                if g.norm() < 1e-12 {
                    return None;
                }
                // Outward: the gradient points toward positive f.
                Some(OrientedPoint::new(p, g.normalize()))
            })
            .collect();
        for point in accepted.into_iter().flatten() {
            points.push(point);
            if points.len() == config.samples {
                break;
            }
        }
        attempts += n;
    }

    if points.is_empty() && config.samples > 0 {
        return Err(Error::SurfaceUnreachable);
    }
    Ok(PointCloud::new(points, Source::Unstructured))
}

/// Appends `count` junk points drawn uniformly from the cloud's bounding box
/// inflated by `spread`, with random unit normals, and returns their indices
/// as ground truth for outlier-detection tests.
pub fn inject_outliers(
    cloud: &PointCloud,
    count: usize,
    spread: f64,
    seed: u64,
) -> Result<(PointCloud, Vec<usize>)> {
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::InvalidParameter {
            name: "spread",
            reason: format!("must be finite and > 0, got {spread}"),
        });
    }
    let mut out = cloud.clone();
    if count == 0 {
        return Ok((out, Vec::new()));
    }

    let (min, max) = match crate::cloud::bounding_box(cloud) {
        Ok(b) => b,
        Err(_) => (Point3::origin(), Point3::origin()),
    };
    let lo = min - Vector3::repeat(spread);
    let span = (max - min) + Vector3::repeat(2.0 * spread);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<usize> = (cloud.len()..cloud.len() + count).collect();
    for _ in 0..count {
        let position = Point3::new(
            lo.x + rng.gen::<f64>() * span.x,
            lo.y + rng.gen::<f64>() * span.y,
            lo.z + rng.gen::<f64>() * span.z,
        );
        let normal = loop {
            let v = Vector3::new(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            );
            let n2 = v.norm_squared();
            if n2 > 1e-4 && n2 <= 1.0 {
                break v / n2.sqrt();
            }
        };
        out.points.push(OrientedPoint::new(position, normal));
    }
    Ok((out, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::validate_cloud;
    use crate::kdtree::max_nn_distance;

    fn sphere_grid(h: f64) -> GridSpec {
        let n = (3.0 / h).round() as u32;
        GridSpec::new(Point3::new(-1.5, -1.5, -1.5), h, [n, n, n]).unwrap()
    }

    #[test]
    fn plane_on_unit_grid_crosses_exactly() {
        let plane = ImplicitSurface::with_gradient(
            "plane",
            |p: &Point3<f64>| p.x,
            |_| Vector3::x(),
            Point3::new(-1.5, -1.5, -1.5),
            Point3::new(1.5, 1.5, 1.5),
        );
        let grid = GridSpec::new(Point3::new(-1.5, -1.5, -1.5), 1.0, [3, 3, 3]).unwrap();
        let cloud = sample_structured(&plane, &grid);
        // One crossing per x-edge pair straddling 0: (ny+1)*(nz+1) points.
        assert_eq!(cloud.len(), 16);
        for p in &cloud.points {
            assert_eq!(p.position.x, 0.0);
            assert_eq!(p.normal, Vector3::x());
        }
        assert!(validate_cloud(&cloud).ok());
    }

    #[test]
    fn sphere_sampling_stays_in_interpolation_band_and_grid_bound() {
        let shape = builtin_shape("sphere").unwrap();
        let h = 0.2;
        let grid = sphere_grid(h);
        let cloud = sample_structured(&shape, &grid);
        assert!(cloud.len() > 100);
        for p in &cloud.points {
            assert!(
                (p.position.coords.norm() - 1.0).abs() <= h,
                "point {} outside band",
                p.position
            );
        }
        let measured = max_nn_distance(&cloud).unwrap();
        assert!(measured <= grid.cell_diagonal());
        assert!(validate_cloud(&cloud).ok());
        assert_eq!(cloud.grid, Some(grid));
    }

    #[test]
    fn structured_point_count_matches_edge_enumeration_oracle() {
        let shape = builtin_shape("slotted_box").unwrap();
        let grid = GridSpec::new(Point3::new(-1.3, -1.3, -1.3), 0.13, [20, 20, 20]).unwrap();
        let cloud = sample_structured(&shape, &grid);

        // Independent enumeration: walk every unique edge, count sign flips.
        let mut expected = 0usize;
        let value = |i: u32, j: u32, k: u32| shape.value(&grid.vertex(i, j, k));
        let [nx, ny, nz] = grid.dims;
        for i in 0..=nx {
            for j in 0..=ny {
                for k in 0..=nz {
                    let v0 = value(i, j, k);
                    for (di, dj, dk) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
                        if i + di > nx || j + dj > ny || k + dk > nz {
                            continue;
                        }
                        let v1 = value(i + di, j + dj, k + dk);
                        if (v0 < 0.0) != (v1 < 0.0) {
                            expected += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(cloud.len(), expected);
    }

    #[test]
    fn grid_missing_the_surface_yields_empty_cloud() {
        let shape = builtin_shape("sphere").unwrap();
        let far = GridSpec::new(Point3::new(5.0, 5.0, 5.0), 0.5, [4, 4, 4]).unwrap();
        assert!(sample_structured(&shape, &far).is_empty());
        // A grid strictly inside the solid sees no crossings either.
        let inside = GridSpec::new(Point3::new(-0.2, -0.2, -0.2), 0.1, [4, 4, 4]).unwrap();
        assert!(sample_structured(&shape, &inside).is_empty());
    }

    #[test]
    fn sphere_scan_shows_only_front_facing_points() {
        let shape = builtin_shape("sphere").unwrap();
        let view = Vector3::new(0.0, 0.0, -1.0);
        let config = ScanConfig {
            surface: &shape,
            view_directions: vec![view],
            samples: 500,
            seed: 7,
        };
        let cloud = sample_unstructured(&config).unwrap();
        assert!(cloud.len() >= 400, "only {} accepted", cloud.len());
        for p in &cloud.points {
            assert!(
                p.normal.dot(&view) <= 0.1,
                "back-facing point accepted: normal {:?}",
                p.normal
            );
            assert!((p.position.coords.norm() - 1.0).abs() <= 1e-8);
        }
        assert!(validate_cloud(&cloud).ok());
    }

    #[test]
    fn scan_is_deterministic_for_fixed_seed() {
        let shape = builtin_shape("undercut_slot").unwrap();
        let config = ScanConfig {
            surface: &shape,
            view_directions: vec![Vector3::new(0.0, 0.0, -1.0), Vector3::new(1.0, 0.0, 0.0)],
            samples: 300,
            seed: 99,
        };
        let a = sample_unstructured(&config).unwrap();
        let b = sample_unstructured(&config).unwrap();
        assert_eq!(a.points, b.points);
        // A different seed gives a different cloud.
        let config2 = ScanConfig { seed: 100, ..config };
        let c = sample_unstructured(&config2).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn slot_floor_is_unreachable_top_down() {
        let shape = builtin_shape("slotted_box").unwrap();
        let config = ScanConfig {
            surface: &shape,
            view_directions: vec![Vector3::new(0.0, 0.0, -1.0)],
            samples: 800,
            seed: 3,
        };
        let cloud = sample_unstructured(&config).unwrap();
        // Deep slot region: strictly interior to the outer box footprint and
        // below z = 0. Any surface point there belongs to the slot walls or
        // floor, all occluded from straight above by the tilt.
        let deep_slot = |p: &Point3<f64>| {
            p.z < 0.0
                && p.x.abs() < BOX_HALF[0] - 0.05
                && p.y.abs() < BOX_HALF[1] - 0.05
                && p.z > -BOX_HALF[2] + 0.05
        };
        assert!(cloud.points.iter().all(|p| !deep_slot(&p.position)));

        // The structured sampler does reach that region.
        let grid = GridSpec::new(Point3::new(-1.3, -1.3, -1.3), 0.1, [26, 26, 26]).unwrap();
        let structured = sample_structured(&shape, &grid);
        assert!(structured.points.iter().any(|p| deep_slot(&p.position)));
    }

    #[test]
    fn visibility_survives_refinement() {
        // Soundness of the conservative margin: every accepted point stays
        // visible under an independent 10x finer lattice march.
        for name in ["sphere", "slotted_box", "undercut_slot"] {
            let shape = builtin_shape(name).unwrap();
            let views = vec![Vector3::new(0.0, 0.0, -1.0), Vector3::new(0.6, 0.0, 0.8).normalize()];
            let config = ScanConfig {
                surface: &shape,
                view_directions: views.clone(),
                samples: 250,
                seed: 11,
            };
            let step = shape.visibility_step();
            let cloud = sample_unstructured(&config).unwrap();
            for p in &cloud.points {
                assert!(
                    views
                        .iter()
                        .any(|v| is_visible_lattice(&shape, &p.position, v, step / 10.0)),
                    "{name}: accepted point reclassified occluded at {:?}",
                    p.position
                );
            }
        }
    }

    #[test]
    fn unreachable_surface_reports_error() {
        // A field with no zero set: projection never converges.
        let ghost = ImplicitSurface::new(
            "ghost",
            |p: &Point3<f64>| p.coords.norm() + 1.0,
            Point3::new(-1.0, -1.0, -1.0),
            Point3::new(1.0, 1.0, 1.0),
        );
        let config = ScanConfig {
            surface: &ghost,
            view_directions: vec![Vector3::z()],
            samples: 10,
            seed: 1,
        };
        assert!(matches!(
            sample_unstructured(&config),
            Err(Error::SurfaceUnreachable)
        ));
    }

    #[test]
    fn zero_samples_yield_empty_cloud() {
        let shape = builtin_shape("sphere").unwrap();
        let config = ScanConfig {
            surface: &shape,
            view_directions: vec![Vector3::z()],
            samples: 0,
            seed: 1,
        };
        assert!(sample_unstructured(&config).unwrap().is_empty());
    }

    #[test]
    fn inject_outliers_no_op_and_ground_truth() {
        let shape = builtin_shape("sphere").unwrap();
        let grid = sphere_grid(0.2);
        let cloud = sample_structured(&shape, &grid);

        let (same, truth) = inject_outliers(&cloud, 0, 1.0, 6).unwrap();
        assert_eq!(same.points, cloud.points);
        assert!(truth.is_empty());

        let (with, truth) = inject_outliers(&cloud, 50, 5.0, 6).unwrap();
        assert_eq!(with.len(), cloud.len() + 50);
        assert_eq!(truth.len(), 50);
        assert_eq!(truth[0], cloud.len());
        // This seed puts every injected point well off the surface.
        for &i in &truth {
            assert!(
                shape.value(&with.points[i].position).abs() > 3.0 * grid.spacing,
                "outlier {i} too close to surface"
            );
        }
        assert!(validate_cloud(&with).ok());

        let (again, _) = inject_outliers(&cloud, 50, 5.0, 6).unwrap();
        assert_eq!(again.points, with.points);
    }
}
