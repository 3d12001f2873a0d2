//! Built-in implicit solids, one per crack scenario plus a sphere baseline.
//!
//! All fields follow the convention negative inside / positive outside and
//! are 1-Lipschitz (compositions of distances under max/min), which the
//! visibility ray-marcher relies on. Every solid fits inside the shared
//! sampling domain with comfortable clearance.
//!
//! The crack geometries, cut out of one base box by CSG difference
//! (`f = max(f_box, -f_cut)`):
//!
//! - `slotted_box`: a narrow slot tilted about the y-axis. The slot pierces
//!   the top face but its floor sits under solid material, so a top-down
//!   scan sees the entrance and misses the lower walls and floor.
//! - `undercut_slot`: a vertical entrance channel opening into a wider
//!   chamber below; the chamber ring under the overhang is unreachable from
//!   any exterior direction.
//! - `multi_chamber_crack`: one entrance branching into two side chambers at
//!   different depths, so a single crack induces several disconnected
//!   patches of missing data.

use nalgebra::{Point3, Vector3};

use super::ImplicitSurface;

/// Shared sampling domain for every built-in shape.
pub const DOMAIN_MIN: [f64; 3] = [-1.3, -1.3, -1.3];
pub const DOMAIN_MAX: [f64; 3] = [1.3, 1.3, 1.3];

pub const SPHERE_RADIUS: f64 = 1.0;

/// Base box half-extents, shared by all box-derived shapes.
pub const BOX_HALF: [f64; 3] = [1.0, 0.8, 0.6];

/// Tilt of the `slotted_box` slot about the y-axis, radians.
pub const SLOT_TILT: f64 = 0.6;
pub const SLOT_HALF: [f64; 3] = [0.12, 0.9, 0.55];
pub const SLOT_CENTER: [f64; 3] = [0.0, 0.0, 0.25];

pub const UNDERCUT_ENTRANCE_HALF: [f64; 3] = [0.1, 0.9, 0.2];
pub const UNDERCUT_ENTRANCE_CENTER: [f64; 3] = [0.0, 0.0, 0.5];
pub const UNDERCUT_CHAMBER_HALF: [f64; 3] = [0.35, 0.9, 0.15];
pub const UNDERCUT_CHAMBER_CENTER: [f64; 3] = [0.0, 0.0, 0.15];

pub const MULTI_ENTRANCE_HALF: [f64; 3] = [0.08, 0.9, 0.25];
pub const MULTI_ENTRANCE_CENTER: [f64; 3] = [0.0, 0.0, 0.45];
pub const MULTI_CHAMBER_A_HALF: [f64; 3] = [0.3, 0.9, 0.08];
pub const MULTI_CHAMBER_A_CENTER: [f64; 3] = [-0.25, 0.0, 0.25];
pub const MULTI_CHAMBER_B_HALF: [f64; 3] = [0.3, 0.9, 0.08];
pub const MULTI_CHAMBER_B_CENTER: [f64; 3] = [0.25, 0.0, 0.18];

/// Max-norm distance to an axis-aligned box: negative inside, and on the
/// outside a lower bound on the Euclidean distance (still 1-Lipschitz).
fn box_field(p: &Point3<f64>, center: [f64; 3], half: [f64; 3]) -> f64 {
    (0..3)
        .map(|a| (p[a] - center[a]).abs() - half[a])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Same box, with its local frame rotated by `angle` about the y-axis.
fn tilted_box_field(p: &Point3<f64>, center: [f64; 3], half: [f64; 3], angle: f64) -> f64 {
    let (sin, cos) = angle.sin_cos();
    let dx = p.x - center[0];
    let dz = p.z - center[2];
    let local = Point3::new(cos * dx - sin * dz, p.y - center[1], sin * dx + cos * dz);
    box_field(&local, [0.0; 3], half)
}

fn base_box(p: &Point3<f64>) -> f64 {
    box_field(p, [0.0; 3], BOX_HALF)
}

fn domain() -> (Point3<f64>, Point3<f64>) {
    (DOMAIN_MIN.into(), DOMAIN_MAX.into())
}

pub fn sphere() -> ImplicitSurface {
    let (lo, hi) = domain();
    ImplicitSurface::with_gradient(
        "sphere",
        |p: &Point3<f64>| p.coords.norm() - SPHERE_RADIUS,
        |p: &Point3<f64>| {
            let n = p.coords.norm();
            if n > 0.0 {
                p.coords / n
            } else {
                Vector3::z()
            }
        },
        lo,
        hi,
    )
}

pub fn boxy() -> ImplicitSurface {
    let (lo, hi) = domain();
    ImplicitSurface::new("box", base_box, lo, hi)
}

pub fn slotted_box() -> ImplicitSurface {
    let (lo, hi) = domain();
    ImplicitSurface::new(
        "slotted_box",
        |p: &Point3<f64>| {
            let cut = tilted_box_field(p, SLOT_CENTER, SLOT_HALF, SLOT_TILT);
            base_box(p).max(-cut)
        },
        lo,
        hi,
    )
}

pub fn undercut_slot() -> ImplicitSurface {
    let (lo, hi) = domain();
    ImplicitSurface::new(
        "undercut_slot",
        |p: &Point3<f64>| {
            let entrance = box_field(p, UNDERCUT_ENTRANCE_CENTER, UNDERCUT_ENTRANCE_HALF);
            let chamber = box_field(p, UNDERCUT_CHAMBER_CENTER, UNDERCUT_CHAMBER_HALF);
            base_box(p).max(-entrance.min(chamber))
        },
        lo,
        hi,
    )
}

pub fn multi_chamber_crack() -> ImplicitSurface {
    let (lo, hi) = domain();
    ImplicitSurface::new(
        "multi_chamber_crack",
        |p: &Point3<f64>| {
            let entrance = box_field(p, MULTI_ENTRANCE_CENTER, MULTI_ENTRANCE_HALF);
            let a = box_field(p, MULTI_CHAMBER_A_CENTER, MULTI_CHAMBER_A_HALF);
            let b = box_field(p, MULTI_CHAMBER_B_CENTER, MULTI_CHAMBER_B_HALF);
            base_box(p).max(-entrance.min(a).min(b))
        },
        lo,
        hi,
    )
}

/// All built-in shapes: the sphere baseline plus one solid per crack
/// scenario.
pub fn builtin_shapes() -> Vec<ImplicitSurface> {
    vec![
        sphere(),
        boxy(),
        slotted_box(),
        undercut_slot(),
        multi_chamber_crack(),
    ]
}

/// Looks up a built-in shape by its name.
pub fn builtin_shape(name: &str) -> Option<ImplicitSurface> {
    match name {
        "sphere" => Some(sphere()),
        "box" => Some(boxy()),
        "slotted_box" => Some(slotted_box()),
        "undercut_slot" => Some(undercut_slot()),
        "multi_chamber_crack" => Some(multi_chamber_crack()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_is_canonical_signed_distance() {
        let s = sphere();
        assert_eq!(s.value(&Point3::origin()), -1.0);
        assert_eq!(s.value(&Point3::new(1.0, 0.0, 0.0)), 0.0);
        assert_eq!(s.value(&Point3::new(2.0, 0.0, 0.0)), 1.0);
    }

    #[test]
    fn box_signs() {
        let b = boxy();
        assert!(b.value(&Point3::origin()) < 0.0);
        assert!(b.value(&Point3::new(0.99, 0.0, 0.0)) < 0.0);
        assert!(b.value(&Point3::new(1.01, 0.0, 0.0)) > 0.0);
        assert!(b.value(&Point3::new(0.0, 0.0, 0.61)) > 0.0);
        assert_eq!(b.value(&Point3::new(0.0, 0.8, 0.0)), 0.0);
    }

    #[test]
    fn slotted_box_probe_points() {
        let s = slotted_box();
        // Solid interior away from the slot.
        assert!(s.value(&Point3::new(-0.8, 0.0, -0.3)) < 0.0);
        // Outside the outer box.
        assert!(s.value(&Point3::new(0.0, 0.0, 1.0)) > 0.0);
        // Inside the slot cavity: positive (carved out).
        assert!(s.value(&Point3::new(0.25, 0.0, 0.45)) > 0.0);
        // Just past the slot wall: solid again.
        assert!(s.value(&Point3::new(0.6, 0.0, 0.3)) < 0.0);
        // Deep slot end near the floor is carved.
        assert!(s.value(&Point3::new(-0.28, 0.0, -0.15)) > 0.0);
    }

    #[test]
    fn undercut_probe_points() {
        let u = undercut_slot();
        // Entrance channel is carved.
        assert!(u.value(&Point3::new(0.0, 0.0, 0.55)) > 0.0);
        // Chamber under the overhang is carved.
        assert!(u.value(&Point3::new(0.3, 0.0, 0.15)) > 0.0);
        // The overhang itself is solid.
        assert!(u.value(&Point3::new(0.3, 0.0, 0.4)) < 0.0);
        // Below the chamber floor is solid.
        assert!(u.value(&Point3::new(0.0, 0.0, -0.1)) < 0.0);
    }

    #[test]
    fn multi_chamber_probe_points() {
        let m = multi_chamber_crack();
        // Entrance.
        assert!(m.value(&Point3::new(0.0, 0.0, 0.5)) > 0.0);
        // Chamber A (left, higher).
        assert!(m.value(&Point3::new(-0.4, 0.0, 0.25)) > 0.0);
        // Chamber B (right, lower).
        assert!(m.value(&Point3::new(0.4, 0.0, 0.18)) > 0.0);
        // Solid between the chambers below the entrance.
        assert!(m.value(&Point3::new(-0.4, 0.0, 0.05)) < 0.0);
        // Solid above chamber A away from the entrance.
        assert!(m.value(&Point3::new(-0.4, 0.0, 0.45)) < 0.0);
    }

    #[test]
    fn all_shapes_fit_inside_domain_with_clearance() {
        for shape in builtin_shapes() {
            for corner in [
                Point3::new(DOMAIN_MIN[0], DOMAIN_MIN[1], DOMAIN_MIN[2]),
                Point3::new(DOMAIN_MAX[0], DOMAIN_MAX[1], DOMAIN_MAX[2]),
                Point3::new(DOMAIN_MIN[0], DOMAIN_MAX[1], DOMAIN_MIN[2]),
            ] {
                assert!(
                    shape.value(&corner) > 0.2,
                    "{} too close to domain corner",
                    shape.name
                );
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        assert!(builtin_shape("sphere").is_some());
        assert!(builtin_shape("slotted_box").is_some());
        assert!(builtin_shape("torus").is_none());
        assert_eq!(builtin_shapes().len(), 5);
    }
}
