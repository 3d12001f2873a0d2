//! Machine checks of the half-structured cloud's closed-form bounds.
//!
//! Two families of bounds are verified on produced clouds:
//!
//! - **Nearest-neighbor distance.** With `d_struct` the maximal
//!   nearest-neighbor distance of the structured cloud and `d_un` the maximal
//!   anchor-to-candidate distance used for selection, the distance from any
//!   point `A` to its nearest neighbor `B` is bounded case-wise by the
//!   origins of the pair:
//!   `d_struct` (both structured), `d_struct + 2 d_un` (both unstructured),
//!   `d_struct + d_un` (mixed).
//! - **Density.** For a merge with k neighbors per anchor over a grid of
//!   spacing `h`, a single grid cell holds at most `n_max = 12 * k` points,
//!   and a cube of width `w` anchored at a grid vertex holds at most
//!   `n_max_c = 12 * k * ceil(w/h + 1)^3`.
//!
//! Cells and probe cubes are half-open (`[lo, lo + size)` per axis): a point
//! on a boundary belongs to the cell with the lower index, so no point is
//! ever counted twice.

use std::collections::HashMap;

use serde::Serialize;

use crate::cloud::{GridSpec, PointCloud};
use crate::error::{Error, Result};
use crate::kdtree::SpatialIndex;

/// Which input cloud a merged point originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginTag {
    Struct,
    Un,
}

/// The tightest (or worst violating) instance found by a check.
#[derive(Debug, Clone, Serialize)]
pub struct WorstCase {
    /// Point indices for a distance pair; cell/anchor coordinates for a
    /// density count.
    pub indices: Vec<i64>,
    pub measured: f64,
    pub allowed: f64,
}

/// One homogeneous slice of a bound check (a tag-pair case, or one density
/// rule).
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub allowed: f64,
    pub checked: usize,
    pub violations: usize,
    pub worst: Option<WorstCase>,
}

/// Outcome of one bound verification.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub holds: bool,
    /// Tightest instance over all cases, by `measured - allowed`.
    pub worst_case: Option<WorstCase>,
    pub cases: Vec<CaseReport>,
}

impl BoundReport {
    fn from_cases(bound_name: &str, cases: Vec<CaseReport>) -> Self {
        let holds = cases.iter().all(|c| c.violations == 0);
        let worst_case = cases
            .iter()
            .filter_map(|c| c.worst.clone())
            .max_by(|a, b| (a.measured - a.allowed).total_cmp(&(b.measured - b.allowed)));
        Self {
            bound_name: bound_name.to_string(),
            holds,
            worst_case,
            cases,
        }
    }
}

struct CaseAccum {
    allowed: f64,
    checked: usize,
    violations: usize,
    worst: Option<WorstCase>,
}

impl CaseAccum {
    fn new(allowed: f64) -> Self {
        Self {
            allowed,
            checked: 0,
            violations: 0,
            worst: None,
        }
    }

    fn record(&mut self, indices: Vec<i64>, measured: f64) {
        self.checked += 1;
        if measured > self.allowed {
            self.violations += 1;
        }
        if self.worst.as_ref().is_none_or(|w| measured > w.measured) {
            self.worst = Some(WorstCase {
                indices,
                measured,
                allowed: self.allowed,
            });
        }
    }

    fn into_report(self, case: &str) -> CaseReport {
        CaseReport {
            case: case.to_string(),
            allowed: self.allowed,
            checked: self.checked,
            violations: self.violations,
            worst: self.worst,
        }
    }
}

/// Checks the three-case nearest-neighbor distance bound on `half`.
///
/// `origin_tags[i]` states where point `i` came from. For every point the
/// nearest neighbor is found exactly and the pair is checked against the
/// allowed value of its tag combination.
pub fn verify_distance_bound(
    half: &PointCloud,
    origin_tags: &[OriginTag],
    d_struct: f64,
    d_un: f64,
) -> Result<BoundReport> {
    if origin_tags.len() != half.len() {
        return Err(Error::TagLengthMismatch {
            tags: origin_tags.len(),
            points: half.len(),
        });
    }
    if half.len() < 2 {
        return Err(Error::TooFewPoints(half.len()));
    }
    for (name, v) in [("d_struct", d_struct), ("d_un", d_un)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be finite and > 0, got {v}"),
            });
        }
    }

    let mut both_struct = CaseAccum::new(d_struct);
    let mut both_un = CaseAccum::new(d_struct + 2.0 * d_un);
    let mut mixed = CaseAccum::new(d_struct + d_un);

    let index = SpatialIndex::build(half);
    for (i, p) in half.points.iter().enumerate() {
        let (j, dist) = index
            .nearest_other(&p.position, i)
            .expect("cloud has >= 2 points");
        let pair = vec![i as i64, j as i64];
        match (origin_tags[i], origin_tags[j]) {
            (OriginTag::Struct, OriginTag::Struct) => both_struct.record(pair, dist),
            (OriginTag::Un, OriginTag::Un) => both_un.record(pair, dist),
            _ => mixed.record(pair, dist),
        }
    }

    Ok(BoundReport::from_cases(
        "nearest-neighbor distance",
        vec![
            both_struct.into_report("struct/struct"),
            both_un.into_report("un/un"),
            mixed.into_report("mixed"),
        ],
    ))
}

/// Origin tags matching the canonical merge output order: `n_selected_un`
/// unstructured points followed by `n_fill_struct` fill points.
pub fn tags_from_counts(n_selected_un: usize, n_fill_struct: usize) -> Vec<OriginTag> {
    let mut tags = vec![OriginTag::Un; n_selected_un];
    tags.extend(std::iter::repeat(OriginTag::Struct).take(n_fill_struct));
    tags
}

/// Checks both density bounds on `half` over `grid`:
/// per grid cell `count <= 12 k`, and for a sliding cube of width
/// `probe_width` anchored at every grid vertex
/// `count <= 12 k ceil(w/h + 1)^3`.
pub fn verify_density_bound(
    half: &PointCloud,
    grid: &GridSpec,
    k: usize,
    probe_width: f64,
) -> BoundReport {
    assert!(k >= 1, "k must be >= 1");
    assert!(probe_width > 0.0, "probe width must be > 0");

    let h = grid.spacing;
    let n_max = 12.0 * k as f64;
    let n_max_c = n_max * ceil_with_float_guard(probe_width / h + 1.0).powi(3) as f64;

    // Per-cell counts over half-open cells.
    let mut cells: HashMap<[i64; 3], usize> = HashMap::new();
    for p in &half.points {
        *cells.entry(grid.cell_of(&p.position)).or_insert(0) += 1;
    }
    let mut cell_case = CaseAccum::new(n_max);
    for (cell, count) in &cells {
        cell_case.record(cell.to_vec(), *count as f64);
    }
    if cells.is_empty() {
        // Vacuous check still reports a densest count of zero.
        cell_case.record(vec![0, 0, 0], 0.0);
    }

    // Sliding cube anchored at each grid vertex: every point contributes to
    // all anchors whose half-open cube [v, v + w) contains it.
    let mut cubes: HashMap<[i64; 3], usize> = HashMap::new();
    for p in &half.points {
        let mut ranges = [(0i64, -1i64); 3];
        for axis in 0..3 {
            let u = (p.position[axis] - grid.origin[axis]) / h;
            let hi = u.floor().min(f64::from(grid.dims[axis])) as i64;
            let lo = ((u - probe_width / h).floor() as i64 + 1).max(0);
            ranges[axis] = (lo, hi);
        }
        for i in ranges[0].0..=ranges[0].1 {
            for j in ranges[1].0..=ranges[1].1 {
                for l in ranges[2].0..=ranges[2].1 {
                    *cubes.entry([i, j, l]).or_insert(0) += 1;
                }
            }
        }
    }
    let mut cube_case = CaseAccum::new(n_max_c);
    for (anchor, count) in &cubes {
        cube_case.record(anchor.to_vec(), *count as f64);
    }
    if cubes.is_empty() {
        cube_case.record(vec![0, 0, 0], 0.0);
    }

    BoundReport::from_cases(
        "density",
        vec![
            cell_case.into_report("grid cell"),
            cube_case.into_report(&format!("sliding cube w = {probe_width}")),
        ],
    )
}

/// `ceil` with a relative guard against float noise in the `w/h` ratio, so
/// that e.g. `w = 2h` yields exactly 3 even when the division lands at
/// `3.0000000000000004`.
fn ceil_with_float_guard(x: f64) -> f64 {
    (x - 1e-9 * x.abs()).ceil()
}
