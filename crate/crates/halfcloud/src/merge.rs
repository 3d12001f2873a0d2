//! Building the half-structured cloud.
//!
//! Every structured point acts as an *anchor*: its k nearest unstructured
//! neighbors are retrieved, and a neighbor is accepted when it is within
//! `d_un` of the anchor and its normal agrees with the anchor's
//! (`dot >= cos_theta_min`). Accepted points are selected into the output
//! with set semantics (a point accepted via several anchors appears once).
//! Anchors with fewer than `fill_min_support` accepted candidates are
//! retained themselves -- that is the fill that completes cracks and
//! occluded regions where the scan is silent.
//!
//! Both outlier passes run *before* the merge and their hits are excluded
//! from anchors and candidates: the unstructured pass trusts the structured
//! cloud as the model (setting 1), the structured pass flags isolated grid
//! artifacts such as CT scatter by the nearest-neighbor distance criterion
//! (setting 2, separate `outlier_radius_struct` parameter because the
//! structured cloud is sparser).
//!
//! The output order is canonical -- selected unstructured points by
//! ascending original index, then fill anchors by ascending original index --
//! so any degree of parallelism produces the identical cloud.

use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::{validate_cloud, MergeParams, OrientedPoint, PointCloud, Source};
use crate::error::{Error, Result};
use crate::kdtree::{max_nn_distance, SpatialIndex};

/// Per-run statistics of one merge.
#[derive(Debug, Clone, Serialize)]
pub struct MergeReport {
    pub n_struct_in: usize,
    pub n_un_in: usize,
    /// Unstructured points accepted into the output.
    pub n_selected_un: usize,
    /// Structured anchors retained as fill.
    pub n_fill_struct: usize,
    /// `max_nn_distance` of the output; `None` below 2 points.
    pub measured_d_half: Option<f64>,
    /// Original indices into the unstructured input, ascending. The output
    /// cloud starts with exactly these points in this order.
    pub selected_un_indices: Vec<usize>,
    /// Original indices into the structured input, ascending. The output
    /// cloud ends with exactly these points in this order.
    pub fill_struct_indices: Vec<usize>,
    pub outliers_un: Vec<usize>,
    pub outliers_struct: Vec<usize>,
}

/// Indices of the unstructured points accepted around one anchor.
///
/// The k nearest neighbors of `anchor.position` are retrieved from
/// `index_un`; a candidate `q` is accepted iff its distance to the anchor is
/// `<= d_un` and `dot(n_anchor, n_q) >= cos_theta_min`. Result order is the
/// k-NN order (ascending distance, ties by index).
pub fn select_candidates(
    anchor: &OrientedPoint,
    p_un: &PointCloud,
    index_un: &SpatialIndex,
    params: &MergeParams,
) -> Vec<usize> {
    index_un
        .knn(&anchor.position, params.k)
        .into_iter()
        .filter_map(|(idx, dist)| {
            let accept = dist <= params.d_un
                && anchor.normal.dot(&p_un.points[idx].normal) >= params.cos_theta_min;
            accept.then_some(idx)
        })
        .collect()
}

/// Unstructured points with no structured point within
/// `params.outlier_radius_un` (setting 1: the structured cloud is trusted as
/// the model and filters the unstructured one).
pub fn detect_outliers_unstructured(
    p_un: &PointCloud,
    index_struct: &SpatialIndex,
    params: &MergeParams,
) -> Vec<usize> {
    p_un.points
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let supported = index_struct
                .knn(&p.position, 1)
                .first()
                .is_some_and(|&(_, d)| d <= params.outlier_radius_un);
            (!supported).then_some(i)
        })
        .collect()
}

/// Structured points whose nearest structured neighbor is farther than
/// `d_struct_bound` (setting 2: isolated grid artifacts). For grid-derived
/// clouds of simply connected surfaces `h * sqrt(3)` is the natural bound.
pub fn detect_outliers_structured(p_struct: &PointCloud, d_struct_bound: f64) -> Result<Vec<usize>> {
    if p_struct.len() < 2 {
        return Err(Error::TooFewPoints(p_struct.len()));
    }
    if !(d_struct_bound > 0.0) {
        return Err(Error::InvalidParameter {
            name: "d_struct_bound",
            reason: format!("must be > 0, got {d_struct_bound}"),
        });
    }
    let index = SpatialIndex::build(p_struct);
    Ok(p_struct
        .points
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let near = index
                .nearest_other(&p.position, i)
                .is_some_and(|(_, d)| d <= d_struct_bound);
            (!near).then_some(i)
        })
        .collect())
}

/// Merges a structured and an unstructured cloud into a half-structured one.
///
/// The clouds must be in the same frame (run [`crate::cloud::scale_normalize`]
/// first if they are not) and pass validation. Candidate selection runs per
/// anchor in parallel; the output ordering is canonical regardless.
pub fn merge(
    p_struct: &PointCloud,
    p_un: &PointCloud,
    params: &MergeParams,
) -> Result<(PointCloud, MergeReport)> {
    params.validate()?;
    if p_struct.is_empty() {
        return Err(Error::StructuredCloudRequired);
    }
    for cloud in [p_struct, p_un] {
        let report = validate_cloud(cloud);
        if !report.ok() {
            return Err(Error::InvalidCloud(report.violations.len()));
        }
    }

    // Outlier passes first; hits take no further part in the merge.
    let outliers_struct = if p_struct.len() >= 2 {
        detect_outliers_structured(p_struct, params.outlier_radius_struct)?
    } else {
        Vec::new()
    };
    let anchor_indices: Vec<usize> = excluded(p_struct.len(), &outliers_struct);
    let anchors_clean = subset(p_struct, &anchor_indices);
    let index_struct_clean = SpatialIndex::build(&anchors_clean);

    let outliers_un: Vec<usize> = p_un
        .points
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let supported = index_struct_clean
                .knn(&p.position, 1)
                .first()
                .is_some_and(|&(_, d)| d <= params.outlier_radius_un);
            (!supported).then_some(i)
        })
        .collect();
    let candidate_indices: Vec<usize> = excluded(p_un.len(), &outliers_un);
    let candidates_clean = subset(p_un, &candidate_indices);
    let index_un_clean = SpatialIndex::build(&candidates_clean);

    // Candidate selection per anchor, then an order-independent union.
    let per_anchor: Vec<Vec<usize>> = anchors_clean
        .points
        .par_iter()
        .map(|anchor| select_candidates(anchor, &candidates_clean, &index_un_clean, params))
        .collect();

    let mut selected = vec![false; p_un.len()];
    let mut fill_struct_indices = Vec::new();
    for (anchor_pos, accepted) in per_anchor.iter().enumerate() {
        if accepted.len() < params.fill_min_support {
            fill_struct_indices.push(anchor_indices[anchor_pos]);
        }
        for &clean_idx in accepted {
            selected[candidate_indices[clean_idx]] = true;
        }
    }
    let selected_un_indices: Vec<usize> = selected
        .iter()
        .enumerate()
        .filter_map(|(i, &s)| s.then_some(i))
        .collect();

    let mut points = Vec::with_capacity(selected_un_indices.len() + fill_struct_indices.len());
    points.extend(selected_un_indices.iter().map(|&i| p_un.points[i]));
    points.extend(fill_struct_indices.iter().map(|&i| p_struct.points[i]));
    let half = PointCloud::new(points, Source::HalfStructured);

    let measured_d_half = if half.len() >= 2 {
        Some(max_nn_distance(&half)?)
    } else {
        None
    };

    let report = MergeReport {
        n_struct_in: p_struct.len(),
        n_un_in: p_un.len(),
        n_selected_un: selected_un_indices.len(),
        n_fill_struct: fill_struct_indices.len(),
        measured_d_half,
        selected_un_indices,
        fill_struct_indices,
        outliers_un,
        outliers_struct,
    };
    Ok((half, report))
}

/// Ascending indices of `0..len` not present in the sorted list `removed`.
fn excluded(len: usize, removed: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(len - removed.len());
    let mut r = removed.iter().peekable();
    for i in 0..len {
        if r.peek() == Some(&&i) {
            r.next();
        } else {
            out.push(i);
        }
    }
    out
}

fn subset(cloud: &PointCloud, indices: &[usize]) -> PointCloud {
    PointCloud::new(
        indices.iter().map(|&i| cloud.points[i]).collect(),
        cloud.source,
    )
}
