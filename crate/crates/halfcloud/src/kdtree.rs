//! Exact k-d tree over a cloud's positions.
//!
//! Build is a median split with axes cycling x -> y -> z and coordinate ties
//! broken by original point index, so the tree structure is a pure function
//! of the input. Queries are exact (no approximation): results are ordered by
//! ascending distance with ties broken by ascending original index, which
//! makes every query result deterministic and directly comparable to a
//! brute-force scan.
//!
//! The index is immutable after build and safe to share across any number of
//! concurrent readers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Point3;
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Node {
    pos: Point3<f64>,
    idx: u32,
}

/// Worst-first ordering: an entry is "greater" when it is a worse neighbor
/// (larger squared distance, then larger index).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist_sq: f64,
    idx: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Immutable k-d tree over the positions of one [`PointCloud`].
///
/// Nodes are stored in a flat array in recursive median layout: the subtree
/// for `[lo, hi)` keeps its splitting node at `lo + len/2`, its left subtree
/// in `[lo, lo + len/2)` and its right subtree after the node.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    nodes: Vec<Node>,
}

impl SpatialIndex {
    /// Builds the index over all points of `cloud`. `O(N log N)` via
    /// linear-time median selection per level.
    pub fn build(cloud: &PointCloud) -> Self {
        assert!(
            cloud.len() <= u32::MAX as usize,
            "index supports at most 2^32 - 1 points"
        );
        let mut nodes: Vec<Node> = cloud
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| Node {
                pos: p.position,
                idx: i as u32,
            })
            .collect();
        build_rec(&mut nodes, 0);
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The `min(k, N)` points closest to `query`, ascending by distance,
    /// ties broken by ascending original index. Exact.
    pub fn knn(&self, query: &Point3<f64>, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        knn_rec(&self.nodes, 0, query, k, &mut heap);
        heap.into_sorted_vec()
            .into_iter()
            .map(|c| (c.idx as usize, c.dist_sq.sqrt()))
            .collect()
    }

    /// All points with distance `<= radius` from `query`, ascending by
    /// distance, ties broken by ascending original index. Exact.
    pub fn radius_search(&self, query: &Point3<f64>, radius: f64) -> Vec<(usize, f64)> {
        let mut hits: Vec<Candidate> = Vec::new();
        if !self.nodes.is_empty() && radius >= 0.0 {
            radius_rec(&self.nodes, 0, query, radius * radius, &mut hits);
        }
        hits.sort_unstable();
        hits.into_iter()
            .map(|c| (c.idx as usize, c.dist_sq.sqrt()))
            .collect()
    }

    /// Nearest point whose original index differs from `exclude`, if any.
    pub fn nearest_other(&self, query: &Point3<f64>, exclude: usize) -> Option<(usize, f64)> {
        // The excluded point occupies at most one of the top-2 slots.
        self.knn(query, 2).into_iter().find(|&(i, _)| i != exclude)
    }
}

fn build_rec(nodes: &mut [Node], depth: usize) {
    if nodes.len() <= 1 {
        return;
    }
    let mid = nodes.len() / 2;
    let axis = depth % 3;
    nodes.select_nth_unstable_by(mid, |a, b| {
        a.pos[axis]
            .total_cmp(&b.pos[axis])
            .then(a.idx.cmp(&b.idx))
    });
    let (left, rest) = nodes.split_at_mut(mid);
    build_rec(left, depth + 1);
    build_rec(&mut rest[1..], depth + 1);
}

fn knn_rec(
    nodes: &[Node],
    depth: usize,
    query: &Point3<f64>,
    k: usize,
    heap: &mut BinaryHeap<Candidate>,
) {
    let mid = nodes.len() / 2;
    let node = &nodes[mid];
    let candidate = Candidate {
        dist_sq: (node.pos - query).norm_squared(),
        idx: node.idx,
    };
    if heap.len() < k {
        heap.push(candidate);
    } else if candidate < *heap.peek().expect("heap non-empty") {
        heap.pop();
        heap.push(candidate);
    }

    if nodes.len() == 1 {
        return;
    }
    let axis = depth % 3;
    let delta = query[axis] - node.pos[axis];
    let (near, far) = if delta < 0.0 {
        (&nodes[..mid], &nodes[mid + 1..])
    } else {
        (&nodes[mid + 1..], &nodes[..mid])
    };

    if !near.is_empty() {
        knn_rec(near, depth + 1, query, k, heap);
    }
    if !far.is_empty() {
        // Equal axis distance can still hold an equal-distance point with a
        // smaller index, so the far side is pruned only on strict excess.
        let must_search = heap.len() < k
            || delta * delta <= heap.peek().expect("heap non-empty").dist_sq;
        if must_search {
            knn_rec(far, depth + 1, query, k, heap);
        }
    }
}

fn radius_rec(
    nodes: &[Node],
    depth: usize,
    query: &Point3<f64>,
    radius_sq: f64,
    hits: &mut Vec<Candidate>,
) {
    let mid = nodes.len() / 2;
    let node = &nodes[mid];
    let dist_sq = (node.pos - query).norm_squared();
    if dist_sq <= radius_sq {
        hits.push(Candidate {
            dist_sq,
            idx: node.idx,
        });
    }

    if nodes.len() == 1 {
        return;
    }
    let axis = depth % 3;
    let delta = query[axis] - node.pos[axis];
    let (near, far) = if delta < 0.0 {
        (&nodes[..mid], &nodes[mid + 1..])
    } else {
        (&nodes[mid + 1..], &nodes[..mid])
    };
    if !near.is_empty() {
        radius_rec(near, depth + 1, query, radius_sq, hits);
    }
    if !far.is_empty() && delta * delta <= radius_sq {
        radius_rec(far, depth + 1, query, radius_sq, hits);
    }
}

/// Maximum over all points of the distance to their nearest *other* point.
///
/// Applied to a structured cloud this measures `d_struct`; applied to a merge
/// output it measures `d_half`. Nearest-neighbor is not reflexive, so this is
/// a directed max, not a max over unordered pairs.
pub fn max_nn_distance(cloud: &PointCloud) -> Result<f64> {
    if cloud.len() < 2 {
        return Err(Error::TooFewPoints(cloud.len()));
    }
    let index = SpatialIndex::build(cloud);
    let max = cloud
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            index
                .nearest_other(&p.position, i)
                .expect("cloud has >= 2 points")
                .1
        })
        .reduce(|| 0.0, f64::max);
    Ok(max)
}
