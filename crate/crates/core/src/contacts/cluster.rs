//! Density-based clustering of contact voxels.
//!
//! A point is a *core* point when at least `min_pts` points (itself
//! included) lie within `eps` of it. Clusters are the connected components
//! of core points under the `eps` relation, plus the non-core points within
//! `eps` of a core point. Everything else is noise.

use std::collections::{HashMap, VecDeque};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::map::ContactMap;
use crate::error::{Error, Result};
use crate::voxel::{VoxelGrid, VoxelIndex};

/// Default neighborhood radius, in voxel edges.
pub const DEFAULT_EPS_VOXELS: f64 = 3.0;
pub const DEFAULT_MIN_PTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactCluster {
    /// Member voxels in ascending index order.
    pub members: Vec<VoxelIndex>,
    pub size: usize,
    pub centroid: Point3<f64>,
}

impl ContactCluster {
    pub fn new(members: Vec<VoxelIndex>, grid: &VoxelGrid) -> Self {
        let mut members = members;
        members.sort_unstable();
        let sum: Vector3<f64> = members.iter().map(|&m| grid.center(m).coords).sum();
        let centroid = Point3::from(sum / members.len().max(1) as f64);
        ContactCluster {
            size: members.len(),
            members,
            centroid,
        }
    }

    pub fn lowest_index(&self) -> Option<VoxelIndex> {
        self.members.first().copied()
    }
}

/// Cluster label per input point; `None` marks noise.
///
/// Points are visited in input order, so a non-core point reachable from
/// several clusters joins the one whose first core point comes earliest.
pub fn dbscan(points: &[Point3<f64>], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Label {
        Unvisited,
        Noise,
        Cluster(usize),
    }
    let eps2 = eps * eps;
    // Buckets slightly wider than eps so rounding cannot push an eps-pair two buckets apart.
    let width = eps * (1.0 + 1e-9);
    let cell = |p: &Point3<f64>| {
        (
            (p.x / width).floor() as i64,
            (p.y / width).floor() as i64,
            (p.z / width).floor() as i64,
        )
    };
    let mut buckets: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        buckets.entry(cell(p)).or_default().push(i);
    }
    let neighbors = |i: usize| -> Vec<usize> {
        let (cx, cy, cz) = cell(&points[i]);
        let mut out = Vec::new();
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(b) = buckets.get(&(cx + dx, cy + dy, cz + dz)) {
                        out.extend(
                            b.iter()
                                .copied()
                                .filter(|&j| (points[j] - points[i]).norm_squared() <= eps2),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
        out
    };

    let mut labels = vec![Label::Unvisited; points.len()];
    let mut next = 0usize;
    for i in 0..points.len() {
        if labels[i] != Label::Unvisited {
            continue;
        }
        let seed = neighbors(i);
        if seed.len() < min_pts {
            labels[i] = Label::Noise;
            continue;
        }
        let c = next;
        next += 1;
        labels[i] = Label::Cluster(c);
        let mut queue: VecDeque<usize> = seed.into();
        while let Some(j) = queue.pop_front() {
            match labels[j] {
                Label::Noise => labels[j] = Label::Cluster(c),
                Label::Unvisited => {
                    labels[j] = Label::Cluster(c);
                    let nj = neighbors(j);
                    if nj.len() >= min_pts {
                        queue.extend(nj);
                    }
                }
                Label::Cluster(_) => {}
            }
        }
    }
    labels
        .into_iter()
        .map(|l| match l {
            Label::Cluster(c) => Some(c),
            _ => None,
        })
        .collect()
}

/// Clusters the binarized contacts of `cm` by world-space voxel centers.
///
/// Returned clusters are sorted by size (largest first), ties by lowest
/// member index.
pub fn cluster_contacts(
    cm: &ContactMap,
    grid: &VoxelGrid,
    eps: f64,
    min_pts: usize,
) -> Result<Vec<ContactCluster>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", "must be finite and > 0"));
    }
    if min_pts == 0 {
        return Err(Error::param("min_pts", "must be >= 1"));
    }
    let contacts = cm.contacts();
    if contacts.is_empty() {
        return Err(Error::EmptyContactMap);
    }
    let points: Vec<Point3<f64>> = contacts.iter().map(|&c| grid.center(c)).collect();
    let labels = dbscan(&points, eps, min_pts);
    let n_clusters = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let mut groups: Vec<Vec<VoxelIndex>> = vec![Vec::new(); n_clusters];
    for (idx, label) in contacts.iter().zip(&labels) {
        if let Some(c) = label {
            groups[*c].push(*idx);
        }
    }
    let mut clusters: Vec<ContactCluster> = groups
        .into_iter()
        .map(|m| ContactCluster::new(m, grid))
        .collect();
    clusters.sort_by(|a, b| {
        b.size
            .cmp(&a.size)
            .then(a.lowest_index().cmp(&b.lowest_index()))
    });
    Ok(clusters)
}

/// The cluster with the most members, ties to the lowest member index.
pub fn largest_cluster(clusters: &[ContactCluster]) -> Result<&ContactCluster> {
    clusters
        .iter()
        .min_by(|a, b| {
            b.size
                .cmp(&a.size)
                .then(a.lowest_index().cmp(&b.lowest_index()))
        })
        .ok_or(Error::EmptyClusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> VoxelGrid {
        VoxelGrid::new([32, 32, 32], 0.01, Point3::origin()).unwrap()
    }

    #[test]
    fn single_contact_with_min_pts_one() {
        let g = grid();
        let cm = ContactMap::from_indices("g", [VoxelIndex::new(3, 3, 3)]);
        let c = cluster_contacts(&cm, &g, 0.03, 1).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].size, 1);
    }

    #[test]
    fn everything_within_eps_is_one_cluster() {
        let g = grid();
        let idx: Vec<_> = (0..3)
            .flat_map(|x| (0..2).map(move |y| VoxelIndex::new(10 + x, 10 + y, 10)))
            .collect();
        let cm = ContactMap::from_indices("g", idx);
        let c = cluster_contacts(&cm, &g, 0.05, 1).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].size, 6);
    }

    #[test]
    fn empty_map_is_an_error() {
        let g = grid();
        let cm = ContactMap::from_indices("g", []);
        assert!(matches!(
            cluster_contacts(&cm, &g, 0.03, 4),
            Err(Error::EmptyContactMap)
        ));
    }

    #[test]
    fn largest_cluster_breaks_ties_on_lowest_index() {
        let g = grid();
        let a = ContactCluster::new((0..10).map(|i| VoxelIndex::new(5, i, 0)).collect(), &g);
        let b = ContactCluster::new((0..10).map(|i| VoxelIndex::new(2, i, 9)).collect(), &g);
        let small = ContactCluster::new(vec![VoxelIndex::new(0, 0, 0)], &g);
        assert_eq!(
            largest_cluster(&[a.clone(), b.clone(), small.clone()]).unwrap(),
            &b
        );
        assert_eq!(largest_cluster(&[small.clone()]).unwrap(), &small);
        assert!(matches!(largest_cluster(&[]), Err(Error::EmptyClusters)));
    }
}
