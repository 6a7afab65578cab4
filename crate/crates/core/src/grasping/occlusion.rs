use nalgebra::Vector3;

use super::gripper::{GraspCandidate, GripperModel};
use crate::contacts::ContactCluster;
use crate::voxel::{estimate_normals, NormalMap, Ray, VoxelGrid, VoxelIndex};

/// Rays for the occlusion test reach this many finger lengths.
pub const OCCLUSION_RAY_FINGER_LENGTHS: f64 = 4.0;

/// Shared, read-only inputs for occlusion scoring.
#[derive(Debug, Clone, Copy)]
pub struct OcclusionContext<'a> {
    pub grid: &'a VoxelGrid,
    pub normals: &'a NormalMap,
    pub gripper: &'a GripperModel,
}

impl OcclusionContext<'_> {
    fn normal(&self, i: VoxelIndex) -> Vector3<f64> {
        match self.normals.get(&i) {
            Some(n) => *n,
            None => estimate_normals(self.grid, &[i])[&i],
        }
    }

    /// Whether contact voxel `i` is blocked by the gripper at grasp `g`.
    pub fn is_blocked(&self, g: &GraspCandidate, i: VoxelIndex) -> bool {
        let c = self.grid.center(i);
        if self.gripper.closing_contains(&g.pose, g.width, &c) {
            return true;
        }
        let max = OCCLUSION_RAY_FINGER_LENGTHS * self.gripper.finger_length;
        match Ray::from_surface(self.grid, i, self.normal(i), max) {
            Ok(ray) => self.gripper.segment_hits(
                &g.pose,
                g.width,
                &ray.origin(),
                &ray.direction(),
                ray.max_distance(),
            ),
            Err(_) => false,
        }
    }

    /// Number of blocked voxels in `cluster` and the cluster size.
    pub fn blocked_count(&self, g: &GraspCandidate, cluster: &ContactCluster) -> (usize, usize) {
        let blocked = cluster
            .members
            .iter()
            .filter(|&&i| self.is_blocked(g, i))
            .count();
        (blocked, cluster.members.len())
    }
}

/// Fraction of `cluster` whose outward normal ray meets the gripper at `g`,
/// or which sits between the fingers. An empty cluster scores 0.
pub fn occlusion_fraction(
    g: &GraspCandidate,
    cluster: &ContactCluster,
    ctx: &OcclusionContext,
) -> f64 {
    let (blocked, total) = ctx.blocked_count(g, cluster);
    if total == 0 {
        0.0
    } else {
        blocked as f64 / total as f64
    }
}
