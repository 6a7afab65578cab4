//! Handover evaluation: how much of the receiver's preferred contact region
//! is visible from their eyes and within reach, and whether both clear a
//! threshold.

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contacts::ContactMap;
use crate::ergonomics::HumanModel;
use crate::error::{Error, Result};
use crate::geometry::{horizontal_distance, Aabb, Pose};
use crate::grasping::GripperModel;
use crate::voxel::{ray_cast, Ray, VoxelGrid, VoxelIndex};

/// A contact voxel counts as seen when the first voxel the eye ray meets lies
/// within this many voxel edges of it.
pub const VISIBILITY_HIT_TOLERANCE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub success_threshold: f64,
    /// Side of the square robot body footprint, centered on the robot base.
    pub robot_body_footprint: f64,
    pub robot_body_height: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            success_threshold: 0.5,
            robot_body_footprint: 0.5,
            robot_body_height: 1.1,
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.success_threshold > 0.0 && self.success_threshold < 1.0) {
            return Err(Error::param("success_threshold", "must be in (0, 1)"));
        }
        if !(self.robot_body_footprint >= 0.0 && self.robot_body_height >= 0.0) {
            return Err(Error::param("robot_body", "dimensions must be >= 0"));
        }
        Ok(())
    }
}

/// Upright box standing in for the robot's body.
pub fn robot_body_proxy(robot_base: &Point3<f64>, params: &EvalParams) -> Aabb {
    let h = 0.5 * params.robot_body_footprint;
    Aabb::new(
        Point3::new(robot_base.x - h, robot_base.y - h, robot_base.z),
        Point3::new(
            robot_base.x + h,
            robot_base.y + h,
            robot_base.z + params.robot_body_height,
        ),
    )
}

/// The object, gripper and robot at the final handover pose.
#[derive(Debug, Clone, Copy)]
pub struct EvalScene<'a> {
    pub grid: &'a VoxelGrid,
    pub object_pose: Pose,
    pub gripper: &'a GripperModel,
    pub gripper_pose: Pose,
    pub gripper_width: f64,
    pub human: &'a HumanModel,
    /// Omitted when evaluating without robot occlusion.
    pub robot_body: Option<Aabb>,
}

impl EvalScene<'_> {
    pub fn world_center(&self, i: VoxelIndex) -> Point3<f64> {
        self.object_pose * self.grid.center(i)
    }

    /// Whether contact voxel `i` is seen from the receiver's eyes.
    pub fn is_visible(&self, i: VoxelIndex) -> bool {
        let target = self.world_center(i);
        if self
            .gripper
            .closing_contains(&self.gripper_pose, self.gripper_width, &target)
        {
            return false;
        }
        let eye = self.human.eye();
        let d = target - eye;
        let len = d.norm();
        if len == 0.0 {
            return true;
        }
        let dir = d / len;
        if self
            .gripper
            .segment_hits(&self.gripper_pose, self.gripper_width, &eye, &dir, len)
        {
            return false;
        }
        if self
            .robot_body
            .is_some_and(|b| b.hits_segment(&eye, &dir, 0.0, len))
        {
            return false;
        }
        let local_eye = self.object_pose.inverse_transform_point(&eye);
        let Ok(ray) = Ray::between(local_eye, self.grid.center(i)) else {
            return true;
        };
        match ray_cast(self.grid, &ray, &[]) {
            Some(hit) => {
                (self.grid.center(hit.index) - self.grid.center(i)).norm()
                    <= VISIBILITY_HIT_TOLERANCE * self.grid.voxel_size()
            }
            None => true,
        }
    }

    /// Smallest horizontal distance from the human axis to the gripper surface,
    /// sampled at the object's voxel size.
    pub fn gripper_axis_distance(&self) -> f64 {
        let axis = self.human.base_position;
        self.gripper
            .surface_samples(
                &self.gripper_pose,
                self.gripper_width,
                self.grid.voxel_size(),
            )
            .iter()
            .map(|p| horizontal_distance(p, &axis))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether voxel `i` is within arm's length of the shoulder and closer
    /// to the human axis than the gripper (`gripper_d2`) is.
    pub fn is_reachable(&self, i: VoxelIndex, gripper_d2: f64) -> bool {
        let p = self.world_center(i);
        let d1 = (p - self.human.shoulder()).norm();
        let d2 = horizontal_distance(&p, &self.human.base_position);
        d1 < self.human.arm_length() && d2 < gripper_d2
    }
}

/// Weighted fraction of the map whose voxels satisfy `pass`. Weights are
/// summed in voxel order so the result does not depend on scheduling.
fn weighted_fraction(cm: &ContactMap, pass: &[bool]) -> Result<f64> {
    let total = cm.total();
    if !(total > 0.0) {
        return Err(Error::EmptyContactMap);
    }
    let hit: f64 = cm
        .entries()
        .zip(pass)
        .filter(|(_, &p)| p)
        .fold(0.0, |acc, ((_, v), _)| acc + v);
    Ok(hit / total)
}

/// Per-entry visibility of `cm`, in the map's voxel order.
pub fn visibility_mask(scene: &EvalScene, cm: &ContactMap) -> Vec<bool> {
    let idx: Vec<VoxelIndex> = cm.entries().map(|(i, _)| i).collect();
    idx.par_iter().map(|&i| scene.is_visible(i)).collect()
}

pub fn reachability_mask(scene: &EvalScene, cm: &ContactMap) -> Vec<bool> {
    let d2 = scene.gripper_axis_distance();
    cm.entries()
        .map(|(i, _)| scene.is_reachable(i, d2))
        .collect()
}

/// CM-weighted fraction of contact voxels visible from the eye.
pub fn visibility(scene: &EvalScene, cm: &ContactMap) -> Result<f64> {
    weighted_fraction(cm, &visibility_mask(scene, cm))
}

/// CM-weighted fraction of contact voxels within reach and nearer the human than the gripper.
pub fn reachability(scene: &EvalScene, cm: &ContactMap) -> Result<f64> {
    weighted_fraction(cm, &reachability_mask(scene, cm))
}

/// Lower median: the `(n-1)/2`-th smallest value.
pub fn lower_median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("median of an empty list"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v[(v.len() - 1) / 2])
}

/// Both medians must strictly exceed `k`.
pub fn success(visibility: &[f64], reachability: &[f64], k: f64) -> Result<bool> {
    if visibility.len() != reachability.len() {
        return Err(Error::param(
            "scores",
            "visibility and reachability lists differ in length",
        ));
    }
    Ok(lower_median(visibility)? > k && lower_median(reachability)? > k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapScore {
    pub map_id: String,
    pub visibility: f64,
    pub reachability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible_voxels: Option<Vec<VoxelIndex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reachable_voxels: Option<Vec<VoxelIndex>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub per_map: Vec<MapScore>,
    pub median_visibility: f64,
    pub median_reachability: f64,
    pub threshold: f64,
    pub success: bool,
}

/// Scores every map; `maps` pairs an identifier with each map. With
/// `keep_voxels`, the passing voxels of each map are listed.
pub fn evaluate(
    scene: &EvalScene,
    maps: &[(String, ContactMap)],
    params: &EvalParams,
    keep_voxels: bool,
) -> Result<MetricScores> {
    params.validate()?;
    if maps.is_empty() {
        return Err(Error::EmptyInput("contact maps"));
    }
    let d2 = scene.gripper_axis_distance();
    let mut per_map = Vec::with_capacity(maps.len());
    for (id, cm) in maps {
        let vis = visibility_mask(scene, cm);
        let reach: Vec<bool> = cm
            .entries()
            .map(|(i, _)| scene.is_reachable(i, d2))
            .collect();
        let pick = |mask: &[bool]| -> Vec<VoxelIndex> {
            cm.entries()
                .zip(mask)
                .filter(|(_, &p)| p)
                .map(|((i, _), _)| i)
                .collect()
        };
        per_map.push(MapScore {
            map_id: id.clone(),
            visibility: weighted_fraction(cm, &vis)?,
            reachability: weighted_fraction(cm, &reach)?,
            visible_voxels: keep_voxels.then(|| pick(&vis)),
            reachable_voxels: keep_voxels.then(|| pick(&reach)),
        });
    }
    let v: Vec<f64> = per_map.iter().map(|m| m.visibility).collect();
    let r: Vec<f64> = per_map.iter().map(|m| m.reachability).collect();
    Ok(MetricScores {
        median_visibility: lower_median(&v)?,
        median_reachability: lower_median(&r)?,
        threshold: params.success_threshold,
        success: success(&v, &r, params.success_threshold)?,
        per_map,
    })
}

/// Direction from `a` to `b` with the vertical component removed.
pub fn horizontal_direction(a: &Point3<f64>, b: &Point3<f64>) -> Option<Vector3<f64>> {
    let mut d = b - a;
    d.z = 0.0;
    let n = d.norm();
    (n > 1e-12).then(|| d / n)
}
