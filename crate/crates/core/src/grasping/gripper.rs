use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, OrientedBox, Pose};
use crate::voxel::VoxelIndex;

/// Parallel-jaw gripper made of two finger boxes and a palm bridge.
///
/// Gripper frame: the origin is the center of the closing region, `x` is the
/// closing axis, fingers extend along `-z` from the palm (the approach
/// direction is `-z`), and `y` completes the right-handed frame. Fingers
/// have a square cross-section of side `finger_thickness`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    pub finger_length: f64,
    pub finger_thickness: f64,
    pub max_width: f64,
    pub palm_depth: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel {
            finger_length: 0.05,
            finger_thickness: 0.015,
            max_width: 0.10,
            palm_depth: 0.04,
        }
    }
}

impl GripperModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("finger_length", self.finger_length),
            ("finger_thickness", self.finger_thickness),
            ("max_width", self.max_width),
            ("palm_depth", self.palm_depth),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    fn half_y(&self) -> f64 {
        0.5 * self.finger_thickness
    }

    /// Volume between the fingers at opening `width`, gripper frame.
    pub fn closing_region(&self, width: f64) -> Aabb {
        let (hw, hy, hl) = (0.5 * width, self.half_y(), 0.5 * self.finger_length);
        Aabb::new(Point3::new(-hw, -hy, -hl), Point3::new(hw, hy, hl))
    }

    /// Left finger, right finger, palm; gripper frame.
    pub fn boxes(&self, width: f64) -> [Aabb; 3] {
        let (hw, hy, hl, t) = (
            0.5 * width,
            self.half_y(),
            0.5 * self.finger_length,
            self.finger_thickness,
        );
        [
            Aabb::new(Point3::new(-hw - t, -hy, -hl), Point3::new(-hw, hy, hl)),
            Aabb::new(Point3::new(hw, -hy, -hl), Point3::new(hw + t, hy, hl)),
            Aabb::new(
                Point3::new(-hw - t, -hy, hl),
                Point3::new(hw + t, hy, hl + self.palm_depth),
            ),
        ]
    }

    pub fn posed_boxes(&self, pose: &Pose, width: f64) -> [OrientedBox; 3] {
        self.boxes(width)
            .map(|local| OrientedBox { pose: *pose, local })
    }

    pub fn closing_contains(&self, pose: &Pose, width: f64, p: &Point3<f64>) -> bool {
        self.closing_region(width)
            .contains(&pose.inverse_transform_point(p))
    }

    /// Whether the segment `origin + t * dir`, `t in [0, t_max]`, touches any gripper box.
    pub fn segment_hits(
        &self,
        pose: &Pose,
        width: f64,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_max: f64,
    ) -> bool {
        self.posed_boxes(pose, width)
            .iter()
            .any(|b| b.hits_segment(origin, dir, 0.0, t_max))
    }

    /// World points sampled on the gripper surface at roughly `pitch` spacing.
    pub fn surface_samples(&self, pose: &Pose, width: f64, pitch: f64) -> Vec<Point3<f64>> {
        self.posed_boxes(pose, width)
            .iter()
            .flat_map(|b| b.surface_samples(pitch))
            .collect()
    }
}

/// A 6-DoF parallel-jaw grasp on the object grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    /// Gripper frame in the object grid's world frame.
    #[serde(with = "crate::geometry::pose_serde")]
    pub pose: Pose,
    pub width: f64,
    /// Grasp confidence in [0, 1].
    pub confidence: f64,
    pub contact_pair: (VoxelIndex, VoxelIndex),
}

impl GraspCandidate {
    /// World direction the gripper travels to reach the object (gripper `-z`).
    pub fn approach_axis(&self) -> Vector3<f64> {
        -(self.pose.rotation * Vector3::z())
    }

    /// The point the fingers close on; fixed relative to the object while grasped.
    pub fn held_point(&self) -> Point3<f64> {
        Point3::from(self.pose.translation.vector)
    }
}
