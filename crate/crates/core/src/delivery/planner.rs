use nalgebra::{IsometryMatrix3, Matrix3, Point3, Rotation3, Translation3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contacts::ContactCluster;
use crate::ergonomics::HumanModel;
use crate::error::{Error, Result};
use crate::geometry::{pose_serde, rotation_angle, rotation_serde, Pose, UP};
use crate::grasping::{GraspCandidate, GripperModel, RankedGrasp};
use crate::voxel::{VoxelGrid, VoxelIndex};

/// Objectives closer than this are treated as tied.
pub const OBJECTIVE_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityParams {
    /// Radius of the vertical body capsule around the human.
    pub body_radius: f64,
    /// Lowest allowed object height above the ground.
    pub min_height: f64,
    /// Largest angle between the approach axis and the robot-to-human direction, degrees.
    pub approach_cone_deg: f64,
    /// Spacing of the points sampled on the gripper boxes.
    pub gripper_sample_pitch: f64,
}

impl Default for FeasibilityParams {
    fn default() -> Self {
        FeasibilityParams {
            body_radius: 0.20,
            min_height: 0.40,
            approach_cone_deg: 120.0,
            gripper_sample_pitch: 0.005,
        }
    }
}

/// Why an orientation was rejected; all three checks are always evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feasibility {
    pub touches_human: bool,
    pub below_min_height: bool,
    pub outside_approach_cone: bool,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        !(self.touches_human || self.below_min_height || self.outside_approach_cone)
    }
}

/// Everything fixed while orientations are compared.
#[derive(Debug, Clone, Copy)]
pub struct DeliveryContext<'a> {
    pub grid: &'a VoxelGrid,
    /// Voxels tested against the body capsule and height limit; the surface
    /// voxels are enough since the object is solid.
    pub surface: &'a [VoxelIndex],
    pub gripper: &'a GripperModel,
    pub grasp: &'a GraspCandidate,
    pub human: &'a HumanModel,
    pub robot_base: Point3<f64>,
    pub ee_position: Point3<f64>,
    pub params: FeasibilityParams,
}

/// World rotation whose `x` axis is the horizontal robot-to-human direction.
pub fn delivery_frame(human: &HumanModel, robot_base: &Point3<f64>) -> Result<Rotation3<f64>> {
    let mut d = human.base_position - robot_base;
    d.z = 0.0;
    if !(d.norm() > 1e-12) {
        return Err(Error::param(
            "robot_base",
            "must be horizontally apart from the human",
        ));
    }
    let x = d.normalize();
    let y = UP.cross(&x);
    Ok(Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[
        x, y, UP,
    ])))
}

/// Fixed gripper orientation relative to a sampled rotation: the approach
/// axis (gripper `-z`) along `+x`, the closing axis along `+y`.
pub fn approach_alignment() -> Rotation3<f64> {
    Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[
        Vector3::y(),
        -Vector3::z(),
        -Vector3::x(),
    ]))
}

/// World gripper pose for sampled rotation `r` with the held point at `ee`.
pub fn gripper_world_pose(frame: &Rotation3<f64>, r: &Rotation3<f64>, ee: &Point3<f64>) -> Pose {
    IsometryMatrix3::from_parts(
        Translation3::from(ee.coords),
        frame * r * approach_alignment(),
    )
}

/// Object (grid frame) pose carried by a gripper at `gripper_world`.
pub fn object_world_pose(gripper_world: &Pose, grasp: &GraspCandidate) -> Pose {
    gripper_world * grasp.pose.inverse()
}

fn distance_to_segment(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

impl DeliveryContext<'_> {
    pub fn frame(&self) -> Result<Rotation3<f64>> {
        delivery_frame(self.human, &self.robot_base)
    }

    fn in_body(&self, p: &Point3<f64>) -> bool {
        let a = self.human.base_position;
        let b = a + UP * self.human.height;
        distance_to_segment(p, &a, &b) < self.params.body_radius
    }

    pub fn feasibility(&self, frame: &Rotation3<f64>, r: &Rotation3<f64>) -> Feasibility {
        let gw = gripper_world_pose(frame, r, &self.ee_position);
        let ow = object_world_pose(&gw, self.grasp);
        let mut f = Feasibility::default();
        for &s in self.surface {
            let p = ow * self.grid.center(s);
            f.touches_human |= self.in_body(&p);
            f.below_min_height |= p.z < self.params.min_height;
            if f.touches_human && f.below_min_height {
                break;
            }
        }
        if !f.touches_human {
            f.touches_human = self
                .gripper
                .surface_samples(&gw, self.grasp.width, self.params.gripper_sample_pitch)
                .iter()
                .any(|p| self.in_body(p));
        }
        let approach = frame * r * Vector3::x();
        let toward_human = frame * Vector3::x();
        let cos = approach.dot(&toward_human).clamp(-1.0, 1.0);
        f.outside_approach_cone = cos.acos().to_degrees() > self.params.approach_cone_deg;
        f
    }

    /// Sum of distances from the cluster's voxel centers to the eye with the
    /// object carried at sampled rotation `r`.
    pub fn objective(
        &self,
        frame: &Rotation3<f64>,
        r: &Rotation3<f64>,
        cluster: &ContactCluster,
    ) -> f64 {
        let ow = object_world_pose(&gripper_world_pose(frame, r, &self.ee_position), self.grasp);
        let eye = self.human.eye();
        cluster
            .members
            .iter()
            .map(|&m| (ow * self.grid.center(m) - eye).norm())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationCandidate {
    pub index: usize,
    #[serde(with = "rotation_serde")]
    pub rotation: Rotation3<f64>,
    pub feasibility: Feasibility,
    /// Present only for feasible candidates.
    pub objective: Option<f64>,
}

impl OrientationCandidate {
    pub fn feasible(&self) -> bool {
        self.feasibility.is_feasible()
    }
}

/// Feasibility and objective of every sampled rotation, in sample order.
pub fn evaluate_orientations(
    ctx: &DeliveryContext,
    cluster: &ContactCluster,
    rotations: &[Rotation3<f64>],
) -> Result<Vec<OrientationCandidate>> {
    let frame = ctx.frame()?;
    Ok(rotations
        .par_iter()
        .enumerate()
        .map(|(index, r)| {
            let feasibility = ctx.feasibility(&frame, r);
            let objective = feasibility
                .is_feasible()
                .then(|| ctx.objective(&frame, r, cluster));
            OrientationCandidate {
                index,
                rotation: *r,
                feasibility,
                objective,
            }
        })
        .collect())
}

/// Lowest objective among feasible candidates. Objectives within
/// [`OBJECTIVE_TIE_TOL`] of the minimum tie; ties go to the smallest rotation
/// angle, then the earliest sample.
pub fn select_orientation(candidates: &[OrientationCandidate]) -> Result<&OrientationCandidate> {
    let best = candidates
        .iter()
        .filter_map(|c| c.objective)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::NoFeasibleOrientation);
    }
    candidates
        .iter()
        .filter(|c| c.objective.is_some_and(|o| o - best <= OBJECTIVE_TIE_TOL))
        .min_by(|a, b| {
            rotation_angle(&a.rotation)
                .total_cmp(&rotation_angle(&b.rotation))
                .then(a.index.cmp(&b.index))
        })
        .ok_or(Error::NoFeasibleOrientation)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedOrientation {
    pub index: usize,
    pub feasibility: Feasibility,
}

/// Planned delivery of the grasped object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoverPose {
    pub grasp: RankedGrasp,
    /// Sampled rotation, expressed in the delivery frame.
    #[serde(with = "rotation_serde")]
    pub object_rotation: Rotation3<f64>,
    pub ee_position: Point3<f64>,
    #[serde(with = "pose_serde")]
    pub gripper_pose: Pose,
    #[serde(with = "pose_serde")]
    pub object_pose: Pose,
    /// Total contact-to-eye distance; `None` when the pose was not chosen by
    /// minimizing it.
    pub objective: Option<f64>,
    pub sample_index: Option<usize>,
    pub rejected: Vec<RejectedOrientation>,
}

impl HandoverPose {
    /// Pose for sampled rotation `r` in `ctx`'s delivery frame.
    pub fn at_rotation(
        ctx: &DeliveryContext,
        grasp: &RankedGrasp,
        r: &Rotation3<f64>,
    ) -> Result<Self> {
        let gripper_pose = gripper_world_pose(&ctx.frame()?, r, &ctx.ee_position);
        Ok(HandoverPose {
            grasp: grasp.clone(),
            object_rotation: *r,
            ee_position: ctx.ee_position,
            object_pose: object_world_pose(&gripper_pose, &grasp.candidate),
            gripper_pose,
            objective: None,
            sample_index: None,
            rejected: Vec::new(),
        })
    }

    /// Pose given directly by a world gripper pose, outside the sampled set.
    pub fn from_gripper_pose(grasp: &RankedGrasp, gripper_pose: Pose) -> Self {
        HandoverPose {
            grasp: grasp.clone(),
            object_rotation: Rotation3::identity(),
            ee_position: Point3::from(gripper_pose.translation.vector),
            object_pose: object_world_pose(&gripper_pose, &grasp.candidate),
            gripper_pose,
            objective: None,
            sample_index: None,
            rejected: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn rejected(candidates: &[OrientationCandidate]) -> Vec<RejectedOrientation> {
    candidates
        .iter()
        .filter(|c| !c.feasible())
        .map(|c| RejectedOrientation {
            index: c.index,
            feasibility: c.feasibility,
        })
        .collect()
}

/// Presents the object so that the contact cluster is as close to the
/// receiver's eyes as any feasible sampled rotation allows.
pub fn plan_handover_orientation(
    ctx: &DeliveryContext,
    grasp: &RankedGrasp,
    cluster: &ContactCluster,
    rotations: &[Rotation3<f64>],
) -> Result<HandoverPose> {
    if cluster.members.is_empty() {
        return Err(Error::EmptyInput("contact cluster"));
    }
    let candidates = evaluate_orientations(ctx, cluster, rotations)?;
    let best = select_orientation(&candidates)?;
    let mut pose = HandoverPose::at_rotation(ctx, grasp, &best.rotation)?;
    pose.objective = best.objective;
    pose.sample_index = Some(best.index);
    pose.rejected = rejected(&candidates);
    Ok(pose)
}

/// Pose for an already chosen sample, keeping rejection diagnostics.
pub fn pose_for_sample(
    ctx: &DeliveryContext,
    grasp: &RankedGrasp,
    candidates: &[OrientationCandidate],
    index: usize,
) -> Result<HandoverPose> {
    let c = candidates
        .iter()
        .find(|c| c.index == index)
        .ok_or_else(|| Error::param("index", "not a sampled orientation"))?;
    let mut pose = HandoverPose::at_rotation(ctx, grasp, &c.rotation)?;
    pose.objective = c.objective;
    pose.sample_index = Some(index);
    pose.rejected = rejected(candidates);
    Ok(pose)
}
