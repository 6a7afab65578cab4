//! Orientation sampling and planning for presenting the object to the receiver.

mod orientations;
mod planner;

pub use orientations::{direction_rotation, rotations_equal, sample_orientations, ROTATION_EQ_TOL};
pub use planner::{
    approach_alignment, delivery_frame, evaluate_orientations, gripper_world_pose,
    object_world_pose, plan_handover_orientation, pose_for_sample, select_orientation,
    DeliveryContext, Feasibility, FeasibilityParams, HandoverPose, OrientationCandidate,
    RejectedOrientation, OBJECTIVE_TIE_TOL,
};
