//! Grasp candidates, gripper occlusion of human contacts, and re-ranking.

mod gripper;
mod occlusion;
mod ranking;
mod sampler;

pub use gripper::{GraspCandidate, GripperModel};
pub use occlusion::{occlusion_fraction, OcclusionContext, OCCLUSION_RAY_FINGER_LENGTHS};
pub use ranking::{
    contact_score, grasps_to_json, rank_grasps, rank_with_occlusion, GraspRecord, RankedGrasp,
    DEFAULT_LAMBDA,
};
pub use sampler::{
    antipodal_confidence, colliding_voxels, in_collision, pair_pose, sample_grasps, SamplerParams,
    MAX_ANTIPODAL_ANGLE_DEG, MIN_CONFIDENCE, ROLL_STEPS,
};
