//! Receiver arm model and ergonomic handover-position planning.

mod human;
mod planner;

pub use human::{forward_kinematics, joint_torques, planar_chain, ArmConfig, HumanModel, GRAVITY};
pub use planner::{
    config_grid, displacement_raw, plan_handover_position, torque_raw, ErgonomicCandidate,
    HandoverPosition, DEFAULT_ALPHA, DEFAULT_OBJECT_MASS, GRID_STEP_DEG,
};
