use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UP;

pub const GRAVITY: f64 = 9.81;

/// Standing human receiver. Only the right arm is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanModel {
    pub height: f64,
    /// Ground point below the body center.
    pub base_position: Point3<f64>,
    /// Unit horizontal direction the human faces.
    pub facing: Vector3<f64>,
    pub shoulder_height_fraction: f64,
    pub waist_height_fraction: f64,
    pub upper_arm_length: f64,
    pub forearm_length: f64,
    pub upper_arm_mass: f64,
    pub forearm_mass: f64,
    pub hand_mass: f64,
    pub head_height: f64,
    /// Lateral distance from the body center to the right arm's plane.
    pub arm_plane_offset: f64,
}

impl Default for HumanModel {
    fn default() -> Self {
        HumanModel::with_height(1.7)
    }
}

impl HumanModel {
    /// Anthropometric defaults scaled to `height`, standing at the origin facing +x.
    pub fn with_height(height: f64) -> Self {
        HumanModel {
            height,
            base_position: Point3::origin(),
            facing: Vector3::x(),
            shoulder_height_fraction: 0.82,
            waist_height_fraction: 0.60,
            upper_arm_length: 0.176 * height,
            forearm_length: 0.206 * height,
            upper_arm_mass: 2.1,
            forearm_mass: 1.2,
            hand_mass: 0.5,
            head_height: 0.13 * height,
            arm_plane_offset: 0.18,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("height", self.height),
            ("upper_arm_length", self.upper_arm_length),
            ("forearm_length", self.forearm_length),
            ("head_height", self.head_height),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        for (name, v) in [
            ("upper_arm_mass", self.upper_arm_mass),
            ("forearm_mass", self.forearm_mass),
            ("hand_mass", self.hand_mass),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and >= 0"));
            }
        }
        if !(0.0 < self.waist_height_fraction
            && self.waist_height_fraction < self.shoulder_height_fraction
            && self.shoulder_height_fraction < 1.0)
        {
            return Err(Error::param(
                "height fractions",
                "need 0 < waist < shoulder < 1",
            ));
        }
        if self.facing.z != 0.0 || !(self.facing.norm() > 0.0) {
            return Err(Error::param(
                "facing",
                "must be a nonzero horizontal vector",
            ));
        }
        if !self.arm_plane_offset.is_finite() || !self.base_position.iter().all(|c| c.is_finite()) {
            return Err(Error::param("human", "must be finite"));
        }
        Ok(())
    }

    pub fn facing_unit(&self) -> Vector3<f64> {
        self.facing.normalize()
    }

    /// The human's right-hand side.
    pub fn right(&self) -> Vector3<f64> {
        self.facing_unit().cross(&UP)
    }

    pub fn arm_length(&self) -> f64 {
        self.upper_arm_length + self.forearm_length
    }

    pub fn shoulder_height(&self) -> f64 {
        self.shoulder_height_fraction * self.height
    }

    pub fn waist_height(&self) -> f64 {
        self.waist_height_fraction * self.height
    }

    pub fn eye_height(&self) -> f64 {
        self.height - 0.5 * self.head_height
    }

    /// Right shoulder joint in world coordinates.
    pub fn shoulder(&self) -> Point3<f64> {
        self.base_position + UP * self.shoulder_height() + self.right() * self.arm_plane_offset
    }

    pub fn eye(&self) -> Point3<f64> {
        self.base_position + UP * self.eye_height()
    }
}

/// Right-arm joint angles in degrees.
///
/// Shoulder 0 is the arm hanging down, increasing as the arm raises forward.
/// Elbow 0 is a straight arm, increasing as the forearm folds toward the
/// upper arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub shoulder_deg: f64,
    pub elbow_deg: f64,
}

impl ArmConfig {
    pub const SHOULDER_RANGE: (f64, f64) = (0.0, 135.0);
    pub const ELBOW_RANGE: (f64, f64) = (0.0, 140.0);
    pub const SHOULDER_MID: f64 = 67.5;
    pub const ELBOW_MID: f64 = 62.5;

    pub fn new(shoulder_deg: f64, elbow_deg: f64) -> Self {
        ArmConfig {
            shoulder_deg,
            elbow_deg,
        }
    }

    pub fn in_range(&self) -> bool {
        (Self::SHOULDER_RANGE.0..=Self::SHOULDER_RANGE.1).contains(&self.shoulder_deg)
            && (Self::ELBOW_RANGE.0..=Self::ELBOW_RANGE.1).contains(&self.elbow_deg)
    }
}

/// Offsets of the elbow and hand from the shoulder in the arm plane, as
/// (forward, up) pairs.
pub fn planar_chain(config: &ArmConfig, human: &HumanModel) -> ([f64; 2], [f64; 2]) {
    let s = config.shoulder_deg.to_radians();
    let f = (config.shoulder_deg + config.elbow_deg).to_radians();
    let elbow = [
        human.upper_arm_length * s.sin(),
        -human.upper_arm_length * s.cos(),
    ];
    let hand = [
        elbow[0] + human.forearm_length * f.sin(),
        elbow[1] - human.forearm_length * f.cos(),
    ];
    (elbow, hand)
}

/// World position of the right hand.
pub fn forward_kinematics(config: &ArmConfig, human: &HumanModel) -> Point3<f64> {
    let (_, [fwd, up]) = planar_chain(config, human);
    human.shoulder() + human.facing_unit() * fwd + UP * up
}

/// Static gravity torque magnitudes at the shoulder and elbow, N·m.
///
/// Segment masses act at segment midpoints; the hand and the held object
/// act at the hand. Moment arms are signed forward offsets, so masses on
/// opposite sides of a joint partially cancel.
pub fn joint_torques(config: &ArmConfig, object_mass: f64, human: &HumanModel) -> (f64, f64) {
    let s = config.shoulder_deg.to_radians();
    let f = (config.shoulder_deg + config.elbow_deg).to_radians();
    let upper = human.upper_arm_length * s.sin();
    let fore = human.forearm_length * f.sin();
    let end_mass = human.hand_mass + object_mass;
    let elbow = human.forearm_mass * 0.5 * fore + end_mass * fore;
    let shoulder = human.upper_arm_mass * 0.5 * upper
        + human.forearm_mass * (upper + 0.5 * fore)
        + end_mass * (upper + fore);
    ((GRAVITY * shoulder).abs(), (GRAVITY * elbow).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hanging_arm_points_straight_down() {
        let h = HumanModel::default();
        let p = forward_kinematics(&ArmConfig::new(0.0, 0.0), &h);
        assert!((p - (h.shoulder() - UP * h.arm_length())).norm() < 1e-12);
    }

    #[test]
    fn raised_arm_points_forward() {
        let h = HumanModel::default();
        let p = forward_kinematics(&ArmConfig::new(90.0, 0.0), &h);
        assert!((p - (h.shoulder() + h.facing_unit() * h.arm_length())).norm() < 1e-12);
    }

    #[test]
    fn right_is_to_the_right_of_facing() {
        let h = HumanModel::default();
        assert!((h.right() - -Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn defaults_validate() {
        HumanModel::default().validate().unwrap();
        let bad = HumanModel {
            waist_height_fraction: 0.9,
            ..HumanModel::default()
        };
        assert!(bad.validate().is_err());
    }
}
