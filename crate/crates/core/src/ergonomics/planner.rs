use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::human::{forward_kinematics, joint_torques, ArmConfig, HumanModel};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_OBJECT_MASS: f64 = 0.5;
pub const GRID_STEP_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgonomicCandidate {
    pub config: ArmConfig,
    pub hand_position: Point3<f64>,
    /// Sum of squared joint torques.
    pub torque_raw: f64,
    /// Sum of squared joint deviations from mid-range, degrees².
    pub disp_raw: f64,
    pub f_torque: f64,
    pub f_disp: f64,
    pub f_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoverPosition {
    pub position: Point3<f64>,
    pub winner: ErgonomicCandidate,
    pub torque_max: f64,
    pub disp_max: f64,
    pub alpha: f64,
    /// Every height-feasible candidate, in grid order (shoulder-major).
    pub candidates: Vec<ErgonomicCandidate>,
}

/// Every grid configuration, shoulder-major, both ranges inclusive.
pub fn config_grid() -> Vec<ArmConfig> {
    let steps = |(lo, hi): (f64, f64)| ((hi - lo) / GRID_STEP_DEG).round() as usize;
    let ns = steps(ArmConfig::SHOULDER_RANGE);
    let ne = steps(ArmConfig::ELBOW_RANGE);
    (0..=ns)
        .flat_map(|i| {
            (0..=ne).map(move |j| {
                ArmConfig::new(
                    ArmConfig::SHOULDER_RANGE.0 + i as f64 * GRID_STEP_DEG,
                    ArmConfig::ELBOW_RANGE.0 + j as f64 * GRID_STEP_DEG,
                )
            })
        })
        .collect()
}

pub fn displacement_raw(config: &ArmConfig) -> f64 {
    (ArmConfig::SHOULDER_MID - config.shoulder_deg).powi(2)
        + (ArmConfig::ELBOW_MID - config.elbow_deg).powi(2)
}

pub fn torque_raw(config: &ArmConfig, object_mass: f64, human: &HumanModel) -> f64 {
    let (ts, te) = joint_torques(config, object_mass, human);
    ts * ts + te * te
}

fn normalized(v: f64, max: f64) -> f64 {
    if max > 0.0 {
        v / max
    } else {
        0.0
    }
}

/// Chooses the hand position minimizing the blended torque/displacement
/// cost over the arm-configuration grid, restricted to hand heights strictly
/// between waist and shoulder.
///
/// Ties go to lower torque cost, then lower shoulder angle, then lower
/// elbow angle.
pub fn plan_handover_position(
    human: &HumanModel,
    object_mass: f64,
    alpha: f64,
) -> Result<HandoverPosition> {
    human.validate()?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::param("alpha", "must be in [0, 1]"));
    }
    if !(object_mass >= 0.0 && object_mass.is_finite()) {
        return Err(Error::param("object_mass", "must be finite and >= 0"));
    }
    let base_z = human.base_position.z;
    let (lo, hi) = (
        base_z + human.waist_height(),
        base_z + human.shoulder_height(),
    );
    let mut candidates: Vec<ErgonomicCandidate> = config_grid()
        .par_iter()
        .filter_map(|c| {
            let hand = forward_kinematics(c, human);
            (hand.z > lo && hand.z < hi).then(|| ErgonomicCandidate {
                config: *c,
                hand_position: hand,
                torque_raw: torque_raw(c, object_mass, human),
                disp_raw: displacement_raw(c),
                f_torque: 0.0,
                f_disp: 0.0,
                f_total: 0.0,
            })
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptyErgonomicSet);
    }
    let torque_max = candidates.iter().map(|c| c.torque_raw).fold(0.0, f64::max);
    let disp_max = candidates.iter().map(|c| c.disp_raw).fold(0.0, f64::max);
    for c in &mut candidates {
        c.f_torque = normalized(c.torque_raw, torque_max);
        c.f_disp = normalized(c.disp_raw, disp_max);
        c.f_total = (1.0 - alpha) * c.f_torque + alpha * c.f_disp;
    }
    let winner = *candidates
        .iter()
        .min_by(|a, b| {
            a.f_total
                .total_cmp(&b.f_total)
                .then(a.f_torque.total_cmp(&b.f_torque))
                .then(a.config.shoulder_deg.total_cmp(&b.config.shoulder_deg))
                .then(a.config.elbow_deg.total_cmp(&b.config.elbow_deg))
        })
        .expect("nonempty");
    Ok(HandoverPosition {
        position: winner.hand_position,
        winner,
        torque_max,
        disp_max,
        alpha,
        candidates,
    })
}

impl HandoverPosition {
    /// One row per kept candidate:
    /// `theta_s,theta_e,hand_x,hand_y,hand_z,f_torque,f_disp,f_total`.
    pub fn diagnostics_csv(&self) -> String {
        let mut out =
            String::from("theta_s,theta_e,hand_x,hand_y,hand_z,f_torque,f_disp,f_total\n");
        for c in &self.candidates {
            let p = c.hand_position;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.config.shoulder_deg,
                c.config.elbow_deg,
                p.x,
                p.y,
                p.z,
                c.f_torque,
                c.f_disp,
                c.f_total
            );
        }
        out
    }

    pub fn write_diagnostics(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.diagnostics_csv()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_28_by_29_points() {
        let g = config_grid();
        assert_eq!(g.len(), 28 * 29);
        assert_eq!(g[0], ArmConfig::new(0.0, 0.0));
        assert_eq!(*g.last().unwrap(), ArmConfig::new(135.0, 140.0));
    }

    #[test]
    fn normalization_reaches_one() {
        let p = plan_handover_position(&HumanModel::default(), 0.5, 0.5).unwrap();
        let ft = p.candidates.iter().map(|c| c.f_torque).fold(0.0, f64::max);
        let fd = p.candidates.iter().map(|c| c.f_disp).fold(0.0, f64::max);
        assert_eq!((ft, fd), (1.0, 1.0));
        let csv = p.diagnostics_csv();
        assert_eq!(csv.lines().count(), p.candidates.len() + 1);
    }

    #[test]
    fn impossible_window_is_an_error() {
        // a sub-micron height window that no 5 degree grid point lands in
        let h = HumanModel {
            waist_height_fraction: 0.82 - 1e-9,
            ..HumanModel::default()
        };
        assert!(matches!(
            plan_handover_position(&h, 0.5, 0.5),
            Err(Error::EmptyErgonomicSet)
        ));
    }
}
