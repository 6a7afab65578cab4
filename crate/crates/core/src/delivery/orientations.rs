use nalgebra::{Rotation3, Vector3};

use crate::error::{Error, Result};

/// Rotations are considered equal when no matrix entry differs by more than this.
pub const ROTATION_EQ_TOL: f64 = 1e-9;

/// Sampled rotation that sends the reference direction `+x` to
/// (azimuth, elevation) and then spins by `roll` about it, all in degrees.
pub fn direction_rotation(azimuth: f64, elevation: f64, roll: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), azimuth.to_radians())
        * Rotation3::from_axis_angle(&Vector3::y_axis(), -elevation.to_radians())
        * Rotation3::from_axis_angle(&Vector3::x_axis(), roll.to_radians())
}

pub fn rotations_equal(a: &Rotation3<f64>, b: &Rotation3<f64>) -> bool {
    (a.matrix() - b.matrix()).amax() <= ROTATION_EQ_TOL
}

/// Orientation samples on an (azimuth, elevation, roll) grid of step
/// `granularity_deg`, in that nesting order. Azimuth and roll cover
/// `[0, 360)`, elevation `[-90, 90]`; at the poles azimuth and roll act
/// about the same axis, so repeats are dropped, keeping the first.
pub fn sample_orientations(granularity_deg: u32) -> Result<Vec<Rotation3<f64>>> {
    if granularity_deg == 0 || 360 % granularity_deg != 0 {
        return Err(Error::InvalidGranularity(granularity_deg));
    }
    let g = granularity_deg as i64;
    let mut out: Vec<Rotation3<f64>> = Vec::new();
    for az in (0..360).step_by(g as usize) {
        let mut el = -90;
        while el <= 90 {
            for roll in (0..360).step_by(g as usize) {
                let r = direction_rotation(az as f64, el as f64, roll as f64);
                if !out.iter().any(|o| rotations_equal(o, &r)) {
                    out.push(r);
                }
            }
            el += g;
        }
    }
    Ok(out)
}
