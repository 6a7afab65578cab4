//! Small geometric primitives shared by the planners: boxes, slab tests and
//! pose (de)serialization.

use nalgebra::{IsometryMatrix3, Matrix3, Point3, Rotation3, Translation3, Vector3};

pub type Pose = IsometryMatrix3<f64>;

/// World up axis. All heights are measured along +z.
pub const UP: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);

/// Axis-aligned box given by its min and max corners.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn new(min: Point3<f64>, max: Point3<f64>) -> Self {
        Aabb { min, max }
    }

    pub fn from_center_half_extents(center: Point3<f64>, half: Vector3<f64>) -> Self {
        Aabb {
            min: center - half,
            max: center + half,
        }
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    /// Interval of ray parameters `t` for which `origin + t * dir` lies in the
    /// box, or `None` when the line misses it.
    pub fn ray_interval(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for a in 0..3 {
            if dir[a] == 0.0 {
                if origin[a] < self.min[a] || origin[a] > self.max[a] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[a];
            let mut ta = (self.min[a] - origin[a]) * inv;
            let mut tb = (self.max[a] - origin[a]) * inv;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }

    /// True when the segment `origin + t * dir`, `t in [t_min, t_max]`, touches the box.
    pub fn hits_segment(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
    ) -> bool {
        match self.ray_interval(origin, dir) {
            Some((t0, t1)) => t0 <= t_max && t1 >= t_min,
            None => false,
        }
    }

    pub fn corners(&self) -> [Point3<f64>; 8] {
        let (a, b) = (self.min, self.max);
        [
            Point3::new(a.x, a.y, a.z),
            Point3::new(b.x, a.y, a.z),
            Point3::new(a.x, b.y, a.z),
            Point3::new(b.x, b.y, a.z),
            Point3::new(a.x, a.y, b.z),
            Point3::new(b.x, a.y, b.z),
            Point3::new(a.x, b.y, b.z),
            Point3::new(b.x, b.y, b.z),
        ]
    }

    /// Points on the box surface on a lattice of roughly `pitch` spacing,
    /// always including the corners.
    pub fn surface_samples(&self, pitch: f64) -> Vec<Point3<f64>> {
        let ext = self.max - self.min;
        let steps: [usize; 3] = std::array::from_fn(|a| ((ext[a] / pitch).ceil() as usize).max(1));
        let coord = |a: usize, i: usize| self.min[a] + ext[a] * i as f64 / steps[a] as f64;
        let mut out = Vec::new();
        for i in 0..=steps[0] {
            for j in 0..=steps[1] {
                for k in 0..=steps[2] {
                    let on_face = i == 0
                        || i == steps[0]
                        || j == 0
                        || j == steps[1]
                        || k == 0
                        || k == steps[2];
                    if on_face {
                        out.push(Point3::new(coord(0, i), coord(1, j), coord(2, k)));
                    }
                }
            }
        }
        out
    }
}

/// Box with a rigid pose: `local` is expressed in the frame `pose` maps to world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub pose: Pose,
    pub local: Aabb,
}

impl OrientedBox {
    pub fn contains(&self, p: &Point3<f64>) -> bool {
        self.local.contains(&self.pose.inverse_transform_point(p))
    }

    pub fn hits_segment(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
    ) -> bool {
        let o = self.pose.inverse_transform_point(origin);
        let d = self.pose.inverse_transform_vector(dir);
        self.local.hits_segment(&o, &d, t_min, t_max)
    }

    /// World-space bounding box.
    pub fn world_aabb(&self) -> Aabb {
        let mut min = Point3::from(Vector3::repeat(f64::INFINITY));
        let mut max = Point3::from(Vector3::repeat(f64::NEG_INFINITY));
        for c in self.local.corners() {
            let w = self.pose * c;
            for a in 0..3 {
                min[a] = min[a].min(w[a]);
                max[a] = max[a].max(w[a]);
            }
        }
        Aabb { min, max }
    }

    pub fn surface_samples(&self, pitch: f64) -> Vec<Point3<f64>> {
        self.local
            .surface_samples(pitch)
            .into_iter()
            .map(|p| self.pose * p)
            .collect()
    }
}

/// Distance from `p` to the vertical line through `axis_point`.
pub fn horizontal_distance(p: &Point3<f64>, axis_point: &Point3<f64>) -> f64 {
    let d = p - axis_point;
    (d.x * d.x + d.y * d.y).sqrt()
}

/// Rotation angle of `r` away from the identity, radians.
pub fn rotation_angle(r: &Rotation3<f64>) -> f64 {
    let c = ((r.matrix().trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    c.acos()
}

/// Rotation whose columns are the given orthonormal axes.
pub fn rotation_from_axes(x: Vector3<f64>, y: Vector3<f64>, z: Vector3<f64>) -> Rotation3<f64> {
    Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]))
}

/// Any unit vector perpendicular to `v` (which must be nonzero), chosen
/// deterministically from the least-aligned world axis.
pub fn any_perpendicular(v: &Vector3<f64>) -> Vector3<f64> {
    let a = v.abs();
    let helper = if a.x <= a.y && a.x <= a.z {
        Vector3::x()
    } else if a.y <= a.z {
        Vector3::y()
    } else {
        Vector3::z()
    };
    v.cross(&helper).normalize()
}

pub fn pose_to_rows(p: &Pose) -> [[f64; 4]; 4] {
    let r = p.rotation.matrix();
    let t = p.translation.vector;
    [
        [r[(0, 0)], r[(0, 1)], r[(0, 2)], t.x],
        [r[(1, 0)], r[(1, 1)], r[(1, 2)], t.y],
        [r[(2, 0)], r[(2, 1)], r[(2, 2)], t.z],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn pose_from_rows(m: &[[f64; 4]; 4]) -> Pose {
    let r = Matrix3::new(
        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
    );
    IsometryMatrix3::from_parts(
        Translation3::new(m[0][3], m[1][3], m[2][3]),
        Rotation3::from_matrix_unchecked(r),
    )
}

/// Serde adapter writing a pose as a row-major 4x4 matrix.
pub mod pose_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &Pose, s: S) -> Result<S::Ok, S::Error> {
        pose_to_rows(p).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Pose, D::Error> {
        let m = <[[f64; 4]; 4]>::deserialize(d)?;
        Ok(pose_from_rows(&m))
    }
}

/// Serde adapter writing a rotation as a row-major 3x3 matrix.
pub mod rotation_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rotation3<f64>, s: S) -> Result<S::Ok, S::Error> {
        let m = r.matrix();
        let rows: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rotation3<f64>, D::Error> {
        let m = <[[f64; 3]; 3]>::deserialize(d)?;
        Ok(Rotation3::from_matrix_unchecked(Matrix3::from_fn(
            |i, j| m[i][j],
        )))
    }
}
