use nalgebra::{Point3, Vector3};

use super::grid::{VoxelGrid, VoxelIndex};
use crate::error::{Error, Result};

/// Offset, in voxel edges, applied to rays that start on a surface voxel.
pub const SURFACE_RAY_OFFSET: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: Point3<f64>,
    direction: Vector3<f64>,
    max_distance: f64,
}

impl Ray {
    /// `direction` is normalized; it must be finite and nonzero.
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>, max_distance: f64) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::param("direction", "must be finite and nonzero"));
        }
        if !(max_distance > 0.0) {
            return Err(Error::param("max_distance", "must be > 0"));
        }
        if !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::param("origin", "must be finite"));
        }
        Ok(Ray {
            origin,
            direction: direction / n,
            max_distance,
        })
    }

    /// Ray leaving surface voxel `idx` along `direction`: it starts
    /// [`SURFACE_RAY_OFFSET`] voxel edges away from the voxel center. Pair it
    /// with `idx` in the ignore set.
    pub fn from_surface(
        grid: &VoxelGrid,
        idx: VoxelIndex,
        direction: Vector3<f64>,
        max_distance: f64,
    ) -> Result<Self> {
        let d = direction.normalize();
        let start = grid.center(idx) + d * (SURFACE_RAY_OFFSET * grid.voxel_size());
        Ray::new(start, d, max_distance)
    }

    /// Ray from `from` toward `to`, stopping at `to`.
    pub fn between(from: Point3<f64>, to: Point3<f64>) -> Result<Self> {
        let d = to - from;
        Ray::new(from, d, d.norm())
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }
    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }
    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub index: VoxelIndex,
    /// Ray parameter at which the ray enters the hit voxel (0 if it starts inside).
    pub distance: f64,
}

/// First occupied voxel along `ray` not listed in `ignore`, found by exact
/// voxel-boundary stepping.
pub fn ray_cast(grid: &VoxelGrid, ray: &Ray, ignore: &[VoxelIndex]) -> Option<RayHit> {
    let o = ray.origin;
    let d = ray.direction;
    let (t0, t1) = grid.bounds().ray_interval(&o, &d)?;
    let t_enter = t0.max(0.0);
    if t_enter > t1 || t_enter > ray.max_distance {
        return None;
    }
    let vs = grid.voxel_size();
    let g0 = grid.origin();
    let dims = grid.dims();
    let p = o + d * t_enter;
    let mut cell = [0i64; 3];
    let mut step = [0i64; 3];
    for a in 0..3 {
        let c = ((p[a] - g0[a]) / vs).floor() as i64;
        cell[a] = c.clamp(0, dims[a] as i64 - 1);
        step[a] = if d[a] > 0.0 {
            1
        } else if d[a] < 0.0 {
            -1
        } else {
            0
        };
    }
    // Parameter at which the ray leaves the current cell through axis `a`.
    let exit_t = |cell: &[i64; 3], a: usize| -> f64 {
        match step[a] {
            0 => f64::INFINITY,
            s => {
                let boundary = g0[a] + (cell[a] + i64::from(s > 0)) as f64 * vs;
                (boundary - o[a]) / d[a]
            }
        }
    };
    let mut t = t_enter;
    loop {
        if t > ray.max_distance {
            return None;
        }
        let idx = VoxelIndex([cell[0] as usize, cell[1] as usize, cell[2] as usize]);
        if grid.is_occupied(idx) && !ignore.contains(&idx) {
            return Some(RayHit {
                index: idx,
                distance: t,
            });
        }
        let exits = [exit_t(&cell, 0), exit_t(&cell, 1), exit_t(&cell, 2)];
        let mut axis = 0;
        for a in 1..3 {
            if exits[a] < exits[axis] {
                axis = a;
            }
        }
        if !exits[axis].is_finite() {
            return None;
        }
        t = exits[axis].max(t);
        cell[axis] += step[axis];
        if cell[axis] < 0 || cell[axis] >= dims[axis] as i64 {
            return None;
        }
    }
}
