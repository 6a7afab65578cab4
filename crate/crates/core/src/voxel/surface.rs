use std::collections::BTreeMap;

use nalgebra::Vector3;

use super::grid::{VoxelGrid, VoxelIndex, FACE_OFFSETS};

/// Outward unit normal per surface voxel.
pub type NormalMap = BTreeMap<VoxelIndex, Vector3<f64>>;

/// Occupied voxels with at least one empty face neighbor (outside the grid
/// counts as empty), in ascending index order.
pub fn surface_voxels(grid: &VoxelGrid) -> Vec<VoxelIndex> {
    let mut out: Vec<VoxelIndex> = grid
        .occupied()
        .filter(|idx| is_surface(grid, *idx))
        .collect();
    out.sort_unstable();
    out
}

pub fn is_surface(grid: &VoxelGrid, idx: VoxelIndex) -> bool {
    if !grid.is_occupied(idx) {
        return false;
    }
    let c = idx.0.map(|v| v as i64);
    FACE_OFFSETS
        .iter()
        .any(|d| !grid.is_occupied_at([c[0] + d[0], c[1] + d[1], c[2] + d[2]]))
}

/// Outward normals from the local occupancy gradient.
///
/// The normal is the negated mean offset to occupied 26-neighbors. When that
/// sum vanishes (isolated or perfectly balanced voxels) the direction from
/// the occupied centroid to the voxel center is used instead, and +z if the
/// voxel sits exactly on the centroid.
pub fn estimate_normals(grid: &VoxelGrid, surface: &[VoxelIndex]) -> NormalMap {
    let centroid = grid.occupied_centroid();
    surface
        .iter()
        .map(|&idx| {
            let c = idx.0.map(|v| v as i64);
            let mut g = Vector3::<f64>::zeros();
            for dz in -1..=1i64 {
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        if (dx, dy, dz) == (0, 0, 0) {
                            continue;
                        }
                        if grid.is_occupied_at([c[0] + dx, c[1] + dy, c[2] + dz]) {
                            g += Vector3::new(dx as f64, dy as f64, dz as f64);
                        }
                    }
                }
            }
            let n = if g.norm() > 1e-9 {
                -g.normalize()
            } else {
                let away = centroid
                    .map(|m| grid.center(idx) - m)
                    .unwrap_or_else(Vector3::zeros);
                if away.norm() > 1e-12 {
                    away.normalize()
                } else {
                    Vector3::z()
                }
            };
            (idx, n)
        })
        .collect()
}
