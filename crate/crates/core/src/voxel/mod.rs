//! Voxel-grid substrate: solid voxelization, surface extraction, normals and
//! exact grid ray casting.

mod grid;
mod mesh;
mod raycast;
mod surface;

pub(crate) use grid::GridHeader;
pub use grid::{VoxelGrid, VoxelIndex, FACE_OFFSETS};
pub use mesh::{voxelize_mesh, TriangleMesh};
pub use raycast::{ray_cast, Ray, RayHit, SURFACE_RAY_OFFSET};
pub use surface::{estimate_normals, is_surface, surface_voxels, NormalMap};
