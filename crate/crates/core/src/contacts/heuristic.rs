use std::collections::BTreeMap;
use std::path::PathBuf;

use super::map::{read_contact_map, ContactMap, DEFAULT_THRESHOLD};
use crate::error::Result;
use crate::voxel::{surface_voxels, VoxelGrid, VoxelIndex};

/// Anything that can produce a contact map for a grid: a file on disk, a
/// geometric predictor, or a hand-authored region.
pub trait ContactSource: Send + Sync {
    fn contact_map(&self, grid: &VoxelGrid, grid_id: &str) -> Result<ContactMap>;
}

/// Contact map read from a `VCONTACT` file.
#[derive(Debug, Clone)]
pub struct FileContacts(pub PathBuf);

impl ContactSource for FileContacts {
    fn contact_map(&self, grid: &VoxelGrid, grid_id: &str) -> Result<ContactMap> {
        read_contact_map(&self.0, grid, grid_id)
    }
}

/// Thin-part predictor; see [`predict_contacts_heuristic`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ThicknessHeuristic;

impl ContactSource for ThicknessHeuristic {
    fn contact_map(&self, grid: &VoxelGrid, grid_id: &str) -> Result<ContactMap> {
        predict_contacts_heuristic(grid, grid_id)
    }
}

/// Length of the occupied run through `idx` along `axis`.
pub fn run_length(grid: &VoxelGrid, idx: VoxelIndex, axis: usize) -> usize {
    let c = idx.0.map(|v| v as i64);
    let mut n = 1;
    for dir in [-1i64, 1] {
        let mut p = c;
        loop {
            p[axis] += dir;
            if !grid.is_occupied_at(p) {
                break;
            }
            n += 1;
        }
    }
    n
}

/// Local thickness: the shortest axis-aligned occupied run through `idx`.
pub fn thickness(grid: &VoxelGrid, idx: VoxelIndex) -> usize {
    (0..3).map(|a| run_length(grid, idx, a)).min().unwrap_or(0)
}

/// Contact probability per surface voxel, rising linearly as local
/// thickness falls from the thickest to the thinnest surface voxel. Grids
/// whose surface has a single thickness get probability 1 everywhere.
pub fn predict_contacts_heuristic(grid: &VoxelGrid, grid_id: &str) -> Result<ContactMap> {
    let surface = surface_voxels(grid);
    let t: Vec<usize> = surface.iter().map(|&s| thickness(grid, s)).collect();
    let (t_min, t_max) = match (t.iter().min(), t.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo as f64, hi as f64),
        _ => return ContactMap::new(grid_id, BTreeMap::new(), DEFAULT_THRESHOLD),
    };
    let values = surface
        .iter()
        .zip(&t)
        .map(|(&s, &ti)| {
            let p = if t_max > t_min {
                ((t_max - ti as f64) / (t_max - t_min)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            (s, p)
        })
        .collect();
    ContactMap::new(grid_id, values, DEFAULT_THRESHOLD)
}
