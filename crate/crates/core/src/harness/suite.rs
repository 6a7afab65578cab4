//! Bundled synthetic objects: voxelized tools with a graspable body and a
//! handle the receiver prefers to hold, each with three contact maps.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::scene::{ContactSpec, HumanSpec, ObjectSource, Params, RobotSpec, Scene};
use crate::contacts::ContactMap;
use crate::error::{Error, Result};
use crate::grasping::GripperModel;
use crate::voxel::{estimate_normals, surface_voxels, VoxelGrid};

pub const SUITE_DIMS: usize = 64;
pub const SUITE_VOXEL_SIZE: f64 = 0.004;
pub const MAPS_PER_OBJECT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticObject {
    Hammer,
    Pan,
    Mug,
    Knife,
    RodBall,
}

/// Point relative to the grid center, and the outward normal there.
type Region = fn(&Vector3<f64>, &Vector3<f64>, usize) -> bool;

fn cyl_x(p: &Vector3<f64>, x0: f64, x1: f64, r: f64) -> bool {
    p.x >= x0 && p.x <= x1 && p.y * p.y + p.z * p.z <= r * r
}

fn cuboid(p: &Vector3<f64>, lo: [f64; 3], hi: [f64; 3]) -> bool {
    (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a])
}

/// Length of handle, measured from its free end, covered by map `variant`.
fn grip_length(variant: usize) -> f64 {
    [0.008, 0.004, 0.012][variant]
}

impl SyntheticObject {
    pub const ALL: [SyntheticObject; 5] = [
        SyntheticObject::Hammer,
        SyntheticObject::Pan,
        SyntheticObject::Mug,
        SyntheticObject::Knife,
        SyntheticObject::RodBall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticObject::Hammer => "hammer",
            SyntheticObject::Pan => "pan",
            SyntheticObject::Mug => "mug",
            SyntheticObject::Knife => "knife",
            SyntheticObject::RodBall => "rod_ball",
        }
    }

    fn solid(self, p: &Vector3<f64>) -> bool {
        match self {
            SyntheticObject::Hammer => {
                cyl_x(p, -0.09, 0.062, 0.011)
                    || cuboid(p, [0.06, -0.045, -0.013], [0.088, 0.045, 0.013])
            }
            SyntheticObject::Pan => {
                let q = p - Vector3::new(-0.03, 0.0, 0.0);
                (q.x * q.x + q.y * q.y <= 0.065 * 0.065 && q.z.abs() <= 0.01)
                    || cuboid(p, [0.03, -0.009, -0.006], [0.11, 0.009, 0.006])
            }
            SyntheticObject::Mug => {
                let q = p - Vector3::new(-0.02, 0.0, 0.0);
                (q.x * q.x + q.y * q.y <= 0.035 * 0.035 && q.z.abs() <= 0.045)
                    || cuboid(p, [0.01, -0.007, 0.022], [0.047, 0.007, 0.034])
                    || cuboid(p, [0.01, -0.007, -0.034], [0.047, 0.007, -0.022])
                    || cuboid(p, [0.035, -0.007, -0.034], [0.047, 0.007, 0.034])
            }
            SyntheticObject::Knife => {
                cuboid(p, [-0.1, -0.012, -0.004], [0.02, 0.012, 0.004])
                    || cuboid(p, [0.02, -0.01, -0.008], [0.1, 0.01, 0.008])
            }
            SyntheticObject::RodBall => {
                (p - Vector3::new(-0.07, 0.0, 0.0)).norm() <= 0.028 || cyl_x(p, -0.07, 0.09, 0.008)
            }
        }
    }

    /// Whether a surface voxel at `p` with normal `n` belongs to map `variant`.
    /// Maps cover the free end of the handle; the mug's covers the outer
    /// side of its handle.
    fn region(self) -> Region {
        match self {
            SyntheticObject::Hammer => |p, _, v| p.x <= -0.09 + grip_length(v),
            SyntheticObject::Pan => |p, _, v| p.x >= 0.11 - grip_length(v),
            SyntheticObject::Mug => |p, n, v| {
                let h = [0.034, 0.026, 0.02][v];
                p.x >= 0.04 && p.z.abs() <= h && n.x >= 0.2
            },
            SyntheticObject::Knife => |p, _, v| p.x >= 0.1 - grip_length(v),
            SyntheticObject::RodBall => |p, _, v| p.x >= 0.09 - grip_length(v),
        }
    }

    /// Grid center in world coordinates.
    pub fn center() -> Point3<f64> {
        Point3::from(Vector3::repeat(0.5 * SUITE_DIMS as f64 * SUITE_VOXEL_SIZE))
    }

    pub fn grid(self) -> VoxelGrid {
        let c = Self::center();
        VoxelGrid::from_solid([SUITE_DIMS; 3], SUITE_VOXEL_SIZE, Point3::origin(), |p| {
            self.solid(&(p - c))
        })
        .expect("suite grid dimensions are valid")
    }

    pub fn map_id(self, variant: usize) -> String {
        format!("{}_{}", self.name(), variant)
    }

    /// Binary contact map `variant` (0..[`MAPS_PER_OBJECT`]) on `grid`,
    /// which must be this object's grid.
    pub fn contact_map(self, grid: &VoxelGrid, variant: usize) -> Result<ContactMap> {
        if variant >= MAPS_PER_OBJECT {
            return Err(Error::param(
                "variant",
                format!("must be < {MAPS_PER_OBJECT}"),
            ));
        }
        let surface = surface_voxels(grid);
        let normals = estimate_normals(grid, &surface);
        let c = Self::center();
        let region = self.region();
        let picked = surface
            .iter()
            .filter(|i| region(&(grid.center(**i) - c), &normals[*i], variant))
            .copied();
        let cm = ContactMap::from_indices(self.map_id(variant), picked);
        if cm.is_empty() {
            return Err(Error::EmptyContactMap);
        }
        Ok(cm)
    }

    pub fn contact_maps(self, grid: &VoxelGrid) -> Result<Vec<ContactMap>> {
        (0..MAPS_PER_OBJECT)
            .map(|v| self.contact_map(grid, v))
            .collect()
    }
}

/// Scene for a bundled object: all three maps, the first used for planning,
/// default people, robot and parameters.
pub fn bundled_scene(object: SyntheticObject) -> Scene {
    Scene {
        name: object.name().to_string(),
        object: ObjectSource::Synthetic(object),
        contact_maps: (0..MAPS_PER_OBJECT)
            .map(|variant| ContactSpec::Synthetic { object, variant })
            .collect(),
        planning_map: 0,
        human: HumanSpec::default(),
        robot: RobotSpec::default(),
        gripper: GripperModel::default(),
        params: Params::default(),
        base_dir: PathBuf::new(),
    }
}

pub fn bundled_scenes() -> Vec<Scene> {
    SyntheticObject::ALL
        .into_iter()
        .map(bundled_scene)
        .collect()
}

/// Writes each bundled object as `<name>.vgrid`, its maps as
/// `<name>_<variant>.vcontact` and a scene `<name>.json` that refers to those
/// files. Returns the scene paths.
pub fn write_suite(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for object in SyntheticObject::ALL {
        let grid = object.grid();
        let grid_file = format!("{}.vgrid", object.name());
        grid.write_vgrid(dir.join(&grid_file))?;
        let mut maps = Vec::new();
        for (v, cm) in object.contact_maps(&grid)?.iter().enumerate() {
            let name = format!("{}.vcontact", object.map_id(v));
            cm.to_file(&grid).write(dir.join(&name))?;
            maps.push(ContactSpec::File(PathBuf::from(name)));
        }
        let scene = Scene {
            object: ObjectSource::Vgrid(PathBuf::from(grid_file)),
            contact_maps: maps,
            ..bundled_scene(object)
        };
        let path = dir.join(format!("{}.json", object.name()));
        std::fs::write(&path, scene.to_json()?).map_err(|e| Error::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

impl fmt::Display for SyntheticObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticObject {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SyntheticObject::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "object",
                name: s.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn written_suite_matches_the_built_in_one() {
        let dir = std::env::temp_dir().join(format!("handover-suite-{}", std::process::id()));
        let paths = write_suite(&dir).unwrap();
        assert_eq!(paths.len(), SyntheticObject::ALL.len());
        let scene = Scene::load(&paths[0]).unwrap();
        let grid = VoxelGrid::read_vgrid(dir.join("hammer.vgrid")).unwrap();
        assert_eq!(grid, SyntheticObject::Hammer.grid());
        assert_eq!(scene.contact_maps.len(), MAPS_PER_OBJECT);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn names_round_trip() {
        for o in SyntheticObject::ALL {
            assert_eq!(o.name().parse::<SyntheticObject>().unwrap(), o);
            let json = serde_json::to_string(&o).unwrap();
            assert_eq!(json, format!("\"{}\"", o.name()));
        }
        assert!("spoon".parse::<SyntheticObject>().is_err());
    }

    #[test]
    fn every_object_has_three_surface_maps() {
        for o in SyntheticObject::ALL {
            let g = o.grid();
            assert!(g.occupied_count() > 500, "{o}");
            let maps = o.contact_maps(&g).unwrap();
            assert_eq!(maps.len(), MAPS_PER_OBJECT);
            for m in &maps {
                m.check_against(&g).unwrap();
                assert!(m.len() >= 8, "{} has {}", m.grid_id, m.len());
            }
        }
    }
}
