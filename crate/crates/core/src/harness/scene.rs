use std::path::{Path, PathBuf};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::suite::SyntheticObject;
use crate::contacts::{DEFAULT_EPS_VOXELS, DEFAULT_MIN_PTS, DEFAULT_THRESHOLD};
use crate::ergonomics::{HumanModel, DEFAULT_ALPHA, DEFAULT_OBJECT_MASS};
use crate::error::{Error, Result};
use crate::grasping::{GripperModel, DEFAULT_LAMBDA};

/// Where the object's voxel grid comes from. Paths are relative to the scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectSource {
    Synthetic(SyntheticObject),
    Vgrid(PathBuf),
    Mesh {
        path: PathBuf,
        #[serde(default = "default_dims")]
        dims: usize,
        #[serde(default = "default_padding")]
        padding: f64,
    },
}

fn default_dims() -> usize {
    64
}

fn default_padding() -> f64 {
    0.05
}

/// Where one contact map comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactSpec {
    /// One of the hand-authored maps of a bundled object.
    Synthetic {
        object: SyntheticObject,
        variant: usize,
    },
    /// A `VCONTACT` file.
    File(PathBuf),
    /// The thickness heuristic applied to the object grid.
    Heuristic,
}

/// Receiver description; omitted fields scale with `height`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanSpec {
    pub height: Option<f64>,
    pub base_position: Option<[f64; 3]>,
    pub facing: Option<[f64; 3]>,
    pub shoulder_height_fraction: Option<f64>,
    pub waist_height_fraction: Option<f64>,
    pub upper_arm_length: Option<f64>,
    pub forearm_length: Option<f64>,
    pub upper_arm_mass: Option<f64>,
    pub forearm_mass: Option<f64>,
    pub hand_mass: Option<f64>,
    pub head_height: Option<f64>,
    pub arm_plane_offset: Option<f64>,
}

impl HumanSpec {
    pub fn build(&self) -> Result<HumanModel> {
        let mut h = HumanModel::with_height(self.height.unwrap_or(1.7));
        if let Some(p) = self.base_position {
            h.base_position = Point3::from(p);
        }
        if let Some(f) = self.facing {
            h.facing = Vector3::from(f);
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { h.$f = v; } )* };
        }
        take!(
            shoulder_height_fraction,
            waist_height_fraction,
            upper_arm_length,
            forearm_length,
            upper_arm_mass,
            forearm_mass,
            hand_mass,
            head_height,
            arm_plane_offset
        );
        h.validate()?;
        Ok(h)
    }
}

/// Robot placement and body proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotSpec {
    /// Distance from the human at which the robot picks the object up.
    pub start_distance: f64,
    /// Distance from the human to the robot base during the handover.
    pub standoff: f64,
    pub body_footprint: f64,
    pub body_height: f64,
    /// Gripper position relative to the base while carrying the object
    /// without planning: distance toward the human, and height.
    pub carry_forward: f64,
    pub carry_height: f64,
}

impl Default for RobotSpec {
    fn default() -> Self {
        RobotSpec {
            start_distance: 2.0,
            standoff: 1.2,
            body_footprint: 0.5,
            body_height: 1.1,
            carry_forward: 0.6,
            carry_height: 0.8,
        }
    }
}

/// Tunable parameters; each can be overridden by name with [`Params::set`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    pub alpha: f64,
    pub k: f64,
    /// Clustering radius, in voxel edges.
    pub eps: f64,
    pub min_pts: usize,
    pub orientation_granularity: u32,
    pub object_mass: f64,
    pub max_candidates: usize,
    pub pair_budget: usize,
    pub contact_threshold: f64,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            lambda: DEFAULT_LAMBDA,
            alpha: DEFAULT_ALPHA,
            k: 0.5,
            eps: DEFAULT_EPS_VOXELS,
            min_pts: DEFAULT_MIN_PTS,
            orientation_granularity: 45,
            object_mass: DEFAULT_OBJECT_MASS,
            max_candidates: 64,
            pair_budget: 384,
            contact_threshold: DEFAULT_THRESHOLD,
            seed: 0,
        }
    }
}

impl Params {
    pub const KEYS: [&'static str; 11] = [
        "lambda",
        "alpha",
        "k",
        "eps",
        "min_pts",
        "orientation_granularity",
        "object_mass",
        "max_candidates",
        "pair_budget",
        "contact_threshold",
        "seed",
    ];

    /// Overrides one parameter from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim().parse().map_err(|_| Error::InvalidParam {
                name: key.to_string(),
                message: format!("cannot parse {v:?}"),
            })
        }
        match key {
            "lambda" => self.lambda = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "min_pts" => self.min_pts = num(key, value)?,
            "orientation_granularity" | "granularity" => {
                self.orientation_granularity = num(key, value)?
            }
            "object_mass" => self.object_mass = num(key, value)?,
            "max_candidates" => self.max_candidates = num(key, value)?,
            "pair_budget" => self.pair_budget = num(key, value)?,
            "contact_threshold" => self.contact_threshold = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => {
                return Err(Error::Unknown {
                    kind: "parameter",
                    name: key.to_string(),
                })
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::param(name, "must be in [0, 1]"))
            }
        };
        unit("lambda", self.lambda)?;
        unit("alpha", self.alpha)?;
        unit("contact_threshold", self.contact_threshold)?;
        if !(self.k > 0.0 && self.k < 1.0) {
            return Err(Error::param("k", "must be in (0, 1)"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::param("eps", "must be finite and > 0"));
        }
        if self.min_pts == 0 {
            return Err(Error::param("min_pts", "must be >= 1"));
        }
        let g = self.orientation_granularity;
        if g == 0 || 360 % g != 0 {
            return Err(Error::InvalidGranularity(g));
        }
        if !(self.object_mass >= 0.0 && self.object_mass.is_finite()) {
            return Err(Error::param("object_mass", "must be finite and >= 0"));
        }
        if self.max_candidates == 0 || self.pair_budget == 0 {
            return Err(Error::param("max_candidates/pair_budget", "must be >= 1"));
        }
        Ok(())
    }
}

/// A handover scenario: object, contact maps, people, robot and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub name: String,
    pub object: ObjectSource,
    pub contact_maps: Vec<ContactSpec>,
    /// Index into `contact_maps` of the map used for planning.
    #[serde(default)]
    pub planning_map: usize,
    #[serde(default)]
    pub human: HumanSpec,
    #[serde(default)]
    pub robot: RobotSpec,
    #[serde(default)]
    pub gripper: GripperModel,
    #[serde(default)]
    pub params: Params,
    /// Directory relative paths are resolved against; set when loading.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::param("name", "must not be empty"));
        }
        if self.contact_maps.is_empty() {
            return Err(Error::EmptyInput("contact_maps"));
        }
        if self.planning_map >= self.contact_maps.len() {
            return Err(Error::param("planning_map", "index out of range"));
        }
        let r = &self.robot;
        if !(r.standoff > 0.0 && r.start_distance > 0.0) {
            return Err(Error::param(
                "robot",
                "standoff and start_distance must be > 0",
            ));
        }
        if !(r.body_footprint >= 0.0
            && r.body_height >= 0.0
            && r.carry_height.is_finite()
            && r.carry_forward.is_finite())
        {
            return Err(Error::param("robot", "invalid body or carry dimensions"));
        }
        self.gripper.validate()?;
        self.human.build()?;
        self.params.validate()
    }

    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut s: Scene = serde_json::from_str(text)?;
        s.base_dir = base_dir.into();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Scene::from_json(&text, dir)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
