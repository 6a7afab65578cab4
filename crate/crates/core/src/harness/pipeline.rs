use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{IsometryMatrix3, Point3, Translation3};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scene::{ContactSpec, ObjectSource, Scene};
use crate::contacts::{
    cluster_contacts, largest_cluster, predict_contacts_heuristic, read_contact_map,
    ContactCluster, ContactMap,
};
use crate::delivery::{
    delivery_frame, evaluate_orientations, pose_for_sample, sample_orientations,
    select_orientation, DeliveryContext, FeasibilityParams, HandoverPose, OrientationCandidate,
};
use crate::ergonomics::{plan_handover_position, ErgonomicCandidate, HandoverPosition, HumanModel};
use crate::error::{Error, Result};
use crate::geometry::UP;
use crate::grasping::{
    rank_grasps, sample_grasps, GripperModel, OcclusionContext, RankedGrasp, SamplerParams,
};
use crate::metrics::{evaluate, robot_body_proxy, EvalParams, EvalScene, MetricScores};
use crate::voxel::{
    estimate_normals, surface_voxels, voxelize_mesh, NormalMap, TriangleMesh, VoxelGrid, VoxelIndex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AblationMode {
    #[serde(rename = "FULL")]
    Full,
    A1,
    A2,
    A3,
    A4,
}

impl AblationMode {
    pub const ALL: [AblationMode; 5] = [
        AblationMode::Full,
        AblationMode::A1,
        AblationMode::A2,
        AblationMode::A3,
        AblationMode::A4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationMode::Full => "FULL",
            AblationMode::A1 => "A1",
            AblationMode::A2 => "A2",
            AblationMode::A3 => "A3",
            AblationMode::A4 => "A4",
        }
    }

    /// Ranking weight used in this mode: modes without re-ranking use 1.
    pub fn lambda(self, configured: f64) -> f64 {
        match self {
            AblationMode::Full | AblationMode::A2 => configured,
            _ => 1.0,
        }
    }

    pub fn plans_position(self) -> bool {
        self != AblationMode::A4
    }

    pub fn random_orientation(self) -> bool {
        matches!(self, AblationMode::A2 | AblationMode::A3)
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AblationMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "mode",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Object,
    Contacts,
    Clustering,
    GraspSampling,
    GraspRanking,
    Position,
    Orientation,
    Placement,
    Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Object => "object",
            Stage::Contacts => "contacts",
            Stage::Clustering => "clustering",
            Stage::GraspSampling => "grasp_sampling",
            Stage::GraspRanking => "grasp_ranking",
            Stage::Position => "position",
            Stage::Orientation => "orientation",
            Stage::Placement => "placement",
            Stage::Metrics => "metrics",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for StageFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

/// The chosen handover point and the ergonomic scores of the winning arm configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionSummary {
    pub position: Point3<f64>,
    pub winner: ErgonomicCandidate,
    pub torque_max: f64,
    pub disp_max: f64,
    pub alpha: f64,
    pub feasible_configs: usize,
}

impl From<&HandoverPosition> for PositionSummary {
    fn from(p: &HandoverPosition) -> Self {
        PositionSummary {
            position: p.position,
            winner: p.winner,
            torque_max: p.torque_max,
            disp_max: p.disp_max,
            alpha: p.alpha,
            feasible_configs: p.candidates.len(),
        }
    }
}

/// Outcome of one pipeline run. Serialization omits the wall-clock duration
/// so reports from identical inputs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoverReport {
    pub scene: String,
    pub mode: AblationMode,
    pub seed: u64,
    pub lambda: f64,
    pub k: f64,
    pub stages: Vec<Stage>,
    pub failure: Option<StageFailure>,
    pub grasp: Option<RankedGrasp>,
    pub position: Option<PositionSummary>,
    pub handover: Option<HandoverPose>,
    pub robot_base: Point3<f64>,
    pub metrics: Option<MetricScores>,
    pub success: bool,
    #[serde(skip)]
    pub duration: Duration,
}

impl HandoverReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn file_name(&self) -> String {
        report_file_name(&self.scene, self.mode, self.seed)
    }

    /// One-line summary: `mode=<m> seed=<s> vis=<v> reach=<r> success=<bool>`.
    pub fn summary_line(&self) -> String {
        let (v, r) = self
            .metrics
            .as_ref()
            .map_or((0.0, 0.0), |m| (m.median_visibility, m.median_reachability));
        format!(
            "mode={} seed={} vis={v:.3} reach={r:.3} success={}",
            self.mode, self.seed, self.success
        )
    }
}

pub fn report_file_name(scene: &str, mode: AblationMode, seed: u64) -> String {
    format!("report_{scene}_{mode}_{seed}.json")
}

/// Intermediate results kept for plotting; not part of the report.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub position: Option<HandoverPosition>,
    pub orientations: Option<Vec<OrientationCandidate>>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: HandoverReport,
    pub diagnostics: Diagnostics,
}

/// A scene with its object grid, surface normals and contact maps loaded.
#[derive(Debug, Clone)]
pub struct PreparedScene {
    pub scene: Scene,
    pub grid: VoxelGrid,
    pub surface: Vec<VoxelIndex>,
    pub normals: NormalMap,
    /// `(map id, map)` in scene order.
    pub maps: Vec<(String, ContactMap)>,
    pub human: HumanModel,
}

fn load_grid(scene: &Scene) -> Result<VoxelGrid> {
    match &scene.object {
        ObjectSource::Synthetic(o) => Ok(o.grid()),
        ObjectSource::Vgrid(p) => VoxelGrid::read_vgrid(scene.resolve(p)),
        ObjectSource::Mesh {
            path,
            dims,
            padding,
        } => voxelize_mesh(
            &TriangleMesh::read_obj(scene.resolve(path))?,
            [*dims; 3],
            *padding,
        ),
    }
}

fn load_maps(scene: &Scene, grid: &VoxelGrid) -> Result<Vec<(String, ContactMap)>> {
    let mut out = Vec::with_capacity(scene.contact_maps.len());
    for (i, spec) in scene.contact_maps.iter().enumerate() {
        let fallback = format!("{}_{i}", scene.name);
        let cm = match spec {
            ContactSpec::Synthetic { object, variant } => object.contact_map(grid, *variant)?,
            ContactSpec::File(p) => {
                let id = p
                    .file_stem()
                    .map_or(fallback.clone(), |s| s.to_string_lossy().into_owned());
                read_contact_map(scene.resolve(p), grid, &id)?
            }
            ContactSpec::Heuristic => predict_contacts_heuristic(grid, &fallback)?,
        };
        let cm = cm.with_threshold(scene.params.contact_threshold)?;
        let id = if cm.grid_id.is_empty() {
            fallback
        } else {
            cm.grid_id.clone()
        };
        out.push((id, cm));
    }
    Ok(out)
}

impl PreparedScene {
    /// Loads everything the runs share. Errors carry the stage that failed.
    pub fn new(scene: &Scene) -> std::result::Result<Self, StageFailure> {
        let fail = |stage| {
            move |e: Error| StageFailure {
                stage,
                message: e.to_string(),
            }
        };
        scene.validate().map_err(fail(Stage::Object))?;
        let grid = load_grid(scene).map_err(fail(Stage::Object))?;
        if grid.is_empty() {
            return Err(fail(Stage::Object)(Error::EmptyInput("object grid")));
        }
        let maps = load_maps(scene, &grid).map_err(fail(Stage::Contacts))?;
        let surface = surface_voxels(&grid);
        let normals = estimate_normals(&grid, &surface);
        let human = scene.human.build().map_err(fail(Stage::Object))?;
        Ok(PreparedScene {
            scene: scene.clone(),
            grid,
            surface,
            normals,
            maps,
            human,
        })
    }

    /// Robot base during the handover: `standoff` in front of the human.
    pub fn robot_base(&self) -> Point3<f64> {
        let f = self.human.facing_unit();
        let b = self.human.base_position + f * self.scene.robot.standoff;
        Point3::new(b.x, b.y, self.human.base_position.z)
    }

    /// Largest cluster of the designated planning map.
    pub fn planning_cluster(&self) -> Result<ContactCluster> {
        let p = &self.scene.params;
        let (_, cm) = &self.maps[self.scene.planning_map];
        let clusters = cluster_contacts(cm, &self.grid, p.eps * self.grid.voxel_size(), p.min_pts)?;
        largest_cluster(&clusters).cloned()
    }

    /// Gripper pose while carrying the object without planning: the grasp
    /// orientation seen from the robot, at the carry offset in front of the base.
    pub fn carry_pose(&self, grasp: &RankedGrasp) -> Result<crate::geometry::Pose> {
        let base = self.robot_base();
        let frame = delivery_frame(&self.human, &base)?;
        let r = &self.scene.robot;
        let at = base + frame * nalgebra::Vector3::x() * r.carry_forward + UP * r.carry_height;
        Ok(IsometryMatrix3::from_parts(
            Translation3::from(at.coords),
            frame * grasp.candidate.pose.rotation,
        ))
    }

    /// Sampled grasps ranked against the planning cluster, best first.
    pub fn ranked_grasps(&self, lambda: f64, seed: u64) -> Result<Vec<RankedGrasp>> {
        let p = &self.scene.params;
        let gripper = &self.scene.gripper;
        let cluster = self.planning_cluster()?;
        let sampler = SamplerParams {
            max_candidates: p.max_candidates,
            seed,
            pair_budget: p.pair_budget,
        };
        let candidates = sample_grasps(&self.grid, &self.normals, gripper, &sampler);
        let occ = OcclusionContext {
            grid: &self.grid,
            normals: &self.normals,
            gripper,
        };
        rank_grasps(candidates, &cluster, lambda, &occ)
    }

    pub fn run(&self, mode: AblationMode, seed: u64) -> HandoverReport {
        self.run_detailed(mode, seed).report
    }

    pub fn run_detailed(&self, mode: AblationMode, seed: u64) -> PipelineRun {
        let start = Instant::now();
        let p = &self.scene.params;
        let mut report = HandoverReport {
            scene: self.scene.name.clone(),
            mode,
            seed,
            lambda: mode.lambda(p.lambda),
            k: p.k,
            stages: vec![Stage::Object, Stage::Contacts],
            failure: None,
            grasp: None,
            position: None,
            handover: None,
            robot_base: self.robot_base(),
            metrics: None,
            success: false,
            duration: Duration::ZERO,
        };
        let mut diagnostics = Diagnostics::default();
        if let Err(failure) = self.execute(mode, seed, &mut report, &mut diagnostics) {
            report.failure = Some(failure);
            report.success = false;
        }
        report.duration = start.elapsed();
        PipelineRun {
            report,
            diagnostics,
        }
    }

    fn execute(
        &self,
        mode: AblationMode,
        seed: u64,
        report: &mut HandoverReport,
        diag: &mut Diagnostics,
    ) -> std::result::Result<(), StageFailure> {
        let p = self.scene.params;
        let gripper: &GripperModel = &self.scene.gripper;

        let fail = step(Stage::Clustering, report);
        let cluster = self.planning_cluster().map_err(fail)?;

        let fail = step(Stage::GraspSampling, report);
        let sampler = SamplerParams {
            max_candidates: p.max_candidates,
            seed,
            pair_budget: p.pair_budget,
        };
        let candidates = sample_grasps(&self.grid, &self.normals, gripper, &sampler);
        if candidates.is_empty() {
            return Err(fail(Error::NoGraspCandidates));
        }

        let fail = step(Stage::GraspRanking, report);
        let occ = OcclusionContext {
            grid: &self.grid,
            normals: &self.normals,
            gripper,
        };
        let ranked = rank_grasps(candidates, &cluster, report.lambda, &occ).map_err(fail)?;
        let grasp = ranked
            .into_iter()
            .next()
            .expect("ranking of a nonempty list");
        report.grasp = Some(grasp.clone());

        let robot_base = report.robot_base;
        let handover = if mode.plans_position() {
            let fail = step(Stage::Position, report);
            let position =
                plan_handover_position(&self.human, p.object_mass, p.alpha).map_err(fail)?;
            report.position = Some(PositionSummary::from(&position));

            let fail = step(Stage::Orientation, report);
            let ctx = DeliveryContext {
                grid: &self.grid,
                surface: &self.surface,
                gripper,
                grasp: &grasp.candidate,
                human: &self.human,
                robot_base,
                ee_position: position.position,
                params: FeasibilityParams::default(),
            };
            diag.position = Some(position);
            let rotations = sample_orientations(p.orientation_granularity).map_err(fail)?;
            let cands = evaluate_orientations(&ctx, &cluster, &rotations).map_err(fail)?;
            let index = if mode.random_orientation() {
                let feasible: Vec<usize> = cands
                    .iter()
                    .filter(|c| c.feasible())
                    .map(|c| c.index)
                    .collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                *feasible
                    .choose(&mut rng)
                    .ok_or_else(|| fail(Error::NoFeasibleOrientation))?
            } else {
                select_orientation(&cands).map_err(fail)?.index
            };
            let pose = pose_for_sample(&ctx, &grasp, &cands, index).map_err(fail)?;
            diag.orientations = Some(cands);
            pose
        } else {
            let fail = step(Stage::Placement, report);
            HandoverPose::from_gripper_pose(&grasp, self.carry_pose(&grasp).map_err(fail)?)
        };
        report.handover = Some(handover.clone());

        let fail = step(Stage::Metrics, report);
        let eval = EvalParams {
            success_threshold: p.k,
            robot_body_footprint: self.scene.robot.body_footprint,
            robot_body_height: self.scene.robot.body_height,
        };
        let scene = EvalScene {
            grid: &self.grid,
            object_pose: handover.object_pose,
            gripper,
            gripper_pose: handover.gripper_pose,
            gripper_width: grasp.candidate.width,
            human: &self.human,
            robot_body: Some(robot_body_proxy(&robot_base, &eval)),
        };
        let scores = evaluate(&scene, &self.maps, &eval, false).map_err(fail)?;
        report.success = scores.success;
        report.metrics = Some(scores);
        Ok(())
    }
}

/// Runs one scene end to end. Loading failures are reported like any other
/// stage failure.
pub fn run_pipeline(scene: &Scene, mode: AblationMode, seed: u64) -> HandoverReport {
    match PreparedScene::new(scene) {
        Ok(prepared) => prepared.run(mode, seed),
        Err(failure) => failed_report(scene, mode, seed, failure),
    }
}

/// Report for a run whose scene could not be loaded.
pub fn failed_report(
    scene: &Scene,
    mode: AblationMode,
    seed: u64,
    failure: StageFailure,
) -> HandoverReport {
    let stages = match failure.stage {
        Stage::Object => vec![Stage::Object],
        _ => vec![Stage::Object, failure.stage],
    };
    HandoverReport {
        scene: scene.name.clone(),
        mode,
        seed,
        lambda: mode.lambda(scene.params.lambda),
        k: scene.params.k,
        stages,
        failure: Some(failure),
        grasp: None,
        position: None,
        handover: None,
        robot_base: Point3::origin(),
        metrics: None,
        success: false,
        duration: Duration::ZERO,
    }
}

/// Records `stage` as entered and returns a mapper labeling its errors.
fn step(stage: Stage, report: &mut HandoverReport) -> impl Fn(Error) -> StageFailure + Copy {
    report.stages.push(stage);
    move |e: Error| StageFailure {
        stage,
        message: e.to_string(),
    }
}
