use std::collections::{BTreeSet, HashMap};

use nalgebra::{IsometryMatrix3, Point3, Translation3, Vector3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gripper::{GraspCandidate, GripperModel};
use crate::geometry::{any_perpendicular, rotation_from_axes, Aabb, Pose};
use crate::voxel::{NormalMap, VoxelGrid, VoxelIndex};

/// Grasps scoring below this confidence are discarded.
pub const MIN_CONFIDENCE: f64 = 0.23;
/// Largest angle between `n_p` and `-n_q` accepted for an antipodal pair.
pub const MAX_ANTIPODAL_ANGLE_DEG: f64 = 30.0;
/// Roll steps about the closing axis.
pub const ROLL_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub max_candidates: usize,
    pub seed: u64,
    /// Number of surface voxels tried as the first finger contact.
    pub pair_budget: usize,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            max_candidates: 64,
            seed: 0,
            pair_budget: 384,
        }
    }
}

/// Alignment confidence of closing on `p` and `q`: the mean cosine between
/// each outward normal and the direction pointing away from the other contact.
pub fn antipodal_confidence(
    cp: &Point3<f64>,
    np: &Vector3<f64>,
    cq: &Point3<f64>,
    nq: &Vector3<f64>,
) -> f64 {
    let d = cq - cp;
    let len = d.norm();
    if len == 0.0 {
        return 0.0;
    }
    let u = d / len;
    (0.5 * np.dot(&-u) + 0.5 * nq.dot(&u)).clamp(0.0, 1.0)
}

/// Gripper pose closing on `cp`/`cq` with the approach axis rolled by `roll` radians.
pub fn pair_pose(cp: &Point3<f64>, cq: &Point3<f64>, roll: f64) -> Pose {
    let x = (cq - cp).normalize();
    let a0 = any_perpendicular(&x);
    let approach = a0 * roll.cos() + x.cross(&a0) * roll.sin();
    let z = -approach;
    let y = z.cross(&x);
    let mid = Point3::from((cp.coords + cq.coords) * 0.5);
    IsometryMatrix3::from_parts(Translation3::from(mid.coords), rotation_from_axes(x, y, z))
}

/// Occupied voxels whose centers fall in a gripper box (closing region excluded).
pub fn colliding_voxels(
    grid: &VoxelGrid,
    gripper: &GripperModel,
    pose: &Pose,
    width: f64,
) -> Vec<VoxelIndex> {
    let mut out = BTreeSet::new();
    for_each_collision(grid, gripper, pose, width, |i| {
        out.insert(i);
        true
    });
    out.into_iter().collect()
}

pub fn in_collision(grid: &VoxelGrid, gripper: &GripperModel, pose: &Pose, width: f64) -> bool {
    let mut hit = false;
    for_each_collision(grid, gripper, pose, width, |_| {
        hit = true;
        false
    });
    hit
}

/// Calls `f` for every colliding voxel until it returns false.
fn for_each_collision(
    grid: &VoxelGrid,
    gripper: &GripperModel,
    pose: &Pose,
    width: f64,
    mut f: impl FnMut(VoxelIndex) -> bool,
) {
    let closing = gripper.closing_region(width);
    for b in gripper.posed_boxes(pose, width) {
        let Some((lo, hi)) = index_range(grid, &b.world_aabb()) else {
            continue;
        };
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    let i = VoxelIndex::new(x, y, z);
                    if !grid.is_occupied(i) {
                        continue;
                    }
                    let c = grid.center(i);
                    let local = pose.inverse_transform_point(&c);
                    if b.local.contains(&local) && !closing.contains(&local) && !f(i) {
                        return;
                    }
                }
            }
        }
    }
}

/// Inclusive index range of voxels whose centers may lie in `b`.
fn index_range(grid: &VoxelGrid, b: &Aabb) -> Option<([usize; 3], [usize; 3])> {
    let dims = grid.dims();
    let vs = grid.voxel_size();
    let o = grid.origin();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        let l = ((b.min[a] - o[a]) / vs - 0.5).floor().max(0.0);
        let h = ((b.max[a] - o[a]) / vs - 0.5).ceil();
        if h < 0.0 || l > (dims[a] - 1) as f64 {
            return None;
        }
        lo[a] = l as usize;
        hi[a] = (h as usize).min(dims[a] - 1);
    }
    Some((lo, hi))
}

/// Antipodal grasp sampler standing in for a learned grasp predictor.
///
/// Up to `pair_budget` surface voxels, drawn in seeded order, each pick the
/// best-aligned partner within `max_width`. Every accepted pair is tried at
/// [`ROLL_STEPS`] rolls; collision-free poses with confidence at least
/// [`MIN_CONFIDENCE`] are kept, best first, ties by draw order then roll.
pub fn sample_grasps(
    grid: &VoxelGrid,
    normals: &NormalMap,
    gripper: &GripperModel,
    params: &SamplerParams,
) -> Vec<GraspCandidate> {
    let surface: Vec<VoxelIndex> = normals.keys().copied().collect();
    if surface.len() < 2 || params.max_candidates == 0 {
        return Vec::new();
    }
    let vs = grid.voxel_size();
    let cell_w = gripper.max_width.max(vs);
    let cell = |p: &Point3<f64>| {
        (
            (p.x / cell_w).floor() as i64,
            (p.y / cell_w).floor() as i64,
            (p.z / cell_w).floor() as i64,
        )
    };
    let mut buckets: HashMap<(i64, i64, i64), Vec<VoxelIndex>> = HashMap::new();
    for &s in &surface {
        buckets.entry(cell(&grid.center(s))).or_default().push(s);
    }
    let cos_max = MAX_ANTIPODAL_ANGLE_DEG.to_radians().cos();

    let mut order = surface.clone();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    order.truncate(params.pair_budget.max(1));

    let best_partner = |p: VoxelIndex| -> Option<(VoxelIndex, f64)> {
        let cp = grid.center(p);
        let np = normals[&p];
        let (cx, cy, cz) = cell(&cp);
        let mut best: Option<(VoxelIndex, f64)> = None;
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let Some(b) = buckets.get(&(cx + dx, cy + dy, cz + dz)) else {
                        continue;
                    };
                    for &q in b {
                        let cq = grid.center(q);
                        let d = (cq - cp).norm();
                        if q == p || d > gripper.max_width {
                            continue;
                        }
                        let nq = normals[&q];
                        if np.dot(&-nq) < cos_max {
                            continue;
                        }
                        let s = antipodal_confidence(&cp, &np, &cq, &nq);
                        let better = match best {
                            None => true,
                            Some((bq, bs)) => s > bs || (s == bs && q < bq),
                        };
                        if better {
                            best = Some((q, s));
                        }
                    }
                }
            }
        }
        best
    };

    let mut pairs: BTreeSet<(VoxelIndex, VoxelIndex)> = BTreeSet::new();
    let mut scored: Vec<(VoxelIndex, VoxelIndex, f64, usize)> = Vec::new();
    for (draw, (p, found)) in order.iter().map(|&p| (p, best_partner(p))).enumerate() {
        if let Some((q, s)) = found {
            if s >= MIN_CONFIDENCE && pairs.insert((p.min(q), p.max(q))) {
                scored.push((p.min(q), p.max(q), s, draw));
            }
        }
    }

    let mut out: Vec<(GraspCandidate, usize, usize)> = scored
        .par_iter()
        .flat_map_iter(|&(p, q, s, draw)| {
            let (cp, cq) = (grid.center(p), grid.center(q));
            let width = ((cq - cp).norm() + vs).min(gripper.max_width);
            (0..ROLL_STEPS).filter_map(move |k| {
                let roll = k as f64 * std::f64::consts::TAU / ROLL_STEPS as f64;
                let pose = pair_pose(&cp, &cq, roll);
                if in_collision(grid, gripper, &pose, width) {
                    return None;
                }
                Some((
                    GraspCandidate {
                        pose,
                        width,
                        confidence: s,
                        contact_pair: (p, q),
                    },
                    draw,
                    k,
                ))
            })
        })
        .collect();
    out.sort_by(|(a, da, ka), (b, db, kb)| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(da.cmp(db))
            .then(ka.cmp(kb))
    });
    out.truncate(params.max_candidates);
    out.into_iter().map(|(g, _, _)| g).collect()
}
