//! Independent oracles used by the integration and acceptance tests. Nothing
//! here calls into the implementation paths it checks; only plain data
//! types are shared.
#![allow(dead_code)]

use std::collections::BTreeSet;

use handover::ergonomics::{HumanModel, GRAVITY};
use handover::grasping::{GraspCandidate, GripperModel};
use handover::metrics::EvalScene;
use handover::voxel::{NormalMap, VoxelGrid, VoxelIndex, SURFACE_RAY_OFFSET};
use nalgebra::{Matrix3, Point3, Rotation3, Vector2, Vector3};

/// Quadratic DBSCAN: core points from all-pairs distances, clusters from
/// union-find over core-core pairs, each border point attached to the
/// cluster whose smallest core index is lowest.
pub fn reference_dbscan(points: &[Point3<f64>], eps: f64, min_pts: usize) -> Vec<BTreeSet<usize>> {
    let n = points.len();
    let near = |i: usize, j: usize| (points[i] - points[j]).norm_squared() <= eps * eps;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts)
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut k = i;
        while p[k] != r {
            let nx = p[k];
            p[k] = r;
            k = nx;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if core[i] && core[j] && near(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    // component root -> smallest core index in it
    let mut comp_min = vec![usize::MAX; n];
    for i in 0..n {
        if core[i] {
            let r = find(&mut parent, i);
            comp_min[r] = comp_min[r].min(i);
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, BTreeSet<usize>> = Default::default();
    for i in 0..n {
        if core[i] {
            let r = find(&mut parent, i);
            clusters.entry(comp_min[r]).or_default().insert(i);
        } else {
            let owner = (0..n)
                .filter(|&j| core[j] && near(i, j))
                .map(|j| {
                    let r = find(&mut parent, j);
                    comp_min[r]
                })
                .min();
            if let Some(o) = owner {
                clusters.entry(o).or_default().insert(i);
            }
        }
    }
    clusters.into_values().collect()
}

/// Walks a segment in steps of `step` and reports whether any sample
/// satisfies `inside`.
pub fn march_hits(
    origin: Point3<f64>,
    dir: Vector3<f64>,
    length: f64,
    step: f64,
    inside: impl Fn(&Point3<f64>) -> bool,
) -> bool {
    let n = (length / step).ceil() as usize;
    (0..=n).any(|k| inside(&(origin + dir * (length * k as f64 / n.max(1) as f64))))
}

/// Axis-aligned box as (min, max) corner arrays.
pub type LocalBox = ([f64; 3], [f64; 3]);

/// Gripper boxes written out from the gripper's documented layout: fingers
/// of square cross-section `t` flanking an opening `w` and spanning `l`
/// along the approach axis, with a palm bridge of depth `palm` behind them.
/// Returns (left finger, right finger, palm, closing region).
pub fn gripper_layout(l: f64, t: f64, palm: f64, w: f64) -> [LocalBox; 4] {
    let (h, y, z) = (w / 2.0, t / 2.0, l / 2.0);
    [
        ([-h - t, -y, -z], [-h, y, z]),
        ([h, -y, -z], [h + t, y, z]),
        ([-h - t, -y, z], [h + t, y, z + palm]),
        ([-h, -y, -z], [h, y, z]),
    ]
}

pub fn in_local_box(b: &LocalBox, p: &[f64; 3]) -> bool {
    (0..3).all(|a| p[a] >= b.0[a] && p[a] <= b.1[a])
}

/// World point expressed in the frame with rotation columns `axes` and origin `o`.
pub fn to_local(axes: &nalgebra::Matrix3<f64>, o: &Point3<f64>, p: &Point3<f64>) -> [f64; 3] {
    let d = p - o;
    [
        axes.column(0).dot(&d),
        axes.column(1).dot(&d),
        axes.column(2).dot(&d),
    ]
}

/// Homogeneous 4x4 matrix from a rotation and translation.
pub fn homogeneous(r: &nalgebra::Matrix3<f64>, t: &Vector3<f64>) -> nalgebra::Matrix4<f64> {
    let mut m = nalgebra::Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(t);
    m
}

pub fn apply(m: &nalgebra::Matrix4<f64>, p: &Point3<f64>) -> Point3<f64> {
    let v = m * nalgebra::Vector4::new(p.x, p.y, p.z, 1.0);
    Point3::new(v.x, v.y, v.z)
}

/// Parameter at which the segment `o + t d`, `t in [0, len]`, first touches
/// the box, by clipping against each pair of slab planes.
pub fn segment_box_entry(o: &[f64; 3], d: &[f64; 3], b: &LocalBox, len: f64) -> Option<f64> {
    let (mut lo, mut hi) = (0.0f64, len);
    for a in 0..3 {
        if d[a].abs() < 1e-300 {
            if o[a] < b.0[a] || o[a] > b.1[a] {
                return None;
            }
        } else {
            let t1 = (b.0[a] - o[a]) / d[a];
            let t2 = (b.1[a] - o[a]) / d[a];
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
    }
    (lo <= hi).then_some(lo)
}

/// Lattice of points on a box's faces: each axis split into
/// `ceil(extent / pitch)` (at least one) equal steps.
pub fn box_face_lattice(b: &LocalBox, pitch: f64) -> Vec<[f64; 3]> {
    let n: [usize; 3] =
        std::array::from_fn(|a| (((b.1[a] - b.0[a]) / pitch).ceil() as usize).max(1));
    let c = |a: usize, i: usize| b.0[a] + (b.1[a] - b.0[a]) * i as f64 / n[a] as f64;
    let mut out = Vec::new();
    for i in 0..=n[0] {
        for j in 0..=n[1] {
            for k in 0..=n[2] {
                if i == 0 || j == 0 || k == 0 || i == n[0] || j == n[1] || k == n[2] {
                    out.push([c(0, i), c(1, j), c(2, k)]);
                }
            }
        }
    }
    out
}

/// Arm points in the sagittal plane as (forward, up) vectors, built by
/// rotating the hanging-arm direction.
pub fn oracle_points(h: &HumanModel, s_deg: f64, e_deg: f64) -> [Vector2<f64>; 2] {
    let rot = |deg: f64| nalgebra::Rotation2::new(deg.to_radians());
    // hanging direction (0, -1); a forward raise turns it toward (1, 0)
    let down = Vector2::new(0.0, -1.0);
    let upper_dir = rot(s_deg) * down;
    let fore_dir = rot(s_deg + e_deg) * down;
    let elbow = upper_dir * h.upper_arm_length;
    let hand = elbow + fore_dir * h.forearm_length;
    [elbow, hand]
}

/// Gravity moments from explicit point masses; positive rotation lowers the
/// forward component so rotating (0,-1) by +θ must give (sin θ, -cos θ).
pub fn oracle_torques(h: &HumanModel, s_deg: f64, e_deg: f64, object: f64) -> (f64, f64) {
    let [elbow, hand] = oracle_points(h, s_deg, e_deg);
    let masses = [
        (h.upper_arm_mass, elbow * 0.5),
        (h.forearm_mass, (elbow + hand) * 0.5),
        (h.hand_mass + object, hand),
    ];
    let shoulder: f64 = masses.iter().map(|(m, p)| m * GRAVITY * p.x).sum();
    let elbow_t: f64 = masses[1..]
        .iter()
        .map(|(m, p)| m * GRAVITY * (p.x - elbow.x))
        .sum();
    (shoulder.abs(), elbow_t.abs())
}

/// Exhaustive search over the 5° grid with the oracle's kinematics and
/// torques. Returns the winning (shoulder, elbow) angles and the number of
/// configurations kept.
pub fn exhaustive_position(h: &HumanModel, mass: f64, alpha: f64) -> (f64, f64, usize) {
    let shoulder_z = h.base_position.z + h.shoulder_height_fraction * h.height;
    let waist_z = h.base_position.z + h.waist_height_fraction * h.height;
    let mut kept = Vec::new();
    for i in 0..=27 {
        for j in 0..=28 {
            let (s, e) = (5.0 * i as f64, 5.0 * j as f64);
            let [_, hand] = oracle_points(h, s, e);
            let z = shoulder_z + hand.y;
            if z > waist_z && z < shoulder_z {
                let (ts, te) = oracle_torques(h, s, e, mass);
                kept.push((
                    s,
                    e,
                    ts * ts + te * te,
                    (67.5 - s).powi(2) + (62.5 - e).powi(2),
                ));
            }
        }
    }
    let tmax = kept.iter().map(|k| k.2).fold(0.0, f64::max);
    let dmax = kept.iter().map(|k| k.3).fold(0.0, f64::max);
    let best = kept
        .iter()
        .map(|&(s, e, t, d)| {
            let (ft, fd) = (t / tmax, d / dmax);
            ((1.0 - alpha) * ft + alpha * fd, ft, s, e)
        })
        .min_by(|a, b| a.partial_cmp(b).unwrap())
        .unwrap();
    (best.2, best.3, kept.len())
}

/// March along the offset normal ray and test points against the gripper
/// boxes; containment in the closing region also counts.
pub fn oracle_blocked(
    grid: &VoxelGrid,
    normals: &NormalMap,
    gr: &GripperModel,
    g: &GraspCandidate,
    i: VoxelIndex,
) -> bool {
    let boxes = gripper_layout(
        gr.finger_length,
        gr.finger_thickness,
        gr.palm_depth,
        g.width,
    );
    let axes = *g.pose.rotation.matrix();
    let o = Point3::from(g.pose.translation.vector);
    let c = grid.center(i);
    if in_local_box(&boxes[3], &to_local(&axes, &o, &c)) {
        return true;
    }
    let n = normals[&i].normalize();
    let start = c + n * (SURFACE_RAY_OFFSET * grid.voxel_size());
    march_hits(start, n, 4.0 * gr.finger_length, 2e-5, |p| {
        let q = to_local(&axes, &o, p);
        boxes[..3].iter().any(|b| in_local_box(b, &q))
    })
}

/// Receiver's eye: on the body axis at 0.935 of the height.
pub fn oracle_eye(h: &HumanModel) -> Point3<f64> {
    h.base_position + Vector3::z() * (0.935 * h.height)
}

/// Delivery objective for sample `r` from explicit 4x4 products.
pub fn oracle_objective(
    human: &HumanModel,
    robot_base: &Point3<f64>,
    ee: &Point3<f64>,
    grid: &VoxelGrid,
    grasp: &GraspCandidate,
    r: &Rotation3<f64>,
    members: &[VoxelIndex],
) -> f64 {
    let mut d = human.base_position - robot_base;
    d.z = 0.0;
    let d = d.normalize();
    let frame = Matrix3::from_columns(&[d, Vector3::z().cross(&d), Vector3::z()]);
    let align = Matrix3::from_columns(&[Vector3::y(), -Vector3::z(), -Vector3::x()]);
    let world_gripper = homogeneous(&(frame * r.matrix() * align), &ee.coords);
    let grasp_m = homogeneous(grasp.pose.rotation.matrix(), &grasp.pose.translation.vector);
    let object = world_gripper * grasp_m.try_inverse().unwrap();
    let eye = oracle_eye(human);
    members
        .iter()
        .map(|&m| (apply(&object, &grid.center(m)) - eye).norm())
        .sum()
}

/// Per-voxel visibility from first principles: closing-region containment,
/// slab tests against the gripper boxes and the robot body, then the first
/// occupied voxel on the eye ray found by testing every voxel.
pub fn oracle_visible(s: &EvalScene, i: VoxelIndex) -> bool {
    let obj = homogeneous(
        s.object_pose.rotation.matrix(),
        &s.object_pose.translation.vector,
    );
    let grip = homogeneous(
        s.gripper_pose.rotation.matrix(),
        &s.gripper_pose.translation.vector,
    );
    let grip_inv = grip.try_inverse().unwrap();
    let eye = oracle_eye(s.human);
    let target = apply(&obj, &s.grid.center(i));
    let boxes = gripper_layout(
        s.gripper.finger_length,
        s.gripper.finger_thickness,
        s.gripper.palm_depth,
        s.gripper_width,
    );
    let local = |p: &Point3<f64>| {
        let q = apply(&grip_inv, p);
        [q.x, q.y, q.z]
    };
    if in_local_box(&boxes[3], &local(&target)) {
        return false;
    }
    let len = (target - eye).norm();
    let (le, lt) = (local(&eye), local(&target));
    let ld = [
        (lt[0] - le[0]) / len,
        (lt[1] - le[1]) / len,
        (lt[2] - le[2]) / len,
    ];
    if boxes[..3]
        .iter()
        .any(|b| segment_box_entry(&le, &ld, b, len).is_some())
    {
        return false;
    }
    let wd = (target - eye) / len;
    if let Some(body) = &s.robot_body {
        let b = (
            [body.min.x, body.min.y, body.min.z],
            [body.max.x, body.max.y, body.max.z],
        );
        if segment_box_entry(&[eye.x, eye.y, eye.z], &[wd.x, wd.y, wd.z], &b, len).is_some() {
            return false;
        }
    }
    let obj_inv = obj.try_inverse().unwrap();
    let oe = apply(&obj_inv, &eye);
    let c = s.grid.center(i);
    let od = (c - oe) / (c - oe).norm();
    let mut first: Option<(f64, VoxelIndex)> = None;
    let vs = s.grid.voxel_size();
    for v in s.grid.occupied() {
        let vc = s.grid.center(v);
        let b = (
            [vc.x - vs / 2.0, vc.y - vs / 2.0, vc.z - vs / 2.0],
            [vc.x + vs / 2.0, vc.y + vs / 2.0, vc.z + vs / 2.0],
        );
        if let Some(t) = segment_box_entry(
            &[oe.x, oe.y, oe.z],
            &[od.x, od.y, od.z],
            &b,
            (c - oe).norm(),
        ) {
            if first.is_none_or(|(ft, fv)| t < ft || (t == ft && v < fv)) {
                first = Some((t, v));
            }
        }
    }
    first.is_none_or(|(_, v)| (s.grid.center(v) - c).norm() <= 1.5 * vs)
}

/// Per-voxel reachability: within (0.176 + 0.206) h of a shoulder 0.18 m to
/// the right of the axis at 0.82 h, and horizontally nearer the axis than
/// every lattice point on the gripper boxes.
pub fn oracle_reachable(s: &EvalScene, i: VoxelIndex) -> bool {
    let h = s.human;
    let obj = homogeneous(
        s.object_pose.rotation.matrix(),
        &s.object_pose.translation.vector,
    );
    let grip = homogeneous(
        s.gripper_pose.rotation.matrix(),
        &s.gripper_pose.translation.vector,
    );
    let p = apply(&obj, &s.grid.center(i));
    let f = Vector3::new(h.facing.x, h.facing.y, 0.0).normalize();
    let right = Vector3::new(f.y, -f.x, 0.0);
    let shoulder = h.base_position + right * 0.18 + Vector3::z() * (0.82 * h.height);
    let l_arm = (0.176 + 0.206) * h.height;
    let a = h.base_position;
    let horiz = |q: &Point3<f64>| ((q.x - a.x).powi(2) + (q.y - a.y).powi(2)).sqrt();
    let boxes = gripper_layout(
        s.gripper.finger_length,
        s.gripper.finger_thickness,
        s.gripper.palm_depth,
        s.gripper_width,
    );
    let d2_grip = boxes[..3]
        .iter()
        .flat_map(|b| box_face_lattice(b, s.grid.voxel_size()))
        .map(|q| horiz(&apply(&grip, &Point3::new(q[0], q[1], q[2]))))
        .fold(f64::INFINITY, f64::min);
    (p - shoulder).norm() < l_arm && horiz(&p) < d2_grip
}
