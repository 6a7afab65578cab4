use std::collections::{BTreeSet, VecDeque};

use handover::voxel::{
    estimate_normals, ray_cast, surface_voxels, voxelize_mesh, Ray, TriangleMesh, VoxelGrid,
    VoxelIndex,
};
use nalgebra::{Point3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere_grid(radius: f64, dims: usize) -> VoxelGrid {
    let mesh = TriangleMesh::uv_sphere(Point3::new(0.1, -0.2, 0.3), radius, 96, 192);
    voxelize_mesh(&mesh, [dims; 3], 0.05).unwrap()
}

#[test]
fn sphere_volume_matches_analytic_and_point_count() {
    let r = 0.05;
    let g = sphere_grid(r, 64);
    let vs = g.voxel_size();
    let analytic = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3) / vs.powi(3);
    // independent count: voxel centers inside the exact sphere
    let c = Point3::new(0.1, -0.2, 0.3);
    let mut brute = 0usize;
    for z in 0..64 {
        for y in 0..64 {
            for x in 0..64 {
                if (g.center(VoxelIndex::new(x, y, z)) - c).norm() < r {
                    brute += 1;
                }
            }
        }
    }
    let n = g.occupied_count() as f64;
    assert!(
        (n - analytic).abs() / analytic < 0.10,
        "count {n} vs analytic {analytic}"
    );
    assert!(
        (n - brute as f64).abs() / (brute as f64) < 0.10,
        "count {n} vs brute {brute}"
    );
}

#[test]
fn sphere_normals_track_the_radial_direction() {
    let g = sphere_grid(0.05, 64);
    let surface = surface_voxels(&g);
    let normals = estimate_normals(&g, &surface);
    let c = Point3::new(0.1, -0.2, 0.3);
    let mean_deg = surface
        .iter()
        .map(|idx| {
            let radial = (g.center(*idx) - c).normalize();
            normals[idx]
                .dot(&radial)
                .clamp(-1.0, 1.0)
                .acos()
                .to_degrees()
        })
        .sum::<f64>()
        / surface.len() as f64;
    assert!(mean_deg < 15.0, "mean deviation {mean_deg} deg");
    assert!(normals.values().all(|n| (n.norm() - 1.0).abs() < 1e-6));
}

#[test]
fn convex_mesh_voxelizes_to_a_six_connected_set() {
    let g = sphere_grid(0.05, 32);
    let occupied: BTreeSet<VoxelIndex> = g.occupied().collect();
    let start = *occupied.iter().next().unwrap();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for d in handover::voxel::FACE_OFFSETS {
            if let Some(n) = v.offset(d) {
                if occupied.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    assert_eq!(seen.len(), occupied.len());
}

fn random_grid(rng: &mut ChaCha8Rng, dims: [usize; 3], fill: f64) -> VoxelGrid {
    VoxelGrid::from_fn(dims, 0.01, Point3::new(-0.05, 0.02, 0.1), |_| {
        rng.random_bool(fill)
    })
    .unwrap()
}

fn random_ray(rng: &mut ChaCha8Rng, g: &VoxelGrid) -> Ray {
    let b = g.bounds();
    let mid = b.min + (b.max - b.min) * 0.5;
    let origin = mid
        + Vector3::new(
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
        );
    let target = b.min
        + (b.max - b.min).component_mul(&Vector3::new(rng.random(), rng.random(), rng.random()));
    let dist = rng.random_range(0.05..0.6);
    Ray::new(origin, target - origin, dist).unwrap()
}

/// Exact oracle: slab-test every occupied voxel and keep the smallest entry.
fn brute_force_exact(g: &VoxelGrid, ray: &Ray) -> Option<(VoxelIndex, f64)> {
    let mut best: Option<(VoxelIndex, f64)> = None;
    for idx in g.occupied() {
        if let Some((t0, t1)) = g
            .voxel_bounds(idx)
            .ray_interval(&ray.origin(), &ray.direction())
        {
            if t1 < 0.0 {
                continue;
            }
            let entry = t0.max(0.0);
            if entry <= ray.max_distance()
                && best.is_none_or(|(b, bt)| entry < bt || (entry == bt && idx < b))
            {
                best = Some((idx, entry));
            }
        }
    }
    best
}

/// Sampling oracle: march at a tenth of a voxel edge.
fn brute_force_march(g: &VoxelGrid, ray: &Ray) -> Option<VoxelIndex> {
    let step = 0.1 * g.voxel_size();
    let n = (ray.max_distance() / step).floor() as usize;
    (0..=n).find_map(|k| {
        let p = ray.at(k as f64 * step);
        g.index_of(&p).filter(|&i| g.is_occupied(i))
    })
}

#[test]
fn random_rays_agree_with_brute_force_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = random_grid(&mut rng, [16, 12, 20], 0.04);
    let mut hits = 0;
    let mut march_agree = 0;
    for _ in 0..100 {
        let ray = random_ray(&mut rng, &g);
        let fast = ray_cast(&g, &ray, &[]);
        let exact = brute_force_exact(&g, &ray);
        assert_eq!(fast.map(|h| h.index), exact.map(|e| e.0), "ray {ray:?}");
        if let (Some(f), Some(e)) = (fast, exact) {
            assert!((f.distance - e.1).abs() < 1e-9);
            hits += 1;
        }
        if fast.map(|h| h.index) == brute_force_march(&g, &ray) {
            march_agree += 1;
        }
    }
    assert!(
        hits > 20,
        "only {hits} hits; scene too sparse to be meaningful"
    );
    assert_eq!(march_agree, 100);
}

#[test]
fn reversed_rays_between_visible_points_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = random_grid(&mut rng, [12, 12, 12], 0.05);
    let b = g.bounds();
    for _ in 0..200 {
        let p = |rng: &mut ChaCha8Rng| {
            b.min
                + (b.max - b.min).component_mul(&Vector3::new(
                    rng.random(),
                    rng.random(),
                    rng.random(),
                ))
        };
        let (a, c) = (p(&mut rng), p(&mut rng));
        let (Some(ia), Some(ic)) = (g.index_of(&a), g.index_of(&c)) else {
            continue;
        };
        if g.is_occupied(ia) || g.is_occupied(ic) {
            continue;
        }
        let fwd = ray_cast(&g, &Ray::between(a, c).unwrap(), &[]).is_none();
        let back = ray_cast(&g, &Ray::between(c, a).unwrap(), &[]).is_none();
        assert_eq!(fwd, back);
    }
}

#[test]
fn ray_cast_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_grid(&mut rng, [10, 10, 10], 0.1);
    let ray = random_ray(&mut rng, &g);
    assert_eq!(ray_cast(&g, &ray, &[]), ray_cast(&g, &ray, &[]));
}

#[test]
fn offset_normal_rays_never_rehit_their_voxel() {
    let g = sphere_grid(0.05, 32);
    let surface = surface_voxels(&g);
    let normals = estimate_normals(&g, &surface);
    for idx in &surface {
        let n = normals[idx];
        let start = g.center(*idx) + n * (2.0 * g.voxel_size());
        let ray = Ray::new(start, n, 1.0).unwrap();
        if let Some(hit) = ray_cast(&g, &ray, &[]) {
            assert_ne!(hit.index, *idx);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vgrid_round_trip_is_bit_exact(
        dims in (1usize..6, 1usize..6, 1usize..6),
        bits in proptest::collection::vec(any::<bool>(), 216),
        vs in 1e-4f64..10.0,
        origin in (-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3),
    ) {
        let dims = [dims.0, dims.1, dims.2];
        let mut k = 0;
        let g = VoxelGrid::from_fn(dims, vs, Point3::new(origin.0, origin.1, origin.2), |_| { k += 1; bits[k - 1] }).unwrap();
        let text = g.to_vgrid_string();
        let back = VoxelGrid::from_vgrid_str(&text).unwrap();
        prop_assert_eq!(back.voxel_size().to_bits(), vs.to_bits());
        prop_assert_eq!(back.to_vgrid_string(), text);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn surface_is_invariant_under_translation(shift in (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_grid(&mut rng, [6, 7, 5], 0.5);
        let moved = g.with_origin(g.origin() + Vector3::new(shift.0, shift.1, shift.2));
        prop_assert_eq!(surface_voxels(&g), surface_voxels(&moved));
    }
}
