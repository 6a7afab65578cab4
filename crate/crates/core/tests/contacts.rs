mod common;

use std::collections::BTreeSet;

use handover::contacts::{
    cluster_contacts, dbscan, largest_cluster, load_contact_map, predict_contacts_heuristic,
    ContactFile, ContactMap,
};
use handover::voxel::{surface_voxels, VoxelGrid, VoxelIndex};
use nalgebra::Point3;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn as_sets(labels: &[Option<usize>]) -> BTreeSet<BTreeSet<usize>> {
    let mut groups: std::collections::BTreeMap<usize, BTreeSet<usize>> = Default::default();
    for (i, l) in labels.iter().enumerate() {
        if let Some(c) = l {
            groups.entry(*c).or_default().insert(i);
        }
    }
    groups.into_values().collect()
}

#[test]
fn two_blobs_separated_by_ten_eps() {
    let g = VoxelGrid::new([64, 64, 64], 0.005, Point3::origin()).unwrap();
    let eps = 3.0 * g.voxel_size();
    let mut idx = Vec::new();
    // 20-voxel blob: 5 x 4 patch
    for x in 0..5 {
        for y in 0..4 {
            idx.push(VoxelIndex::new(5 + x, 5 + y, 5));
        }
    }
    // 8-voxel blob 30 voxels (= 10 eps) away
    for x in 0..4 {
        for y in 0..2 {
            idx.push(VoxelIndex::new(40 + x, 5 + y, 5));
        }
    }
    let cm = ContactMap::from_indices("g", idx.clone());
    let clusters = cluster_contacts(&cm, &g, eps, 4).unwrap();
    assert_eq!(
        clusters.iter().map(|c| c.size).collect::<Vec<_>>(),
        vec![20, 8]
    );

    let points: Vec<Point3<f64>> = cm.contacts().iter().map(|&i| g.center(i)).collect();
    let reference = common::reference_dbscan(&points, eps, 4);
    assert_eq!(
        reference.iter().map(|c| c.len()).collect::<BTreeSet<_>>(),
        BTreeSet::from([20, 8])
    );
    assert_eq!(largest_cluster(&clusters).unwrap().size, 20);
}

#[test]
fn clusters_partition_the_contact_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = VoxelGrid::new([40, 40, 40], 0.01, Point3::origin()).unwrap();
    let idx: BTreeSet<VoxelIndex> = (0..150)
        .map(|_| {
            VoxelIndex::new(
                rng.random_range(0..40),
                rng.random_range(0..40),
                rng.random_range(0..8),
            )
        })
        .collect();
    let cm = ContactMap::from_indices("g", idx.iter().copied());
    let clusters = cluster_contacts(&cm, &g, 0.025, 3).unwrap();
    let mut seen = BTreeSet::new();
    for c in &clusters {
        assert!(c.size >= 1);
        for m in &c.members {
            assert!(seen.insert(*m), "voxel {m:?} in two clusters");
            assert!(idx.contains(m));
        }
    }
    for w in clusters.windows(2) {
        assert!(
            w[0].size > w[1].size || (w[0].size == w[1].size && w[0].members[0] < w[1].members[0])
        );
    }
}

#[test]
fn interior_label_snaps_to_lowest_of_equidistant_surface_voxels() {
    // 5x5x5 cube notched at (2,2,0) and (2,2,4): the interior voxel (2,2,2)
    // then has two surface voxels at distance 1, (2,2,1) and (2,2,3).
    let g = VoxelGrid::from_fn([5, 5, 5], 0.01, Point3::origin(), |i| {
        let in_cube = (0..5).contains(&i.x()) && (0..5).contains(&i.y()) && (0..5).contains(&i.z());
        let notch = i.x() == 2 && i.y() == 2 && (i.z() == 0 || i.z() == 4);
        in_cube && !notch
    })
    .unwrap();
    let surface: Vec<VoxelIndex> = surface_voxels(&g);
    let interior = VoxelIndex::new(2, 2, 2);
    assert!(!surface.contains(&interior));
    // brute-force nearest surface search
    let d2 = |a: VoxelIndex, b: VoxelIndex| {
        (0..3)
            .map(|k| (a.0[k] as i64 - b.0[k] as i64).pow(2))
            .sum::<i64>()
    };
    let best = surface.iter().map(|&s| d2(s, interior)).min().unwrap();
    let tied: Vec<_> = surface
        .iter()
        .copied()
        .filter(|&s| d2(s, interior) == best)
        .collect();
    assert!(
        tied.len() >= 2,
        "construction must produce a tie, got {tied:?}"
    );
    let expected = *tied.iter().min().unwrap();

    let mut f = ContactFile::zeros(g.dims(), g.voxel_size(), g.origin());
    f.values[2 + 5 * (2 + 5 * 2)] = 1.0;
    let cm = load_contact_map(&f, &g, "notched").unwrap();
    assert_eq!(cm.entries().collect::<Vec<_>>(), vec![(expected, 1.0)]);
}

/// Hammer: 4x4 cross-section handle, 10x14x10 head.
fn hammer_grid() -> (VoxelGrid, Vec<VoxelIndex>, Vec<VoxelIndex>) {
    let in_handle = |i: VoxelIndex| {
        (2..34).contains(&i.x()) && (10..14).contains(&i.y()) && (10..14).contains(&i.z())
    };
    let in_head = |i: VoxelIndex| {
        (34..44).contains(&i.x()) && (5..19).contains(&i.y()) && (7..17).contains(&i.z())
    };
    let g = VoxelGrid::from_fn([48, 24, 24], 0.005, Point3::origin(), |i| {
        in_handle(i) || in_head(i)
    })
    .unwrap();
    let s = surface_voxels(&g);
    let handle = s
        .iter()
        .copied()
        .filter(|&i| in_handle(i) && i.x() < 30)
        .collect();
    let head = s.iter().copied().filter(|&i| in_head(i)).collect();
    (g, handle, head)
}

#[test]
fn heuristic_prefers_the_hammer_handle() {
    let (g, handle, head) = hammer_grid();
    let cm = predict_contacts_heuristic(&g, "hammer").unwrap();
    let mean = |v: &[VoxelIndex]| v.iter().map(|&i| cm.get(i)).sum::<f64>() / v.len() as f64;
    let (mh, mk) = (mean(&handle), mean(&head));
    assert!(mh > mk, "handle {mh} vs head {mk}");
    cm.check_against(&g).unwrap();
}

#[test]
fn heuristic_is_uniform_on_a_symmetric_sphere() {
    // radius-1 voxel ball: the six arm voxels form a single symmetry orbit
    let g = VoxelGrid::from_fn([3, 3, 3], 0.01, Point3::origin(), |i| {
        let d: i64 = i.0.iter().map(|&v| (v as i64 - 1).pow(2)).sum();
        d <= 1
    })
    .unwrap();
    let cm = predict_contacts_heuristic(&g, "ball").unwrap();
    let vals: Vec<f64> = cm.entries().map(|(_, v)| v).collect();
    assert_eq!(vals.len(), 6);
    assert!(vals.iter().all(|v| (v - vals[0]).abs() < 1e-6));
}

#[test]
fn heuristic_is_invariant_under_quarter_turns() {
    let (g, _, _) = hammer_grid();
    let [dx, dy, dz] = g.dims();
    // rotate 90 degrees about z: (x, y, z) -> (dy-1-y, x, z)
    let rot = |i: VoxelIndex| VoxelIndex::new(dy - 1 - i.y(), i.x(), i.z());
    let mut r = VoxelGrid::new([dy, dx, dz], g.voxel_size(), g.origin()).unwrap();
    for i in g.occupied() {
        r.set(rot(i), true);
    }
    let a = predict_contacts_heuristic(&g, "a").unwrap();
    let b = predict_contacts_heuristic(&r, "b").unwrap();
    assert_eq!(a.len(), b.len());
    for (i, v) in a.entries() {
        assert_eq!(b.get(rot(i)), v);
    }
}

#[test]
fn contact_file_round_trips_through_a_map() {
    let (g, handle, _) = hammer_grid();
    let cm = ContactMap::from_indices("hammer", handle);
    let text = cm.to_file(&g).to_text();
    let back = load_contact_map(&ContactFile::from_text(&text).unwrap(), &g, "hammer").unwrap();
    assert_eq!(back, cm);
    assert_eq!(back.to_file(&g).to_text(), text);

    let probs = predict_contacts_heuristic(&g, "hammer").unwrap();
    let text = probs.to_file(&g).to_text();
    let back = load_contact_map(&ContactFile::from_text(&text).unwrap(), &g, "hammer").unwrap();
    assert_eq!(back, probs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dbscan_matches_reference_and_ignores_order(
        seed in 0u64..10_000,
        n in 1usize..120,
        eps in 0.02f64..0.2,
        min_pts in 1usize..6,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point3<f64>> = (0..n)
            .map(|_| Point3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>() * 0.2))
            .collect();
        let labels = dbscan(&pts, eps, min_pts);
        let reference: BTreeSet<BTreeSet<usize>> = common::reference_dbscan(&pts, eps, min_pts).into_iter().collect();
        prop_assert_eq!(as_sets(&labels), reference);

        // cluster_contacts sorts its input, so shuffling the source order must not matter
        let g = VoxelGrid::new([30, 30, 30], 0.01, Point3::origin()).unwrap();
        let mut idx: Vec<VoxelIndex> = (0..n)
            .map(|_| VoxelIndex::new(rng.random_range(0..30), rng.random_range(0..30), rng.random_range(0..4)))
            .collect();
        let a = cluster_contacts(&ContactMap::from_indices("g", idx.clone()), &g, 0.025, min_pts).unwrap();
        idx.shuffle(&mut rng);
        let b = cluster_contacts(&ContactMap::from_indices("g", idx), &g, 0.025, min_pts).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn centroid_is_mean_of_member_centers() {
    let g = VoxelGrid::new([10, 10, 10], 0.1, Point3::new(1.0, 0.0, 0.0)).unwrap();
    let cm = ContactMap::from_indices("g", [VoxelIndex::new(0, 0, 0), VoxelIndex::new(2, 0, 0)]);
    let c = cluster_contacts(&cm, &g, 0.25, 1).unwrap();
    assert!((c[0].centroid - Point3::new(1.15, 0.05, 0.05)).norm() < 1e-12);
}
