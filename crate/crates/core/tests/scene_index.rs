mod common;

use midband::geometry::{Tri, Vec3};
use midband::raytrace::los_visible;
use midband::scene::{MaterialTable, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, zmax: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-50.0..1550.0),
        rng.gen_range(-50.0..1550.0),
        rng.gen_range(0.5..zmax),
    )
}

fn random_dir(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

#[test]
fn index_matches_brute_force_on_bundled_scene() {
    let scene = common::bundled_scene();
    assert!(scene.is_indexed());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut hits = 0;
    for _ in 0..10_000 {
        let o = random_point(&mut rng, 80.0);
        let d = random_dir(&mut rng);
        let a = scene.nearest_hit(o, d, 1e-9, 5000.0);
        let b = scene.nearest_hit_brute_force(o, d, 1e-9, 5000.0);
        match (a, b) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                assert!((a.t - b.t).abs() <= 1e-6, "{o:?} {d:?}: {} vs {}", a.t, b.t);
                hits += 1;
            }
            (a, b) => panic!("{o:?} {d:?}: {a:?} vs {b:?}"),
        }
    }
    assert!(hits > 2000, "only {hits} rays hit anything");
}

#[test]
fn blockage_matches_brute_force_on_bundled_scene() {
    let scene = common::bundled_scene();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut blocked = 0;
    for _ in 0..10_000 {
        let a = random_point(&mut rng, 30.0);
        let b = random_point(&mut rng, 30.0);
        let fast = scene.segment_blocked(a, b);
        assert_eq!(
            fast,
            scene.segment_blocked_brute_force(a, b),
            "{a:?} -> {b:?}"
        );
        assert_eq!(los_visible(&scene, a, b), !fast);
        blocked += usize::from(fast);
    }
    assert!(blocked > 1000 && blocked < 10_000, "{blocked}");
}

#[test]
fn single_triangle_and_empty_scenes() {
    let mats = MaterialTable::default();
    let concrete = mats.id("concrete").unwrap();
    let tri = Tri::new(
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 2.0),
    );
    let scene = Scene::new(mats, Vec::new(), vec![(tri, concrete)], None, None).unwrap();
    let h = scene
        .nearest_hit(
            Vec3::new(-3.0, 0.0, 0.5),
            Vec3::new(1.0, 0.0, 0.0),
            1e-9,
            100.0,
        )
        .unwrap();
    assert!((h.t - 3.0).abs() < 1e-12);
    assert_eq!(h.triangle, 0);
    assert!(scene
        .nearest_hit(
            Vec3::new(-3.0, 5.0, 0.5),
            Vec3::new(1.0, 0.0, 0.0),
            1e-9,
            100.0
        )
        .is_none());
    // segment stopping short of the triangle
    assert!(!scene.segment_blocked(Vec3::new(-3.0, 0.0, 0.5), Vec3::new(-0.1, 0.0, 0.5)));
    assert!(scene.segment_blocked(Vec3::new(-3.0, 0.0, 0.5), Vec3::new(3.0, 0.0, 0.5)));

    let empty = Scene::empty();
    assert!(empty
        .nearest_hit(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0), 0.0, 1e9)
        .is_none());
    assert!(!empty.segment_blocked(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1e4, 0.0, 1.0)));
}
