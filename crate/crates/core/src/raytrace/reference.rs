//! Exhaustive mirror enumeration over raw triangles, used as a test oracle
//! for the image-source tree. Exponential in the order; small scenes only.

use super::{push_unique, Interaction, PathComponent, PathKind};
use crate::geometry::{Plane, Tri, Vec3};
use crate::scene::{MaterialId, Scene, SEGMENT_EPSILON};

const SLACK: f64 = 1e-9;

#[derive(Clone, Copy)]
struct Reflector {
    plane: Plane,
    tri: Option<Tri>,
    two_sided: bool,
    material: MaterialId,
}

/// Every specular path of order `1..=max_order`, found by trying each
/// reflector sequence and checking it with brute-force occlusion tests.
pub fn brute_force_reflections(
    scene: &Scene,
    tx: Vec3,
    rx: Vec3,
    max_order: u8,
) -> Vec<PathComponent> {
    let mut refl: Vec<Reflector> = scene
        .triangles()
        .iter()
        .map(|t| Reflector {
            plane: Plane::from_point_normal(t.tri.a, t.tri.normal()),
            tri: Some(t.tri),
            two_sided: t.prism.is_none(),
            material: t.material,
        })
        .collect();
    if let Some(g) = scene.ground() {
        refl.push(Reflector {
            plane: Plane::from_point_normal(Vec3::ZERO, Vec3::Z),
            tri: None,
            two_sided: false,
            material: g.material,
        });
    }
    let mut out = Vec::new();
    let mut seq = Vec::new();
    for order in 1..=max_order as usize {
        enumerate(scene, &refl, tx, rx, order, &mut seq, &mut out);
    }
    out
}

fn enumerate(
    scene: &Scene,
    refl: &[Reflector],
    tx: Vec3,
    rx: Vec3,
    order: usize,
    seq: &mut Vec<usize>,
    out: &mut Vec<PathComponent>,
) {
    if seq.len() == order {
        if let Some(pc) = check(scene, refl, tx, rx, seq) {
            push_unique(out, pc);
        }
        return;
    }
    for i in 0..refl.len() {
        if seq.last() == Some(&i) {
            continue;
        }
        seq.push(i);
        enumerate(scene, refl, tx, rx, order, seq, out);
        seq.pop();
    }
}

fn check(
    scene: &Scene,
    refl: &[Reflector],
    tx: Vec3,
    rx: Vec3,
    seq: &[usize],
) -> Option<PathComponent> {
    let mut images = Vec::with_capacity(seq.len());
    let mut src = tx;
    for &i in seq {
        src = refl[i].plane.mirror(src);
        images.push(src);
    }
    let k = seq.len();
    let mut pts = vec![Vec3::ZERO; k + 2];
    pts[0] = tx;
    pts[k + 1] = rx;
    let mut target = rx;
    for j in (0..k).rev() {
        let r = &refl[seq[j]];
        let (da, db) = (
            r.plane.signed_distance(images[j]),
            r.plane.signed_distance(target),
        );
        if da == db {
            return None;
        }
        let t = da / (da - db);
        if !(t > 0.0 && t < 1.0) {
            return None;
        }
        let mut p = images[j] + (target - images[j]) * t;
        p = p - r.plane.normal * r.plane.signed_distance(p);
        if let Some(tri) = r.tri {
            if !tri.contains_coplanar(p, SLACK) {
                return None;
            }
        }
        pts[j + 1] = p;
        target = p;
    }
    for w in pts.windows(2) {
        if w[0].distance(w[1]) <= 2.0 * SEGMENT_EPSILON {
            return None;
        }
    }
    let mut inter = Vec::with_capacity(k);
    for j in 0..k {
        let r = &refl[seq[j]];
        let (prev, p, next) = (pts[j], pts[j + 1], pts[j + 2]);
        let (da, db) = (r.plane.signed_distance(prev), r.plane.signed_distance(next));
        if da.abs() <= SLACK || db.abs() <= SLACK || (da > 0.0) != (db > 0.0) {
            return None;
        }
        if !r.two_sided && da < 0.0 {
            return None;
        }
        if scene.ground().is_some() && p.z < -SLACK {
            return None;
        }
        inter.push(Interaction::Reflection {
            material: r.material,
            cos_incidence: (prev - p).normalized().dot(r.plane.normal).abs().min(1.0),
        });
    }
    for w in pts.windows(2) {
        if scene.segment_blocked_brute_force(w[0], w[1]) {
            return None;
        }
    }
    Some(PathComponent::new(
        PathKind::Reflection(k as u8),
        pts,
        inter,
    ))
}
