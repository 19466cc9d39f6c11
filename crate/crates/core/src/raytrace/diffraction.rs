//! Single knife-edge diffraction over building roof edges and convex
//! vertical corners, for links whose line of sight is blocked.

use super::{push_unique, Interaction, PathComponent, PathKind};
use crate::geometry::Vec3;
use crate::scene::Scene;

/// Keller points closer than this to an edge end are discarded.
const EDGE_END_EPSILON: f64 = 1e-6;

struct Candidate {
    excess: f64,
    point: Vec3,
    order: (u32, u32),
}

/// Point on the segment `a → b` minimizing `|tx − q| + |q − rx|`, strictly
/// inside the segment.
pub(crate) fn keller_point(a: Vec3, b: Vec3, tx: Vec3, rx: Vec3) -> Option<Vec3> {
    let len = a.distance(b);
    if len <= 2.0 * EDGE_END_EPSILON {
        return None;
    }
    let e = (b - a) / len;
    let s_par = (tx - a).dot(e);
    let r_par = (rx - a).dot(e);
    let s_perp = (tx - a - e * s_par).norm();
    let r_perp = (rx - a - e * r_par).norm();
    if s_perp + r_perp <= 0.0 {
        return None;
    }
    let t = (s_par * r_perp + r_par * s_perp) / (s_perp + r_perp);
    if t <= EDGE_END_EPSILON || t >= len - EDGE_END_EPSILON {
        return None;
    }
    Some(a + e * t)
}

pub(crate) fn diffraction_paths(
    scene: &Scene,
    tx: Vec3,
    rx: Vec3,
    keep: usize,
    out: &mut Vec<PathComponent>,
) {
    if keep == 0 {
        return;
    }
    let direct = tx.distance(rx);
    let mut cands = Vec::new();
    for p in scene.blocking_prisms(tx, rx) {
        for (ei, (a, b)) in scene.prisms()[p as usize].edges().into_iter().enumerate() {
            if let Some(q) = keller_point(a, b, tx, rx) {
                cands.push(Candidate {
                    excess: (tx.distance(q) + q.distance(rx) - direct).max(0.0),
                    point: q,
                    order: (p, ei as u32),
                });
            }
        }
    }
    cands.sort_by(|x, y| x.excess.total_cmp(&y.excess).then(x.order.cmp(&y.order)));
    let mut kept = 0;
    for c in cands {
        if kept == keep {
            break;
        }
        if scene.segment_blocked(tx, c.point) || scene.segment_blocked(c.point, rx) {
            continue;
        }
        let pc = PathComponent::new(
            PathKind::Diffraction,
            vec![tx, c.point, rx],
            vec![Interaction::Diffraction { excess_m: c.excess }],
        );
        if push_unique(out, pc) {
            kept += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keller_point_on_perpendicular_edge() {
        let a = Vec3::new(0.0, -10.0, 5.0);
        let b = Vec3::new(0.0, 10.0, 5.0);
        let q = keller_point(a, b, Vec3::new(-10.0, 0.0, 0.0), Vec3::new(10.0, 0.0, 0.0)).unwrap();
        assert!(q.distance(Vec3::new(0.0, 0.0, 5.0)) < 1e-12);
    }

    #[test]
    fn keller_point_equal_angles() {
        let a = Vec3::new(0.0, -10.0, 5.0);
        let b = Vec3::new(0.0, 30.0, 5.0);
        let tx = Vec3::new(-7.0, -3.0, 0.0);
        let rx = Vec3::new(20.0, 9.0, 1.0);
        let q = keller_point(a, b, tx, rx).unwrap();
        let e = (b - a).normalized();
        let ci = (q - tx).normalized().dot(e);
        let cd = (rx - q).normalized().dot(e);
        assert!((ci - cd).abs() < 1e-12);
    }

    #[test]
    fn keller_point_beyond_edge_is_rejected() {
        let a = Vec3::new(0.0, 5.0, 5.0);
        let b = Vec3::new(0.0, 10.0, 5.0);
        assert!(
            keller_point(a, b, Vec3::new(-10.0, 0.0, 0.0), Vec3::new(10.0, 0.0, 0.0)).is_none()
        );
    }
}
