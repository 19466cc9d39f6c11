//! Single-bounce diffuse scattering from facade tiles (Lambertian lobe).

use super::{Interaction, PathComponent, PathKind};
use crate::geometry::Vec3;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterTile {
    pub center: Vec3,
    pub normal: Vec3,
    pub area: f64,
}

/// Splits every building wall into tiles no larger than `tile_m` on a side.
pub fn facade_tiles(scene: &Scene, tile_m: f64) -> Vec<ScatterTile> {
    let mut out = Vec::new();
    for f in scene.facets() {
        if f.prism.is_none() || f.vertices.len() != 4 || f.plane.normal.z.abs() > 1e-9 {
            continue;
        }
        let (a0, b0, ah) = (f.vertices[0], f.vertices[1], f.vertices[3]);
        let (u, v) = (b0 - a0, ah - a0);
        let nu = (u.norm() / tile_m).ceil().max(1.0) as usize;
        let nv = (v.norm() / tile_m).ceil().max(1.0) as usize;
        let area = u.norm() * v.norm() / (nu * nv) as f64;
        for i in 0..nu {
            for j in 0..nv {
                let c =
                    a0 + u * ((i as f64 + 0.5) / nu as f64) + v * ((j as f64 + 0.5) / nv as f64);
                out.push(ScatterTile {
                    center: c,
                    normal: f.plane.normal,
                    area,
                });
            }
        }
    }
    out
}

pub(crate) fn scattering_paths(
    scene: &Scene,
    tiles: &[ScatterTile],
    tx: Vec3,
    rx: Vec3,
    coefficient: f64,
    out: &mut Vec<PathComponent>,
) {
    if coefficient <= 0.0 {
        return;
    }
    for t in tiles {
        let (to_tx, to_rx) = (tx - t.center, rx - t.center);
        let (dt, dr) = (to_tx.norm(), to_rx.norm());
        if dt <= 1e-6 || dr <= 1e-6 {
            continue;
        }
        let cos_i = t.normal.dot(to_tx) / dt;
        let cos_s = t.normal.dot(to_rx) / dr;
        if cos_i <= 0.0 || cos_s <= 0.0 {
            continue;
        }
        if scene.segment_blocked(tx, t.center) || scene.segment_blocked(t.center, rx) {
            continue;
        }
        out.push(PathComponent::new(
            PathKind::Scattering,
            vec![tx, t.center, rx],
            vec![Interaction::Scattering {
                area_m2: t.area,
                cos_incidence: cos_i,
                cos_scatter: cos_s,
                coefficient,
            }],
        ));
    }
}
