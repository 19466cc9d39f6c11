//! Image-source tree for specular reflections.
//!
//! Each node is a reflector sequence with its mirrored source and a convex
//! beam (the pyramid from the image through the part of the reflector that
//! the previous bounce can reach). Beams and the shadow test only ever
//! discard sequences that cannot carry a valid path; every surviving
//! candidate is still validated exactly per receiver.

use super::{push_unique, Interaction, PathComponent, PathKind};
use crate::geometry::{clip_polygon, Plane, Vec3};
use crate::scene::{Facet, Scene, SEGMENT_EPSILON};

/// Receivers this far outside a beam are still examined.
const BEAM_SLACK: f64 = 1e-4;
/// Slack used when clipping reflectors against a parent beam.
const CLIP_SLACK: f64 = 1e-4;
/// Reflection points may sit this far outside their facet.
pub(crate) const FACET_SLACK: f64 = 1e-9;
/// Points closer than this to a plane count as lying on it.
pub(crate) const SIDE_EPSILON: f64 = 1e-9;
/// An occluder must contain the blocked rays this deep to prune a node.
const SHADOW_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone)]
struct Node {
    facet: u32,
    parent: u32,
    depth: u8,
    image: Vec3,
    beam: std::ops::Range<u32>,
}

const ROOT: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct SourceTree {
    source: Vec3,
    nodes: Vec<Node>,
    planes: Vec<Plane>,
}

impl SourceTree {
    pub fn build(scene: &Scene, source: Vec3, max_order: u8) -> SourceTree {
        let mut tree = SourceTree {
            source,
            nodes: Vec::new(),
            planes: Vec::new(),
        };
        if max_order == 0 {
            return tree;
        }
        let facets = scene.facets();
        for (fi, f) in facets.iter().enumerate() {
            let Some(side) = facing_side(f, source) else {
                continue;
            };
            let poly = f.vertices.clone();
            if !f.is_infinite() && shadowed(scene, None, source, f, &poly) {
                continue;
            }
            tree.push(f, fi as u32, ROOT, 1, source, side, &poly);
        }
        let mut level_start = 0;
        for depth in 2..=max_order {
            let level_end = tree.nodes.len();
            for ni in level_start..level_end {
                let parent = tree.nodes[ni].clone();
                let pf = &facets[parent.facet as usize];
                for (fi, f) in facets.iter().enumerate() {
                    if fi as u32 == parent.facet || coplanar(&pf.plane, &f.plane) {
                        continue;
                    }
                    let Some(side) = facing_side(f, parent.image) else {
                        continue;
                    };
                    let poly = if f.is_infinite() {
                        Vec::new()
                    } else {
                        let mut p = f.vertices.clone();
                        for pl in &tree.planes[parent.beam.start as usize..parent.beam.end as usize]
                        {
                            p = clip_polygon(&p, pl, CLIP_SLACK);
                            if p.len() < 3 {
                                break;
                            }
                        }
                        if p.len() < 3 {
                            continue;
                        }
                        if shadowed(scene, Some(pf), parent.image, f, &p) {
                            continue;
                        }
                        p
                    };
                    tree.push(f, fi as u32, ni as u32, depth, parent.image, side, &poly);
                }
            }
            level_start = level_end;
        }
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        f: &Facet,
        facet: u32,
        parent: u32,
        depth: u8,
        source: Vec3,
        side: f64,
        poly: &[Vec3],
    ) {
        let image = f.plane.mirror(source);
        let start = self.planes.len() as u32;
        // receivers must be on the reflecting side
        self.planes.push(Plane {
            normal: f.plane.normal * side,
            offset: f.plane.offset * side,
        });
        if poly.len() >= 3 {
            let centroid = poly.iter().fold(Vec3::ZERO, |a, &b| a + b) / poly.len() as f64;
            for i in 0..poly.len() {
                let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
                let n = (a - image).cross(b - image);
                if n.norm() < 1e-12 {
                    continue;
                }
                let mut pl = Plane::from_point_normal(image, n);
                if pl.signed_distance(centroid) < 0.0 {
                    pl = Plane {
                        normal: -pl.normal,
                        offset: -pl.offset,
                    };
                }
                self.planes.push(pl);
            }
        }
        self.nodes.push(Node {
            facet,
            parent,
            depth,
            image,
            beam: start..self.planes.len() as u32,
        });
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Appends every valid reflected path to `rx`.
    pub fn reflections(&self, scene: &Scene, rx: Vec3, out: &mut Vec<PathComponent>) {
        let facets = scene.facets();
        let mut chain: Vec<u32> = Vec::with_capacity(4);
        'nodes: for (ni, node) in self.nodes.iter().enumerate() {
            let beam = &self.planes[node.beam.start as usize..node.beam.end as usize];
            if beam.iter().any(|pl| pl.signed_distance(rx) < -BEAM_SLACK) {
                continue;
            }
            chain.clear();
            let mut cur = ni as u32;
            while cur != ROOT {
                chain.push(cur);
                cur = self.nodes[cur as usize].parent;
            }
            // chain is deepest-first; walk back from the receiver
            let mut points = [Vec3::ZERO; 5];
            let k = chain.len();
            points[k + 1] = rx;
            points[0] = self.source;
            let mut target = rx;
            for (j, &c) in chain.iter().enumerate() {
                let n = &self.nodes[c as usize];
                let f = &facets[n.facet as usize];
                let Some(p) = reflection_point(f, n.image, target) else {
                    continue 'nodes;
                };
                points[k - j] = p;
                target = p;
            }
            let pts = &points[..k + 2];
            let ids: Vec<u32> = chain
                .iter()
                .rev()
                .map(|&c| self.nodes[c as usize].facet)
                .collect();
            if let Some(pc) = validate(scene, pts, &ids) {
                debug_assert_eq!(pc.kind, PathKind::Reflection(node.depth));
                push_unique(out, pc);
            }
        }
    }
}

/// `+1` / `−1` for the side of `f` the point sees, `None` if `f` cannot
/// reflect toward it.
fn facing_side(f: &Facet, p: Vec3) -> Option<f64> {
    let d = f.plane.signed_distance(p);
    if d.abs() <= SIDE_EPSILON || (!f.two_sided && d < 0.0) {
        None
    } else {
        Some(d.signum())
    }
}

fn coplanar(a: &Plane, b: &Plane) -> bool {
    let c = a.normal.dot(b.normal);
    (c > 1.0 - 1e-12 && (a.offset - b.offset).abs() < 1e-9)
        || (c < -(1.0 - 1e-12) && (a.offset + b.offset).abs() < 1e-9)
}

/// Where the segment `image → target` meets the facet, if it does.
pub(crate) fn reflection_point(f: &Facet, image: Vec3, target: Vec3) -> Option<Vec3> {
    let t = f.plane.segment_crossing(image, target)?;
    if !(t > 0.0 && t < 1.0) {
        return None;
    }
    let p = image + (target - image) * t;
    // snap onto the plane to keep later side tests clean
    let p = p - f.plane.normal * f.plane.signed_distance(p);
    if f.is_infinite() || f.contains(p, FACET_SLACK) {
        Some(p)
    } else {
        None
    }
}

/// Exact checks on a candidate chain `tx, p_1 … p_k, rx` over facets `ids`.
fn validate(scene: &Scene, pts: &[Vec3], ids: &[u32]) -> Option<PathComponent> {
    let facets = scene.facets();
    let mut inter = Vec::with_capacity(ids.len());
    for w in pts.windows(2) {
        if w[0].distance(w[1]) <= 2.0 * SEGMENT_EPSILON {
            return None;
        }
    }
    for (i, &fid) in ids.iter().enumerate() {
        let f = &facets[fid as usize];
        let (prev, p, next) = (pts[i], pts[i + 1], pts[i + 2]);
        let (da, db) = (f.plane.signed_distance(prev), f.plane.signed_distance(next));
        if da.abs() <= SIDE_EPSILON || db.abs() <= SIDE_EPSILON || da.signum() != db.signum() {
            return None;
        }
        if !f.two_sided && da < 0.0 {
            return None;
        }
        if scene.ground().is_some() && p.z < -SIDE_EPSILON {
            return None;
        }
        let cos = ((prev - p).normalized().dot(f.plane.normal)).abs();
        inter.push(Interaction::Reflection {
            material: f.material,
            cos_incidence: cos.min(1.0),
        });
    }
    for w in pts.windows(2) {
        if scene.segment_blocked(w[0], w[1]) {
            return None;
        }
    }
    Some(PathComponent::new(
        PathKind::Reflection(ids.len() as u8),
        pts.to_vec(),
        inter,
    ))
}

/// Whether every ray from `origin` to the polygon crosses the interior of one
/// convex building. With a parent facet the rays start where they leave that
/// facet, and the occluder must lie on its reflecting side.
fn shadowed(scene: &Scene, parent: Option<&Facet>, origin: Vec3, f: &Facet, poly: &[Vec3]) -> bool {
    let leg_start = |v: Vec3| -> Option<Vec3> {
        match parent {
            None => Some(origin),
            Some(pf) => {
                let t = pf.plane.segment_crossing(origin, v)?;
                Some(origin + (v - origin) * t.clamp(0.0, 1.0))
            }
        }
    };
    let Some(a0) = leg_start(poly[0]) else {
        return false;
    };
    let mut candidates = scene.blocking_prisms(a0, poly[0]);
    candidates.retain(|&c| {
        let pr = &scene.prisms()[c as usize];
        if pr.hull.is_none() || Some(c) == f.prism || parent.is_some_and(|pf| pf.prism == Some(c)) {
            return false;
        }
        if let Some(pf) = parent {
            // occluder entirely on the reflecting side of the parent facet
            let side = pf.plane.signed_distance(origin).signum() * -1.0;
            let h = pr.footprint.height;
            let all_front = pr.footprint.polygon.iter().all(|q| {
                [0.0, h]
                    .iter()
                    .all(|&z| side * pf.plane.signed_distance(Vec3::new(q[0], q[1], z)) >= 0.0)
            });
            if !all_front {
                return false;
            }
        }
        true
    });
    if candidates.is_empty() {
        return false;
    }
    candidates.into_iter().any(|c| {
        let pr = &scene.prisms()[c as usize];
        poly.iter().all(|&v| {
            leg_start(v).is_some_and(|a| {
                pr.chord_length_shrunk(a, v, SHADOW_MARGIN)
                    .is_some_and(|l| l > 0.0)
            })
        })
    })
}
