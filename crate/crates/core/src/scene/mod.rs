//! The static 3D environment: building prisms, optional raw mesh triangles,
//! an optional ground plane at `z = 0`, materials and a ray-query index.
//!
//! Scenes are immutable once built; every query takes `&self`, so a single
//! scene can serve any number of concurrent traces.

mod bvh;
pub mod extrude;
mod file;
pub mod material;

pub use bvh::Bvh;
pub use file::{
    ExtentSpec, FootprintSpec, GroundSpec, MaterialSpec, MeshTriangleSpec, Origin, SceneFile,
};
pub use material::{Material, MaterialId, MaterialTable};

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon_2d, Aabb, Plane, Tri, Vec3};
use std::path::Path;

/// Triangles with area at or below this are rejected at load.
pub const MIN_TRIANGLE_AREA: f64 = 1e-9;

/// Hits closer than this to either end of a segment do not count as blocking.
pub const SEGMENT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub polygon: Vec<[f64; 2]>,
    pub height: f64,
    pub material: MaterialId,
}

impl Footprint {
    pub fn new(polygon: Vec<[f64; 2]>, height: f64, material: MaterialId) -> Result<Self> {
        extrude::validate_polygon(&polygon)?;
        if !(height > 0.0) || !height.is_finite() {
            return Err(Error::Validation(format!(
                "footprint height must be > 0 (got {height})"
            )));
        }
        Ok(Footprint {
            polygon: extrude::ccw(&polygon),
            height,
            material,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneTriangle {
    pub tri: Tri,
    pub material: MaterialId,
    /// Owning building, if the triangle is part of a closed prism. Prism faces
    /// are one-sided (they only reflect on their outward side).
    pub prism: Option<u32>,
}

/// Extruded building.
#[derive(Debug, Clone)]
pub struct Prism {
    pub footprint: Footprint,
    pub triangles: std::ops::Range<u32>,
    pub bounds: Aabb,
    /// Outward bounding planes when the footprint is convex.
    pub hull: Option<Vec<Plane>>,
}

impl Prism {
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x >= self.bounds.min.x
            && x <= self.bounds.max.x
            && y >= self.bounds.min.y
            && y <= self.bounds.max.y
            && point_in_polygon_2d(x, y, &self.footprint.polygon)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.z >= 0.0 && p.z < self.footprint.height && self.contains_xy(p.x, p.y)
    }

    /// Length of the part of segment `a → b` inside the convex hull, or `None`
    /// for non-convex prisms.
    pub fn chord_length(&self, a: Vec3, b: Vec3) -> Option<f64> {
        self.chord_length_shrunk(a, b, 0.0)
    }

    /// As [`Prism::chord_length`] against the hull shrunk inward by `margin`.
    pub fn chord_length_shrunk(&self, a: Vec3, b: Vec3, margin: f64) -> Option<f64> {
        let hull = self.hull.as_ref()?;
        let d = b - a;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for pl in hull {
            let da = pl.signed_distance(a) + margin;
            let dd = pl.normal.dot(d);
            if dd == 0.0 {
                if da > 0.0 {
                    return Some(0.0);
                }
                continue;
            }
            let t = -da / dd;
            if dd > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            if lo >= hi {
                return Some(0.0);
            }
        }
        Some((hi - lo) * d.norm())
    }

    /// Vertical corner and roof edges as `(start, end)` pairs. Reflex vertical
    /// corners are skipped.
    pub fn edges(&self) -> Vec<(Vec3, Vec3)> {
        let poly = &self.footprint.polygon;
        let h = self.footprint.height;
        let n = poly.len();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            let prev = poly[(i + n - 1) % n];
            let cur = poly[i];
            let next = poly[(i + 1) % n];
            let turn =
                (cur[0] - prev[0]) * (next[1] - cur[1]) - (cur[1] - prev[1]) * (next[0] - cur[0]);
            if turn > 0.0 {
                out.push((Vec3::new(cur[0], cur[1], 0.0), Vec3::new(cur[0], cur[1], h)));
            }
            out.push((Vec3::new(cur[0], cur[1], h), Vec3::new(next[0], next[1], h)));
        }
        out
    }
}

/// Convex planar reflecting surface: a building wall, a roof (or roof
/// triangle for concave footprints), a raw mesh triangle, or the ground.
#[derive(Debug, Clone)]
pub struct Facet {
    pub plane: Plane,
    /// Counter-clockwise around `plane.normal`; empty for the ground.
    pub vertices: Vec<Vec3>,
    /// In-plane inward edge planes.
    edges: Vec<Plane>,
    pub material: MaterialId,
    /// Mesh triangles reflect on both sides; building faces and the ground
    /// only on the side their normal points to.
    pub two_sided: bool,
    pub prism: Option<u32>,
}

impl Facet {
    fn polygon(
        vertices: Vec<Vec3>,
        material: MaterialId,
        two_sided: bool,
        prism: Option<u32>,
    ) -> Facet {
        let normal = (vertices[1] - vertices[0])
            .cross(vertices[2] - vertices[0])
            .normalized();
        let plane = Plane::from_point_normal(vertices[0], normal);
        let n = vertices.len();
        let edges = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                Plane::from_point_normal(a, normal.cross(b - a))
            })
            .collect();
        Facet {
            plane,
            vertices,
            edges,
            material,
            two_sided,
            prism,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Whether an in-plane point lies inside the polygon, `slack` meters tolerant.
    pub fn contains(&self, p: Vec3, slack: f64) -> bool {
        self.edges.iter().all(|e| e.signed_distance(p) >= -slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ground {
    pub material: MaterialId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub triangle: u32,
}

#[derive(Debug, Clone)]
pub struct Scene {
    triangles: Vec<SceneTriangle>,
    prisms: Vec<Prism>,
    facets: Vec<Facet>,
    ground: Option<Ground>,
    materials: MaterialTable,
    bounds: Option<Aabb>,
    origin: Option<Origin>,
    accel: Option<Bvh>,
}

impl Scene {
    /// No triangles, no ground: free space.
    pub fn empty() -> Scene {
        Scene {
            triangles: Vec::new(),
            prisms: Vec::new(),
            facets: Vec::new(),
            ground: None,
            materials: MaterialTable::default(),
            bounds: None,
            origin: None,
            accel: Some(Bvh::build(&[])),
        }
    }

    /// Validates and assembles a scene, then builds its index.
    pub fn new(
        materials: MaterialTable,
        footprints: Vec<Footprint>,
        mesh: Vec<(Tri, MaterialId)>,
        ground: Option<Ground>,
        extent: Option<Aabb>,
    ) -> Result<Scene> {
        let check_material = |id: MaterialId| -> Result<()> {
            if (id.0 as usize) < materials.len() {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "material id {} does not resolve",
                    id.0
                )))
            }
        };
        let mut triangles = Vec::new();
        let mut prisms = Vec::with_capacity(footprints.len());
        for (pi, fp) in footprints.into_iter().enumerate() {
            check_material(fp.material)?;
            let start = triangles.len() as u32;
            for tri in extrude::extrude(&fp.polygon, fp.height) {
                triangles.push(SceneTriangle {
                    tri,
                    material: fp.material,
                    prism: Some(pi as u32),
                });
            }
            let end = triangles.len() as u32;
            let bounds = Aabb::from_points(
                triangles[start as usize..end as usize]
                    .iter()
                    .flat_map(|t| t.tri.vertices()),
            );
            let hull = extrude::is_convex(&fp.polygon).then(|| convex_hull_planes(&fp));
            prisms.push(Prism {
                footprint: fp,
                triangles: start..end,
                bounds,
                hull,
            });
        }
        for (tri, material) in mesh {
            check_material(material)?;
            if !tri.vertices().iter().all(|v| v.is_finite()) {
                return Err(Error::Validation(
                    "mesh triangle has non-finite vertices".into(),
                ));
            }
            triangles.push(SceneTriangle {
                tri,
                material,
                prism: None,
            });
        }
        for (i, t) in triangles.iter().enumerate() {
            let area = t.tri.area();
            if area <= MIN_TRIANGLE_AREA {
                return Err(Error::Validation(format!(
                    "triangle {i} is degenerate (area {area:e} m²)"
                )));
            }
        }
        if let Some(g) = ground {
            check_material(g.material)?;
        }
        let facets = build_facets(&prisms, &triangles, ground);
        let verts = Aabb::from_points(triangles.iter().flat_map(|t| t.tri.vertices()));
        let bounds = match (extent, verts.is_empty()) {
            (Some(e), true) => Some(e),
            (Some(e), false) => Some(e.union(verts)),
            (None, false) => Some(verts),
            (None, true) => None,
        };
        let scene = Scene {
            triangles,
            prisms,
            facets,
            ground,
            materials,
            bounds,
            origin: None,
            accel: None,
        };
        Ok(build_index(scene))
    }

    pub fn triangles(&self) -> &[SceneTriangle] {
        &self.triangles
    }

    pub fn prisms(&self) -> &[Prism] {
        &self.prisms
    }

    /// Reflecting surfaces, ground last.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn ground(&self) -> Option<Ground> {
        self.ground
    }

    pub fn materials(&self) -> &MaterialTable {
        &self.materials
    }

    pub fn bounds(&self) -> Option<Aabb> {
        self.bounds
    }

    pub fn origin(&self) -> Option<&Origin> {
        self.origin.as_ref()
    }

    pub fn building_triangle_count(&self) -> usize {
        self.triangles.iter().filter(|t| t.prism.is_some()).count()
    }

    pub fn is_indexed(&self) -> bool {
        self.accel.is_some()
    }

    /// Points outside the scene box (or below ground) are rejected by the tracer.
    pub fn contains(&self, p: Vec3) -> bool {
        if !p.is_finite() {
            return false;
        }
        if self.ground.is_some() && p.z < 0.0 {
            return false;
        }
        self.bounds.map_or(true, |b| b.contains(p))
    }

    /// Whether the point lies inside any building volume.
    pub fn inside_building(&self, p: Vec3) -> bool {
        self.prisms.iter().any(|pr| pr.contains(p))
    }

    /// Whether the horizontal position falls within any footprint.
    pub fn inside_footprint(&self, x: f64, y: f64) -> bool {
        self.prisms.iter().any(|pr| pr.contains_xy(x, y))
    }

    /// Nearest triangle hit with `t` in `(t_min, t_max)` along `origin + t·dir`.
    pub fn nearest_hit(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<Hit> {
        let Some(bvh) = &self.accel else {
            return self.nearest_hit_brute_force(origin, dir, t_min, t_max);
        };
        let mut best: Option<Hit> = None;
        bvh.traverse(origin, dir, t_min, t_max, |prim, bound| {
            if let Some(t) = self.triangles[prim as usize].tri.intersect(origin, dir) {
                if t > t_min && t < bound {
                    best = Some(Hit { t, triangle: prim });
                    return Some(t);
                }
            }
            Some(bound)
        });
        best
    }

    /// Reference implementation that tests every triangle.
    pub fn nearest_hit_brute_force(
        &self,
        origin: Vec3,
        dir: Vec3,
        t_min: f64,
        t_max: f64,
    ) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for (i, t) in self.triangles.iter().enumerate() {
            if let Some(th) = t.tri.intersect(origin, dir) {
                if th > t_min && th < t_max && best.map_or(true, |b| th < b.t) {
                    best = Some(Hit {
                        t: th,
                        triangle: i as u32,
                    });
                }
            }
        }
        best
    }

    /// Whether any triangle crosses the open segment `a → b`, ignoring hits
    /// within [`SEGMENT_EPSILON`] of either end.
    pub fn segment_blocked(&self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        let len = d.norm();
        if len <= 2.0 * SEGMENT_EPSILON {
            return false;
        }
        let dir = d / len;
        let Some(bvh) = &self.accel else {
            return self.segment_blocked_brute_force(a, b);
        };
        let (t0, t1) = (SEGMENT_EPSILON, len - SEGMENT_EPSILON);
        let mut blocked = false;
        bvh.traverse(a, dir, t0, t1, |prim, bound| {
            if let Some(t) = self.triangles[prim as usize].tri.intersect(a, dir) {
                if t > t0 && t < t1 {
                    blocked = true;
                    return None;
                }
            }
            Some(bound)
        });
        blocked
    }

    pub fn segment_blocked_brute_force(&self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        let len = d.norm();
        if len <= 2.0 * SEGMENT_EPSILON {
            return false;
        }
        let dir = d / len;
        self.triangles.iter().any(|t| {
            t.tri
                .intersect(a, dir)
                .is_some_and(|th| th > SEGMENT_EPSILON && th < len - SEGMENT_EPSILON)
        })
    }

    /// Prisms with at least one triangle crossing the open segment, ascending.
    pub fn blocking_prisms(&self, a: Vec3, b: Vec3) -> Vec<u32> {
        let d = b - a;
        let len = d.norm();
        let mut out = Vec::new();
        if len <= 2.0 * SEGMENT_EPSILON {
            return out;
        }
        let dir = d / len;
        let (t0, t1) = (SEGMENT_EPSILON, len - SEGMENT_EPSILON);
        let mut record = |prim: u32| {
            if let Some(p) = self.triangles[prim as usize].prism {
                if let Some(t) = self.triangles[prim as usize].tri.intersect(a, dir) {
                    if t > t0 && t < t1 && !out.contains(&p) {
                        out.push(p);
                    }
                }
            }
        };
        match &self.accel {
            Some(bvh) => bvh.traverse(a, dir, t0, t1, |prim, bound| {
                record(prim);
                Some(bound)
            }),
            None => (0..self.triangles.len() as u32).for_each(&mut record),
        }
        out.sort_unstable();
        out
    }
}

fn build_facets(
    prisms: &[Prism],
    triangles: &[SceneTriangle],
    ground: Option<Ground>,
) -> Vec<Facet> {
    let mut out = Vec::new();
    for (pi, p) in prisms.iter().enumerate() {
        let poly = &p.footprint.polygon;
        let h = p.footprint.height;
        let m = p.footprint.material;
        let n = poly.len();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            out.push(Facet::polygon(
                vec![
                    Vec3::new(a[0], a[1], 0.0),
                    Vec3::new(b[0], b[1], 0.0),
                    Vec3::new(b[0], b[1], h),
                    Vec3::new(a[0], a[1], h),
                ],
                m,
                false,
                Some(pi as u32),
            ));
        }
        let lift = |q: [f64; 2]| Vec3::new(q[0], q[1], h);
        if p.hull.is_some() {
            out.push(Facet::polygon(
                poly.iter().map(|&q| lift(q)).collect(),
                m,
                false,
                Some(pi as u32),
            ));
        } else {
            for [i, j, k] in extrude::ear_clip(poly) {
                out.push(Facet::polygon(
                    vec![lift(poly[i]), lift(poly[j]), lift(poly[k])],
                    m,
                    false,
                    Some(pi as u32),
                ));
            }
        }
    }
    for t in triangles.iter().filter(|t| t.prism.is_none()) {
        out.push(Facet::polygon(
            t.tri.vertices().to_vec(),
            t.material,
            true,
            None,
        ));
    }
    if let Some(g) = ground {
        out.push(Facet {
            plane: Plane::from_point_normal(Vec3::ZERO, Vec3::Z),
            vertices: Vec::new(),
            edges: Vec::new(),
            material: g.material,
            two_sided: false,
            prism: None,
        });
    }
    out
}

fn convex_hull_planes(fp: &Footprint) -> Vec<Plane> {
    let poly = &fp.polygon;
    let n = poly.len();
    let mut planes = Vec::with_capacity(n + 2);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let outward = Vec3::new(b[1] - a[1], a[0] - b[0], 0.0);
        planes.push(Plane::from_point_normal(
            Vec3::new(a[0], a[1], 0.0),
            outward,
        ));
    }
    planes.push(Plane::from_point_normal(
        Vec3::new(0.0, 0.0, fp.height),
        Vec3::Z,
    ));
    planes.push(Plane::from_point_normal(Vec3::ZERO, -Vec3::Z));
    planes
}

/// Populates the spatial index. Ray queries through the index return the
/// same hits as the brute-force routines.
pub fn build_index(mut scene: Scene) -> Scene {
    let tris: Vec<Tri> = scene.triangles.iter().map(|t| t.tri).collect();
    scene.accel = Some(Bvh::build(&tris));
    scene
}

/// Reads a scene document. `materials` seeds the table; entries in the file
/// override or extend it.
pub fn load_scene(path: &Path, materials: &MaterialTable) -> Result<Scene> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: SceneFile =
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
    file.into_scene(materials)
}

impl Scene {
    pub(crate) fn with_origin(mut self, origin: Option<Origin>) -> Scene {
        self.origin = origin;
        self
    }
}
