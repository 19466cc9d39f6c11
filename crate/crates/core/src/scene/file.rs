//! On-disk scene document (JSON). See `docs/scene_schema.md`.

use super::material::{self, Material, MaterialTable};
use super::{Footprint, Ground, Scene};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Tri, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Geodetic anchor of the local ENU frame. Informational: all coordinates in
/// the file are already meters east/north/up of this point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Origin {
    pub lat_deg: f64,
    pub lon_deg: f64,
    #[serde(default)]
    pub alt_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub relative_permittivity: f64,
    pub conductivity_s_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSpec {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "ground_material")]
    pub material: String,
}

impl Default for GroundSpec {
    fn default() -> Self {
        GroundSpec {
            enabled: true,
            material: ground_material(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FootprintSpec {
    pub polygon: Vec<[f64; 2]>,
    pub height_m: f64,
    #[serde(default = "concrete")]
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshTriangleSpec {
    pub vertices: [[f64; 3]; 3],
    #[serde(default = "concrete")]
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtentSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<ExtentSpec>,
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialSpec>,
    #[serde(default)]
    pub ground: GroundSpec,
    #[serde(default)]
    pub footprints: Vec<FootprintSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mesh: Vec<MeshTriangleSpec>,
}

fn yes() -> bool {
    true
}

fn concrete() -> String {
    material::CONCRETE.to_string()
}

fn ground_material() -> String {
    material::GROUND.to_string()
}

impl SceneFile {
    pub fn into_scene(self, base: &MaterialTable) -> Result<Scene> {
        let mut materials = base.clone();
        for (name, m) in &self.materials {
            materials.insert(Material::new(
                name.clone(),
                m.relative_permittivity,
                m.conductivity_s_m,
            )?);
        }
        let resolve = |name: &str, what: &str| {
            materials.id(name).ok_or_else(|| {
                Error::Validation(format!("{what} references unknown material '{name}'"))
            })
        };
        let mut footprints = Vec::with_capacity(self.footprints.len());
        for (i, f) in self.footprints.iter().enumerate() {
            let id = resolve(&f.material, &format!("footprint {i}"))?;
            let fp = Footprint::new(f.polygon.clone(), f.height_m, id)
                .map_err(|e| Error::Validation(format!("footprint {i}: {}", strip(e))))?;
            footprints.push(fp);
        }
        let mut mesh = Vec::with_capacity(self.mesh.len());
        for (i, t) in self.mesh.iter().enumerate() {
            let id = resolve(&t.material, &format!("mesh triangle {i}"))?;
            let [a, b, c] = t.vertices.map(Vec3::from);
            mesh.push((Tri::new(a, b, c), id));
        }
        let ground = if self.ground.enabled {
            Some(Ground {
                material: resolve(&self.ground.material, "ground")?,
            })
        } else {
            None
        };
        let extent = match &self.extent {
            Some(e) => {
                let (lo, hi) = (Vec3::from(e.min), Vec3::from(e.max));
                if !(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z)
                    || !lo.is_finite()
                    || !hi.is_finite()
                {
                    return Err(Error::Validation(
                        "extent min must be below max on every axis".into(),
                    ));
                }
                Some(Aabb { min: lo, max: hi })
            }
            None => None,
        };
        Ok(Scene::new(materials, footprints, mesh, ground, extent)?.with_origin(self.origin))
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Validation(m) => m,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Scene> {
        let f: SceneFile = serde_json::from_str(s).map_err(|e| Error::parse("test", e))?;
        f.into_scene(&MaterialTable::default())
    }

    #[test]
    fn empty_document_is_ground_only() {
        let s = parse("{}").unwrap();
        assert_eq!(s.building_triangle_count(), 0);
        assert!(s.ground().is_some());
    }

    #[test]
    fn footprint_defaults_to_concrete() {
        let s =
            parse(r#"{"footprints":[{"polygon":[[0,0],[10,0],[10,10],[0,10]],"height_m":20}]}"#)
                .unwrap();
        let m = s.materials().get(s.triangles()[0].material);
        assert_eq!(m.name, "concrete");
        assert_eq!(s.building_triangle_count(), 10);
    }

    #[test]
    fn custom_materials_and_mesh() {
        let s = parse(
            r#"{"materials":{"metal":{"relative_permittivity":1.5,"conductivity_s_m":1e7}},
                "ground":{"enabled":false},
                "mesh":[{"vertices":[[0,0,0],[1,0,0],[0,1,0]],"material":"metal"}]}"#,
        )
        .unwrap();
        assert!(s.ground().is_none());
        assert_eq!(s.triangles().len(), 1);
        assert!(s.triangles()[0].prism.is_none());
    }

    #[test]
    fn validation_failures() {
        assert!(matches!(
            parse(r#"{"footprints":[{"polygon":[[0,0],[10,10],[10,0],[0,10]],"height_m":5}]}"#),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse(r#"{"footprints":[{"polygon":[[0,0],[10,0],[10,10]],"height_m":-1}]}"#),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse(
                r#"{"footprints":[{"polygon":[[0,0],[10,0],[10,10]],"height_m":3,"material":"unobtainium"}]}"#
            ),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse(r#"{"footprints": 3}"#),
            Err(Error::Parse { .. })
        ));
    }
}
