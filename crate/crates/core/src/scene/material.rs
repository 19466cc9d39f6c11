use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Vacuum permittivity, F/m.
const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Frequency at which material conductivities are quoted and at which the
/// complex permittivity is frozen. Reflection coefficients are therefore
/// identical at every carrier.
pub const MATERIAL_REFERENCE_HZ: f64 = 1.0e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MaterialId(pub u16);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub relative_permittivity: f64,
    /// S/m at [`MATERIAL_REFERENCE_HZ`].
    pub conductivity: f64,
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        relative_permittivity: f64,
        conductivity: f64,
    ) -> Result<Self> {
        let name = name.into();
        if !(relative_permittivity > 1.0) || !relative_permittivity.is_finite() {
            return Err(Error::Validation(format!(
                "material {name}: relative permittivity must be > 1 (got {relative_permittivity})"
            )));
        }
        if !(conductivity >= 0.0) || !conductivity.is_finite() {
            return Err(Error::Validation(format!(
                "material {name}: conductivity must be >= 0 (got {conductivity})"
            )));
        }
        Ok(Material {
            name,
            relative_permittivity,
            conductivity,
        })
    }

    pub fn complex_permittivity(&self) -> Complex64 {
        let loss =
            self.conductivity / (2.0 * std::f64::consts::PI * MATERIAL_REFERENCE_HZ * EPSILON_0);
        Complex64::new(self.relative_permittivity, -loss)
    }

    /// Fresnel coefficients (perpendicular, parallel) for a wave incident from
    /// free space with `cos_incidence` measured from the surface normal.
    pub fn fresnel_coefficients(&self, cos_incidence: f64) -> (Complex64, Complex64) {
        let eps = self.complex_permittivity();
        let c = cos_incidence.abs().min(1.0);
        let s2 = 1.0 - c * c;
        let root = (eps - s2).sqrt();
        let te = (c - root) / (c + root);
        let tm = (eps * c - root) / (eps * c + root);
        (te, tm)
    }

    /// Unpolarized power reflection coefficient `(|Γ⊥|² + |Γ∥|²) / 2`.
    pub fn reflection_power(&self, cos_incidence: f64) -> f64 {
        let (te, tm) = self.fresnel_coefficients(cos_incidence);
        0.5 * (te.norm_sqr() + tm.norm_sqr())
    }

    /// Complex scalar coefficient used by coherent combining: unpolarized
    /// magnitude with the phase of the perpendicular component.
    pub fn reflection_coefficient(&self, cos_incidence: f64) -> Complex64 {
        let (te, _) = self.fresnel_coefficients(cos_incidence);
        Complex64::from_polar(self.reflection_power(cos_incidence).sqrt(), te.arg())
    }
}

/// Name-addressable material list. Ids are dense indices in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    materials: Vec<Material>,
    by_name: BTreeMap<String, MaterialId>,
}

pub const CONCRETE: &str = "concrete";
pub const GROUND: &str = "medium_dry_ground";

impl Default for MaterialTable {
    /// Common urban materials using 1 GHz values (ITU-R P.2040 style).
    fn default() -> Self {
        let mut t = MaterialTable::empty();
        for (name, eps, sigma) in [
            (CONCRETE, 5.24, 0.0462),
            ("brick", 3.75, 0.038),
            ("glass", 6.31, 0.0036),
            ("wood", 1.99, 0.0047),
            (GROUND, 15.0, 0.035),
        ] {
            t.insert(Material::new(name, eps, sigma).expect("built-in material"));
        }
        t
    }
}

impl MaterialTable {
    pub fn empty() -> Self {
        MaterialTable {
            materials: Vec::new(),
            by_name: BTreeMap::new(),
        }
    }

    /// Insert or replace by name.
    pub fn insert(&mut self, m: Material) -> MaterialId {
        if let Some(&id) = self.by_name.get(&m.name) {
            self.materials[id.0 as usize] = m;
            return id;
        }
        let id = MaterialId(self.materials.len() as u16);
        self.by_name.insert(m.name.clone(), id);
        self.materials.push(m);
        id
    }

    pub fn id(&self, name: &str) -> Option<MaterialId> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, id: MaterialId) -> &Material {
        &self.materials[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MaterialId, &Material)> {
        self.materials
            .iter()
            .enumerate()
            .map(|(i, m)| (MaterialId(i as u16), m))
    }
}
