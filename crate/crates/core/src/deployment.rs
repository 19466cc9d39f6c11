//! gNB deployments and their JSON file format.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scene::Scene;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gnb {
    pub id: u32,
    pub position: Vec3,
    /// Overrides the run-wide aperture when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aperture_side_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub downtilt_deg: Option<f64>,
    /// Panel normal azimuth, degrees counter-clockwise from +x.
    #[serde(default)]
    pub boresight_azimuth_deg: f64,
}

/// Run-wide defaults applied to gNBs that do not override them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnbDefaults {
    pub aperture_side_m: f64,
    pub tx_power_dbm: f64,
    pub downtilt_deg: f64,
}

impl Default for GnbDefaults {
    fn default() -> Self {
        GnbDefaults {
            aperture_side_m: 0.04,
            tx_power_dbm: 23.0,
            downtilt_deg: -12.0,
        }
    }
}

/// A gNB with every parameter resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub id: u32,
    pub position: Vec3,
    pub aperture_side_m: f64,
    pub tx_power_dbm: f64,
    pub downtilt_deg: f64,
    pub boresight_azimuth_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentFile {
    pub gnbs: Vec<Gnb>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    sites: Vec<Site>,
}

impl Deployment {
    pub fn new(gnbs: &[Gnb], defaults: GnbDefaults) -> Result<Deployment> {
        let mut ids = BTreeSet::new();
        let mut sites = Vec::with_capacity(gnbs.len());
        for g in gnbs {
            if !ids.insert(g.id) {
                return Err(Error::Validation(format!("duplicate gNB id {}", g.id)));
            }
            let s = Site {
                id: g.id,
                position: g.position,
                aperture_side_m: g.aperture_side_m.unwrap_or(defaults.aperture_side_m),
                tx_power_dbm: g.tx_power_dbm.unwrap_or(defaults.tx_power_dbm),
                downtilt_deg: g.downtilt_deg.unwrap_or(defaults.downtilt_deg),
                boresight_azimuth_rad: g.boresight_azimuth_deg.to_radians(),
            };
            if !s.position.is_finite() || !s.tx_power_dbm.is_finite() || !(s.aperture_side_m > 0.0)
            {
                return Err(Error::Validation(format!(
                    "gNB {} has invalid parameters",
                    g.id
                )));
            }
            if !(s.downtilt_deg.abs() <= 90.0) || !s.boresight_azimuth_rad.is_finite() {
                return Err(Error::Validation(format!(
                    "gNB {} has an invalid orientation",
                    g.id
                )));
            }
            sites.push(s);
        }
        Ok(Deployment { sites })
    }

    pub fn from_sites(sites: Vec<Site>) -> Deployment {
        Deployment { sites }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// gNBs per km² over a horizontal area given in m².
    pub fn density_per_km2(&self, area_m2: f64) -> f64 {
        self.sites.len() as f64 / (area_m2 / 1e6)
    }

    /// Every site must be inside the scene box and outside buildings.
    pub fn check_against(&self, scene: &Scene) -> Result<()> {
        for s in &self.sites {
            if !scene.contains(s.position) {
                return Err(Error::Validation(format!(
                    "gNB {} lies outside the scene bounds",
                    s.id
                )));
            }
            if scene.inside_building(s.position) {
                return Err(Error::Validation(format!(
                    "gNB {} lies inside a building",
                    s.id
                )));
            }
        }
        Ok(())
    }

    pub fn without(&self, ids: &[u32]) -> Deployment {
        Deployment {
            sites: self
                .sites
                .iter()
                .filter(|s| !ids.contains(&s.id))
                .copied()
                .collect(),
        }
    }
}

pub fn load_deployment(path: &Path, defaults: GnbDefaults) -> Result<Deployment> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: DeploymentFile =
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
    Deployment::new(&file.gnbs, defaults)
}
