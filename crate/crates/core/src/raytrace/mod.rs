//! Multipath between a transmitter and a receiver: line of sight, specular
//! reflections via image sources, single knife-edge diffraction and
//! optional single-bounce diffuse scattering.

mod diffraction;
pub mod fresnel;
mod image;
mod reference;
mod scatter;

pub use image::SourceTree;
pub use reference::brute_force_reflections;
pub use scatter::{facade_tiles, ScatterTile};

use crate::antenna::{wavelength, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::link::{db_to_linear, linear_to_db};
use crate::scene::{MaterialId, MaterialTable, Scene};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MAX_SUPPORTED_ORDER: u8 = 3;

/// Two vertices closer than this are the same point when comparing chains.
pub const CHAIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub max_reflection_order: u8,
    pub enable_diffraction: bool,
    pub enable_scattering: bool,
    pub scattering_coefficient: f64,
    /// Strongest diffraction edges kept per link.
    pub diffraction_edges: usize,
    /// Facade tile side used to sample diffuse scattering.
    pub scattering_tile_m: f64,
    /// Sum component fields with phase instead of powers.
    pub coherent: bool,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            max_reflection_order: 2,
            enable_diffraction: true,
            enable_scattering: false,
            scattering_coefficient: 0.4,
            diffraction_edges: 4,
            scattering_tile_m: 5.0,
            coherent: false,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_reflection_order > MAX_SUPPORTED_ORDER {
            return Err(Error::Config(format!(
                "max_reflection_order {} exceeds the supported {MAX_SUPPORTED_ORDER}",
                self.max_reflection_order
            )));
        }
        if !(0.0..=1.0).contains(&self.scattering_coefficient) {
            return Err(Error::Config(format!(
                "scattering_coefficient must be in [0, 1] (got {})",
                self.scattering_coefficient
            )));
        }
        if !(self.scattering_tile_m > 0.0) {
            return Err(Error::Config("scattering_tile_m must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PathKind {
    Los,
    Reflection(u8),
    Diffraction,
    Scattering,
}

/// Frequency-independent description of what happens at one interior vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    Reflection {
        material: MaterialId,
        /// Cosine of the incidence angle from the surface normal.
        cos_incidence: f64,
    },
    Diffraction {
        /// Path length in excess of the straight transmitter–receiver line.
        excess_m: f64,
    },
    Scattering {
        area_m2: f64,
        cos_incidence: f64,
        cos_scatter: f64,
        coefficient: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathComponent {
    pub kind: PathKind,
    /// Transmitter first, receiver last.
    pub vertices: Vec<Vec3>,
    pub length: f64,
    /// Direction of travel leaving the transmitter.
    pub departure_dir: Vec3,
    /// Direction of travel arriving at the receiver.
    pub arrival_dir: Vec3,
    pub interactions: Vec<Interaction>,
}

impl PathComponent {
    pub(crate) fn new(
        kind: PathKind,
        vertices: Vec<Vec3>,
        interactions: Vec<Interaction>,
    ) -> PathComponent {
        let length = vertices.windows(2).map(|w| w[0].distance(w[1])).sum();
        let n = vertices.len();
        PathComponent {
            kind,
            departure_dir: (vertices[1] - vertices[0]).normalized(),
            arrival_dir: (vertices[n - 1] - vertices[n - 2]).normalized(),
            vertices,
            length,
            interactions,
        }
    }

    /// Path gain in dB at `frequency` (excluding antennas). `frequency > 0`.
    pub fn gain_db(&self, frequency: f64, materials: &MaterialTable) -> f64 {
        let lambda = wavelength(frequency);
        match self.kind {
            PathKind::Los => -fspl_db(self.length, frequency),
            PathKind::Reflection(_) => {
                let mut g = -fspl_db(self.length, frequency);
                for i in &self.interactions {
                    if let Interaction::Reflection {
                        material,
                        cos_incidence,
                    } = *i
                    {
                        g += linear_to_db(materials.get(material).reflection_power(cos_incidence));
                    }
                }
                g
            }
            PathKind::Diffraction => {
                let excess = match self.interactions.first() {
                    Some(Interaction::Diffraction { excess_m }) => *excess_m,
                    _ => 0.0,
                };
                -fspl_db(self.length, frequency)
                    - fresnel::knife_edge_loss_db(fresnel::nu_from_excess(excess, lambda))
            }
            PathKind::Scattering => {
                let Some(Interaction::Scattering {
                    area_m2,
                    cos_incidence,
                    cos_scatter,
                    coefficient,
                }) = self.interactions.first().copied()
                else {
                    return f64::NEG_INFINITY;
                };
                let d1 = self.vertices[0].distance(self.vertices[1]);
                let d2 = self.vertices[1].distance(self.vertices[2]);
                let lobe = -fspl_db(d1, frequency) - fspl_db(d2, frequency)
                    + 20.0 * coefficient.log10()
                    + 10.0 * (cos_incidence * cos_scatter / PI).log10()
                    + 10.0 * ((4.0 * PI).powi(2) * area_m2 / (lambda * lambda)).log10();
                lobe.min(-fspl_db(self.length, frequency))
            }
        }
    }

    /// Carrier phase of the component in radians (excluding antennas).
    pub fn phase_rad(&self, frequency: f64, materials: &MaterialTable) -> f64 {
        let k = 2.0 * PI / wavelength(frequency);
        let mut phase = -k * self.length;
        for i in &self.interactions {
            match *i {
                Interaction::Reflection {
                    material,
                    cos_incidence,
                } => {
                    phase += materials
                        .get(material)
                        .reflection_coefficient(cos_incidence)
                        .arg();
                }
                Interaction::Diffraction { excess_m } => {
                    let nu = fresnel::nu_from_excess(excess_m, wavelength(frequency));
                    phase += fresnel::knife_edge_coefficient(nu).arg();
                }
                Interaction::Scattering { .. } => {}
            }
        }
        phase
    }

    pub fn reversed(&self) -> PathComponent {
        let mut v = self.vertices.clone();
        v.reverse();
        let mut inter = self.interactions.clone();
        inter.reverse();
        if let Some(Interaction::Scattering {
            cos_incidence,
            cos_scatter,
            ..
        }) = inter.first_mut()
        {
            std::mem::swap(cos_incidence, cos_scatter);
        }
        PathComponent::new(self.kind, v, inter)
    }
}

/// `20·log10(4π·d·f/c)`.
pub fn fspl_db(distance_m: f64, frequency: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m * frequency / SPEED_OF_LIGHT).log10()
}

pub fn component_gain_db(
    pc: &PathComponent,
    frequency: f64,
    materials: &MaterialTable,
) -> Result<f64> {
    if !(frequency > 0.0) || !frequency.is_finite() {
        return Err(Error::Domain(format!(
            "frequency must be positive (got {frequency})"
        )));
    }
    Ok(pc.gain_db(frequency, materials))
}

/// Non-coherent power sum `10·log10 Σ 10^((P_tx + G_tx,i + G_rx + g_i)/10)`.
/// An empty component list yields `−∞` dBm.
pub fn received_power_dbm(
    path_gains_db: &[f64],
    tx_power_dbm: f64,
    tx_gains_db: &[f64],
    rx_gain_db: f64,
) -> f64 {
    debug_assert_eq!(path_gains_db.len(), tx_gains_db.len());
    crate::link::power_sum_db(
        path_gains_db
            .iter()
            .zip(tx_gains_db)
            .map(|(g, t)| tx_power_dbm + t + rx_gain_db + g),
    )
}

/// Field sum with per-component phases (radians); `−∞` dBm when empty.
pub fn received_power_coherent_dbm(
    path_gains_db: &[f64],
    phases_rad: &[f64],
    tx_power_dbm: f64,
    tx_gains_db: &[f64],
    rx_gain_db: f64,
) -> f64 {
    if path_gains_db.is_empty() {
        return f64::NEG_INFINITY;
    }
    let field: Complex64 = path_gains_db
        .iter()
        .zip(phases_rad)
        .zip(tx_gains_db)
        .map(|((g, ph), t)| Complex64::from_polar(db_to_linear(g + t).sqrt(), *ph))
        .sum();
    tx_power_dbm + rx_gain_db + linear_to_db(field.norm_sqr())
}

pub fn los_visible(scene: &Scene, a: Vec3, b: Vec3) -> bool {
    !scene.segment_blocked(a, b)
}

/// Traces every path family enabled in `cfg` from one transmitter. Building the
/// image-source tree is the expensive part, so callers evaluating many
/// receivers should keep the tracer.
pub struct Tracer<'a> {
    scene: &'a Scene,
    tx: Vec3,
    cfg: TraceConfig,
    tree: SourceTree,
    tiles: Vec<ScatterTile>,
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a Scene, tx: Vec3, cfg: &TraceConfig) -> Result<Tracer<'a>> {
        cfg.validate()?;
        if !scene.contains(tx) {
            return Err(Error::Domain(format!(
                "transmitter {tx:?} is outside the scene"
            )));
        }
        let tree = SourceTree::build(scene, tx, cfg.max_reflection_order);
        let tiles = if cfg.enable_scattering {
            facade_tiles(scene, cfg.scattering_tile_m)
        } else {
            Vec::new()
        };
        Ok(Tracer {
            scene,
            tx,
            cfg: cfg.clone(),
            tree,
            tiles,
        })
    }

    pub fn tree(&self) -> &SourceTree {
        &self.tree
    }

    pub fn trace(&self, rx: Vec3) -> Result<Vec<PathComponent>> {
        if !self.scene.contains(rx) {
            return Err(Error::Domain(format!(
                "receiver {rx:?} is outside the scene"
            )));
        }
        if self.tx.distance(rx) <= CHAIN_TOLERANCE {
            return Err(Error::Domain("transmitter and receiver coincide".into()));
        }
        let mut out = Vec::new();
        let los = los_visible(self.scene, self.tx, rx);
        if los {
            out.push(PathComponent::new(
                PathKind::Los,
                vec![self.tx, rx],
                Vec::new(),
            ));
        }
        self.tree.reflections(self.scene, rx, &mut out);
        if self.cfg.enable_diffraction && !los {
            diffraction::diffraction_paths(
                self.scene,
                self.tx,
                rx,
                self.cfg.diffraction_edges,
                &mut out,
            );
        }
        if self.cfg.enable_scattering {
            scatter::scattering_paths(
                self.scene,
                &self.tiles,
                self.tx,
                rx,
                self.cfg.scattering_coefficient,
                &mut out,
            );
        }
        Ok(out)
    }
}

pub fn trace_paths(
    scene: &Scene,
    tx: Vec3,
    rx: Vec3,
    cfg: &TraceConfig,
) -> Result<Vec<PathComponent>> {
    Tracer::new(scene, tx, cfg)?.trace(rx)
}

pub(crate) fn same_chain(a: &[Vec3], b: &[Vec3]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(p, q)| p.distance(*q) <= CHAIN_TOLERANCE)
}

/// Appends `pc` unless a component with the same vertex chain is present.
pub(crate) fn push_unique(list: &mut Vec<PathComponent>, pc: PathComponent) -> bool {
    if list.iter().any(|c| same_chain(&c.vertices, &pc.vertices)) {
        return false;
    }
    list.push(pc);
    true
}
