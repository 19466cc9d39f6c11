//! Run configuration: one TOML file, paths relative to the file itself.

use crate::antenna::ElementPattern;
use crate::coverage::{default_bandwidth_hz, Carrier, CoverageSettings, GridSpec, SteeringSet};
use crate::deployment::GnbDefaults;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::raytrace::TraceConfig;
use crate::rfi::{Incumbent, RfiSettings, DEFAULT_THRESHOLD_DB};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const OUTPUT_DIR_ENV: &str = "MIDBAND_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSpec {
    pub carrier_hz: f64,
    /// Defaults to 100 MHz below 7.125 GHz and 400 MHz otherwise.
    #[serde(default)]
    pub bandwidth_hz: Option<f64>,
}

impl CarrierSpec {
    pub fn resolve(&self) -> Carrier {
        Carrier {
            carrier_hz: self.carrier_hz,
            bandwidth_hz: self
                .bandwidth_hz
                .unwrap_or_else(|| default_bandwidth_hz(self.carrier_hz)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverageSection {
    pub reference_carrier_hz: f64,
    pub steering_azimuths: usize,
    pub threshold_db: f64,
}

impl Default for CoverageSection {
    fn default() -> Self {
        CoverageSection {
            reference_carrier_hz: 3.5e9,
            steering_azimuths: 16,
            threshold_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfiSection {
    pub incumbent: Vec3,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold_db: f64,
    #[serde(default = "default_threshold")]
    pub target_inr_db: f64,
    #[serde(default = "default_elevation")]
    pub elevation_deg: [f64; 2],
    /// Carriers for the interference study; bandwidths come from the main
    /// carrier list when present there.
    #[serde(default = "default_rfi_carriers")]
    pub carriers_hz: Vec<f64>,
}

fn default_iterations() -> usize {
    500
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD_DB
}

fn default_elevation() -> [f64; 2] {
    [-30.0, 0.0]
}

fn default_rfi_carriers() -> Vec<f64> {
    vec![3.5e9, 12.7e9, 28e9]
}

fn default_carriers() -> Vec<CarrierSpec> {
    [3.5e9, 7.125e9, 12.7e9, 18.8e9, 28e9]
        .iter()
        .map(|&f| CarrierSpec {
            carrier_hz: f,
            bandwidth_hz: None,
        })
        .collect()
}

fn default_grid() -> GridSpec {
    GridSpec {
        origin: [0.0, 0.0],
        cell_m: 10.0,
        nx: 150,
        ny: 150,
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: PathBuf,
    pub deployment: PathBuf,
    #[serde(default)]
    pub allocations: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_carriers")]
    pub carriers: Vec<CarrierSpec>,
    #[serde(default = "d_aperture")]
    pub aperture_side_m: f64,
    #[serde(default = "d_power")]
    pub tx_power_dbm: f64,
    #[serde(default = "d_tilt")]
    pub downtilt_deg: f64,
    #[serde(default = "d_rx_height")]
    pub rx_height_m: f64,
    #[serde(default = "d_nf")]
    pub noise_figure_db: f64,
    #[serde(default)]
    pub element_pattern: ElementPattern,
    /// Thread count; unset uses all cores. Outputs do not depend on it.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub coverage: CoverageSection,
    #[serde(default)]
    pub propagation: TraceConfig,
    #[serde(default)]
    pub rfi: Option<RfiSection>,
}

fn d_aperture() -> f64 {
    GnbDefaults::default().aperture_side_m
}

fn d_power() -> f64 {
    GnbDefaults::default().tx_power_dbm
}

fn d_tilt() -> f64 {
    GnbDefaults::default().downtilt_deg
}

fn d_rx_height() -> f64 {
    1.5
}

fn d_nf() -> f64 {
    9.0
}

impl RunConfig {
    /// Parses and validates; relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path, context: &str) -> Result<RunConfig> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{context}: {e}")))?;
        for p in [&mut cfg.scene, &mut cfg.deployment, &mut cfg.output_dir] {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        if let Some(a) = &mut cfg.allocations {
            if a.is_relative() {
                *a = base_dir.join(&*a);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_toml(&text, base, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.carriers.is_empty() {
            return bad("at least one carrier is required".into());
        }
        for c in &self.carriers {
            let r = c.resolve();
            if !(r.carrier_hz > 0.0)
                || !r.carrier_hz.is_finite()
                || !(r.bandwidth_hz > 0.0)
                || !r.bandwidth_hz.is_finite()
            {
                return bad(format!(
                    "carrier {} Hz / bandwidth {} Hz is invalid",
                    r.carrier_hz, r.bandwidth_hz
                ));
            }
        }
        if !(self.aperture_side_m > 0.0)
            || !self.tx_power_dbm.is_finite()
            || !(self.downtilt_deg.abs() <= 90.0)
        {
            return bad("aperture, transmit power or downtilt out of range".into());
        }
        if !(self.rx_height_m > 0.0) || !(self.noise_figure_db >= 0.0) {
            return bad("rx_height_m must be > 0 and noise_figure_db >= 0".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        self.grid.validate()?;
        if self.coverage.steering_azimuths == 0 {
            return bad("coverage.steering_azimuths must be >= 1".into());
        }
        if self.reference_carrier().is_none() {
            return bad(format!(
                "reference carrier {} Hz is not among the configured carriers",
                self.coverage.reference_carrier_hz
            ));
        }
        self.propagation
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(r) = &self.rfi {
            if r.iterations == 0 || r.carriers_hz.is_empty() {
                return bad("rfi needs iterations >= 1 and at least one carrier".into());
            }
            if !r.threshold_db.is_finite()
                || !r.target_inr_db.is_finite()
                || !(r.elevation_deg[0] <= r.elevation_deg[1])
            {
                return bad("rfi thresholds or elevation range invalid".into());
            }
        }
        Ok(())
    }

    pub fn carriers(&self) -> Vec<Carrier> {
        self.carriers.iter().map(CarrierSpec::resolve).collect()
    }

    pub fn reference_carrier(&self) -> Option<usize> {
        self.carriers
            .iter()
            .position(|c| (c.carrier_hz - self.coverage.reference_carrier_hz).abs() < 1e-3)
    }

    pub fn gnb_defaults(&self) -> GnbDefaults {
        GnbDefaults {
            aperture_side_m: self.aperture_side_m,
            tx_power_dbm: self.tx_power_dbm,
            downtilt_deg: self.downtilt_deg,
        }
    }

    pub fn coverage_settings(&self) -> CoverageSettings {
        CoverageSettings {
            rx_height_m: self.rx_height_m,
            noise_figure_db: self.noise_figure_db,
            element_pattern: self.element_pattern,
            steering: SteeringSet::Grid {
                n_azimuth: self.coverage.steering_azimuths,
            },
            trace: self.propagation.clone(),
            workers: self.workers,
        }
    }

    pub fn rfi_section(&self) -> Result<&RfiSection> {
        self.rfi
            .as_ref()
            .ok_or_else(|| Error::Config("configuration has no [rfi] section".into()))
    }

    pub fn rfi_carriers(&self) -> Result<Vec<Carrier>> {
        let r = self.rfi_section()?;
        let main = self.carriers();
        Ok(r.carriers_hz
            .iter()
            .map(|&f| {
                main.iter()
                    .find(|c| (c.carrier_hz - f).abs() < 1e-3)
                    .copied()
                    .unwrap_or_else(|| Carrier::new(f))
            })
            .collect())
    }

    pub fn incumbent(&self) -> Result<Incumbent> {
        let r = self.rfi_section()?;
        Ok(Incumbent {
            position: r.incumbent,
            protection_threshold_db: r.threshold_db,
            noise_figure_db: self.noise_figure_db,
        })
    }

    pub fn rfi_settings(&self) -> Result<RfiSettings> {
        let r = self.rfi_section()?;
        Ok(RfiSettings {
            iterations: r.iterations,
            seed: r.seed,
            elevation_deg: (r.elevation_deg[0], r.elevation_deg[1]),
            element_pattern: self.element_pattern,
            trace: self.propagation.clone(),
            workers: self.workers,
        })
    }

    /// Flag beats environment beats file.
    pub fn apply_output_override(&mut self, flag: Option<PathBuf>, env: Option<PathBuf>) {
        if let Some(p) = flag.or(env) {
            self.output_dir = p;
        }
    }
}
