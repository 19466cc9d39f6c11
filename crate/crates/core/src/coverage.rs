//! Downlink SNR and Shannon-rate maps over a horizontal receiver grid, and
//! the coverage-ratio metric against a reference carrier.

use crate::antenna::{steering_grid, ElementPattern, SteeringDirection, UpaArray, RX_GAIN_DBI};
use crate::deployment::{Deployment, Site};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::link::{noise_power_dbm, shannon_rate_bps, snr_db, LinkParams};
use crate::raytrace::{
    received_power_coherent_dbm, received_power_dbm, PathComponent, TraceConfig, Tracer,
};
use crate::render;
use crate::scene::Scene;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Cells at or above this SNR count as covered.
pub const COVERAGE_THRESHOLD_DB: f64 = 0.0;
/// Upper edge of FR-1; carriers below it default to 100 MHz, the rest to 400 MHz.
pub const FR1_UPPER_HZ: f64 = 7.125e9;
/// Fixed heatmap scale so images from different runs compare directly.
pub const HEATMAP_MIN_DB: f64 = -10.0;
pub const HEATMAP_MAX_DB: f64 = 50.0;
pub const HEATMAP_PIXELS_PER_CELL: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Carrier {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

impl Carrier {
    pub fn new(carrier_hz: f64) -> Carrier {
        Carrier {
            carrier_hz,
            bandwidth_hz: default_bandwidth_hz(carrier_hz),
        }
    }

    /// Carrier in MHz as used in file names (`3500`, `12700`, `7125`).
    pub fn label_mhz(&self) -> String {
        mhz_label(self.carrier_hz)
    }
}

pub fn default_bandwidth_hz(carrier_hz: f64) -> f64 {
    if carrier_hz < FR1_UPPER_HZ {
        100e6
    } else {
        400e6
    }
}

pub fn mhz_label(hz: f64) -> String {
    let mhz = hz / 1e6;
    if (mhz - mhz.round()).abs() < 1e-6 {
        format!("{}", mhz.round() as i64)
    } else {
        format!("{}", (mhz * 1000.0).round() / 1000.0)
    }
}

/// Regular grid of receiver cells; cell `(i, j)` is centred at
/// `origin + ((i + ½)·cell, (j + ½)·cell)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub cell_m: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_m > 0.0) || !self.cell_m.is_finite() || self.nx == 0 || self.ny == 0 {
            return Err(Error::Config(
                "grid needs cell_m > 0 and at least one cell".into(),
            ));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin[0] + (i as f64 + 0.5) * self.cell_m,
            self.origin[1] + (j as f64 + 0.5) * self.cell_m,
        )
    }

    /// Row-major index, `x` fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Same region at half the cell size.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            origin: self.origin,
            cell_m: self.cell_m / 2.0,
            nx: self.nx * 2,
            ny: self.ny * 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SteeringSet {
    /// `n` global azimuths at each gNB's own downtilt.
    Grid { n_azimuth: usize },
    /// The same explicit directions for every gNB.
    Fixed(Vec<SteeringDirection>),
}

impl Default for SteeringSet {
    fn default() -> Self {
        SteeringSet::Grid { n_azimuth: 16 }
    }
}

impl SteeringSet {
    pub fn is_empty(&self) -> bool {
        match self {
            SteeringSet::Grid { n_azimuth } => *n_azimuth == 0,
            SteeringSet::Fixed(v) => v.is_empty(),
        }
    }

    pub fn directions(&self, site: &Site) -> Vec<Vec3> {
        match self {
            SteeringSet::Grid { n_azimuth } => {
                steering_grid(*n_azimuth, site.downtilt_deg.to_radians())
                    .iter()
                    .map(|d| d.unit())
                    .collect()
            }
            SteeringSet::Fixed(v) => v.iter().map(|d| d.unit()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSettings {
    pub rx_height_m: f64,
    pub noise_figure_db: f64,
    pub element_pattern: ElementPattern,
    pub steering: SteeringSet,
    pub trace: TraceConfig,
    /// `None` uses the global thread pool.
    pub workers: Option<usize>,
}

impl Default for CoverageSettings {
    fn default() -> Self {
        CoverageSettings {
            rx_height_m: 1.5,
            noise_figure_db: 9.0,
            element_pattern: ElementPattern::Isotropic,
            steering: SteeringSet::default(),
            trace: TraceConfig::default(),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMap {
    pub grid: GridSpec,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_dbm: f64,
    /// Best SNR per cell; `−∞` when no path reaches it.
    pub snr_db: Vec<f64>,
    pub best_gnb: Vec<Option<u32>>,
    pub best_steering: Vec<Option<u16>>,
    /// Cells whose centre lies inside a building.
    pub excluded: Vec<bool>,
}

impl CoverageMap {
    pub fn covered(&self, idx: usize, threshold_db: f64) -> bool {
        !self.excluded[idx] && self.snr_db[idx] >= threshold_db
    }

    pub fn covered_count(&self, threshold_db: f64) -> usize {
        (0..self.snr_db.len())
            .filter(|&i| self.covered(i, threshold_db))
            .count()
    }

    pub fn outdoor_count(&self) -> usize {
        self.excluded.iter().filter(|e| !**e).count()
    }

    pub fn rate_bps(&self, idx: usize) -> f64 {
        shannon_rate_bps(self.bandwidth_hz, self.snr_db[idx])
    }

    /// One row per outdoor cell, `y` outer and `x` inner.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell_x_m,cell_y_m,snr_db,best_gnb,rate_bps\n");
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let k = self.grid.index(i, j);
                if self.excluded[k] {
                    continue;
                }
                let (x, y) = self.grid.center(i, j);
                let snr = self.snr_db[k];
                let gnb = self.best_gnb[k].map(|g| g.to_string()).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{x:.2},{y:.2},{},{gnb},{:.1}",
                    fmt_db(snr),
                    self.rate_bps(k)
                );
            }
        }
        s
    }

    /// Heatmap with north up on the fixed [`HEATMAP_MIN_DB`, `HEATMAP_MAX_DB`] ramp.
    pub fn render_png(&self) -> Result<Vec<u8>> {
        let scale = HEATMAP_PIXELS_PER_CELL as usize;
        let (w, h) = (self.grid.nx * scale, self.grid.ny * scale);
        let mut rgb = vec![0u8; w * h * 3];
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let k = self.grid.index(i, j);
                let c = if self.excluded[k] {
                    render::EXCLUDED_RGB
                } else if self.snr_db[k] == f64::NEG_INFINITY {
                    render::NO_SIGNAL_RGB
                } else {
                    render::ramp(
                        (self.snr_db[k] - HEATMAP_MIN_DB) / (HEATMAP_MAX_DB - HEATMAP_MIN_DB),
                    )
                };
                let row0 = (self.grid.ny - 1 - j) * scale;
                for dy in 0..scale {
                    for dx in 0..scale {
                        let p = ((row0 + dy) * w + i * scale + dx) * 3;
                        rgb[p..p + 3].copy_from_slice(&c);
                    }
                }
            }
        }
        render::encode_png(w as u32, h as u32, &rgb)
    }

    /// JSON description of the heatmap colour scale.
    pub fn heatmap_sidecar(&self) -> String {
        let v = serde_json::json!({
            "quantity": "snr_db",
            "carrier_hz": self.carrier_hz,
            "scale_min_db": HEATMAP_MIN_DB,
            "scale_max_db": HEATMAP_MAX_DB,
            "ramp": render::RAMP,
            "excluded_rgb": render::EXCLUDED_RGB,
            "no_signal_rgb": render::NO_SIGNAL_RGB,
            "pixels_per_cell": HEATMAP_PIXELS_PER_CELL,
            "north_up": true,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("static json");
        s.push('\n');
        s
    }
}

pub(crate) fn fmt_db(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.4}")
    }
}

/// Per-site state shared by all cells.
struct SiteModel<'a> {
    site: Site,
    tracer: Tracer<'a>,
    steer: Vec<Vec3>,
    /// One array per carrier.
    arrays: Vec<UpaArray>,
}

#[derive(Clone, Copy)]
struct Best {
    snr: f64,
    gnb: Option<u32>,
    steer: Option<u16>,
}

const NONE: Best = Best {
    snr: f64::NEG_INFINITY,
    gnb: None,
    steer: None,
};

/// Computes maps for several carriers, tracing each (gNB, cell) pair once.
/// Results do not depend on the number of worker threads.
pub fn compute_coverage_maps(
    scene: &Scene,
    deployment: &Deployment,
    carriers: &[Carrier],
    grid: &GridSpec,
    settings: &CoverageSettings,
) -> Result<Vec<CoverageMap>> {
    if deployment.is_empty() {
        return Err(Error::EmptyDeployment);
    }
    if carriers.is_empty() {
        return Err(Error::Domain("no carriers configured".into()));
    }
    if settings.steering.is_empty() {
        return Err(Error::Domain("steering set is empty".into()));
    }
    if !(settings.rx_height_m > 0.0) || !settings.rx_height_m.is_finite() {
        return Err(Error::Domain(format!(
            "receiver height must be > 0 (got {})",
            settings.rx_height_m
        )));
    }
    grid.validate()?;
    let links = carriers
        .iter()
        .map(|c| LinkParams::new(c.bandwidth_hz, settings.noise_figure_db))
        .collect::<Result<Vec<_>>>()?;
    for c in carriers {
        if !(c.carrier_hz > 0.0) || !c.carrier_hz.is_finite() {
            return Err(Error::Domain(format!(
                "invalid carrier {} Hz",
                c.carrier_hz
            )));
        }
    }
    let noise: Vec<f64> = links.iter().map(noise_power_dbm).collect();
    let mut cells = Vec::with_capacity(grid.len());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.center(i, j);
            let q = Vec3::new(x, y, settings.rx_height_m);
            if !scene.contains(q) {
                return Err(Error::Validation(format!(
                    "grid cell ({x}, {y}) lies outside the scene"
                )));
            }
            cells.push(q);
        }
    }

    crate::parallel::with_workers(settings.workers, || {
        let models = deployment
            .sites()
            .par_iter()
            .map(|s| {
                let arrays = carriers
                    .iter()
                    .map(|c| {
                        UpaArray::for_aperture(
                            s.aperture_side_m,
                            c.carrier_hz,
                            s.boresight_azimuth_rad,
                            s.downtilt_deg,
                            settings.element_pattern,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(SiteModel {
                    site: *s,
                    tracer: Tracer::new(scene, s.position, &settings.trace)?,
                    steer: settings.steering.directions(s),
                    arrays,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let per_cell = cells
            .par_iter()
            .map(|&q| {
                if scene.inside_building(q) {
                    return Ok(None);
                }
                evaluate_cell(scene, &models, carriers, &noise, settings.trace.coherent, q)
                    .map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(carriers
            .iter()
            .enumerate()
            .map(|(ci, c)| CoverageMap {
                grid: *grid,
                carrier_hz: c.carrier_hz,
                bandwidth_hz: c.bandwidth_hz,
                noise_dbm: noise[ci],
                snr_db: per_cell
                    .iter()
                    .map(|b| b.as_ref().map_or(f64::NEG_INFINITY, |b| b[ci].snr))
                    .collect(),
                best_gnb: per_cell
                    .iter()
                    .map(|b| b.as_ref().and_then(|b| b[ci].gnb))
                    .collect(),
                best_steering: per_cell
                    .iter()
                    .map(|b| b.as_ref().and_then(|b| b[ci].steer))
                    .collect(),
                excluded: per_cell.iter().map(|b| b.is_none()).collect(),
            })
            .collect())
    })?
}

fn evaluate_cell(
    scene: &Scene,
    models: &[SiteModel],
    carriers: &[Carrier],
    noise: &[f64],
    coherent: bool,
    q: Vec3,
) -> Result<Vec<Best>> {
    let mut best = vec![NONE; carriers.len()];
    let mut gains = Vec::new();
    let mut phases = Vec::new();
    let mut tx_gains = Vec::new();
    for m in models {
        let paths = m.tracer.trace(q)?;
        if paths.is_empty() {
            continue;
        }
        for (ci, c) in carriers.iter().enumerate() {
            gains.clear();
            phases.clear();
            for p in &paths {
                gains.push(p.gain_db(c.carrier_hz, scene.materials()));
                if coherent {
                    phases.push(p.phase_rad(c.carrier_hz, scene.materials()));
                }
            }
            for (si, s) in m.steer.iter().enumerate() {
                tx_gains.clear();
                tx_gains.extend(
                    paths
                        .iter()
                        .map(|p| m.arrays[ci].gain_db_towards(*s, p.departure_dir)),
                );
                let rx = if coherent {
                    received_power_coherent_dbm(
                        &gains,
                        &phases,
                        m.site.tx_power_dbm,
                        &tx_gains,
                        RX_GAIN_DBI,
                    )
                } else {
                    received_power_dbm(&gains, m.site.tx_power_dbm, &tx_gains, RX_GAIN_DBI)
                };
                let snr = snr_db(rx, noise[ci]);
                if snr > best[ci].snr {
                    best[ci] = Best {
                        snr,
                        gnb: Some(m.site.id),
                        steer: Some(si as u16),
                    };
                }
            }
        }
    }
    Ok(best)
}

pub fn compute_coverage_map(
    scene: &Scene,
    deployment: &Deployment,
    carrier: Carrier,
    grid: &GridSpec,
    settings: &CoverageSettings,
) -> Result<CoverageMap> {
    Ok(compute_coverage_maps(scene, deployment, &[carrier], grid, settings)?.remove(0))
}

/// Received power (dBm) at `rx` from one site steered to `steer`, given traced paths.
pub fn link_power_dbm(
    site: &Site,
    array: &UpaArray,
    steer: Vec3,
    paths: &[PathComponent],
    scene: &Scene,
) -> f64 {
    let gains: Vec<f64> = paths
        .iter()
        .map(|p| p.gain_db(array.carrier_hz, scene.materials()))
        .collect();
    let tx: Vec<f64> = paths
        .iter()
        .map(|p| array.gain_db_towards(steer, p.departure_dir))
        .collect();
    received_power_dbm(&gains, site.tx_power_dbm, &tx, RX_GAIN_DBI)
}

/// Covered cells of `map_f` over covered cells of `map_ref`.
pub fn coverage_ratio(
    map_f: &CoverageMap,
    map_ref: &CoverageMap,
    threshold_db: f64,
) -> Result<f64> {
    if map_f.grid != map_ref.grid || map_f.excluded != map_ref.excluded {
        return Err(Error::GridMismatch);
    }
    let den = map_ref.covered_count(threshold_db);
    if den == 0 {
        return Err(Error::DivisionByZero);
    }
    Ok(map_f.covered_count(threshold_db) as f64 / den as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputStats {
    pub mean: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
    pub covered_cells: usize,
}

/// Shannon-rate statistics over covered cells; percentiles interpolate
/// linearly between order statistics.
pub fn throughput_stats(map: &CoverageMap) -> Result<ThroughputStats> {
    let mut rates: Vec<f64> = (0..map.snr_db.len())
        .filter(|&i| map.covered(i, COVERAGE_THRESHOLD_DB))
        .map(|i| map.rate_bps(i))
        .collect();
    rate_stats(&mut rates)
}

pub fn rate_stats(rates: &mut [f64]) -> Result<ThroughputStats> {
    if rates.is_empty() {
        return Err(Error::NoCoveredCells);
    }
    rates.sort_by(f64::total_cmp);
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    Ok(ThroughputStats {
        mean,
        median: percentile(rates, 50.0),
        p5: percentile(rates, 5.0),
        p95: percentile(rates, 95.0),
        covered_cells: rates.len(),
    })
}

/// `sorted` must be ascending and non-empty.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
