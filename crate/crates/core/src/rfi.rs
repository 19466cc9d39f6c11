//! Monte Carlo interference-to-noise analysis at a fixed incumbent receiver,
//! harmful-gNB classification, ranking and suppression planning.

use crate::antenna::{random_steering, ElementPattern, UpaArray};
use crate::coverage::{fmt_db, Carrier};
use crate::deployment::Deployment;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::link::{db_to_linear, inr_db, linear_to_db, noise_power_dbm, power_sum_db, LinkParams};
use crate::raytrace::{received_power_dbm, PathComponent, TraceConfig, Tracer};
use crate::render::{self, Canvas};
use crate::scene::Scene;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const DEFAULT_THRESHOLD_DB: f64 = -10.0;
/// Omnidirectional victim antenna.
pub const INCUMBENT_GAIN_DBI: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Incumbent {
    pub position: Vec3,
    #[serde(default = "default_threshold")]
    pub protection_threshold_db: f64,
    #[serde(default = "default_nf")]
    pub noise_figure_db: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD_DB
}

fn default_nf() -> f64 {
    9.0
}

impl Incumbent {
    pub fn new(position: Vec3) -> Incumbent {
        Incumbent {
            position,
            protection_threshold_db: DEFAULT_THRESHOLD_DB,
            noise_figure_db: default_nf(),
        }
    }

    pub fn validate(&self, scene: &Scene) -> Result<()> {
        if !scene.contains(self.position) {
            return Err(Error::Validation(format!(
                "incumbent {:?} lies outside the scene",
                self.position
            )));
        }
        if !self.protection_threshold_db.is_finite() {
            return Err(Error::Validation(
                "protection threshold must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfiSettings {
    pub iterations: usize,
    pub seed: u64,
    /// Random steering elevation range, degrees above the horizon.
    pub elevation_deg: (f64, f64),
    pub element_pattern: ElementPattern,
    pub trace: TraceConfig,
    pub workers: Option<usize>,
}

impl Default for RfiSettings {
    fn default() -> Self {
        RfiSettings {
            iterations: 500,
            seed: 1,
            elevation_deg: (-30.0, 0.0),
            element_pattern: ElementPattern::Isotropic,
            trace: TraceConfig::default(),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfiEntry {
    pub gnb_id: u32,
    pub carrier_hz: f64,
    pub worst_inr_db: f64,
    /// INR of the linear-mean interference power.
    pub mean_inr_db: f64,
    pub mean_interference_dbm: f64,
    pub worst_interference_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfiReport {
    pub carriers: Vec<Carrier>,
    pub noise_dbm: Vec<f64>,
    pub gnb_ids: Vec<u32>,
    pub gnb_positions: Vec<Vec3>,
    pub incumbent: Incumbent,
    /// `entries[g * carriers.len() + c]`.
    pub entries: Vec<RfiEntry>,
    pub iterations: usize,
    pub seed: u64,
}

impl RfiReport {
    pub fn carrier_index(&self, carrier_hz: f64) -> Result<usize> {
        self.carriers
            .iter()
            .position(|c| (c.carrier_hz - carrier_hz).abs() <= 1e-3)
            .ok_or(Error::UnknownCarrier(carrier_hz))
    }

    pub fn entry(&self, g: usize, c: usize) -> &RfiEntry {
        &self.entries[g * self.carriers.len() + c]
    }

    /// Entries of one carrier, in deployment order.
    pub fn for_carrier(&self, carrier_hz: f64) -> Result<Vec<RfiEntry>> {
        let c = self.carrier_index(carrier_hz)?;
        Ok((0..self.gnb_ids.len()).map(|g| *self.entry(g, c)).collect())
    }

    /// INR of the mean interference averaged linearly over all gNBs.
    pub fn population_mean_inr_db(&self, carrier_hz: f64) -> Result<f64> {
        let es = self.for_carrier(carrier_hz)?;
        let s: f64 = es.iter().map(|e| db_to_linear(e.mean_inr_db)).sum();
        Ok(linear_to_db(s / es.len() as f64))
    }

    pub fn max_worst_inr_db(&self, carrier_hz: f64) -> Result<f64> {
        Ok(self
            .for_carrier(carrier_hz)?
            .iter()
            .map(|e| e.worst_inr_db)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Header comment with seed and iteration count, then one row per (gNB, carrier).
    pub fn to_csv(&self, threshold_db: f64) -> String {
        let harmful = classify_gnbs(self, threshold_db).harmful;
        let mut s = format!("# seed={} iterations={}\n", self.seed, self.iterations);
        s.push_str(
            "gnb_id,carrier_hz,worst_inr_db,mean_inr_db,mean_interference_dbm,harmful_flag\n",
        );
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                e.gnb_id,
                e.carrier_hz,
                fmt_db(e.worst_inr_db),
                fmt_db(e.mean_inr_db),
                fmt_db(e.mean_interference_dbm),
                u8::from(harmful.contains(&e.gnb_id))
            );
        }
        s
    }

    /// Top-down map: buildings in grey, gNB discs sized and coloured by mean
    /// interference, the incumbent as a cross.
    pub fn render_png(&self, scene: &Scene, carrier_hz: f64) -> Result<Vec<u8>> {
        let c = self.carrier_index(carrier_hz)?;
        let b = scene
            .bounds()
            .ok_or_else(|| Error::Domain("scene has no bounds to draw".into()))?;
        let size = 600u32;
        let span = (b.max.x - b.min.x).max(b.max.y - b.min.y).max(1.0);
        let px = |p: Vec3| -> (i64, i64) {
            let x = (p.x - b.min.x) / span * (size - 1) as f64;
            let y = (p.y - b.min.y) / span * (size - 1) as f64;
            (x.round() as i64, (size - 1) as i64 - y.round() as i64)
        };
        let mut cv = Canvas::new(size, size, render::BACKGROUND_RGB);
        for y in 0..size {
            for x in 0..size {
                let wx = b.min.x + x as f64 / (size - 1) as f64 * span;
                let wy = b.min.y + ((size - 1 - y) as f64) / (size - 1) as f64 * span;
                if scene.inside_footprint(wx, wy) {
                    cv.set(x as i64, y as i64, [200, 200, 200]);
                }
            }
        }
        for (g, p) in self.gnb_positions.iter().enumerate() {
            let inr = self.entry(g, c).mean_inr_db;
            let (x, y) = px(*p);
            if inr == f64::NEG_INFINITY {
                cv.fill_circle(x, y, 2, render::NO_SIGNAL_RGB);
                continue;
            }
            // −40 dB and below map to the smallest marker, +20 dB to the largest
            let t = ((inr + 40.0) / 60.0).clamp(0.0, 1.0);
            cv.fill_circle(x, y, 3 + (t * 9.0).round() as i64, render::ramp(t));
        }
        let (x, y) = px(self.incumbent.position);
        cv.cross(x, y, 8, render::NO_SIGNAL_RGB);
        cv.to_png()
    }
}

/// Generator for gNB `id` at iteration `it`. Draws do not depend on which
/// other gNBs are deployed, so removing sites leaves the rest unchanged.
pub fn substream(seed: u64, id: u32, it: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((id as u64) << 32) | it as u64);
    rng
}

/// Every gNB draws one random steering direction per iteration and keeps it
/// for all carriers (common random numbers across bands).
pub fn run_monte_carlo(
    scene: &Scene,
    deployment: &Deployment,
    incumbent: &Incumbent,
    carriers: &[Carrier],
    settings: &RfiSettings,
) -> Result<RfiReport> {
    if deployment.is_empty() {
        return Err(Error::Domain("deployment has no gNBs".into()));
    }
    if carriers.is_empty() {
        return Err(Error::Domain("no carriers configured".into()));
    }
    if settings.iterations == 0 || settings.iterations > u32::MAX as usize {
        return Err(Error::Domain(
            "iteration count must be between 1 and 2^32 - 1".into(),
        ));
    }
    let (el_lo, el_hi) = settings.elevation_deg;
    if !(el_lo <= el_hi) || el_lo < -90.0 || el_hi > 90.0 {
        return Err(Error::Domain(format!(
            "invalid steering elevation range {el_lo}..{el_hi}"
        )));
    }
    incumbent.validate(scene)?;
    let noise = carriers
        .iter()
        .map(|c| {
            LinkParams::new(c.bandwidth_hz, incumbent.noise_figure_db).map(|l| noise_power_dbm(&l))
        })
        .collect::<Result<Vec<_>>>()?;
    let sites = deployment.sites();
    let nc = carriers.len();

    crate::parallel::with_workers(settings.workers, || {
        // static geometry: one trace per gNB, path gains per carrier
        let links = sites
            .par_iter()
            .map(|s| {
                let paths =
                    Tracer::new(scene, s.position, &settings.trace)?.trace(incumbent.position)?;
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
                let gains: Vec<Vec<f64>> = carriers
                    .iter()
                    .map(|c| {
                        paths
                            .iter()
                            .map(|p| p.gain_db(c.carrier_hz, scene.materials()))
                            .collect()
                    })
                    .collect();
                Ok(Link {
                    paths,
                    arrays,
                    gains,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let samples: Vec<Vec<f64>> = (0..settings.iterations)
            .into_par_iter()
            .map(|it| {
                let mut out = Vec::with_capacity(sites.len() * nc);
                let mut tx = Vec::new();
                for (s, l) in sites.iter().zip(&links) {
                    let mut rng = substream(settings.seed, s.id, it);
                    let steer =
                        random_steering(&mut rng, el_lo.to_radians(), el_hi.to_radians()).unit();
                    for c in 0..nc {
                        tx.clear();
                        tx.extend(
                            l.paths
                                .iter()
                                .map(|p| l.arrays[c].gain_db_towards(steer, p.departure_dir)),
                        );
                        out.push(received_power_dbm(
                            &l.gains[c],
                            s.tx_power_dbm,
                            &tx,
                            INCUMBENT_GAIN_DBI,
                        ));
                    }
                }
                out
            })
            .collect();

        let mut entries = Vec::with_capacity(sites.len() * nc);
        for (g, s) in sites.iter().enumerate() {
            for c in 0..nc {
                let k = g * nc + c;
                let (mut worst, mut least, mut sum) = (f64::NEG_INFINITY, f64::INFINITY, 0.0);
                for row in &samples {
                    worst = worst.max(row[k]);
                    least = least.min(row[k]);
                    sum += db_to_linear(row[k]);
                }
                let mean = if worst == least {
                    worst
                } else {
                    linear_to_db(sum / samples.len() as f64).min(worst)
                };
                entries.push(RfiEntry {
                    gnb_id: s.id,
                    carrier_hz: carriers[c].carrier_hz,
                    worst_inr_db: inr_db(worst, noise[c]),
                    mean_inr_db: inr_db(mean, noise[c]),
                    mean_interference_dbm: mean,
                    worst_interference_dbm: worst,
                });
            }
        }
        Ok(RfiReport {
            carriers: carriers.to_vec(),
            noise_dbm: noise.clone(),
            gnb_ids: sites.iter().map(|s| s.id).collect(),
            gnb_positions: sites.iter().map(|s| s.position).collect(),
            incumbent: *incumbent,
            entries,
            iterations: settings.iterations,
            seed: settings.seed,
        })
    })?
}

struct Link {
    paths: Vec<PathComponent>,
    arrays: Vec<UpaArray>,
    gains: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Classification {
    pub safe: Vec<u32>,
    pub harmful: Vec<u32>,
}

/// Harmful: worst-case INR at or above `threshold_db` at any carrier.
pub fn classify_gnbs(report: &RfiReport, threshold_db: f64) -> Classification {
    let mut out = Classification::default();
    for (g, id) in report.gnb_ids.iter().enumerate() {
        let harmful =
            (0..report.carriers.len()).any(|c| report.entry(g, c).worst_inr_db >= threshold_db);
        if harmful {
            out.harmful.push(*id);
        } else {
            out.safe.push(*id);
        }
    }
    out
}

/// gNB ids by mean interference power, strongest first; ties by ascending id.
pub fn rank_interferers(report: &RfiReport, carrier_hz: f64) -> Result<Vec<u32>> {
    let es = report.for_carrier(carrier_hz)?;
    let ids: Vec<u32> = es.iter().map(|e| e.gnb_id).collect();
    let powers: Vec<f64> = es.iter().map(|e| e.mean_interference_dbm).collect();
    Ok(rank_by_power(&ids, &powers))
}

pub fn rank_by_power(ids: &[u32], powers_dbm: &[f64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| {
        powers_dbm[b]
            .total_cmp(&powers_dbm[a])
            .then(ids[a].cmp(&ids[b]))
    });
    order.into_iter().map(|i| ids[i]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuppressionPlan {
    pub carrier_hz: f64,
    pub target_inr_db: f64,
    /// Ranked ids to silence; its length is the minimal `k`.
    pub suppressed: Vec<u32>,
    pub aggregate_inr_before_db: f64,
    pub aggregate_inr_after_db: f64,
    /// Same aggregate computed from worst-case powers, for reference.
    pub worst_case_aggregate_inr_db: f64,
}

/// Shortest prefix of the ranking whose removal brings the aggregate mean
/// INR of the remaining gNBs to `target_inr_db` or below.
pub fn plan_suppression(
    report: &RfiReport,
    carrier_hz: f64,
    target_inr_db: f64,
) -> Result<SuppressionPlan> {
    let c = report.carrier_index(carrier_hz)?;
    let es = report.for_carrier(carrier_hz)?;
    let ids: Vec<u32> = es.iter().map(|e| e.gnb_id).collect();
    let powers: Vec<f64> = es.iter().map(|e| e.mean_interference_dbm).collect();
    let noise = report.noise_dbm[c];
    let k = greedy_suppression_k(&powers, noise, target_inr_db);
    let ranked = rank_by_power(&ids, &powers);
    let suppressed: Vec<u32> = ranked[..k].to_vec();
    let remaining = es.iter().filter(|e| !suppressed.contains(&e.gnb_id));
    let after = inr_db(
        power_sum_db(remaining.map(|e| e.mean_interference_dbm)),
        noise,
    );
    Ok(SuppressionPlan {
        carrier_hz: report.carriers[c].carrier_hz,
        target_inr_db,
        suppressed,
        aggregate_inr_before_db: inr_db(power_sum_db(powers.iter().copied()), noise),
        aggregate_inr_after_db: after,
        worst_case_aggregate_inr_db: inr_db(
            power_sum_db(es.iter().map(|e| e.worst_interference_dbm)),
            noise,
        ),
    })
}

/// Aggregate INR after silencing the strongest `k` values.
pub fn aggregate_after_k(powers_dbm: &[f64], noise_dbm: f64, k: usize) -> f64 {
    let mut sorted = powers_dbm.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    inr_db(
        power_sum_db(sorted[k.min(sorted.len())..].iter().copied()),
        noise_dbm,
    )
}

pub fn greedy_suppression_k(powers_dbm: &[f64], noise_dbm: f64, target_inr_db: f64) -> usize {
    (0..=powers_dbm.len())
        .find(|&k| aggregate_after_k(powers_dbm, noise_dbm, k) <= target_inr_db)
        .unwrap_or(powers_dbm.len())
}

/// Minimal number of silenced interferers over all subsets (exponential;
/// meant as a reference for small instances).
pub fn exhaustive_min_suppression(powers_dbm: &[f64], noise_dbm: f64, target_inr_db: f64) -> usize {
    let n = powers_dbm.len();
    assert!(n <= 20, "exhaustive search is limited to 20 interferers");
    let mut best = n;
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k >= best {
            continue;
        }
        let rest = (0..n)
            .filter(|i| mask & (1 << i) == 0)
            .map(|i| powers_dbm[i]);
        if inr_db(power_sum_db(rest), noise_dbm) <= target_inr_db {
            best = k;
        }
    }
    best
}
