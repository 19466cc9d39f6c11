//! Seeded Manhattan-grid city and street-level gNB layout used as the
//! bundled example scenario.

use crate::deployment::{DeploymentFile, Gnb};
use crate::geometry::Vec3;
use crate::scene::{ExtentSpec, FootprintSpec, GroundSpec, SceneFile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ManhattanParams {
    pub seed: u64,
    /// Blocks per side.
    pub blocks: usize,
    pub pitch_m: f64,
    pub street_m: f64,
    pub parks: usize,
    pub min_height_m: f64,
    pub max_height_m: f64,
    pub gnbs: usize,
    pub gnb_height_m: (f64, f64),
    /// Distance of gNB poles from the street centreline.
    pub gnb_offset_m: f64,
}

impl Default for ManhattanParams {
    fn default() -> Self {
        ManhattanParams {
            seed: 7,
            blocks: 12,
            pitch_m: 125.0,
            street_m: 25.0,
            parks: 6,
            min_height_m: 10.0,
            max_height_m: 60.0,
            gnbs: 50,
            gnb_height_m: (15.0, 25.0),
            gnb_offset_m: 8.0,
        }
    }
}

impl ManhattanParams {
    pub fn side_m(&self) -> f64 {
        self.blocks as f64 * self.pitch_m
    }
}

fn r2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<[f64; 2]> {
    vec![
        [r2(x0), r2(y0)],
        [r2(x1), r2(y0)],
        [r2(x1), r2(y1)],
        [r2(x0), r2(y1)],
    ]
}

pub fn manhattan_scene(p: &ManhattanParams) -> SceneFile {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.blocks;
    let mut park = vec![false; n * n];
    let mut placed = 0;
    while placed < p.parks.min(n * n) {
        let k = rng.gen_range(0..n * n);
        if !park[k] {
            park[k] = true;
            placed += 1;
        }
    }
    let half = p.street_m / 2.0;
    let mut footprints = Vec::new();
    let height = |rng: &mut ChaCha8Rng| {
        let u: f64 = rng.gen();
        r2(p.min_height_m + (p.max_height_m - p.min_height_m) * u.powf(1.7))
    };
    for j in 0..n {
        for i in 0..n {
            if park[j * n + i] {
                continue;
            }
            let mut sb = || rng.gen_range(0.0..4.0);
            let x0 = i as f64 * p.pitch_m + half + sb();
            let x1 = (i + 1) as f64 * p.pitch_m - half - sb();
            let y0 = j as f64 * p.pitch_m + half + sb();
            let y1 = (j + 1) as f64 * p.pitch_m - half - sb();
            let style: f64 = rng.gen();
            let mut polys = Vec::new();
            if style < 0.08 {
                // L-shaped courtyard building
                let (cx, cy) = (x0 + 0.55 * (x1 - x0), y0 + 0.55 * (y1 - y0));
                polys.push(vec![
                    [r2(x0), r2(y0)],
                    [r2(x1), r2(y0)],
                    [r2(x1), r2(cy)],
                    [r2(cx), r2(cy)],
                    [r2(cx), r2(y1)],
                    [r2(x0), r2(y1)],
                ]);
            } else if style < 0.45 {
                let gap = 6.0;
                let t: f64 = rng.gen_range(0.35..0.65);
                if rng.gen_bool(0.5) {
                    let xm = x0 + t * (x1 - x0);
                    polys.push(rect(x0, y0, xm - gap / 2.0, y1));
                    polys.push(rect(xm + gap / 2.0, y0, x1, y1));
                } else {
                    let ym = y0 + t * (y1 - y0);
                    polys.push(rect(x0, y0, x1, ym - gap / 2.0));
                    polys.push(rect(x0, ym + gap / 2.0, x1, y1));
                }
            } else {
                polys.push(rect(x0, y0, x1, y1));
            }
            for polygon in polys {
                footprints.push(FootprintSpec {
                    polygon,
                    height_m: height(&mut rng),
                    material: if rng.gen_bool(0.2) {
                        "brick".into()
                    } else {
                        "concrete".into()
                    },
                });
            }
        }
    }
    SceneFile {
        origin: None,
        extent: Some(ExtentSpec {
            min: [0.0, 0.0, 0.0],
            max: [p.side_m(), p.side_m(), 200.0],
        }),
        materials: Default::default(),
        ground: GroundSpec::default(),
        footprints,
        mesh: Vec::new(),
    }
}

/// Street-side gNBs spread by farthest-point sampling over mid-block
/// sidewalk positions.
pub fn manhattan_deployment(p: &ManhattanParams) -> DeploymentFile {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5eed_0f_6b);
    let n = p.blocks;
    let mut cand: Vec<([f64; 2], f64)> = Vec::new();
    // streets run along x at y = k·pitch and along y at x = k·pitch
    for k in 1..n {
        let c = k as f64 * p.pitch_m;
        for b in 0..n {
            let mid = (b as f64 + 0.5) * p.pitch_m;
            for s in [-1.0, 1.0] {
                for along in [-25.0, 25.0] {
                    cand.push(([mid + along, c + s * p.gnb_offset_m], 0.0));
                    cand.push((
                        [c + s * p.gnb_offset_m, mid + along],
                        std::f64::consts::FRAC_PI_2,
                    ));
                }
            }
        }
    }
    let first = rng.gen_range(0..cand.len());
    let mut chosen = vec![first];
    let mut dist: Vec<f64> = cand.iter().map(|c| d2(c.0, cand[first].0)).collect();
    while chosen.len() < p.gnbs.min(cand.len()) {
        let mut best = 0;
        for i in 0..cand.len() {
            if dist[i] > dist[best] {
                best = i;
            }
        }
        chosen.push(best);
        for i in 0..cand.len() {
            dist[i] = dist[i].min(d2(cand[i].0, cand[best].0));
        }
    }
    let gnbs = chosen
        .into_iter()
        .enumerate()
        .map(|(id, ci)| {
            let ([x, y], street_dir) = cand[ci];
            let h = r2(rng.gen_range(p.gnb_height_m.0..p.gnb_height_m.1));
            Gnb {
                id: id as u32,
                position: Vec3::new(x, y, h),
                aperture_side_m: None,
                tx_power_dbm: None,
                downtilt_deg: None,
                boresight_azimuth_deg: street_dir.to_degrees(),
            }
        })
        .collect();
    DeploymentFile { gnbs }
}

fn d2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}
