//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use midband::antenna::{random_steering, ElementPattern, UpaArray};
use midband::config::RunConfig;
use midband::coverage::{compute_coverage_map, Carrier, CoverageSettings, GridSpec};
use midband::deployment::{Deployment, Gnb, GnbDefaults};
use midband::geometry::{Aabb, Tri, Vec3};
use midband::link::{noise_power_dbm, LinkParams};
use midband::pipeline::{self, CoverageOutcome, RfiOutcome};
use midband::raytrace::brute_force_reflections;
use midband::raytrace::{trace_paths, PathComponent, PathKind, TraceConfig};
use midband::rfi::{exhaustive_min_suppression, greedy_suppression_k};
use midband::scene::{material, Footprint, Ground, MaterialId, MaterialTable, Scene};
use midband::spectrum::{load_allocations, Band, Proposer, Region, Service, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64, c: Check) -> Check {
    let t = elapsed.as_secs_f64();
    if t > limit_s {
        check(
            false,
            format!("{}; took {t:.1} s, limit {limit_s} s", c.detail),
        )
    } else {
        c
    }
}

fn default_config() -> RunConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../default_config.toml");
    RunConfig::load(&p).unwrap()
}

// 1. link budget
fn link_budget() -> Check {
    let ext = Aabb {
        min: Vec3::new(-10.0, -10.0, 0.0),
        max: Vec3::new(1100.0, 10.0, 50.0),
    };
    let scene = Scene::new(MaterialTable::default(), vec![], vec![], None, Some(ext)).unwrap();
    let gnb = Gnb {
        id: 0,
        position: Vec3::new(0.0, 0.0, 1.5),
        aperture_side_m: None,
        tx_power_dbm: None,
        downtilt_deg: None,
        boresight_azimuth_deg: 0.0,
    };
    let defaults = GnbDefaults::default();
    let dep = Deployment::new(&[gnb], defaults).unwrap();
    let mut worst: f64 = 0.0;
    for d in [10.0, 100.0, 1000.0] {
        let grid = GridSpec {
            origin: [d - 0.5, -0.5],
            cell_m: 1.0,
            nx: 1,
            ny: 1,
        };
        let m = compute_coverage_map(
            &scene,
            &dep,
            Carrier::new(3.5e9),
            &grid,
            &CoverageSettings::default(),
        )
        .unwrap();
        let c = 299_792_458.0;
        let friis = defaults.tx_power_dbm + 20.0 * (c / (4.0 * PI * d * 3.5e9)).log10();
        let noise = -174.0 + 10.0 * 100e6f64.log10() + 9.0;
        worst = worst.max((m.snr_db[0] - (friis - noise)).abs());
    }
    let n100 = noise_power_dbm(&LinkParams::new(100e6, 9.0).unwrap());
    let n400 = noise_power_dbm(&LinkParams::new(400e6, 9.0).unwrap());
    let ok = worst <= 0.1 && (n100 + 85.00).abs() <= 0.01 && (n400 + 78.98).abs() <= 0.01;
    check(
        ok,
        format!("max |SNR - Friis| {worst:.2e} dB (tol 0.1); noise {n100:.2} / {n400:.2} dBm (want -85.00 / -78.98 ±0.01)"),
    )
}

// 2. image method against exhaustive mirror enumeration
fn small_scene(rng: &mut ChaCha8Rng) -> Scene {
    let m = MaterialTable::default();
    let ext = Some(Aabb {
        min: Vec3::new(-100.0, -100.0, 0.0),
        max: Vec3::new(100.0, 100.0, 100.0),
    });
    let ground = rng.gen_bool(0.5).then(|| Ground {
        material: m.id(material::GROUND).unwrap(),
    });
    if rng.gen_bool(0.2) {
        // a box is exactly 10 triangles
        let c = m.id(material::CONCRETE).unwrap();
        let (x, y) = (rng.gen_range(-15.0..5.0), rng.gen_range(-15.0..5.0));
        let (w, d) = (rng.gen_range(3.0..12.0), rng.gen_range(3.0..12.0));
        let fp = Footprint::new(
            vec![[x, y], [x + w, y], [x + w, y + d], [x, y + d]],
            rng.gen_range(4.0..25.0),
            c,
        )
        .unwrap();
        return Scene::new(m, vec![fp], vec![], ground, ext).unwrap();
    }
    let ids: Vec<MaterialId> = m.iter().map(|(id, _)| id).collect();
    let n = rng.gen_range(1..=10);
    let mut tris = Vec::new();
    while tris.len() < n {
        let c = Vec3::new(
            rng.gen_range(-20.0..20.0),
            rng.gen_range(-20.0..20.0),
            rng.gen_range(1.0..20.0),
        );
        let mut v = || {
            c + Vec3::new(
                rng.gen_range(-8.0..8.0),
                rng.gen_range(-8.0..8.0),
                rng.gen_range(-8.0..8.0),
            )
        };
        let t = Tri::new(v(), v(), v());
        if t.area() > 1.0 && t.vertices().iter().all(|p| p.z > 0.0) {
            tris.push((t, ids[rng.gen_range(0..ids.len())]));
        }
    }
    Scene::new(m, vec![], tris, ground, ext).unwrap()
}

fn chain_key(p: &PathComponent) -> Vec<[u64; 3]> {
    // vertices rounded to 1 nm so equal chains sort together
    p.vertices
        .iter()
        .map(|v| [v.x, v.y, v.z].map(|c| ((c + 1e4) * 1e9).round() as u64))
        .collect()
}

fn image_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = TraceConfig {
        max_reflection_order: 2,
        enable_diffraction: false,
        ..TraceConfig::default()
    };
    let (mut scenes, mut links, mut paths, mut bad) = (0, 0, 0, Vec::new());
    while scenes < 50 {
        let s = small_scene(&mut rng);
        assert!(s.triangles().len() <= 10);
        scenes += 1;
        let pt = |rng: &mut ChaCha8Rng| {
            Vec3::new(
                rng.gen_range(-30.0..30.0),
                rng.gen_range(-30.0..30.0),
                rng.gen_range(0.5..25.0),
            )
        };
        for _ in 0..8 {
            let (tx, rx) = (pt(&mut rng), pt(&mut rng));
            if s.inside_building(tx) || s.inside_building(rx) || tx.distance(rx) < 1e-3 {
                continue;
            }
            links += 1;
            let mut got: Vec<PathComponent> = trace_paths(&s, tx, rx, &cfg)
                .unwrap()
                .into_iter()
                .filter(|p| p.kind != PathKind::Los)
                .collect();
            let mut want = brute_force_reflections(&s, tx, rx, 2);
            got.sort_by_key(chain_key);
            want.sort_by_key(chain_key);
            let same = got.len() == want.len()
                && got.iter().zip(&want).all(|(g, w)| {
                    g.vertices.len() == w.vertices.len()
                        && g.vertices
                            .iter()
                            .zip(&w.vertices)
                            .all(|(a, b)| a.distance(*b) < 1e-6)
                        && (g.length - w.length).abs() <= 1e-9
                });
            if !same {
                bad.push(scenes);
            }
            paths += want.len();
        }
    }
    bad.dedup();
    check(
        bad.is_empty() && paths > 0,
        format!(
            "{scenes} scenes, {links} tx/rx pairs, {paths} reflected paths, {} mismatching scenes",
            bad.len()
        ),
    )
}

// 3. array gain law
fn uniform_sphere(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(-PI..PI);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

// steering drawn as in the interference model: any azimuth, 0 to 30° down
fn sphere_mean_db(a: &UpaArray, rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    let mut sum = 0.0;
    for _ in 0..samples {
        let s = random_steering(rng, -PI / 6.0, 0.0).unit();
        sum += a.array_factor(s, uniform_sphere(rng));
    }
    10.0 * (sum / samples as f64).log10()
}

fn array_gain_law() -> (Check, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut peak_err: f64 = 0.0;
    let mut means = Vec::new();
    // the arrays a 4 cm panel holds at 3.5, 12.7 and 28 GHz
    for (f, n) in [(3.5e9, 1usize), (12.7e9, 16), (28e9, 64)] {
        let a = UpaArray::for_aperture(0.04, f, 0.3, -12.0, ElementPattern::Isotropic).unwrap();
        assert_eq!(a.element_count(), n);
        for _ in 0..1000 {
            let s = random_steering(&mut rng, -PI / 2.0, PI / 2.0);
            let g = a.gain_db_towards(s.unit(), s.unit());
            peak_err = peak_err.max((g - 10.0 * (n as f64).log10()).abs());
        }
        means.push((n, a.n_rows, sphere_mean_db(&a, &mut rng, 400_000)));
    }
    let worst_mean = means.iter().map(|m| m.2.abs()).fold(0.0, f64::max);
    let list: Vec<String> = means
        .iter()
        .map(|(n, r, m)| format!("N={n} ({r}x{r}) {m:+.3} dB"))
        .collect();
    // same element counts laid out in a line, for comparison
    let mut lines = Vec::new();
    for n in [16usize, 64] {
        let a = UpaArray::with_elements(1, n, 28e9, 0.3, -12.0, ElementPattern::Isotropic).unwrap();
        lines.push(format!(
            "1x{n} {:+.3} dB",
            sphere_mean_db(&a, &mut rng, 400_000)
        ));
    }
    (
        check(
            peak_err <= 1e-6 && worst_mean <= 0.5,
            format!(
                "peak error {peak_err:.1e} dB (tol 1e-6); sphere mean {} (tol ±0.5)",
                list.join(", ")
            ),
        ),
        format!("line arrays: {}", lines.join(", ")),
    )
}

// 4 and 5. coverage trend and throughput
fn coverage_trend(out: &CoverageOutcome) -> Check {
    let r: Vec<(f64, f64)> = out
        .rows
        .iter()
        .map(|r| (r.carrier.carrier_hz, r.coverage_ratio))
        .collect();
    let get = |f: f64| r.iter().find(|x| (x.0 - f).abs() < 1.0).unwrap().1;
    let seq = [7.125e9, 12.7e9, 18.8e9, 28e9].map(get);
    let monotone = seq.windows(2).all(|w| w[1] <= w[0] + 0.02);
    let gap = get(12.7e9) - get(28e9);
    check(
        monotone && gap >= 0.05,
        format!(
            "coverage ratio 7.125/12.7/18.8/28 GHz = {:.4}/{:.4}/{:.4}/{:.4} (step margin 0.02); 12.7-28 gap {gap:.4} (>= 0.05)",
            seq[0], seq[1], seq[2], seq[3]
        ),
    )
}

fn throughput_gain(out: &CoverageOutcome) -> Check {
    let row = out
        .rows
        .iter()
        .find(|r| (r.carrier.carrier_hz - 12.7e9).abs() < 1.0)
        .unwrap();
    let ratio = row.rate_ratio.unwrap_or(f64::NAN);
    check(
        ratio >= 2.5,
        format!("mean rate 12.7 GHz / 3.5 GHz = {ratio:.3} (>= 2.5)"),
    )
}

// 6. interference trends
fn rfi_trends(out: &RfiOutcome) -> Check {
    let r = &out.report;
    let means: Vec<f64> = r
        .carriers
        .iter()
        .map(|c| r.population_mean_inr_db(c.carrier_hz).unwrap())
        .collect();
    let worsts: Vec<f64> = r
        .carriers
        .iter()
        .map(|c| r.max_worst_inr_db(c.carrier_hz).unwrap())
        .collect();
    let spread = worsts.iter().cloned().fold(f64::MIN, f64::max)
        - worsts.iter().cloned().fold(f64::MAX, f64::min);
    let harmful = out.classification.harmful.len();
    let n = r.gnb_ids.len();
    let ok = means.windows(2).all(|w| w[1] <= w[0]) && spread < 10.0 && 2 * harmful < n;
    let f = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.2}"))
            .collect::<Vec<_>>()
            .join("/")
    };
    check(
        ok,
        format!(
            "{} iterations; mean INR {} dB (non-increasing); max worst INR {} dB, spread {spread:.2} (< 10); harmful {harmful}/{n} (< half)",
            r.iterations,
            f(&means),
            f(&worsts)
        ),
    )
}

// 7. suppression
fn suppression(cfg: &RunConfig, scene: &Scene, dep: &Deployment, out: &RfiOutcome) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut mismatches = 0;
    for _ in 0..100 {
        let noise = -85.0;
        let p: Vec<f64> = (0..10).map(|_| rng.gen_range(-120.0..-70.0)).collect();
        let target = rng.gen_range(-20.0..0.0);
        if greedy_suppression_k(&p, noise, target) != exhaustive_min_suppression(&p, noise, target)
        {
            mismatches += 1;
        }
    }
    let n = dep.len();
    let ks: Vec<usize> = out.plans.iter().map(|p| p.suppressed.len()).collect();
    let planned = out
        .plans
        .iter()
        .all(|p| p.aggregate_inr_after_db <= p.target_inr_db);
    let silenced: BTreeSet<u32> = out
        .plans
        .iter()
        .flat_map(|p| p.suppressed.iter().copied())
        .collect();
    let ids: Vec<u32> = silenced.iter().copied().collect();
    let rerun = pipeline::run_rfi(cfg, scene, &dep.without(&ids)).unwrap();
    let after: Vec<f64> = rerun
        .plans
        .iter()
        .map(|p| p.aggregate_inr_before_db)
        .collect();
    let target = out.plans[0].target_inr_db;
    let ok =
        mismatches == 0 && planned && after.iter().all(|a| *a <= target) && 5 * silenced.len() <= n;
    check(
        ok,
        format!(
            "greedy != exhaustive on {mismatches}/100; k per carrier {ks:?}, {} distinct of {n} (<= 20%); re-run aggregate INR {} dB (<= {target})",
            silenced.len(),
            after.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join("/")
        ),
    )
}

// 8. determinism
fn data_bytes_coverage(out: &CoverageOutcome) -> Vec<Vec<u8>> {
    let mut v: Vec<Vec<u8>> = out.maps.iter().map(|m| m.to_csv().into_bytes()).collect();
    v.extend(out.maps.iter().map(|m| m.render_png().unwrap()));
    v.push(pipeline::coverage_summary_csv(&out.rows).into_bytes());
    v
}

fn data_bytes_rfi(out: &RfiOutcome, scene: &Scene) -> Vec<Vec<u8>> {
    let mut v = vec![
        out.report.to_csv(out.threshold_db).into_bytes(),
        pipeline::suppression_csv(out).into_bytes(),
        pipeline::classification_text(out).into_bytes(),
    ];
    v.extend(
        out.report
            .carriers
            .iter()
            .map(|c| out.report.render_png(scene, c.carrier_hz).unwrap()),
    );
    v
}

fn determinism(cfg: &RunConfig, scene: &Scene, dep: &Deployment) -> Check {
    let mut cov_cfg = cfg.clone();
    cov_cfg.grid = GridSpec {
        origin: [300.0, 300.0],
        cell_m: 10.0,
        nx: 40,
        ny: 40,
    };
    let mut cov = Vec::new();
    let mut rfi = Vec::new();
    for w in [1, 1, 4, 8] {
        cov_cfg.workers = Some(w);
        cov.push(data_bytes_coverage(
            &pipeline::run_coverage(&cov_cfg, scene, dep).unwrap(),
        ));
        let mut rc = cfg.clone();
        rc.workers = Some(w);
        rfi.push(data_bytes_rfi(
            &pipeline::run_rfi(&rc, scene, dep).unwrap(),
            scene,
        ));
    }
    let cov_ok = cov.iter().all(|c| *c == cov[0]);
    let rfi_ok = rfi.iter().all(|r| *r == rfi[0]);
    check(
        cov_ok && rfi_ok,
        format!(
            "workers 1,1,4,8: coverage {} ({} files, 40x40 grid), rfi {} ({} files, {} iterations)",
            if cov_ok { "identical" } else { "DIFFER" },
            cov[0].len(),
            if rfi_ok { "identical" } else { "DIFFER" },
            rfi[0].len(),
            cfg.rfi_section().unwrap().iterations
        ),
    )
}

// 9. spectrum registry
fn spectrum_registry() -> Check {
    let reg = load_allocations(&common::data("allocations_sample.json")).unwrap();
    let (r2, p) = (Region::ItuR2, Status::Primary);
    let mhz = |s: Service| reg.total_allocated_hz(&s, r2, p) as f64 / 1e6;
    let totals = [
        ("MS", mhz(Service::Ms), 11305.0),
        ("FS", mhz(Service::Fs), 9230.0),
        ("FSS", mhz(Service::Fss), 7400.0),
        ("RLS", mhz(Service::Rls), 4750.0),
        ("SR", mhz(Service::Sr), 5635.0),
        ("EESS", mhz(Service::Eess), 5065.0),
    ];
    let sr_n = reg.band_count(&Service::Sr, r2, p);
    let eess_n = reg.band_count(&Service::Eess, r2, p);
    let g = 1_000_000u64;
    let want = vec![
        Band::new(7125 * g, 8500 * g).unwrap(),
        Band::new(10000 * g, 10500 * g).unwrap(),
        Band::new(12200 * g, 13250 * g).unwrap(),
        Band::new(18800 * g, 20200 * g).unwrap(),
    ];
    let cand = reg
        .candidate_intersection(&BTreeSet::from([Proposer::Paper]))
        .unwrap();
    let ok = totals.iter().all(|t| t.1 == t.2) && sr_n == 14 && eess_n == 15 && cand == want;
    let t: Vec<String> = totals
        .iter()
        .map(|t| format!("{} {}", t.0, t.1 / 1e3))
        .collect();
    check(
        ok,
        format!(
            "GHz: {}; SR bands {sr_n}, EESS bands {eess_n}; candidates {}",
            t.join(", "),
            cand.iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Check)> = Vec::new();
    let mut report = |n: usize, name: &'static str, c: Check| {
        println!(
            "{} [{n}] {name}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
        results.push((n, name, c));
    };

    let t = Instant::now();
    let c = link_budget();
    report(1, "link budget", within(t.elapsed(), 1.0, c));

    let t = Instant::now();
    let c = image_oracle();
    report(2, "image-method oracle", within(t.elapsed(), 60.0, c));

    let t = Instant::now();
    let (c, note) = array_gain_law();
    report(3, "array gain law", within(t.elapsed(), 30.0, c));
    println!("     note: {note}");

    let cfg = default_config();
    let (scene, dep) = pipeline::load_inputs(&cfg).unwrap();
    let t = Instant::now();
    let cov = pipeline::run_coverage(&cfg, &scene, &dep).unwrap();
    let cov_time = t.elapsed();
    println!(
        "     coverage run: {}x{} grid, {} carriers, {:.1} s",
        cfg.grid.nx,
        cfg.grid.ny,
        cov.maps.len(),
        cov_time.as_secs_f64()
    );
    report(4, "coverage trend", coverage_trend(&cov));
    report(5, "throughput gain", throughput_gain(&cov));

    let t = Instant::now();
    let rfi = pipeline::run_rfi(&cfg, &scene, &dep).unwrap();
    report(
        6,
        "interference trends",
        within(t.elapsed(), 600.0, rfi_trends(&rfi)),
    );

    let t = Instant::now();
    let c = suppression(&cfg, &scene, &dep, &rfi);
    report(7, "suppression", within(t.elapsed(), 60.0, c));

    report(8, "determinism", determinism(&cfg, &scene, &dep));

    let t = Instant::now();
    let c = spectrum_registry();
    report(9, "spectrum registry", within(t.elapsed(), 1.0, c));

    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.2.pass)
        .map(|r| r.0.to_string())
        .collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
