//! End-to-end coverage and interference runs and their output files.
//! Data files carry no timestamps; `run_info.txt` holds the wall-clock time.

use crate::config::RunConfig;
use crate::coverage::{
    compute_coverage_maps, coverage_ratio, mhz_label, throughput_stats, Carrier, CoverageMap,
    ThroughputStats,
};
use crate::deployment::{load_deployment, Deployment};
use crate::error::{Error, Result};
use crate::rfi::{
    classify_gnbs, plan_suppression, run_monte_carlo, Classification, RfiReport, SuppressionPlan,
};
use crate::scene::{load_scene, MaterialTable, Scene};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Writes via a temporary file in the same directory and a rename, so the
/// target is either complete or absent.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let out = |e| Error::Output {
        path: path.to_path_buf(),
        source: e,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(out)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(out)?;
    tmp.write_all(bytes).map_err(out)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(out)?;
    }
    tmp.as_file().sync_all().map_err(out)?;
    tmp.persist(path).map_err(|e| out(e.error))?;
    Ok(())
}

pub fn load_inputs(cfg: &RunConfig) -> Result<(Scene, Deployment)> {
    let scene = load_scene(&cfg.scene, &MaterialTable::default())?;
    let dep = load_deployment(&cfg.deployment, cfg.gnb_defaults())?;
    dep.check_against(&scene)?;
    Ok((scene, dep))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub carrier: Carrier,
    pub outdoor_cells: usize,
    pub covered_cells: usize,
    pub coverage_ratio: f64,
    pub stats: Option<ThroughputStats>,
    /// Mean rate over the reference carrier's mean rate.
    pub rate_ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CoverageOutcome {
    pub maps: Vec<CoverageMap>,
    pub rows: Vec<CoverageRow>,
    pub reference: usize,
}

pub fn run_coverage(cfg: &RunConfig, scene: &Scene, dep: &Deployment) -> Result<CoverageOutcome> {
    let carriers = cfg.carriers();
    let reference = cfg
        .reference_carrier()
        .ok_or_else(|| Error::Config("reference carrier missing".into()))?;
    let maps = compute_coverage_maps(scene, dep, &carriers, &cfg.grid, &cfg.coverage_settings())?;
    let rows = summarize(&maps, reference, cfg.coverage.threshold_db)?;
    Ok(CoverageOutcome {
        maps,
        rows,
        reference,
    })
}

pub fn summarize(
    maps: &[CoverageMap],
    reference: usize,
    threshold_db: f64,
) -> Result<Vec<CoverageRow>> {
    let ref_stats = throughput_stats(&maps[reference]).ok();
    maps.iter()
        .map(|m| {
            let stats = throughput_stats(m).ok();
            Ok(CoverageRow {
                carrier: Carrier {
                    carrier_hz: m.carrier_hz,
                    bandwidth_hz: m.bandwidth_hz,
                },
                outdoor_cells: m.outdoor_count(),
                covered_cells: m.covered_count(threshold_db),
                coverage_ratio: coverage_ratio(m, &maps[reference], threshold_db)?,
                stats,
                rate_ratio: match (stats, ref_stats) {
                    (Some(s), Some(r)) => Some(s.mean / r.mean),
                    _ => None,
                },
            })
        })
        .collect()
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_default()
}

pub fn coverage_summary_csv(rows: &[CoverageRow]) -> String {
    let mut s = String::from(
        "carrier_hz,bandwidth_hz,outdoor_cells,covered_cells,coverage_ratio,mean_rate_bps,median_rate_bps,p5_rate_bps,p95_rate_bps,mean_rate_ratio_vs_reference\n",
    );
    for r in rows {
        let st = r.stats;
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6},{},{},{},{},{}",
            r.carrier.carrier_hz,
            r.carrier.bandwidth_hz,
            r.outdoor_cells,
            r.covered_cells,
            r.coverage_ratio,
            opt(st.map(|x| x.mean), 1),
            opt(st.map(|x| x.median), 1),
            opt(st.map(|x| x.p5), 1),
            opt(st.map(|x| x.p95), 1),
            opt(r.rate_ratio, 6)
        );
    }
    s
}

pub fn coverage_summary_text(rows: &[CoverageRow], reference: &Carrier) -> String {
    let mut s = format!(
        "Coverage relative to {} MHz (SNR >= 0 dB, outdoor cells)\n\n",
        mhz_label(reference.carrier_hz)
    );
    let _ = writeln!(
        s,
        "{:>9} {:>7} {:>9} {:>9} {:>12} {:>12} {:>12} {:>9}",
        "carrier", "BW", "covered", "ratio", "mean", "p5", "p95", "x ref"
    );
    for r in rows {
        let gb = |v: Option<f64>| {
            v.map(|x| format!("{:.3} Gb/s", x / 1e9))
                .unwrap_or_else(|| "-".into())
        };
        let _ = writeln!(
            s,
            "{:>5} MHz {:>3} MHz {:>4}/{:<4} {:>9.3} {:>12} {:>12} {:>12} {:>9}",
            mhz_label(r.carrier.carrier_hz),
            mhz_label(r.carrier.bandwidth_hz),
            r.covered_cells,
            r.outdoor_cells,
            r.coverage_ratio,
            gb(r.stats.map(|x| x.mean)),
            gb(r.stats.map(|x| x.p5)),
            gb(r.stats.map(|x| x.p95)),
            r.rate_ratio
                .map(|x| format!("{x:.2}"))
                .unwrap_or_else(|| "-".into())
        );
    }
    s
}

/// Writes maps, heatmaps with scale sidecars and the summary; returns the paths.
pub fn write_coverage(out: &CoverageOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut put = |name: String, bytes: &[u8]| -> Result<()> {
        let p = dir.join(name);
        write_atomic(&p, bytes)?;
        files.push(p);
        Ok(())
    };
    for m in &out.maps {
        let label = mhz_label(m.carrier_hz);
        put(format!("coverage_{label}.csv"), m.to_csv().as_bytes())?;
        put(format!("coverage_{label}.png"), &m.render_png()?)?;
        put(
            format!("coverage_{label}.png.json"),
            m.heatmap_sidecar().as_bytes(),
        )?;
    }
    put(
        "coverage_summary.csv".into(),
        coverage_summary_csv(&out.rows).as_bytes(),
    )?;
    let reference = out.rows[out.reference].carrier;
    put(
        "coverage_summary.txt".into(),
        coverage_summary_text(&out.rows, &reference).as_bytes(),
    )?;
    Ok(files)
}

#[derive(Debug, Clone)]
pub struct RfiOutcome {
    pub report: RfiReport,
    pub classification: Classification,
    pub plans: Vec<SuppressionPlan>,
    pub threshold_db: f64,
}

pub fn run_rfi(cfg: &RunConfig, scene: &Scene, dep: &Deployment) -> Result<RfiOutcome> {
    let section = cfg.rfi_section()?;
    let carriers = cfg.rfi_carriers()?;
    let report = run_monte_carlo(
        scene,
        dep,
        &cfg.incumbent()?,
        &carriers,
        &cfg.rfi_settings()?,
    )?;
    let classification = classify_gnbs(&report, section.threshold_db);
    let plans = carriers
        .iter()
        .map(|c| plan_suppression(&report, c.carrier_hz, section.target_inr_db))
        .collect::<Result<Vec<_>>>()?;
    Ok(RfiOutcome {
        report,
        classification,
        plans,
        threshold_db: section.threshold_db,
    })
}

pub fn suppression_csv(out: &RfiOutcome) -> String {
    let mut s = format!(
        "# seed={} iterations={}\n",
        out.report.seed, out.report.iterations
    );
    s.push_str("carrier_hz,k,suppressed_ids,aggregate_inr_before_db,aggregate_inr_after_db,worst_case_aggregate_inr_db,target_inr_db\n");
    for p in &out.plans {
        let ids: Vec<String> = p.suppressed.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.carrier_hz,
            p.suppressed.len(),
            ids.join(";"),
            crate::coverage::fmt_db(p.aggregate_inr_before_db),
            crate::coverage::fmt_db(p.aggregate_inr_after_db),
            crate::coverage::fmt_db(p.worst_case_aggregate_inr_db),
            p.target_inr_db
        );
    }
    s
}

pub fn rfi_summary_text(out: &RfiOutcome) -> String {
    let r = &out.report;
    let mut s = format!(
        "Interference at incumbent ({:.1}, {:.1}, {:.1}) m, seed {}, {} iterations\n",
        r.incumbent.position.x,
        r.incumbent.position.y,
        r.incumbent.position.z,
        r.seed,
        r.iterations
    );
    let _ = writeln!(
        s,
        "harmful (worst INR >= {} dB at any carrier): {} of {}: {:?}",
        out.threshold_db,
        out.classification.harmful.len(),
        r.gnb_ids.len(),
        out.classification.harmful
    );
    let _ = writeln!(
        s,
        "\n{:>9} {:>14} {:>14} {:>4} {:>12}  suppressed",
        "carrier", "mean INR (dB)", "max worst", "k", "after (dB)"
    );
    for (c, p) in r.carriers.iter().zip(&out.plans) {
        let _ = writeln!(
            s,
            "{:>5} MHz {:>14.2} {:>14.2} {:>4} {:>12}  {:?}",
            mhz_label(c.carrier_hz),
            r.population_mean_inr_db(c.carrier_hz).unwrap_or(f64::NAN),
            r.max_worst_inr_db(c.carrier_hz).unwrap_or(f64::NAN),
            p.suppressed.len(),
            crate::coverage::fmt_db(p.aggregate_inr_after_db),
            p.suppressed
        );
    }
    s
}

pub fn classification_text(out: &RfiOutcome) -> String {
    let ids = |v: &[u32]| {
        v.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!(
        "# seed={} iterations={} threshold_db={}\nharmful={}\nsafe={}\n",
        out.report.seed,
        out.report.iterations,
        out.threshold_db,
        ids(&out.classification.harmful),
        ids(&out.classification.safe)
    )
}

pub fn write_rfi(out: &RfiOutcome, scene: &Scene, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut put = |name: String, bytes: &[u8]| -> Result<()> {
        let p = dir.join(name);
        write_atomic(&p, bytes)?;
        files.push(p);
        Ok(())
    };
    put(
        "rfi_report.csv".into(),
        out.report.to_csv(out.threshold_db).as_bytes(),
    )?;
    put(
        "rfi_classification.txt".into(),
        classification_text(out).as_bytes(),
    )?;
    put(
        "rfi_suppression.csv".into(),
        suppression_csv(out).as_bytes(),
    )?;
    put("rfi_summary.txt".into(), rfi_summary_text(out).as_bytes())?;
    for c in &out.report.carriers {
        put(
            format!("rfi_{}.png", mhz_label(c.carrier_hz)),
            &out.report.render_png(scene, c.carrier_hz)?,
        )?;
    }
    Ok(files)
}

/// Run metadata, including the only timestamp any run writes.
pub fn write_run_info(
    dir: &Path,
    command: &str,
    cfg_path: &Path,
    seed: Option<u64>,
) -> Result<PathBuf> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut s = format!(
        "command={command}\nconfig={}\nversion={}\ngenerated_unix_s={now}\n",
        cfg_path.display(),
        env!("CARGO_PKG_VERSION")
    );
    if let Some(seed) = seed {
        let _ = writeln!(s, "seed={seed}");
    }
    let p = dir.join("run_info.txt");
    write_atomic(&p, s.as_bytes())?;
    Ok(p)
}
