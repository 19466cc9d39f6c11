//! `midband` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error (including missing
//! input files), 3 malformed input data, 4 computation failure.

use clap::{Args, CommandFactory, Parser, Subcommand};
use midband::config::{RunConfig, OUTPUT_DIR_ENV};
use midband::geometry::Vec3;
use midband::pipeline;
use midband::spectrum::{self, AllocationRegistry, Band, Proposer, Region, Service, Status};
use midband::{Error, ErrorClass, Result};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "midband",
    version,
    about = "Multi-band coverage, interference and spectrum tool"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true, default_value = "default_config.toml")]
    config: PathBuf,
    /// Output directory; overrides the config file.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// Worker threads. Outputs do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ray-traced coverage maps and the per-carrier summary.
    Coverage,
    /// Incumbent interference Monte Carlo, classification and suppression plan.
    Rfi {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Harmful-interferer threshold on worst-case INR.
        #[arg(long, allow_hyphen_values = true)]
        threshold_db: Option<f64>,
        /// Aggregate mean INR the suppression plan must reach.
        #[arg(long, allow_hyphen_values = true)]
        target_inr_db: Option<f64>,
    },
    /// Query the spectrum allocation registry.
    Bands {
        /// Allocation file; defaults to the one named in the config.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[command(flatten)]
        query: BandsQuery,
    },
    /// Check that the config, scene, deployment and registry load and agree.
    Validate,
}

#[derive(Args, Debug)]
struct BandsQuery {
    /// Total allocated bandwidth of a service (MS, FS, FSS, RLS, SR, EESS, ...).
    #[arg(long, value_parser = parse_service)]
    total: Option<Service>,
    #[arg(long, value_parser = parse_region, default_value = "ITU-R2")]
    region: Region,
    /// Restrict --total to one status; both are counted when omitted.
    #[arg(long, value_parser = parse_status)]
    status: Option<Status>,
    /// Records overlapping a range such as 12.2GHz:13.25GHz.
    #[arg(long, value_parser = parse_range)]
    at: Option<Band>,
    /// Two comma-separated services: share of the first's bandwidth also
    /// allocated to the second, e.g. FS,FSS.
    #[arg(long, value_delimiter = ',', num_args = 1, value_parser = parse_service)]
    overlap: Option<Vec<Service>>,
    /// Comma-separated proposers; prints bands every one of them proposes.
    #[arg(long, value_delimiter = ',', value_parser = parse_proposer)]
    candidates: Option<Vec<Proposer>>,
}

fn parse_service(s: &str) -> std::result::Result<Service, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_region(s: &str) -> std::result::Result<Region, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_status(s: &str) -> std::result::Result<Status, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_proposer(s: &str) -> std::result::Result<Proposer, String> {
    s.trim().parse().map_err(|e: Error| e.to_string())
}

fn parse_range(s: &str) -> std::result::Result<Band, String> {
    spectrum::parse_band(s).map_err(|e| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Compute => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&cli.config)?;
    cfg.apply_output_override(cli.output_dir.clone(), None);
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Coverage => cmd_coverage(&cli),
        Command::Rfi {
            seed,
            iterations,
            threshold_db,
            target_inr_db,
        } => cmd_rfi(&cli, *seed, *iterations, *threshold_db, *target_inr_db),
        Command::Bands { registry, query } => {
            let path = match registry {
                Some(p) => p.clone(),
                None => load_config(&cli)?.allocations.ok_or_else(|| {
                    Error::Config(
                        "no --registry given and the config names no allocations file".into(),
                    )
                })?,
            };
            let reg = spectrum::load_allocations(&path)?;
            print!("{}", bands_report(&reg, query)?);
            Ok(())
        }
        Command::Validate => cmd_validate(&cli),
    }
}

fn cmd_coverage(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let (scene, dep) = pipeline::load_inputs(&cfg)?;
    let out = pipeline::run_coverage(&cfg, &scene, &dep)?;
    let files = pipeline::write_coverage(&out, &cfg.output_dir)?;
    pipeline::write_run_info(&cfg.output_dir, "coverage", &cli.config, None)?;
    let reference = out.rows[out.reference].carrier;
    print!("{}", pipeline::coverage_summary_text(&out.rows, &reference));
    eprintln!(
        "wrote {} files to {}",
        files.len() + 1,
        cfg.output_dir.display()
    );
    Ok(())
}

fn cmd_rfi(
    cli: &Cli,
    seed: Option<u64>,
    iterations: Option<usize>,
    threshold_db: Option<f64>,
    target_inr_db: Option<f64>,
) -> Result<()> {
    let mut cfg = load_config(cli)?;
    let section = cfg
        .rfi
        .as_mut()
        .ok_or_else(|| Error::Config("configuration has no [rfi] section".into()))?;
    if let Some(s) = seed {
        section.seed = s;
    }
    if let Some(n) = iterations {
        section.iterations = n;
    }
    if let Some(t) = threshold_db {
        section.threshold_db = t;
    }
    if let Some(t) = target_inr_db {
        section.target_inr_db = t;
    }
    let seed = section.seed;
    cfg.validate()?;
    let (scene, dep) = pipeline::load_inputs(&cfg)?;
    let out = pipeline::run_rfi(&cfg, &scene, &dep)?;
    let files = pipeline::write_rfi(&out, &scene, &cfg.output_dir)?;
    pipeline::write_run_info(&cfg.output_dir, "rfi", &cli.config, Some(seed))?;
    print!("{}", pipeline::rfi_summary_text(&out));
    eprintln!(
        "wrote {} files to {}",
        files.len() + 1,
        cfg.output_dir.display()
    );
    Ok(())
}

fn cmd_validate(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let (scene, dep) = pipeline::load_inputs(&cfg)?;
    let g = &cfg.grid;
    let (x0, y0) = g.center(0, 0);
    let (x1, y1) = g.center(g.nx - 1, g.ny - 1);
    for (x, y) in [(x0, y0), (x1, y1)] {
        if !scene.contains(Vec3::new(x, y, cfg.rx_height_m)) {
            return Err(Error::Config(format!(
                "grid cell centre ({x}, {y}) lies outside the scene"
            )));
        }
    }
    println!("config   {}", cli.config.display());
    println!(
        "scene    {}: {} buildings, {} triangles",
        cfg.scene.display(),
        scene.prisms().len(),
        scene.building_triangle_count()
    );
    let area_m2 = scene
        .bounds()
        .map(|b| (b.max.x - b.min.x) * (b.max.y - b.min.y))
        .unwrap_or(0.0);
    println!(
        "gNBs     {}: {} sites, {:.1} per km2",
        cfg.deployment.display(),
        dep.len(),
        dep.density_per_km2(area_m2)
    );
    println!("grid     {} x {} cells of {} m", g.nx, g.ny, g.cell_m);
    if let Some(p) = &cfg.allocations {
        let reg = spectrum::load_allocations(p)?;
        println!(
            "bands    {}: {} records, {} candidates",
            p.display(),
            reg.records().len(),
            reg.candidates().len()
        );
    }
    if let Some(r) = &cfg.rfi {
        println!(
            "rfi      incumbent ({}, {}, {}), {} iterations, seed {}",
            r.incumbent.x, r.incumbent.y, r.incumbent.z, r.iterations, r.seed
        );
    }
    println!("ok");
    Ok(())
}

fn union_hz(
    reg: &AllocationRegistry,
    service: &Service,
    region: Region,
    status: Option<Status>,
) -> (u64, usize) {
    let bands: Vec<Band> = reg
        .records()
        .iter()
        .filter(|r| {
            r.service == *service && r.region == region && status.map_or(true, |s| r.status == s)
        })
        .map(|r| r.band)
        .collect();
    let u = spectrum::union(bands);
    (u.iter().map(Band::width_hz).sum(), u.len())
}

fn bands_report(reg: &AllocationRegistry, q: &BandsQuery) -> Result<String> {
    let mut s = String::new();
    let (region, status) = (q.region, q.status);
    let any_query =
        q.total.is_some() || q.at.is_some() || q.overlap.is_some() || q.candidates.is_some();
    if let Some(svc) = &q.total {
        let (hz, n) = union_hz(reg, svc, region, status);
        let st = status.map_or("all".to_string(), |x| x.to_string());
        let _ = writeln!(
            s,
            "{svc} {region} {st}: {} GHz in {n} bands",
            spectrum::ghz(hz)
        );
    }
    if let Some(band) = q.at {
        let _ = writeln!(s, "records overlapping {band}:");
        let _ = writeln!(
            s,
            "{:<14} {:<22} {:<7} {:<10} notes",
            "service", "band", "region", "status"
        );
        for r in reg.records_at(band) {
            let _ = writeln!(
                s,
                "{:<14} {:<22} {:<7} {:<10} {}",
                r.service.to_string(),
                r.band.to_string(),
                r.region.to_string(),
                r.status.to_string(),
                r.notes
            );
        }
    }
    if let Some(pair) = &q.overlap {
        let [a, b] = pair.as_slice() else {
            return Err(Error::Config("--overlap takes exactly two services".into()));
        };
        let st = status.unwrap_or(Status::Primary);
        match reg.overlap_fraction(a, b, region, st) {
            Some(f) => {
                let _ = writeln!(
                    s,
                    "{a} {region} {st}: {:.1}% also allocated to {b}",
                    100.0 * f
                );
            }
            None => {
                let _ = writeln!(s, "{a} {region} {st}: nothing allocated");
            }
        }
    }
    if let Some(ps) = &q.candidates {
        let set: BTreeSet<Proposer> = ps.iter().copied().collect();
        let names: Vec<String> = set.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(s, "candidate bands proposed by {}:", names.join(", "));
        for b in reg.candidate_intersection(&set)? {
            let _ = writeln!(s, "  {b}");
        }
    }
    if !any_query {
        let mut keys: BTreeSet<(Service, Region, Status)> = BTreeSet::new();
        for r in reg.records() {
            keys.insert((r.service.clone(), r.region, r.status));
        }
        let _ = writeln!(
            s,
            "{:<14} {:<7} {:<10} {:>12} {:>6}",
            "service", "region", "status", "total GHz", "bands"
        );
        for (svc, rg, st) in keys {
            let _ = writeln!(
                s,
                "{:<14} {:<7} {:<10} {:>12} {:>6}",
                svc.to_string(),
                rg.to_string(),
                st.to_string(),
                spectrum::ghz(reg.total_allocated_hz(&svc, rg, st)),
                reg.band_count(&svc, rg, st)
            );
        }
        let _ = writeln!(s, "\ncandidates:");
        for c in reg.candidates() {
            let _ = writeln!(
                s,
                "  {:<22} {:<6} {}",
                c.band.to_string(),
                c.proposer.to_string(),
                c.rationale
            );
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_by_class() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(
            exit_code(&Error::io(
                Path::new("a"),
                std::io::ErrorKind::NotFound.into()
            )),
            2
        );
        assert_eq!(exit_code(&Error::Validation("x".into())), 3);
        assert_eq!(exit_code(&Error::EmptyDeployment), 4);
    }

    #[test]
    fn range_parser_rejects_garbage() {
        assert!(parse_range("12.2GHz:13.25GHz").is_ok());
        assert!(parse_range("12.2GHz-13.25GHz").is_err());
        assert!(parse_range("13GHz:12GHz").is_err());
    }
}
