use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cuspidal_atlas::classify::{grid_points, summarize, sweep, transition_scan, Axis, Segment};
use cuspidal_atlas::output::{
    fmt_f64, jointspace_svg, raster_csv, report_json, report_text, section_svg, write_file, SweepWriter,
};
use cuspidal_atlas::topology::{count_aspects, singular_curves};
use cuspidal_atlas::workspace::{critical_value_curves, find_cusps};
use cuspidal_atlas::{classify, section_raster, DesignParams, Error, Settings};

#[derive(Parser)]
#[command(name = "cuspidal-atlas", version, about = "Classify orthogonal 3R positioning manipulators")]
struct Cli {
    /// key = value settings file; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Grid resolution for section rasters and joint-space tracing (power of two)
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Output formats to write
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    d3: f64,
    #[arg(long, allow_negative_numbers = true)]
    r2: f64,
    #[arg(long, allow_negative_numbers = true)]
    d4: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<DesignParams, Error> {
        DesignParams::new(self.d3, self.r2, self.d4)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full classification report
    Classify(ParamArgs),
    /// Posture raster and critical value curves of the (rho, z) section
    Section(ParamArgs),
    /// Singular curves and aspects on the (theta2, theta3) torus
    Jointspace(ParamArgs),
    /// Certified cusp points
    Cusps(ParamArgs),
    /// Classify a parameter grid into a CSV atlas
    Sweep(SweepArgs),
    /// Locate signature changes along a parameter segment
    Scan(ScanArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// d3 axis as START:END:COUNT or a single value
    #[arg(long = "d3", value_parser = parse_axis)]
    d3: Option<Axis>,
    /// r2 axis as START:END:COUNT or a single value
    #[arg(long = "r2", value_parser = parse_axis)]
    r2: Option<Axis>,
    /// d4 axis as START:END:COUNT or a single value
    #[arg(long = "d4", value_parser = parse_axis)]
    d4: Option<Axis>,
    /// File with one `d3,r2,d4` triple per line
    #[arg(long, conflicts_with_all = ["d3", "r2", "d4"])]
    points: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// Segment start as d3,r2,d4
    #[arg(long, value_parser = parse_triple)]
    from: DesignParams,
    /// Segment end as d3,r2,d4
    #[arg(long, value_parser = parse_triple)]
    to: DesignParams,
    #[arg(long, default_value_t = 16)]
    steps: usize,
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}"));
    match parts.as_slice() {
        [v] => {
            let v = num(v)?;
            Ok(Axis { start: v, end: v, count: 1 })
        }
        [a, b, n] => {
            Ok(Axis { start: num(a)?, end: num(b)?, count: n.trim().parse().map_err(|_| format!("bad count {n:?}"))? })
        }
        _ => Err(format!("expected START:END:COUNT, got {s:?}")),
    }
}

fn parse_triple(s: &str) -> Result<DesignParams, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [d3, r2, d4] => DesignParams::new(*d3, *r2, *d4).map_err(|e| e.to_string()),
        _ => Err(format!("expected d3,r2,d4, got {s:?}")),
    }
}

/// Usage and input problems exit with 1, analysis failures with 2.
enum Failure {
    Usage(String),
    Analysis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::InvalidParams(_) | Error::Config(_) | Error::Io { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Analysis(e.to_string()),
        }
    }
}

fn wants(formats: &[Format], f: Format) -> bool {
    formats.is_empty() || formats.contains(&f)
}

fn settings_for(cli: &Cli) -> Result<Settings, Error> {
    let mut s = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    if let Some(r) = cli.resolution {
        s.section_resolution = r;
        s.joint_resolution = r;
        s.joint_resolution_cap = s.joint_resolution_cap.max(r);
    }
    s.validate()?;
    Ok(s)
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let settings = settings_for(cli)?;
    ensure_dir(&cli.out)?;
    let out = |name: &str| cli.out.join(name);
    match &cli.command {
        Command::Classify(a) => {
            let params = a.params()?;
            let report = classify(&params, &settings)?;
            let text = report_text(&report);
            print!("{text}");
            write_file(&out("classify.txt"), &text)?;
            if wants(&cli.format, Format::Json) {
                write_file(&out("classify.json"), &report_json(&report)?)?;
            }
        }
        Command::Section(a) => {
            let params = a.params()?;
            let raster = section_raster(&params, settings.section_resolution, settings.tolerances.cluster_tol)?;
            let curves = critical_value_curves(&params, settings.joint_resolution)?;
            let cusps = find_cusps(&params, &settings)?;
            if wants(&cli.format, Format::Csv) {
                write_file(&out("section.csv"), &raster_csv(&raster))?;
            }
            if wants(&cli.format, Format::Svg) {
                write_file(&out("section.svg"), &section_svg(&params, &raster, &curves, &cusps.cusps))?;
            }
            println!("posture histogram {:?}", raster.histogram());
        }
        Command::Jointspace(a) => {
            let params = a.params()?;
            let curves = singular_curves(&params, settings.joint_resolution)?;
            let aspects = count_aspects(&params, &settings)?;
            if wants(&cli.format, Format::Csv) {
                let mut csv = String::from("curve,origin,theta2,theta3\n");
                for (k, c) in curves.iter().enumerate() {
                    let origin = serde_json::to_string(&c.origin).unwrap_or_default();
                    for &(t2, t3) in &c.points {
                        csv.push_str(&format!("{k},{},{},{}\n", origin.trim_matches('"'), fmt_f64(t2), fmt_f64(t3)));
                    }
                }
                write_file(&out("jointspace.csv"), &csv)?;
            }
            if wants(&cli.format, Format::Svg) {
                write_file(&out("jointspace.svg"), &jointspace_svg(&params, &curves, &aspects))?;
            }
            println!("{} singular curves, {} aspects", curves.len(), aspects.aspect_count());
        }
        Command::Cusps(a) => {
            let params = a.params()?;
            let search = find_cusps(&params, &settings)?;
            let mut csv = String::from("rho,z,theta3,p3\n");
            for c in &search.cusps {
                let line = format!(
                    "{},{},{},{}\n",
                    fmt_f64(c.rho),
                    fmt_f64(c.z),
                    fmt_f64(c.theta3),
                    fmt_f64(c.third_derivative)
                );
                print!("{line}");
                csv.push_str(&line);
            }
            if wants(&cli.format, Format::Csv) {
                write_file(&out("cusps.csv"), &csv)?;
            }
            eprintln!("{} cusps ({} candidates, {} dropped)", search.cusps.len(), search.candidates, search.dropped);
        }
        Command::Sweep(a) => {
            let (points, axes) = match &a.points {
                Some(path) => (read_points(path)?, None),
                None => {
                    let (Some(d3), Some(r2), Some(d4)) = (a.d3, a.r2, a.d4) else {
                        return Err(Failure::Usage("sweep needs --points or all of --d3 --r2 --d4".into()));
                    };
                    (grid_points(&d3, &r2, &d4), Some((d3, r2, d4)))
                }
            };
            if let Some(bad) = points.iter().find(|p| p.validate().is_err()) {
                return Err(Failure::Usage(format!("grid point {bad:?} is not a valid manipulator")));
            }
            let mut hasher = DefaultHasher::new();
            for p in &points {
                fmt_f64(p.d3).hash(&mut hasher);
                fmt_f64(p.r2).hash(&mut hasher);
                fmt_f64(p.d4).hash(&mut hasher);
            }
            format!("{settings:?}").hash(&mut hasher);
            let fingerprint = format!("grid {} {:016x}", points.len(), hasher.finish());
            let csv = out("sweep.csv");
            let mut writer = SweepWriter::open(&csv, &fingerprint)?;
            let mut records = Vec::new();
            for chunk in points[writer.completed()..].chunks(8) {
                let recs = sweep(chunk, &settings);
                writer.append(&recs)?;
                records.extend(recs);
            }
            let failed = records.iter().filter(|r| r.signature.is_none()).count();
            let summary = summarize(&records, axes.as_ref().map(|(a, b, c)| (a, b, c)));
            for (sig, n) in &summary.signatures {
                println!("{n:>6}  {sig}");
            }
            for (d4, zones) in &summary.zones {
                println!("d4 = {d4}: {zones} zones");
            }
            if failed > 0 {
                eprintln!("warning: {failed} grid points failed");
            }
        }
        Command::Scan(a) => {
            let segment = Segment { start: a.from, end: a.to };
            let scan = transition_scan(&segment, a.steps, &settings)?;
            for t in &scan.transitions {
                println!(
                    "s = {:.6}  ({})  ->  ({})  boundary ({})  surface1 {:?} surface2 {:?}",
                    t.s, t.before, t.after, t.at_boundary, t.distance_to_surface1, t.distance_to_surface2
                );
            }
            if wants(&cli.format, Format::Json) {
                let json = serde_json::to_string_pretty(&scan).map_err(|e| Failure::Analysis(e.to_string()))?;
                write_file(&out("scan.json"), &json)?;
            }
        }
    }
    Ok(())
}

fn read_points(path: &Path) -> Result<Vec<DesignParams>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::Usage(format!("bad point line {l:?}")))?;
            match v.as_slice() {
                [d3, r2, d4] => Ok(DesignParams { d3: *d3, r2: *r2, d4: *d4 }),
                _ => Err(Failure::Usage(format!("expected d3,r2,d4 in {l:?}"))),
            }
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("CUSPIDAL_ATLAS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Analysis(m)) => {
            eprintln!("classification failed: {m}");
            ExitCode::from(2)
        }
    }
}
