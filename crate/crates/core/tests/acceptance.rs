//! Acceptance criteria, one line per criterion. Exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use cuspidal_atlas::classify::{sweep, transition_scan, Segment};
use cuspidal_atlas::kinematics::{jacobian, solve_ik, IkOptions};
use cuspidal_atlas::output::report_json;
use cuspidal_atlas::quartic::{real_roots, Quartic};
use cuspidal_atlas::{
    classify, find_cusps, fk, jacobian_det, section_raster, ClassificationReport, DesignParams, JointConfig, Kind,
    Settings,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(problems: Vec<String>, ok: String) -> Outcome {
    if problems.is_empty() {
        Outcome { pass: true, detail: ok }
    } else {
        Outcome { pass: false, detail: problems.join("; ") }
    }
}

fn reference_reports(settings: &Settings) -> Vec<ClassificationReport> {
    common::ROWS.iter().map(|r| classify(&r.params(), settings).expect("reference rows classify")).collect()
}

fn golden_suite(reports: &[ClassificationReport], secs: f64) -> Outcome {
    let mut bad = Vec::new();
    for (r, rep) in common::ROWS.iter().zip(reports) {
        if rep.aspects != r.aspects {
            bad.push(format!("({}) aspects {} expected {}", r.label, rep.aspects, r.aspects));
        }
        if rep.cuspidal != r.cuspidal {
            bad.push(format!("({}) cuspidal {} expected {}", r.label, rep.cuspidal, r.cuspidal));
        }
        if rep.class != r.class {
            bad.push(format!("({}) class {} expected {}", r.label, rep.class, r.class));
        }
    }
    if secs > 120.0 {
        bad.push(format!("took {secs:.1} s"));
    }
    outcome(bad, format!("8 rows match in {secs:.1} s"))
}

fn cusp_suite(reports: &[ClassificationReport], settings: &Settings) -> Outcome {
    let mut bad = Vec::new();
    for (r, rep) in common::ROWS.iter().zip(reports) {
        if rep.cusps != r.cusps {
            bad.push(format!("({}) {} cusps expected {}", r.label, rep.cusps, r.cusps));
        }
    }
    let pocket = common::pocket_design();
    let pocket_cusps = find_cusps(&pocket, settings).expect("cusp search").cusps;
    if pocket_cusps.len() != 4 {
        bad.push(format!("pocket design has {} cusps", pocket_cusps.len()));
    }
    let raster = section_raster(&pocket, settings.section_resolution, settings.tolerances.cluster_tol).expect("raster");
    let h = raster.histogram();
    if h[4] == 0 || h[2] == 0 {
        bad.push(format!("pocket design section histogram {h:?} lacks a 4- or 2-posture region"));
    }

    let mut fine = *settings;
    fine.joint_resolution *= 2;
    fine.joint_resolution_cap = fine.joint_resolution_cap.max(fine.joint_resolution);
    let mut worst: f64 = 0.0;
    let designs: Vec<DesignParams> = common::ROWS.iter().map(|r| r.params()).chain([pocket]).collect();
    for p in &designs {
        let a = find_cusps(p, settings).expect("cusp search").cusps;
        let b = find_cusps(p, &fine).expect("cusp search").cusps;
        if a.len() != b.len() {
            bad.push(format!("{p:?}: {} cusps become {} at double resolution", a.len(), b.len()));
            continue;
        }
        for c in &a {
            let d = b.iter().map(|k| (k.rho - c.rho).hypot(k.z - c.z)).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    if worst > 1e-3 {
        bad.push(format!("cusp moved {worst:.2e} under resolution doubling"));
    }
    outcome(bad, format!("all counts exact, largest shift {worst:.1e}"))
}

fn meta_rules(settings: &Settings) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_24);
    let (lo, hi, n) = (0.05, 2.0, 5);
    let cell = (hi - lo) / n as f64;
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let at = |m: usize, rng: &mut ChaCha8Rng| lo + (m as f64 + rng.gen_range(0.0..1.0)) * cell;
                let d3 = at(i, &mut rng);
                let r2 = at(j, &mut rng);
                let d4 = at(k, &mut rng);
                pts.push(DesignParams::new(d3, r2, d4).unwrap());
            }
        }
    }
    let records = sweep(&pts, settings);
    let mut bad = Vec::new();
    let mut ok = 0;
    for rec in &records {
        let Some(s) = &rec.signature else { continue };
        ok += 1;
        let p = rec.params;
        if s.cusps == 0 && !(s.kind == Kind::Binary && s.generic) {
            bad.push(format!("({:.4},{:.4},{:.4}) 0 cusps but {s}", p.d3, p.r2, p.d4));
        }
        if s.cusps == 2 && !(s.kind == Kind::Quaternary && !s.generic && s.aspects == 4) {
            bad.push(format!("({:.4},{:.4},{:.4}) 2 cusps but {s}", p.d3, p.r2, p.d4));
        }
        if s.generic && s.kind == Kind::Quaternary && !(s.aspects == 2 && s.class == "2(1,0)") {
            bad.push(format!("({:.4},{:.4},{:.4}) generic quaternary but {s}", p.d3, p.r2, p.d4));
        }
    }
    let failed = records.len() - ok;
    let mut o = outcome(bad, format!("{ok} of {} classified, no violations", records.len()));
    if !o.pass {
        o.detail = format!("{ok} of {} classified; {}", records.len(), o.detail);
    }
    if failed > 0 {
        o.detail.push_str(&format!(" ({failed} points failed to classify)"));
    }
    o
}

fn round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = IkOptions::default();
    let mut bad = Vec::new();
    for _ in 0..1000 {
        let p =
            DesignParams::new(rng.gen_range(0.05..2.0), rng.gen_range(0.05..2.0), rng.gen_range(0.05..2.0)).unwrap();
        let q = JointConfig::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let x = fk(&p, &q);
        match solve_ik(&p, &x, &opts) {
            Ok(sols) => {
                if !sols.iter().any(|s| s.max_angle_dist(&q) < 1e-6) {
                    bad.push(format!("{q:?} not recovered for {p:?}"));
                }
                let eps = 1e-8 * (1.0 + x.norm());
                if let Some(s) = sols.iter().find(|s| fk(&p, s).dist(&x) > eps) {
                    bad.push(format!("{s:?} maps {:.2e} from target", fk(&p, s).dist(&x)));
                }
            }
            Err(e) => bad.push(format!("{p:?} {q:?}: {e}")),
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p =
            DesignParams::new(rng.gen_range(0.05..2.0), rng.gen_range(0.05..2.0), rng.gen_range(0.05..2.0)).unwrap();
        let (t2, t3) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let fd = fd_det(&p, t2, t3);
        let exact = jacobian_det(&p, t2, t3);
        // Relative to the Hadamard bound, so samples near singularities stay meaningful.
        let j = jacobian(&p, &JointConfig::new(0.0, t2, t3));
        let bound: f64 = (0..3).map(|c| j.column(c).norm()).product();
        let rel = (exact - fd).abs() / bound.max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    if worst > 1e-5 {
        bad.push(format!("Jacobian determinant relative error {worst:.2e}"));
    }
    let n = bad.len();
    if n > 5 {
        bad.truncate(5);
        bad.push(format!("{} more", n - 5));
    }
    outcome(bad, format!("1000 IK round trips, 1000 determinant checks (worst rel {worst:.1e})"))
}

/// Central-difference Jacobian of `fk`, independent of the analytic one.
fn fd_det(p: &DesignParams, t2: f64, t3: f64) -> f64 {
    let h = 1e-6;
    let q = [0.0, t2, t3];
    let mut m = [[0.0; 3]; 3];
    for (k, col) in m.iter_mut().enumerate() {
        let (mut a, mut b) = (q, q);
        a[k] += h;
        b[k] -= h;
        let (pa, pb) = (fk(p, &JointConfig::new(a[0], a[1], a[2])), fk(p, &JointConfig::new(b[0], b[1], b[2])));
        *col = [(pa.x - pb.x) / (2.0 * h), (pa.y - pb.y) / (2.0 * h), (pa.z - pb.z) / (2.0 * h)];
    }
    let e = |r: usize, c: usize| m[c][r];
    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
}

/// Planted quartic: real roots with multiplicities, the rest as one complex pair.
fn planted(rng: &mut ChaCha8Rng) -> (Quartic, Vec<(f64, usize)>) {
    let patterns: [&[usize]; 7] = [&[1, 1, 1, 1], &[2, 1, 1], &[2, 2], &[3, 1], &[4], &[1, 1], &[2]];
    let pat = patterns[rng.gen_range(0..patterns.len())];
    let mut roots: Vec<f64> = Vec::new();
    while roots.len() < pat.len() {
        let r = rng.gen_range(-3.0..3.0);
        if roots.iter().all(|x: &f64| (x - r).abs() >= 0.25) {
            roots.push(r);
        }
    }
    let mut c = vec![rng.gen_range(0.5..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }];
    let mul = |c: &[f64], f: &[f64]| {
        let mut out = vec![0.0; c.len() + f.len() - 1];
        for (i, a) in c.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    };
    for (r, m) in roots.iter().zip(pat) {
        for _ in 0..*m {
            c = mul(&c, &[1.0, -r]);
        }
    }
    if c.len() < 5 {
        let (re, im) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.25..2.0));
        c = mul(&c, &[1.0, -2.0 * re, re * re + im * im]);
    }
    let mut want: Vec<(f64, usize)> = roots.into_iter().zip(pat.iter().copied()).collect();
    want.sort_by(|a, b| a.0.total_cmp(&b.0));
    (Quartic::from_coeffs([c[0], c[1], c[2], c[3], c[4]]), want)
}

fn quartic_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (q, want) = planted(&mut rng);
        let got = match real_roots(&q, 1e-6) {
            Ok(g) => g,
            Err(e) => {
                bad.push(format!("{want:?}: {e}"));
                continue;
            }
        };
        if got.roots.len() != want.len() {
            bad.push(format!("{want:?}: found {:?}", got.roots));
            continue;
        }
        for (g, (r, m)) in got.roots.iter().zip(&want) {
            worst = worst.max((g.value - r).abs());
            if g.multiplicity != *m {
                bad.push(format!("root {r} multiplicity {} expected {m}", g.multiplicity));
            }
        }
    }
    if worst >= 1e-8 {
        bad.push(format!("root error {worst:.2e}"));
    }
    let n = bad.len();
    if n > 5 {
        bad.truncate(5);
        bad.push(format!("{} more", n - 5));
    }
    outcome(bad, format!("10000 planted quartics, worst root error {worst:.1e}"))
}

fn separating_surface(settings: &Settings) -> Outcome {
    let seg =
        Segment { start: DesignParams::new(1.97, 1.0, 0.1).unwrap(), end: DesignParams::new(1.97, 1.0, 1.54).unwrap() };
    let scan = match transition_scan(&seg, 8, settings) {
        Ok(s) => s,
        Err(e) => return outcome(vec![e.to_string()], String::new()),
    };
    let hit = scan.transitions.iter().find(|t| t.before.cusps == 0 && t.after.cusps == 4);
    match hit {
        None => outcome(vec![format!("no 0 -> 4 transition among {:?}", scan.transitions)], String::new()),
        Some(t) => {
            let near =
                [t.distance_to_surface1, t.distance_to_surface2].into_iter().flatten().fold(f64::INFINITY, f64::min);
            let msg = format!("0 -> 4 at d4 = {:.5}, nearest surface root {near:.1e}", t.params.d4);
            if near < 1e-2 {
                outcome(vec![], msg)
            } else {
                outcome(vec![msg], String::new())
            }
        }
    }
}

fn report_files(settings: &Settings) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for r in &common::ROWS {
        let rep = classify(&r.params(), settings).expect("classify");
        files.push((format!("row_{}.json", r.label), report_json(&rep).expect("json")));
    }
    let pocket = classify(&common::pocket_design(), settings).expect("classify");
    files.push(("pocket.json".to_string(), report_json(&pocket).expect("json")));
    files
}

fn determinism(settings: &Settings) -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut names = Vec::new();
    for d in &dirs {
        names.clear();
        for (name, text) in report_files(settings) {
            std::fs::write(d.path().join(&name), text).unwrap();
            names.push(name);
        }
    }
    let mut bad = Vec::new();
    for name in &names {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        if a != b {
            bad.push(format!("{name} differs"));
        }
    }
    outcome(bad, format!("{} report files identical across runs", names.len()))
}

fn main() -> ExitCode {
    let settings = Settings::default();
    let start = Instant::now();
    let reports = reference_reports(&settings);
    let secs = start.elapsed().as_secs_f64();

    let results = [
        ("reference table golden suite", golden_suite(&reports, secs)),
        ("cusp counts", cusp_suite(&reports, &settings)),
        ("meta-rules on jittered grid", meta_rules(&settings)),
        ("kinematic round trips", round_trips()),
        ("planted quartics", quartic_oracle()),
        ("separating surface", separating_surface(&settings)),
        ("determinism", determinism(&settings)),
    ];
    let mut all = true;
    for (k, (name, o)) in results.iter().enumerate() {
        all &= o.pass;
        println!("criterion {} {}: {} ({})", k + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
