//! Report serialization, CSV tables, SVG plots and sweep checkpoints.
//!
//! Floats in CSV files use 17 significant digits so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::classify::{ClassificationReport, SweepRecord};
use crate::error::{Error, Result};
use crate::kinematics::DesignParams;
use crate::topology::{AspectMap, SingularCurve};
use crate::workspace::{CuspPoint, PostureRaster, SectionCurve};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn report_json(report: &ClassificationReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Config(format!("json encoding failed: {e}")))
}

pub fn report_text(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let rows: Vec<(&str, String)> = vec![
        ("d3", fmt_f64(r.params.d3)),
        ("r2", fmt_f64(r.params.r2)),
        ("d4", fmt_f64(r.params.d4)),
        ("kind", r.kind.to_string()),
        ("generic", r.generic.to_string()),
        ("aspects", r.aspects.to_string()),
        ("cusps", r.cusps.to_string()),
        ("class", r.class.clone()),
        ("cuspidal", r.cuspidal.to_string()),
        ("max postures", r.max_postures.to_string()),
        ("aspect grid", format!("{0}x{0}", r.aspect_resolution)),
        ("cusp candidates", format!("{} ({} dropped)", r.cusp_candidates, r.cusp_dropped)),
        ("section", r.section_convention.clone()),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<width$}  {v}");
    }
    for (k, c) in r.cusp_points.iter().enumerate() {
        let _ =
            writeln!(s, "cusp {k}: rho {} z {} |P'''| {:.3e}", fmt_f64(c.rho), fmt_f64(c.z), c.third_derivative.abs());
    }
    for v in &r.meta_rule_violations {
        let _ = writeln!(s, "violation: {v}");
    }
    s
}

pub fn raster_csv(r: &PostureRaster) -> String {
    let mut s = String::from("rho,z,count\n");
    for j in 0..r.resolution {
        for i in 0..r.resolution {
            let _ = writeln!(s, "{},{},{}", fmt_f64(r.rho(i)), fmt_f64(r.z(j)), r.count(i, j));
        }
    }
    s
}

pub const SWEEP_HEADER: &str = "d3,r2,d4,kind,generic,aspects,cusps,class,status";

pub fn sweep_row(rec: &SweepRecord) -> String {
    let p = &rec.params;
    match &rec.signature {
        Some(sig) => format!(
            "{},{},{},{},{},{},{},{},ok",
            fmt_f64(p.d3),
            fmt_f64(p.r2),
            fmt_f64(p.d4),
            sig.kind,
            sig.generic,
            sig.aspects,
            sig.cusps,
            sig.class
        ),
        None => format!("{},{},{},,,,,,failed", fmt_f64(p.d3), fmt_f64(p.r2), fmt_f64(p.d4)),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Maps a data rectangle onto the SVG canvas with y pointing up.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    width: f64,
    height: f64,
    margin: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.margin + (x - self.x0) / (self.x1 - self.x0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.margin + (self.y1 - y) / (self.y1 - self.y0) * self.height
    }

    fn header(&self, xname: &str, yname: &str) -> String {
        format!(
            "<!-- coordinate mapping: px = {m} + ({xn} - ({x0})) * {sx}; py = {m} + (({y1}) - {yn}) * {sy} -->\n",
            m = self.margin,
            xn = xname,
            yn = yname,
            x0 = fmt_f64(self.x0),
            y1 = fmt_f64(self.y1),
            sx = fmt_f64(self.width / (self.x1 - self.x0)),
            sy = fmt_f64(self.height / (self.y1 - self.y0)),
        )
    }

    fn open(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            w = self.width + 2.0 * self.margin,
            h = self.height + 2.0 * self.margin
        )
    }
}

fn polyline(s: &mut String, pts: &[(f64, f64)], colour: &str) {
    if pts.len() < 2 {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
    let _ =
        writeln!(s, "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1\" points=\"{}\"/>", coords.join(" "));
}

fn fill_for(count: u8) -> &'static str {
    match count {
        0 => "#ffffff",
        1 | 2 => "#d9e6f2",
        _ => "#8fb3d9",
    }
}

/// Connected regions of equal count with their size and a member pixel.
fn raster_regions(r: &PostureRaster) -> Vec<(u8, usize, (usize, usize))> {
    let n = r.resolution;
    let mut seen = vec![false; n * n];
    let mut out = Vec::new();
    for start in 0..n * n {
        if seen[start] {
            continue;
        }
        let c = r.counts[start];
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(k) = stack.pop() {
            members.push(k);
            let (i, j) = (k % n, k / n);
            let mut nb = Vec::with_capacity(4);
            if i > 0 {
                nb.push(k - 1);
            }
            if i + 1 < n {
                nb.push(k + 1);
            }
            if j > 0 {
                nb.push(k - n);
            }
            if j + 1 < n {
                nb.push(k + n);
            }
            for m in nb {
                if !seen[m] && r.counts[m] == c {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        members.sort_unstable();
        let mid = members[members.len() / 2];
        out.push((c, members.len(), (mid % n, mid / n)));
    }
    out
}

/// Section plot: posture regions, critical value curves and cusps.
pub fn section_svg(
    params: &DesignParams,
    raster: &PostureRaster,
    curves: &[SectionCurve],
    cusps: &[CuspPoint],
) -> String {
    let w = &raster.window;
    let frame = Frame {
        x0: w.rho_min,
        x1: w.rho_max,
        y0: w.z_min,
        y1: w.z_max,
        width: 600.0,
        height: 600.0 * (w.z_max - w.z_min) / (w.rho_max - w.rho_min),
        margin: 20.0,
    };
    let mut s = frame.header("rho", "z");
    s.push_str(&frame.open());
    let _ = writeln!(s, "<title>section d3={} r2={} d4={}</title>", params.d3, params.r2, params.d4);
    let n = raster.resolution;
    let cw = frame.width / n as f64;
    let ch = frame.height / n as f64;
    for j in 0..n {
        let mut i = 0;
        while i < n {
            let c = raster.count(i, j);
            let start = i;
            while i < n && raster.count(i, j) == c {
                i += 1;
            }
            if c == 0 {
                continue;
            }
            let _ = writeln!(
                s,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\"/>",
                frame.margin + start as f64 * cw,
                frame.margin + (n - 1 - j) as f64 * ch,
                (i - start) as f64 * cw,
                ch,
                fill_for(c)
            );
        }
    }
    for c in curves {
        let pts: Vec<(f64, f64)> = c.points.iter().map(|&(r, z)| (frame.px(r), frame.py(z))).collect();
        polyline(&mut s, &pts, "#1f3b73");
    }
    for c in cusps {
        let _ =
            writeln!(s, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"#c0392b\"/>", frame.px(c.rho), frame.py(c.z));
    }
    let min_size = (n * n) / 500;
    for (count, size, (i, j)) in raster_regions(raster) {
        if size < min_size.max(1) {
            continue;
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" text-anchor=\"middle\">{count}</text>",
            frame.px(raster.rho(i)),
            frame.py(raster.z(j))
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Splits a torus polyline wherever it jumps across the cut.
fn torus_pieces(points: &[(f64, f64)], closed: bool) -> Vec<Vec<(f64, f64)>> {
    let mut pieces = vec![Vec::new()];
    let n = points.len();
    let steps = if closed { n + 1 } else { n };
    for k in 0..steps {
        let p = points[k % n];
        if let Some(&last) = pieces.last().and_then(|v: &Vec<(f64, f64)>| v.last()) {
            let (dx, dy): (f64, f64) = (p.0 - last.0, p.1 - last.1);
            if dx.abs() > std::f64::consts::PI || dy.abs() > std::f64::consts::PI {
                pieces.push(Vec::new());
            }
        }
        pieces.last_mut().unwrap().push(p);
    }
    pieces
}

/// Joint-space plot on `[−π, π]²`: singular curves and aspect labels.
pub fn jointspace_svg(params: &DesignParams, curves: &[SingularCurve], aspects: &AspectMap) -> String {
    use std::f64::consts::PI;
    let frame = Frame { x0: -PI, x1: PI, y0: -PI, y1: PI, width: 600.0, height: 600.0, margin: 20.0 };
    let mut s = frame.header("theta2", "theta3");
    s.push_str(&frame.open());
    let _ = writeln!(s, "<title>joint space d3={} r2={} d4={}</title>", params.d3, params.r2, params.d4);
    let _ = writeln!(
        s,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{w}\" fill=\"none\" stroke=\"#888888\"/>",
        m = frame.margin,
        w = frame.width
    );
    for c in curves {
        for piece in torus_pieces(&c.points, c.closed) {
            let pts: Vec<(f64, f64)> = piece.iter().map(|&(a, b)| (frame.px(a), frame.py(b))).collect();
            polyline(&mut s, &pts, "#1f3b73");
        }
    }
    for (k, a) in aspects.aspects.iter().enumerate() {
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" text-anchor=\"middle\">A{k}{}</text>",
            frame.px(a.representative.0),
            frame.py(a.representative.1),
            if a.det_sign >= 0 { "+" } else { "-" }
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Appends sweep rows to a CSV and records progress in `<csv>.checkpoint`.
pub struct SweepWriter {
    csv: PathBuf,
    checkpoint: PathBuf,
    fingerprint: String,
    done: usize,
}

impl SweepWriter {
    /// Opens or resumes a sweep. Rows already recorded for the same grid
    /// fingerprint are kept; anything else starts a fresh file.
    pub fn open(csv: &Path, fingerprint: &str) -> Result<Self> {
        let checkpoint = checkpoint_path(csv);
        let mut done = 0;
        if let Ok(text) = fs::read_to_string(&checkpoint) {
            let mut lines = text.lines();
            if lines.next() == Some(fingerprint) {
                done = lines.next().and_then(|l| l.trim().parse().ok()).unwrap_or(0);
            }
        }
        let kept = if done > 0 { read_rows(csv, done)? } else { None };
        match kept {
            Some(rows) => {
                let mut text = format!("{SWEEP_HEADER}\n");
                for r in rows {
                    text.push_str(&r);
                    text.push('\n');
                }
                write_file(csv, &text)?;
            }
            None => {
                done = 0;
                write_file(csv, &format!("{SWEEP_HEADER}\n"))?;
            }
        }
        let w = SweepWriter { csv: csv.to_path_buf(), checkpoint, fingerprint: fingerprint.to_string(), done };
        w.save()?;
        Ok(w)
    }

    pub fn completed(&self) -> usize {
        self.done
    }

    pub fn append(&mut self, records: &[SweepRecord]) -> Result<()> {
        let mut f = OpenOptions::new().append(true).open(&self.csv).map_err(|e| Error::io(&self.csv, e))?;
        let mut text = String::new();
        for r in records {
            text.push_str(&sweep_row(r));
            text.push('\n');
        }
        f.write_all(text.as_bytes()).map_err(|e| Error::io(&self.csv, e))?;
        f.sync_data().map_err(|e| Error::io(&self.csv, e))?;
        self.done += records.len();
        self.save()
    }

    fn save(&self) -> Result<()> {
        write_file(&self.checkpoint, &format!("{}\n{}\n", self.fingerprint, self.done))
    }
}

pub fn checkpoint_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".checkpoint");
    csv.with_file_name(name)
}

/// The first `n` data rows of a sweep CSV, or `None` if it has fewer.
fn read_rows(csv: &Path, n: usize) -> Result<Option<Vec<String>>> {
    let Ok(f) = File::open(csv) else {
        return Ok(None);
    };
    let mut lines = BufReader::new(f).lines();
    match lines.next() {
        Some(Ok(h)) if h == SWEEP_HEADER => {}
        _ => return Ok(None),
    }
    let mut rows = Vec::with_capacity(n);
    for line in lines.take(n) {
        rows.push(line.map_err(|e| Error::io(csv, e))?);
    }
    Ok((rows.len() == n).then_some(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.21), "2.0999999999999999e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn wrap_jumps_split_polylines() {
        let pts = vec![(3.0, 0.0), (3.1, 0.0), (-3.1, 0.0), (-3.0, 0.0)];
        let pieces = torus_pieces(&pts, false);
        assert_eq!(pieces.len(), 2);
    }
}
