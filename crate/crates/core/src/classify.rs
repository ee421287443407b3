//! Full classification signature, separating surfaces and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::config::Settings;
use crate::error::Result;
use crate::kinematics::{solve_ik, DesignParams};
use crate::topology::{
    count_aspects, genericity, homotopy_class, singular_curves, AspectMap, HomotopySignature, Witness,
};
use crate::workspace::{find_cusps_on, raster_window, section_raster, CuspPoint, SectionPoint, SectionWindow};

/// Half-widths of the windows probed around each cusp, relative to reach.
const CUSP_PROBE_WIDTHS: [f64; 3] = [1e-2, 1e-3, 1e-4];
const CUSP_PROBE_RESOLUTION: usize = 32;

pub const SECTION_CONVENTION: &str = "half-plane rho = sqrt(x^2 + y^2) >= 0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Binary,
    Quaternary,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Binary => "binary",
            Kind::Quaternary => "quaternary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub params: DesignParams,
    pub kind: Kind,
    pub generic: bool,
    pub aspects: usize,
    pub cusps: usize,
    /// `binary`, `n.g` or the homotopy signature.
    pub class: String,
    pub homotopy: Option<HomotopySignature>,
    pub cuspidal: bool,
    /// Most IK solutions seen at any sampled section point.
    pub max_postures: usize,
    /// A section point where two IK solutions share an aspect.
    pub same_aspect_witness: Option<SectionPoint>,
    pub genericity_witness: Option<Witness>,
    pub aspect_resolution: usize,
    pub cusp_points: Vec<CuspPoint>,
    pub cusp_candidates: usize,
    pub cusp_dropped: usize,
    pub meta_rule_violations: Vec<String>,
    pub section_convention: String,
    pub settings: Settings,
}

impl ClassificationReport {
    pub fn signature(&self) -> Signature {
        Signature {
            kind: self.kind,
            generic: self.generic,
            aspects: self.aspects,
            cusps: self.cusps,
            class: self.class.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub kind: Kind,
    pub generic: bool,
    pub aspects: usize,
    pub cusps: usize,
    pub class: String,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} aspects {} cusps {}",
            self.kind,
            if self.generic { "generic" } else { "non-generic" },
            self.aspects,
            self.cusps,
            self.class
        )
    }
}

/// Finds a section point where two IK solutions fall in the same aspect.
fn same_aspect_point(
    params: &DesignParams,
    aspects: &AspectMap,
    points: &[SectionPoint],
    settings: &Settings,
) -> Option<SectionPoint> {
    let ik = settings.tolerances.ik_options();
    points
        .par_iter()
        .find_first(|p| {
            let Ok(sols) = solve_ik(params, &p.cartesian(), &ik) else {
                return false;
            };
            let mut labels: Vec<usize> =
                sols.iter().filter_map(|q| aspects.locate(params, q.theta2, q.theta3)).collect();
            let n = labels.len();
            labels.sort_unstable();
            labels.dedup();
            labels.len() < n
        })
        .copied()
}

pub fn classify(params: &DesignParams, settings: &Settings) -> Result<ClassificationReport> {
    params.validate()?;
    settings.validate()?;
    let tol = &settings.tolerances;

    let curves = singular_curves(params, settings.joint_resolution).map_err(|e| e.in_stage("joint_topology"))?;
    let gen = genericity(params, &curves, tol);
    let aspects = count_aspects(params, settings).map_err(|e| e.in_stage("joint_topology"))?;
    let search = find_cusps_on(params, &curves, settings).map_err(|e| e.in_stage("workspace_analysis"))?;

    let raster = section_raster(params, settings.section_resolution, tol.cluster_tol)
        .map_err(|e| e.in_stage("workspace_analysis"))?;
    let mut max_postures = raster.max_count() as usize;
    let mut four: Vec<SectionPoint> = Vec::new();
    let mut collect = |r: &crate::workspace::PostureRaster| {
        for j in 0..r.resolution {
            for i in 0..r.resolution {
                if r.count(i, j) >= 4 {
                    four.push(r.point(i, j));
                }
            }
        }
    };
    collect(&raster);
    let reach = params.reach();
    for cusp in &search.cusps {
        for w in CUSP_PROBE_WIDTHS {
            let window = SectionWindow::around(SectionPoint::new(cusp.rho, cusp.z), w * reach);
            let zoom = raster_window(params, window, CUSP_PROBE_RESOLUTION, tol.cluster_tol)
                .map_err(|e| e.in_stage("workspace_analysis"))?;
            max_postures = max_postures.max(zoom.max_count() as usize);
            collect(&zoom);
        }
    }
    let witness = same_aspect_point(params, &aspects, &four, settings);
    let kind = if witness.is_some() { Kind::Quaternary } else { Kind::Binary };

    let homotopy = if gen.generic && kind == Kind::Quaternary {
        Some(homotopy_class(&curves).map_err(|e| e.in_stage("joint_topology"))?)
    } else {
        None
    };
    let class = match (&kind, &homotopy) {
        (Kind::Binary, _) => "binary".to_string(),
        (Kind::Quaternary, Some(h)) => h.to_string(),
        (Kind::Quaternary, None) => "n.g".to_string(),
    };

    let mut report = ClassificationReport {
        params: *params,
        kind,
        generic: gen.generic,
        aspects: aspects.aspect_count(),
        cusps: search.cusps.len(),
        class,
        homotopy,
        cuspidal: !search.cusps.is_empty(),
        max_postures,
        same_aspect_witness: witness,
        genericity_witness: gen.witness,
        aspect_resolution: aspects.resolution(),
        cusp_points: search.cusps,
        cusp_candidates: search.candidates,
        cusp_dropped: search.dropped,
        meta_rule_violations: Vec::new(),
        section_convention: SECTION_CONVENTION.to_string(),
        settings: *settings,
    };
    report.meta_rule_violations = meta_rule_violations(&report.signature());
    Ok(report)
}

/// Checks the implications between posture kind, genericity, aspects and cusps.
pub fn meta_rule_violations(s: &Signature) -> Vec<String> {
    let mut out = Vec::new();
    if s.kind == Kind::Binary && !(s.generic && s.cusps == 0) {
        out.push(format!("binary manipulator must be generic with no cusp: {s}"));
    }
    if s.cusps == 0 && !(s.kind == Kind::Binary && s.generic) {
        out.push(format!("manipulator without cusp must be binary and generic: {s}"));
    }
    if s.cusps == 2 && !(s.kind == Kind::Quaternary && !s.generic && s.aspects == 4) {
        out.push(format!("manipulator with two cusps must be quaternary, non-generic, 4 aspects: {s}"));
    }
    if s.generic && s.kind == Kind::Quaternary && !(s.aspects == 2 && s.class == "2(1,0)") {
        out.push(format!("generic quaternary manipulator must have 2 aspects and class 2(1,0): {s}"));
    }
    out
}

pub fn surface1(p: &DesignParams) -> f64 {
    p.d3 * p.d3 - p.d4 * p.d4 + p.r2 * p.r2
}

/// Second separating surface, term by term in its printed order.
pub fn surface2(p: &DesignParams) -> f64 {
    let (d3, d4, r2) = (p.d3, p.d4, p.r2);
    d4.powi(2) * d3.powi(6) - d4.powi(4) * d3.powi(4) + 3.0 * d4.powi(2) * d3.powi(4) * r2.powi(2)
        - 2.0 * d4.powi(2) * d3.powi(4)
        + 2.0 * d4.powi(4) * d3.powi(2)
        - 2.0 * d4.powi(4) * d3.powi(2) * r2.powi(2)
        + d4.powi(2) * d3.powi(2)
        + 3.0 * d4.powi(2) * d3.powi(2) * r2.powi(4)
        - d3.powi(2) * r2.powi(2)
        - 2.0 * d4.powi(4) * r2.powi(2)
        - d4.powi(4)
        + d4.powi(2) * r2.powi(6)
        + d4.powi(2) * r2.powi(2)
        + 2.0 * d4.powi(2) * r2.powi(4)
}

/// Straight segment in parameter space, `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: DesignParams,
    pub end: DesignParams,
}

impl Segment {
    pub fn at(&self, s: f64) -> DesignParams {
        let l = |a: f64, b: f64| a + s * (b - a);
        DesignParams {
            d3: l(self.start.d3, self.end.d3),
            r2: l(self.start.r2, self.end.r2),
            d4: l(self.start.d4, self.end.d4),
        }
    }

    pub fn length(&self) -> f64 {
        let (a, b) = (&self.start, &self.end);
        ((b.d3 - a.d3).powi(2) + (b.r2 - a.r2).powi(2) + (b.d4 - a.d4).powi(2)).sqrt()
    }

    /// Roots of `f` along the segment, as `s` values.
    pub fn roots(&self, f: fn(&DesignParams) -> f64, samples: usize) -> Vec<f64> {
        let g = |s: f64| f(&self.at(s));
        let mut out = Vec::new();
        let mut s0 = 0.0;
        let mut g0 = g(0.0);
        if g0 == 0.0 {
            out.push(0.0);
        }
        for k in 1..=samples {
            let s1 = k as f64 / samples as f64;
            let g1 = g(s1);
            if g1 == 0.0 {
                out.push(s1);
            } else if g0 != 0.0 && (g0 > 0.0) != (g1 > 0.0) {
                let (mut lo, mut hi) = (s0, s1);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if (g(mid) > 0.0) == (g0 > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            s0 = s1;
            g0 = g1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub s: f64,
    pub params: DesignParams,
    pub signature: Option<Signature>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Midpoint of the final bracket.
    pub s: f64,
    pub params: DesignParams,
    /// Signatures at the scan samples enclosing the change.
    pub before: Signature,
    pub after: Signature,
    /// Signature just past the located boundary; differs from `after` when
    /// several changes fall between two samples.
    pub at_boundary: Signature,
    /// Parameter-space distance to the nearest root of each surface on the segment.
    pub distance_to_surface1: Option<f64>,
    pub distance_to_surface2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionScan {
    pub segment: Segment,
    pub samples: Vec<ScanSample>,
    pub transitions: Vec<Transition>,
    pub surface1_roots: Vec<f64>,
    pub surface2_roots: Vec<f64>,
}

/// Bracket width in `s` at which bisection stops.
const TRANSITION_PRECISION: f64 = 1e-4;

pub fn transition_scan(segment: &Segment, steps: usize, settings: &Settings) -> Result<TransitionScan> {
    segment.start.validate()?;
    segment.end.validate()?;
    if steps < 8 {
        return Err(crate::error::Error::Config(format!("scan needs at least 8 steps, got {steps}")));
    }
    let signature = |s: f64| classify(&segment.at(s), settings).map(|r| r.signature());
    let samples: Vec<ScanSample> = (0..=steps)
        .map(|k| {
            let s = k as f64 / steps as f64;
            let (signature, error) = match signature(s) {
                Ok(sig) => (Some(sig), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ScanSample { s, params: segment.at(s), signature, error }
        })
        .collect();

    let surface1_roots = segment.roots(surface1, 4096);
    let surface2_roots = segment.roots(surface2, 4096);
    let len = segment.length();
    let nearest = |roots: &[f64], s: f64| roots.iter().map(|r| (r - s).abs() * len).reduce(f64::min);

    let ok: Vec<(f64, Signature)> = samples.iter().filter_map(|x| x.signature.clone().map(|sig| (x.s, sig))).collect();
    let mut transitions = Vec::new();
    for w in ok.windows(2) {
        let ((mut lo, before), (mut hi, after)) = (w[0].clone(), w[1].clone());
        if before == after {
            continue;
        }
        let mut at_boundary = after.clone();
        while hi - lo > TRANSITION_PRECISION {
            let mid = 0.5 * (lo + hi);
            match signature(mid) {
                Ok(sig) if sig == before => lo = mid,
                Ok(sig) => {
                    hi = mid;
                    at_boundary = sig;
                }
                Err(_) => break,
            }
        }
        let s = 0.5 * (lo + hi);
        transitions.push(Transition {
            s,
            params: segment.at(s),
            before,
            after,
            at_boundary,
            distance_to_surface1: nearest(&surface1_roots, s),
            distance_to_surface2: nearest(&surface2_roots, s),
        });
    }
    Ok(TransitionScan { segment: *segment, samples, transitions, surface1_roots, surface2_roots })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub params: DesignParams,
    pub signature: Option<Signature>,
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn from_result(params: DesignParams, r: Result<ClassificationReport>) -> Self {
        match r {
            Ok(rep) => SweepRecord { params, signature: Some(rep.signature()), error: None },
            Err(e) => SweepRecord { params, signature: None, error: Some(e.to_string()) },
        }
    }
}

/// Evenly spaced values on one parameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n).map(|k| self.start + (self.end - self.start) * k as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Grid points in `(d3, r2, d4)` order, `d4` varying fastest.
pub fn grid_points(d3: &Axis, r2: &Axis, d4: &Axis) -> Vec<DesignParams> {
    let mut out = Vec::new();
    for &a in &d3.values() {
        for &b in &r2.values() {
            for &c in &d4.values() {
                out.push(DesignParams { d3: a, r2: b, d4: c });
            }
        }
    }
    out
}

/// Classifies every point; output order follows the input.
pub fn sweep(points: &[DesignParams], settings: &Settings) -> Vec<SweepRecord> {
    points.par_iter().map(|p| SweepRecord::from_result(*p, classify(p, settings))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub failed: usize,
    pub signatures: Vec<(Signature, usize)>,
    /// Connected regions of equal signature in each `(d3, r2)` slice, per `d4`.
    pub zones: Vec<(f64, usize)>,
}

pub fn summarize(records: &[SweepRecord], axes: Option<(&Axis, &Axis, &Axis)>) -> SweepSummary {
    let mut counts: std::collections::BTreeMap<Signature, usize> = std::collections::BTreeMap::new();
    let mut failed = 0;
    for r in records {
        match &r.signature {
            Some(s) => *counts.entry(s.clone()).or_default() += 1,
            None => failed += 1,
        }
    }
    let zones = axes
        .filter(|(a, b, c)| a.count * b.count * c.count == records.len())
        .map(|(a, b, c)| zone_counts(records, a.count, b.count, c))
        .unwrap_or_default();
    SweepSummary { total: records.len(), failed, signatures: counts.into_iter().collect(), zones }
}

fn zone_counts(records: &[SweepRecord], n3: usize, n2: usize, d4: &Axis) -> Vec<(f64, usize)> {
    let n4 = d4.count;
    let at = |i: usize, j: usize, k: usize| &records[(i * n2 + j) * n4 + k].signature;
    d4.values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut seen = vec![false; n3 * n2];
            let mut regions = 0;
            for start in 0..n3 * n2 {
                if seen[start] {
                    continue;
                }
                regions += 1;
                seen[start] = true;
                let mut stack = vec![start];
                while let Some(c) = stack.pop() {
                    let (i, j) = (c / n2, c % n2);
                    let mut nbrs = Vec::new();
                    if i > 0 {
                        nbrs.push((i - 1, j));
                    }
                    if i + 1 < n3 {
                        nbrs.push((i + 1, j));
                    }
                    if j > 0 {
                        nbrs.push((i, j - 1));
                    }
                    if j + 1 < n2 {
                        nbrs.push((i, j + 1));
                    }
                    for (a, b) in nbrs {
                        let idx = a * n2 + b;
                        if !seen[idx] && at(a, b, k) == at(i, j, k) {
                            seen[idx] = true;
                            stack.push(idx);
                        }
                    }
                }
            }
            (v, regions)
        })
        .collect()
}
