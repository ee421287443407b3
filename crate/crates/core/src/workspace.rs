//! Workspace cross sections `(ρ, z)`, critical value curves and cusp points.
//!
//! Along a fold curve the trigonometric IK equation has a double root at the
//! curve's own θ3. A cusp is where that root becomes triple, which shows up
//! as a sign change of the second θ3-derivative of the equation along the
//! curve. Sign changes are bracketed on the traced polyline, bisected with
//! the point kept on the fold curve, and then certified on the quartic with
//! [`triple_root_refine`] in the unknowns `(t, ρ, z)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::kinematics::{
    fold_factor, fold_gradient, ik_quartic, section_point, trig_coeffs, wrap_angle, CartesianPoint, DesignParams,
};
use crate::quartic::{real_roots, triple_root_refine, Quartic, TripleRootSeed};
use crate::topology::{singular_curves, CurveOrigin, SingularCurve};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub rho: f64,
    pub z: f64,
}

impl SectionPoint {
    pub fn new(rho: f64, z: f64) -> Self {
        SectionPoint { rho, z }
    }

    pub fn cartesian(&self) -> CartesianPoint {
        CartesianPoint::new(self.rho, 0.0, self.z)
    }
}

/// Number of distinct real IK roots at `(ρ, 0, z)`; a root at `θ3 = π` counts once.
pub fn posture_count(params: &DesignParams, p: SectionPoint, cluster_tol: f64) -> Result<usize> {
    let q = ik_quartic(params, &p.cartesian());
    count_roots(&q, cluster_tol).map_err(|e| match e {
        Error::DegenerateQuartic => Error::ContinuumOfSolutions { x: p.rho, y: 0.0, z: p.z },
        e => e,
    })
}

fn count_roots(q: &Quartic, cluster_tol: f64) -> Result<usize> {
    let rs = real_roots(q, cluster_tol)?;
    Ok(rs.distinct() + usize::from(rs.degree_at_infinity > 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionWindow {
    pub rho_min: f64,
    pub rho_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl SectionWindow {
    /// `ρ ∈ [0, reach]`, `|z| ≤ d3 + d4`.
    pub fn full(params: &DesignParams) -> Self {
        let zr = params.d3 + params.d4;
        SectionWindow { rho_min: 0.0, rho_max: params.reach(), z_min: -zr, z_max: zr }
    }

    pub fn around(center: SectionPoint, half_width: f64) -> Self {
        SectionWindow {
            rho_min: (center.rho - half_width).max(0.0),
            rho_max: center.rho + half_width,
            z_min: center.z - half_width,
            z_max: center.z + half_width,
        }
    }
}

/// Posture counts sampled at pixel centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostureRaster {
    pub window: SectionWindow,
    pub resolution: usize,
    /// Row-major with z rows: `counts[j · resolution + i]`.
    pub counts: Vec<u8>,
}

impl PostureRaster {
    pub fn rho(&self, i: usize) -> f64 {
        let w = &self.window;
        w.rho_min + (i as f64 + 0.5) * (w.rho_max - w.rho_min) / self.resolution as f64
    }

    pub fn z(&self, j: usize) -> f64 {
        let w = &self.window;
        w.z_min + (j as f64 + 0.5) * (w.z_max - w.z_min) / self.resolution as f64
    }

    pub fn point(&self, i: usize, j: usize) -> SectionPoint {
        SectionPoint::new(self.rho(i), self.z(j))
    }

    pub fn count(&self, i: usize, j: usize) -> u8 {
        self.counts[j * self.resolution + i]
    }

    /// Pixel containing a section point, if inside the window.
    pub fn pixel_of(&self, p: SectionPoint) -> Option<(usize, usize)> {
        let w = &self.window;
        let u = (p.rho - w.rho_min) / (w.rho_max - w.rho_min);
        let v = (p.z - w.z_min) / (w.z_max - w.z_min);
        if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
            return None;
        }
        let n = self.resolution as f64;
        Some(((u * n) as usize, (v * n) as usize))
    }

    /// Pixel counts indexed by posture number `0..=4`.
    pub fn histogram(&self) -> [usize; 5] {
        let mut h = [0; 5];
        for &c in &self.counts {
            h[(c as usize).min(4)] += 1;
        }
        h
    }

    pub fn max_count(&self) -> u8 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn min_nonzero_count(&self) -> Option<u8> {
        self.counts.iter().copied().filter(|&c| c > 0).min()
    }
}

/// Full section raster, `resolution × resolution` pixels.
pub fn section_raster(params: &DesignParams, resolution: usize, cluster_tol: f64) -> Result<PostureRaster> {
    params.validate()?;
    if resolution < 128 {
        return Err(Error::Config(format!("section raster needs resolution >= 128, got {resolution}")));
    }
    raster_window(params, SectionWindow::full(params), resolution, cluster_tol)
}

/// Raster over an arbitrary window; no lower bound on resolution.
pub fn raster_window(
    params: &DesignParams,
    window: SectionWindow,
    resolution: usize,
    cluster_tol: f64,
) -> Result<PostureRaster> {
    let mut raster = PostureRaster { window, resolution, counts: Vec::new() };
    let rows: Vec<Vec<u8>> = (0..resolution)
        .into_par_iter()
        .map(|j| {
            (0..resolution)
                .map(|i| posture_count(params, raster.point(i, j), cluster_tol).map(|c| c as u8))
                .collect::<Result<Vec<u8>>>()
        })
        .collect::<Result<_>>()?;
    raster.counts = rows.concat();
    Ok(raster)
}

/// Image of a singular curve in the section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionCurve {
    pub origin: CurveOrigin,
    pub closed: bool,
    /// `(ρ, z)` in the order of the joint-space curve.
    pub points: Vec<(f64, f64)>,
}

pub fn critical_value_curves(params: &DesignParams, resolution: usize) -> Result<Vec<SectionCurve>> {
    let curves = singular_curves(params, resolution)?;
    Ok(curves.iter().map(|c| map_curve(params, c)).collect())
}

pub fn map_curve(params: &DesignParams, c: &SingularCurve) -> SectionCurve {
    SectionCurve {
        origin: c.origin,
        closed: c.closed,
        points: c.points.iter().map(|&(a, b)| section_point(params, a, b)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspPoint {
    pub rho: f64,
    pub z: f64,
    /// Triple root of the IK quartic; infinite for `θ3 = π`.
    pub t_triple: f64,
    pub theta3: f64,
    /// `|P|, |P'|, |P''|` after normalising the quartic.
    pub residuals: [f64; 3],
    pub third_derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspSearch {
    pub cusps: Vec<CuspPoint>,
    /// Sign changes bracketed along the fold curves.
    pub candidates: usize,
    /// Candidates whose refinement failed certification.
    pub dropped: usize,
}

/// Second θ3-derivative of the IK equation at the configuration's own image.
fn triple_indicator(params: &DesignParams, theta2: f64, theta3: f64) -> f64 {
    let (rho, z) = section_point(params, theta2, theta3);
    let form = trig_coeffs(params, &CartesianPoint::new(rho, 0.0, z));
    form.residual_dd(theta3) / form.scale().max(f64::MIN_POSITIVE)
}

/// Moves `(θ2, θ3)` onto the fold curve along the gradient of the fold factor.
fn project_to_fold(params: &DesignParams, mut a: f64, mut b: f64) -> (f64, f64) {
    for _ in 0..30 {
        let g = fold_factor(params, a, b);
        let (ga, gb) = fold_gradient(params, a, b);
        let n2 = ga * ga + gb * gb;
        if n2 == 0.0 {
            break;
        }
        a -= g * ga / n2;
        b -= g * gb / n2;
        if g.abs() < 1e-15 {
            break;
        }
    }
    (wrap_angle(a), wrap_angle(b))
}

fn bisect_indicator(params: &DesignParams, p0: (f64, f64), p1: (f64, f64)) -> (f64, f64) {
    let d = (wrap_angle(p1.0 - p0.0), wrap_angle(p1.1 - p0.1));
    let at = |s: f64| project_to_fold(params, p0.0 + s * d.0, p0.1 + s * d.1);
    let h0 = {
        let (a, b) = at(0.0);
        triple_indicator(params, a, b)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (a, b) = at(mid);
        let hm = triple_indicator(params, a, b);
        if hm == 0.0 {
            return (a, b);
        }
        if (hm > 0.0) == (h0 > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

pub fn find_cusps(params: &DesignParams, settings: &Settings) -> Result<CuspSearch> {
    let curves = singular_curves(params, settings.joint_resolution)?;
    find_cusps_on(params, &curves, settings)
}

pub fn find_cusps_on(params: &DesignParams, curves: &[SingularCurve], settings: &Settings) -> Result<CuspSearch> {
    params.validate()?;
    let tol = &settings.tolerances;
    let reach = params.reach();

    let mut seeds: Vec<(f64, f64)> = Vec::new();
    for c in curves.iter().filter(|c| c.origin == CurveOrigin::Fold) {
        let n = c.points.len();
        let ind: Vec<f64> = c.points.iter().map(|&(a, b)| triple_indicator(params, a, b)).collect();
        let steps = if c.closed { n } else { n.saturating_sub(1) };
        for k in 0..steps {
            let (h0, h1) = (ind[k], ind[(k + 1) % n]);
            if h0 == 0.0 || (h0 > 0.0) != (h1 > 0.0) {
                seeds.push(bisect_indicator(params, c.points[k], c.points[(k + 1) % n]));
            }
        }
    }

    let opts = tol.triple_root_options();
    let refined: Vec<Option<CuspPoint>> = seeds
        .par_iter()
        .map(|&(a, b)| {
            let (rho, z) = section_point(params, a, b);
            let family = |x: &[f64]| ik_quartic(params, &CartesianPoint::new(x[0], 0.0, x[1]));
            let seed = TripleRootSeed { t: (b / 2.0).tan(), params: vec![rho, z], radius: 0.02 * reach };
            let root = triple_root_refine(&family, &seed, &opts)?;
            let (rho, z) = (root.params[0].abs(), root.params[1]);
            if family(&[rho, z]).max_abs() == 0.0 {
                return None;
            }
            Some(CuspPoint {
                rho,
                z,
                t_triple: root.t,
                theta3: crate::kinematics::theta3_from_t(root.t),
                residuals: root.residuals,
                third_derivative: root.third_derivative,
            })
        })
        .collect();

    let candidates = refined.len();
    let mut certified: Vec<CuspPoint> = refined.into_iter().flatten().collect();
    let dropped = candidates - certified.len();
    certified.retain(|c| c.rho >= tol.eps_axis * reach);
    certified.sort_by(|p, q| p.rho.total_cmp(&q.rho).then(p.z.total_cmp(&q.z)));
    let mut cusps: Vec<CuspPoint> = Vec::new();
    for c in certified {
        // Mirror images across z = 0 are distinct cusps however close they are.
        let dup = cusps
            .iter()
            .any(|k| (k.rho - c.rho).hypot(k.z - c.z) < tol.eps_dedup * reach && (k.z >= 0.0) == (c.z >= 0.0));
        if !dup {
            cusps.push(c);
        }
    }
    Ok(CuspSearch { cusps, candidates, dropped })
}
