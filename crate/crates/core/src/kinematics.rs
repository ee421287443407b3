//! Forward and inverse kinematics of the orthogonal 3R family
//! (`α2 = -90°`, `α3 = +90°`, `r3 = 0`, lengths in units of `d2`).
//!
//! With `A = d3 + d4·cos θ3` and `B = r2 + d4·sin θ3` the end point is
//!
//! ```text
//! x = (1 + A·cos θ2)·cos θ1 − B·sin θ1
//! y = (1 + A·cos θ2)·sin θ1 + B·cos θ1
//! z = −A·sin θ2
//! ```
//!
//! # Eliminating θ1 and θ2
//!
//! `R = x² + y² + z² = 1 + 2A·cos θ2 + A² + B²`, so `A·cos θ2 = K` with
//! `K = (R − 1 − A² − B²)/2`, while `A·sin θ2 = −z`. Squaring and adding
//! gives `K² + z² − A² = 0`. Using `A² + B² = L + 2 d3 d4 cos θ3 + 2 r2 d4 sin θ3`
//! (`L = d3² + d4² + r2²`) and `cos² = 1 − sin²` on the `−d4² cos²θ3` term:
//!
//! ```text
//! m5 cos²θ3 + m4 sin²θ3 + m3 cosθ3 sinθ3 + m2 cosθ3 + m1 sinθ3 + m0 = 0
//! m5 = d3² d4²            m4 = d4² (r2² + 1)      m3 = 2 r2 d3 d4²
//! m2 = (L − R − 1) d3 d4  m1 = (L − R + 1) r2 d4
//! m0 = −x² − y² + r2² + (R + 1 − L)²/4
//! ```
//!
//! Substituting `cos θ3 = (1 − t²)/(1 + t²)`, `sin θ3 = 2t/(1 + t²)` and
//! clearing `(1 + t²)²` yields the quartic with
//! `a = m5 − m2 + m0`, `b = 2m1 − 2m3`, `c = 4m4 − 2m5 + 2m0`,
//! `d = 2m3 + 2m1`, `e = m5 + m2 + m0`. A vanishing `a` is the `θ3 = π`
//! configuration (`t → ∞`).
//!
//! # Jacobian
//!
//! `det ∂(x,y,z)/∂(θ1,θ2,θ3) = d4 · A · (sin θ3 − cos θ2 (r2 cos θ3 − d3 sin θ3))`,
//! independent of θ1. The first factor vanishes on the constant-θ3 lines where
//! the end point meets the second joint axis; the second factor is the
//! fold locus that bounds the posture regions of the workspace.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quartic::{real_roots, Quartic};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub d3: f64,
    pub r2: f64,
    pub d4: f64,
}

impl DesignParams {
    /// Arguments in the `(d3, r2, d4)` order used by the CLI and tables.
    pub fn new(d3: f64, r2: f64, d4: f64) -> Result<Self> {
        let p = DesignParams { d3, r2, d4 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d3", self.d3), ("r2", self.r2), ("d4", self.d4)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be a positive finite number, got {v}")));
            }
        }
        Ok(())
    }

    /// Upper bound on `|p|` over the joint space.
    pub fn reach(&self) -> f64 {
        1.0 + self.d3 + self.d4 + self.r2
    }

    pub fn l_sq(&self) -> f64 {
        self.d3 * self.d3 + self.d4 * self.d4 + self.r2 * self.r2
    }

    /// Roots of `d3 + d4 cos θ3` in `(−π, π]`; one root when `d4 == d3`.
    pub fn axis_line_angles(&self) -> Vec<f64> {
        let c = -self.d3 / self.d4;
        if c < -1.0 {
            Vec::new()
        } else if c == -1.0 {
            vec![PI]
        } else {
            let a = c.acos();
            vec![-a, a]
        }
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Absolute angular distance on the circle.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl JointConfig {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        JointConfig { theta1: wrap_angle(theta1), theta2: wrap_angle(theta2), theta3: wrap_angle(theta3) }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    pub fn max_angle_dist(&self, other: &JointConfig) -> f64 {
        angle_dist(self.theta1, other.theta1)
            .max(angle_dist(self.theta2, other.theta2))
            .max(angle_dist(self.theta3, other.theta3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        CartesianPoint { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, o: &CartesianPoint) -> f64 {
        ((self.x - o.x).powi(2) + (self.y - o.y).powi(2) + (self.z - o.z).powi(2)).sqrt()
    }
}

pub fn fk(params: &DesignParams, q: &JointConfig) -> CartesianPoint {
    let (s1, c1) = q.theta1.sin_cos();
    let (s2, c2) = q.theta2.sin_cos();
    let (s3, c3) = q.theta3.sin_cos();
    let a = params.d3 + params.d4 * c3;
    let b = params.r2 + params.d4 * s3;
    let planar = 1.0 + a * c2;
    CartesianPoint { x: planar * c1 - b * s1, y: planar * s1 + b * c1, z: -a * s2 }
}

/// `(ρ, z)` of the end point; depends on θ2 and θ3 only.
pub fn section_point(params: &DesignParams, theta2: f64, theta3: f64) -> (f64, f64) {
    let p = fk(params, &JointConfig::new(0.0, theta2, theta3));
    (p.rho(), p.z)
}

/// Columns are the partial derivatives with respect to θ1, θ2, θ3.
pub fn jacobian(params: &DesignParams, q: &JointConfig) -> Matrix3<f64> {
    let (s1, c1) = q.theta1.sin_cos();
    let (s2, c2) = q.theta2.sin_cos();
    let (s3, c3) = q.theta3.sin_cos();
    let a = params.d3 + params.d4 * c3;
    let b = params.r2 + params.d4 * s3;
    let da = -params.d4 * s3;
    let db = params.d4 * c3;
    let planar = 1.0 + a * c2;
    Matrix3::new(
        -planar * s1 - b * c1,
        -a * s2 * c1,
        da * c2 * c1 - db * s1,
        planar * c1 - b * s1,
        -a * s2 * s1,
        da * c2 * s1 + db * c1,
        0.0,
        -a * c2,
        -da * s2,
    )
}

pub fn jacobian_det(params: &DesignParams, theta2: f64, theta3: f64) -> f64 {
    jacobian(params, &JointConfig::new(0.0, theta2, theta3)).determinant()
}

/// `d3 + d4 cos θ3`: vanishes when the end point lies on the second axis.
pub fn axis_factor(params: &DesignParams, theta3: f64) -> f64 {
    params.d3 + params.d4 * theta3.cos()
}

/// The fold factor of the Jacobian determinant.
pub fn fold_factor(params: &DesignParams, theta2: f64, theta3: f64) -> f64 {
    let (s3, c3) = theta3.sin_cos();
    s3 - theta2.cos() * (params.r2 * c3 - params.d3 * s3)
}

/// `d4 · axis_factor · fold_factor`, equal to [`jacobian_det`].
pub fn jacobian_det_factored(params: &DesignParams, theta2: f64, theta3: f64) -> f64 {
    params.d4 * axis_factor(params, theta3) * fold_factor(params, theta2, theta3)
}

/// Gradient of the fold factor in `(θ2, θ3)`.
pub fn fold_gradient(params: &DesignParams, theta2: f64, theta3: f64) -> (f64, f64) {
    let (s2, c2) = theta2.sin_cos();
    let (s3, c3) = theta3.sin_cos();
    let w = params.r2 * c3 - params.d3 * s3;
    (s2 * w, c3 + c2 * (params.r2 * s3 + params.d3 * c3))
}

/// Coefficients of the θ3-only trigonometric equation for a target point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigQuadraticForm {
    /// `m0 … m5`
    pub m: [f64; 6],
    /// `x² + y² + z²`
    pub r_sq: f64,
    /// `d3² + d4² + r2²`
    pub l_sq: f64,
}

impl TrigQuadraticForm {
    pub fn residual(&self, theta3: f64) -> f64 {
        let [m0, m1, m2, m3, m4, m5] = self.m;
        let (s, c) = theta3.sin_cos();
        m5 * c * c + m4 * s * s + m3 * c * s + m2 * c + m1 * s + m0
    }

    /// Second derivative in θ3 of [`residual`](Self::residual).
    pub fn residual_dd(&self, theta3: f64) -> f64 {
        let [_, m1, m2, m3, m4, m5] = self.m;
        let (s, c) = theta3.sin_cos();
        let (s2, c2) = (2.0 * theta3).sin_cos();
        2.0 * (m4 - m5) * c2 - 2.0 * m3 * s2 - m2 * c - m1 * s
    }

    /// Magnitude of the largest term, for scaling residuals.
    pub fn scale(&self) -> f64 {
        self.m.iter().fold(0.0f64, |a, m| a.max(m.abs()))
    }

    pub fn to_quartic(&self) -> Quartic {
        let [m0, m1, m2, m3, m4, m5] = self.m;
        Quartic::new(
            m5 - m2 + m0,
            -2.0 * m3 + 2.0 * m1,
            -2.0 * m5 + 4.0 * m4 + 2.0 * m0,
            2.0 * m3 + 2.0 * m1,
            m5 + m2 + m0,
        )
    }
}

pub fn trig_coeffs(params: &DesignParams, p: &CartesianPoint) -> TrigQuadraticForm {
    let DesignParams { d3, r2, d4 } = *params;
    let rho_sq = p.x * p.x + p.y * p.y;
    let r_sq = rho_sq + p.z * p.z;
    let l_sq = params.l_sq();
    let m5 = d3 * d3 * d4 * d4;
    let m4 = d4 * d4 * (r2 * r2 + 1.0);
    let m3 = 2.0 * r2 * d3 * d4 * d4;
    let m2 = (l_sq - r_sq - 1.0) * d4 * d3;
    let m1 = (l_sq - r_sq + 1.0) * d4 * r2;
    let m0 = -rho_sq + r2 * r2 + (r_sq + 1.0 - l_sq).powi(2) / 4.0;
    TrigQuadraticForm { m: [m0, m1, m2, m3, m4, m5], r_sq, l_sq }
}

pub fn ik_quartic(params: &DesignParams, p: &CartesianPoint) -> Quartic {
    trig_coeffs(params, p).to_quartic()
}

/// Half-angle parameter back to θ3; `t = ±∞` is `θ3 = π`.
pub fn theta3_from_t(t: f64) -> f64 {
    if t.is_infinite() {
        PI
    } else {
        wrap_angle(2.0 * t.atan())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkOptions {
    pub cluster_tol: f64,
    /// Accepted FK residual is `eps_rel · (1 + |p|)`.
    pub eps_rel: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        IkOptions { cluster_tol: 1e-6, eps_rel: 1e-8 }
    }
}

/// All joint configurations reaching `p`, one per distinct real root.
pub fn solve_ik(params: &DesignParams, p: &CartesianPoint, opts: &IkOptions) -> Result<Vec<JointConfig>> {
    let form = trig_coeffs(params, p);
    let quartic = form.to_quartic();
    let continuum = || Error::ContinuumOfSolutions { x: p.x, y: p.y, z: p.z };
    let roots = real_roots(&quartic, opts.cluster_tol).map_err(|e| match e {
        Error::DegenerateQuartic => continuum(),
        e => e,
    })?;
    let eps = opts.eps_rel * (1.0 + p.norm());

    let mut theta3s: Vec<f64> = roots.values().map(theta3_from_t).collect();
    if roots.degree_at_infinity > 0 {
        theta3s.push(PI);
    }

    let mut out: Vec<JointConfig> = Vec::new();
    for theta3 in theta3s {
        let (s3, c3) = theta3.sin_cos();
        let a = params.d3 + params.d4 * c3;
        let b = params.r2 + params.d4 * s3;
        let k = (form.r_sq - 1.0 - a * a - b * b) / 2.0;
        if a.abs() <= 1e-12 * (params.d3 + params.d4) {
            if k.abs() <= eps && p.z.abs() <= eps {
                return Err(continuum());
            }
            continue;
        }
        let theta2 = (-p.z / a).atan2(k / a);
        let mut candidates = vec![theta2];
        if p.z.abs() <= 1e-12 * (1.0 + p.norm()) {
            candidates.push(-theta2);
        }
        for theta2 in candidates {
            let planar = 1.0 + a * theta2.cos();
            let theta1 = p.y.atan2(p.x) - b.atan2(planar);
            let q = polish_ik(params, p, JointConfig::new(theta1, theta2, theta3));
            if fk(params, &q).dist(p) < eps && !out.iter().any(|o| o.max_angle_dist(&q) < 1e-9) {
                out.push(q);
            }
        }
    }
    Ok(out)
}

/// A few least-squares Newton steps on the forward map.
fn polish_ik(params: &DesignParams, target: &CartesianPoint, mut q: JointConfig) -> JointConfig {
    let residual = |q: &JointConfig| {
        let p = fk(params, q);
        Vector3::new(target.x - p.x, target.y - p.y, target.z - p.z)
    };
    let mut r = residual(&q);
    for _ in 0..4 {
        let j = jacobian(params, &q);
        let Ok(step) = j.svd(true, true).solve(&r, 1e-12) else {
            break;
        };
        let next = JointConfig::new(q.theta1 + step[0], q.theta2 + step[1], q.theta3 + step[2]);
        let rn = residual(&next);
        if rn.norm() < r.norm() {
            q = next;
            r = rn;
        } else {
            break;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: DesignParams = DesignParams { d3: 2.0, r2: 1.0, d4: 1.5 };

    #[test]
    fn fk_home_and_rotated() {
        for p in [FIG1, DesignParams { d3: 0.21, r2: 0.1, d4: 0.05 }] {
            let home = fk(&p, &JointConfig::new(0.0, 0.0, 0.0));
            assert!((home.x - (1.0 + p.d3 + p.d4)).abs() < 1e-15);
            assert!((home.y - p.r2).abs() < 1e-15 && home.z == 0.0);
            let rot = fk(&p, &JointConfig::new(PI / 2.0, 0.0, 0.0));
            assert!((rot.x + p.r2).abs() < 1e-15);
            assert!((rot.y - (1.0 + p.d3 + p.d4)).abs() < 1e-15);
        }
        let p = fk(&FIG1, &JointConfig::new(0.0, PI / 2.0, 0.0));
        assert!((p.x - 1.0).abs() < 1e-15 && (p.y - 1.0).abs() < 1e-15 && (p.z + 3.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_params() {
        assert!(DesignParams::new(-1.0, 0.1, 0.2).is_err());
        assert!(DesignParams::new(1.0, 0.0, 0.2).is_err());
        assert!(DesignParams::new(1.0, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn determinant_vanishes_on_axis_lines() {
        let p = DesignParams::new(1.11, 0.13, 1.4).unwrap();
        let t3 = (-p.d3 / p.d4).acos();
        for i in 0..16 {
            let t2 = -PI + i as f64 * 0.4;
            assert!(jacobian_det(&p, t2, t3).abs() < 1e-14);
            assert!(jacobian_det(&p, t2, -t3).abs() < 1e-14);
        }
    }

    #[test]
    fn factored_determinant_matches_matrix() {
        let p = DesignParams::new(0.75, 0.52, 0.85).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let (t2, t3) = (-3.0 + 0.3 * i as f64, -3.0 + 0.3 * j as f64);
                let full = jacobian_det(&p, t2, t3);
                let fac = jacobian_det_factored(&p, t2, t3);
                assert!((full - fac).abs() < 1e-13, "{full} vs {fac}");
            }
        }
    }

    #[test]
    fn coefficient_closed_forms() {
        let p = DesignParams::new(1.36, 0.35, 0.75).unwrap();
        let pt = CartesianPoint::new(0.0, 0.0, 0.8);
        let f = trig_coeffs(&p, &pt);
        assert_eq!(f.m[5], p.d3 * p.d3 * p.d4 * p.d4);
        assert_eq!(f.m[4], p.d4 * p.d4 * (p.r2 * p.r2 + 1.0));
        let expect_m0 = p.r2 * p.r2 + (f.r_sq + 1.0 - f.l_sq).powi(2) / 4.0;
        assert!((f.m[0] - expect_m0).abs() < 1e-15);
    }

    #[test]
    fn trig_residual_vanishes_at_fk_angle() {
        let p = DesignParams::new(0.75, 0.52, 0.85).unwrap();
        for (t2, t3) in [(0.3, 1.2), (-2.0, 2.9), (1.0, -0.4)] {
            let pt = fk(&p, &JointConfig::new(0.7, t2, t3));
            let f = trig_coeffs(&p, &pt);
            assert!(f.residual(t3).abs() < 1e-12 * f.scale());
        }
    }

    #[test]
    fn far_point_has_no_solution() {
        let p = DesignParams::new(0.21, 0.1, 0.05).unwrap();
        let sols = solve_ik(&p, &CartesianPoint::new(100.0, 0.0, 0.0), &IkOptions::default()).unwrap();
        assert!(sols.is_empty());
    }

    #[test]
    fn theta3_at_pi_is_recovered() {
        let p = DesignParams::new(2.0, 1.0, 1.5).unwrap();
        let q = JointConfig::new(0.3, 0.8, PI);
        let pt = fk(&p, &q);
        let sols = solve_ik(&p, &pt, &IkOptions::default()).unwrap();
        assert!(sols.iter().any(|s| s.max_angle_dist(&q) < 1e-6), "{sols:?}");
    }

    #[test]
    fn axis_line_angles_cases() {
        assert!(DesignParams::new(1.0, 0.1, 0.5).unwrap().axis_line_angles().is_empty());
        assert_eq!(DesignParams::new(0.21, 0.2, 0.21).unwrap().axis_line_angles(), vec![PI]);
        assert_eq!(DesignParams::new(0.5, 0.2, 1.0).unwrap().axis_line_angles().len(), 2);
    }
}
