//! Numerical genericity test.
//!
//! A manipulator is non-generic when the determinant has a critical point on
//! its own zero set, or the Jacobian drops to rank one at a singular point.
//! Crossings between an axis line and a fold curve are located in closed form;
//! the remaining cases are searched from local minima of `|∇ det J|` along
//! the traced curves and refined by Newton's method on `∇ det J = 0`.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::{SingularCurve, TorusGrid};
use crate::config::Tolerances;
use crate::kinematics::{jacobian, jacobian_det, wrap_angle, DesignParams, JointConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    CurveCrossing,
    VanishingGradient,
    RankDeficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub theta2: f64,
    pub theta3: f64,
    pub kind: WitnessKind,
    /// `|∇ det J|` relative to the largest `|det J|` on the grid.
    pub relative_gradient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Genericity {
    pub generic: bool,
    pub witness: Option<Witness>,
}

fn gradient(params: &DesignParams, a: f64, b: f64, h: f64) -> Vector2<f64> {
    Vector2::new(
        (jacobian_det(params, a + h, b) - jacobian_det(params, a - h, b)) / (2.0 * h),
        (jacobian_det(params, a, b + h) - jacobian_det(params, a, b - h)) / (2.0 * h),
    )
}

fn hessian(params: &DesignParams, a: f64, b: f64, h: f64) -> Matrix2<f64> {
    let ga = |x: f64, y: f64| gradient(params, x, y, h);
    let da = (ga(a + h, b) - ga(a - h, b)) / (2.0 * h);
    let db = (ga(a, b + h) - ga(a, b - h)) / (2.0 * h);
    let off = 0.5 * (da[1] + db[0]);
    Matrix2::new(da[0], off, off, db[1])
}

/// Largest `|det J|` over the nodes of a grid; the scale for relative tests.
pub fn det_scale(params: &DesignParams, grid: &TorusGrid) -> f64 {
    let n = grid.resolution;
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = grid.node(i, j);
            m = m.max(jacobian_det(params, a, b).abs());
        }
    }
    m.max(f64::MIN_POSITIVE)
}

/// Points where an axis line meets a fold curve.
pub fn axis_fold_crossings(params: &DesignParams) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for theta3 in params.axis_line_angles() {
        let (s3, c3) = theta3.sin_cos();
        let w = params.r2 * c3 - params.d3 * s3;
        // fold factor on the line: s3 − cos θ2 · w
        if w == 0.0 {
            if s3 == 0.0 {
                out.push((0.0, theta3));
            }
            continue;
        }
        let c2 = s3 / w;
        if c2.abs() <= 1.0 {
            let t2 = c2.acos();
            out.push((t2, theta3));
            if t2 != 0.0 {
                out.push((-t2, theta3));
            }
        }
    }
    out
}

pub fn genericity(params: &DesignParams, curves: &[SingularCurve], tol: &Tolerances) -> Genericity {
    let scale = det_scale(params, &TorusGrid::new(128));
    let h = tol.fd_step;
    let rel_grad = |a: f64, b: f64| gradient(params, a, b, h).norm() / scale;

    if let Some(&(a, b)) = axis_fold_crossings(params).first() {
        return non_generic(a, b, WitnessKind::CurveCrossing, rel_grad(a, b));
    }

    let on_curve = |a: f64, b: f64| jacobian_det(params, a, b).abs() <= tol.eps_curve * scale;
    let rank_deficient = |a: f64, b: f64| {
        let sv = jacobian(params, &JointConfig::new(0.0, a, b)).singular_values();
        let mut s = [sv[0], sv[1], sv[2]];
        s.sort_by(|x, y| y.total_cmp(x));
        s[1] < tol.eps_rank * s[0]
    };

    for curve in curves {
        let n = curve.points.len();
        if n == 0 {
            continue;
        }
        let g: Vec<f64> = curve.points.iter().map(|&(a, b)| rel_grad(a, b)).collect();
        for k in 0..n {
            let (a, b) = curve.points[k];
            if rank_deficient(a, b) {
                return non_generic(a, b, WitnessKind::RankDeficient, g[k]);
            }
            if g[k] < tol.eps_grad {
                return non_generic(a, b, WitnessKind::VanishingGradient, g[k]);
            }
            let prev = g[(k + n - 1) % n];
            let next = g[(k + 1) % n];
            if !(g[k] <= prev && g[k] <= next) {
                continue;
            }
            if let Some((ra, rb)) = newton_critical_point(params, a, b, h) {
                let rg = rel_grad(ra, rb);
                if on_curve(ra, rb) && rg < tol.eps_grad {
                    return non_generic(ra, rb, WitnessKind::VanishingGradient, rg);
                }
            }
        }
    }
    Genericity { generic: true, witness: None }
}

fn non_generic(theta2: f64, theta3: f64, kind: WitnessKind, relative_gradient: f64) -> Genericity {
    Genericity {
        generic: false,
        witness: Some(Witness { theta2: wrap_angle(theta2), theta3: wrap_angle(theta3), kind, relative_gradient }),
    }
}

/// Newton's method on `∇ det J = 0`, kept within a small neighbourhood.
fn newton_critical_point(params: &DesignParams, a0: f64, b0: f64, h: f64) -> Option<(f64, f64)> {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..40 {
        let g = gradient(params, a, b, h);
        let step = hessian(params, a, b, h.max(1e-4)).lu().solve(&(-g))?;
        let len = step.norm();
        let step = if len > 0.05 { step * (0.05 / len) } else { step };
        a += step[0];
        b += step[1];
        if (a - a0).hypot(b - b0) > 0.3 {
            return None;
        }
        if step.norm() < 1e-13 {
            break;
        }
    }
    Some((wrap_angle(a), wrap_angle(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::fold_factor;

    #[test]
    fn crossings_lie_on_both_factors() {
        let p = DesignParams::new(1.11, 0.13, 1.4).unwrap();
        // By hand: only the line with sin θ3 > 0 meets the fold, at cos θ2 ≈ -0.7818.
        let xs = axis_fold_crossings(&p);
        assert_eq!(xs.len(), 2);
        assert!(xs.iter().all(|&(a, b)| b > 0.0 && (a.cos() + 0.7818).abs() < 1e-4));
        for (a, b) in xs {
            assert!(fold_factor(&p, a, b).abs() < 1e-12);
            assert!((p.d3 + p.d4 * b.cos()).abs() < 1e-12);
        }
    }
}
