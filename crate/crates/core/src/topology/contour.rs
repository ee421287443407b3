//! Zero-set tracing on the periodic grid.
//!
//! The fold factor is contoured by marching squares: crossing edges get a
//! vertex refined by bisection, saddle cells are resolved with the exact value
//! at the cell centre, and segments are chained into loops across the cut.
//! The axis factor depends on θ3 alone, so its zero set is built directly as
//! constant-θ3 lines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TorusGrid;
use crate::error::{Error, Result};
use crate::kinematics::{fold_factor, wrap_angle, DesignParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveOrigin {
    /// `d3 + d4 cos θ3 = 0`
    AxisLine,
    /// Zero set of the fold factor.
    Fold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularCurve {
    /// `(θ2, θ3)` vertices, each wrapped into `(−π, π]`.
    pub points: Vec<(f64, f64)>,
    /// Total `(Δθ2, Δθ3)` along the curve, summing wrapped steps.
    pub unwrapped_delta: (f64, f64),
    pub closed: bool,
    /// Passed through a saddle cell whose connectivity could not be decided.
    pub suspect: bool,
    pub origin: CurveOrigin,
}

impl SingularCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn from_loop(points: Vec<(f64, f64)>, closed: bool, suspect: bool, origin: CurveOrigin) -> Self {
        let mut delta = (0.0, 0.0);
        let steps = if closed { points.len() } else { points.len().saturating_sub(1) };
        for k in 0..steps {
            let a = points[k];
            let b = points[(k + 1) % points.len()];
            delta.0 += wrap_angle(b.0 - a.0);
            delta.1 += wrap_angle(b.1 - a.1);
        }
        SingularCurve { points, unwrapped_delta: delta, closed, suspect, origin }
    }
}

/// Singular curves on a `resolution²` grid with the cut at `(−π, −π)`.
pub fn singular_curves(params: &DesignParams, resolution: usize) -> Result<Vec<SingularCurve>> {
    singular_curves_on(params, &TorusGrid::new(resolution))
}

pub fn singular_curves_on(params: &DesignParams, grid: &TorusGrid) -> Result<Vec<SingularCurve>> {
    params.validate()?;
    if grid.resolution < 64 {
        return Err(Error::Config(format!("curve tracing needs resolution >= 64, got {}", grid.resolution)));
    }
    let mut curves = axis_lines(params, grid);
    let p = *params;
    curves.extend(trace_zero_set(&move |t2, t3| fold_factor(&p, t2, t3), grid, CurveOrigin::Fold));
    Ok(curves)
}

/// Constant-θ3 lines where the end point meets the second joint axis.
pub fn axis_lines(params: &DesignParams, grid: &TorusGrid) -> Vec<SingularCurve> {
    params
        .axis_line_angles()
        .into_iter()
        .map(|theta3| {
            let points = (0..grid.resolution).map(|i| (grid.theta2(i), theta3)).collect();
            SingularCurve::from_loop(points, true, false, CurveOrigin::AxisLine)
        })
        .collect()
}

const NONE: usize = usize::MAX;

/// Marching squares on a periodic grid; returns the chained zero-level loops.
pub fn trace_zero_set<F>(f: &F, grid: &TorusGrid, origin: CurveOrigin) -> Vec<SingularCurve>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let n = grid.resolution;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (0..n).map(move |j| (i, j)).collect::<Vec<_>>())
        .map(|(i, j)| {
            let (a, b) = grid.node(i, j);
            f(a, b)
        })
        .collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let val = |i: usize, j: usize| values[grid.index(i, j)];
    let pos = |v: f64| v >= 0.0;

    // Edge ids: 2·node for the θ2-direction edge leaving the node, 2·node + 1
    // for the θ3-direction edge.
    let h_edge = |i: usize, j: usize| 2 * grid.index(i, j);
    let v_edge = |i: usize, j: usize| 2 * grid.index(i, j) + 1;

    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut suspect_seg: Vec<bool> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let c = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
            let s = c.map(pos);
            let bottom = h_edge(i, j);
            let right = v_edge(i + 1, j);
            let top = h_edge(i, j + 1);
            let left = v_edge(i, j);
            let crossing = [(s[0] != s[1], bottom), (s[1] != s[2], right), (s[3] != s[2], top), (s[0] != s[3], left)];
            let hits: Vec<usize> = crossing.iter().filter(|c| c.0).map(|c| c.1).collect();
            match hits.len() {
                2 => {
                    segments.push((hits[0], hits[1]));
                    suspect_seg.push(false);
                }
                4 => {
                    let (t2, t3) = grid.cell_center(i, j);
                    let centre = f(t2, t3);
                    let ambiguous = centre.abs() <= 1e-12 * scale;
                    let joined = if ambiguous { pos(c.iter().sum::<f64>()) == s[0] } else { pos(centre) == s[0] };
                    if joined {
                        // corners 0 and 2 connect through the centre
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((bottom, left));
                        segments.push((right, top));
                    }
                    suspect_seg.push(ambiguous);
                    suspect_seg.push(ambiguous);
                }
                _ => {}
            }
        }
    }

    let mut incident = vec![[NONE; 2]; 2 * n * n];
    for (k, &(a, b)) in segments.iter().enumerate() {
        for e in [a, b] {
            let slot = &mut incident[e];
            if slot[0] == NONE {
                slot[0] = k;
            } else {
                slot[1] = k;
            }
        }
    }

    let vertex = |edge: usize| -> (f64, f64) {
        let node = edge / 2;
        let (i, j) = (node / n, node % n);
        let (a0, b0) = grid.node(i, j);
        let h = grid.step();
        let (da, db) = if edge.is_multiple_of(2) { (h, 0.0) } else { (0.0, h) };
        let at = |s: f64| (a0 + s * da, b0 + s * db);
        let f0 = {
            let (x, y) = at(0.0);
            f(x, y)
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (x, y) = at(mid);
            let fm = f(x, y);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if pos(fm) == pos(f0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x, y) = at(0.5 * (lo + hi));
        (wrap_angle(x), wrap_angle(y))
    };

    let mut used = vec![false; segments.len()];
    let mut curves = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut suspect = suspect_seg[start];
        let (first, mut edge) = segments[start];
        let mut edges = vec![first];
        let mut current = start;
        let mut closed = false;
        loop {
            if edge == first {
                closed = true;
                break;
            }
            edges.push(edge);
            let [s0, s1] = incident[edge];
            let next = if s0 == current { s1 } else { s0 };
            if next == NONE || used[next] {
                break;
            }
            used[next] = true;
            suspect |= suspect_seg[next];
            let (a, b) = segments[next];
            edge = if a == edge { b } else { a };
            current = next;
        }
        let points = edges.into_iter().map(vertex).collect();
        curves.push(SingularCurve::from_loop(points, closed, suspect, origin));
    }
    curves
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn traces_a_small_circle() {
        let f = |a: f64, b: f64| a * a + b * b - 0.25;
        let curves = trace_zero_set(&f, &TorusGrid::new(128), CurveOrigin::Fold);
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(c.closed);
        assert!(c.unwrapped_delta.0.abs() < 1e-9 && c.unwrapped_delta.1.abs() < 1e-9);
        for &(a, b) in &c.points {
            assert!((a.hypot(b) - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn traces_lines_across_the_cut() {
        let f = |a: f64, b: f64| (b - 0.4 * a.sin()).sin();
        let curves = trace_zero_set(&f, &TorusGrid::with_shift(96, (0.2, 0.1)), CurveOrigin::Fold);
        assert_eq!(curves.len(), 2);
        for c in curves {
            assert!(c.closed);
            assert!((c.unwrapped_delta.0.abs() - 2.0 * PI).abs() < 1e-9);
            assert!(c.unwrapped_delta.1.abs() < 1e-9);
        }
    }
}
