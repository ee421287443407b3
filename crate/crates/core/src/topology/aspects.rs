//! Aspect labelling: connected components of the torus minus the singular set.
//!
//! A cell is a wall when the fold factor changes sign across its corners or
//! when an axis line passes through its θ3 span. Testing the two factors
//! separately keeps the tangent axis line of `d3 = d4` (across which the
//! determinant keeps its sign) as a wall.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TorusGrid;
use crate::config::Settings;
use crate::error::{Error, Result};
use crate::kinematics::{angle_dist, axis_factor, fold_factor, jacobian_det, DesignParams};

const WALL: u32 = u32::MAX;

struct DisjointSet {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectInfo {
    pub cells: usize,
    /// Sign of `det J` inside the aspect.
    pub det_sign: i8,
    /// Centre of the first labelled cell.
    pub representative: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectMap {
    pub grid: TorusGrid,
    /// Per-cell label indexed like the grid; `WALL` marks singular cells.
    labels: Vec<u32>,
    pub aspects: Vec<AspectInfo>,
}

impl AspectMap {
    pub fn aspect_count(&self) -> usize {
        self.aspects.len()
    }

    pub fn resolution(&self) -> usize {
        self.grid.resolution
    }

    pub fn cell_label(&self, i: usize, j: usize) -> Option<usize> {
        match self.labels[self.grid.index(i, j)] {
            WALL => None,
            l => Some(l as usize),
        }
    }

    pub fn label_at(&self, theta2: f64, theta3: f64) -> Option<usize> {
        let (i, j) = self.grid.cell_of(theta2, theta3);
        self.cell_label(i, j)
    }

    /// Aspect containing a regular configuration. Points in wall cells are
    /// moved away from the singular set by ascending `log |det J|`; the walk
    /// is abandoned if either factor changes sign.
    pub fn locate(&self, params: &DesignParams, theta2: f64, theta3: f64) -> Option<usize> {
        if let Some(l) = self.label_at(theta2, theta3) {
            return Some(l);
        }
        let sa = axis_factor(params, theta3).signum();
        let sg = fold_factor(params, theta2, theta3).signum();
        if sa == 0.0 || sg == 0.0 {
            return None;
        }
        let h = self.grid.step();
        let merit = |a: f64, b: f64| {
            (axis_factor(params, b).abs() + f64::MIN_POSITIVE).ln()
                + (fold_factor(params, a, b).abs() + f64::MIN_POSITIVE).ln()
        };
        let (mut a, mut b) = (theta2, theta3);
        let fd = 1e-6;
        for _ in 0..400 {
            let ga = (merit(a + fd, b) - merit(a - fd, b)) / (2.0 * fd);
            let gb = (merit(a, b + fd) - merit(a, b - fd)) / (2.0 * fd);
            let norm = ga.hypot(gb);
            if !norm.is_finite() || norm == 0.0 {
                return None;
            }
            a += 0.5 * h * ga / norm;
            b += 0.5 * h * gb / norm;
            if axis_factor(params, b).signum() != sa || fold_factor(params, a, b).signum() != sg {
                return None;
            }
            if let Some(l) = self.label_at(a, b) {
                return Some(l);
            }
        }
        None
    }
}

/// Labels the aspects on one grid.
pub fn label_aspects(params: &DesignParams, grid: &TorusGrid) -> AspectMap {
    let n = grid.resolution;
    let h = grid.step();
    let fold: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (a, b) = grid.node(k / n, k % n);
            fold_factor(params, a, b)
        })
        .collect();
    let axis_roots = params.axis_line_angles();
    // θ3 rows whose span contains an axis root.
    let axis_row: Vec<bool> = (0..n)
        .map(|j| {
            let lo = grid.theta3(j);
            axis_roots.iter().any(|&r| {
                let d = (r - lo).rem_euclid(2.0 * std::f64::consts::PI);
                d <= h || angle_dist(r, lo) == 0.0
            })
        })
        .collect();

    let wall = |i: usize, j: usize| -> bool {
        if axis_row[j] {
            return true;
        }
        let c = [
            fold[grid.index(i, j)],
            fold[grid.index(i + 1, j)],
            fold[grid.index(i + 1, j + 1)],
            fold[grid.index(i, j + 1)],
        ];
        let all_pos = c.iter().all(|&v| v > 0.0);
        let all_neg = c.iter().all(|&v| v < 0.0);
        !(all_pos || all_neg)
    };

    let is_wall: Vec<bool> = (0..n * n).map(|k| wall(k / n, k % n)).collect();
    let mut ds = DisjointSet::new(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = grid.index(i, j);
            if is_wall[k] {
                continue;
            }
            for nb in [grid.index(i + 1, j), grid.index(i, j + 1)] {
                if !is_wall[nb] {
                    ds.union(k as u32, nb as u32);
                }
            }
        }
    }

    let mut labels = vec![WALL; n * n];
    let mut root_label: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    let mut aspects: Vec<AspectInfo> = Vec::new();
    for k in 0..n * n {
        if is_wall[k] {
            continue;
        }
        let root = ds.find(k as u32);
        let next = aspects.len() as u32;
        let label = *root_label.entry(root).or_insert_with(|| {
            let (a, b) = grid.cell_center(k / n, k % n);
            aspects.push(AspectInfo {
                cells: 0,
                det_sign: jacobian_det(params, a, b).signum() as i8,
                representative: (a, b),
            });
            next
        });
        labels[k] = label;
        aspects[label as usize].cells += 1;
    }
    AspectMap { grid: *grid, labels, aspects }
}

/// Counts aspects, doubling the resolution until two successive counts agree.
pub fn count_aspects(params: &DesignParams, settings: &Settings) -> Result<AspectMap> {
    count_aspects_on(params, settings, (0.0, 0.0))
}

pub fn count_aspects_on(params: &DesignParams, settings: &Settings, shift: (f64, f64)) -> Result<AspectMap> {
    params.validate()?;
    let mut res = settings.joint_resolution;
    let mut prev = label_aspects(params, &TorusGrid::with_shift(res, shift));
    while res * 2 <= settings.joint_resolution_cap {
        res *= 2;
        let next = label_aspects(params, &TorusGrid::with_shift(res, shift));
        if next.aspect_count() == prev.aspect_count() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::AspectCountUnstable { max_resolution: settings.joint_resolution_cap })
}
