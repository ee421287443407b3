//! Singularity structure of the `(θ2, θ3)` joint torus.

pub mod aspects;
pub mod contour;
pub mod genericity;
pub mod homotopy;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::kinematics::wrap_angle;

pub use aspects::{count_aspects, count_aspects_on, AspectInfo, AspectMap};
pub use contour::{singular_curves, singular_curves_on, CurveOrigin, SingularCurve};
pub use genericity::{genericity, Genericity, Witness, WitnessKind};
pub use homotopy::{homotopy_class, HomotopyGroup, HomotopySignature};

/// Square grid over the torus with an optional shift of the cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub resolution: usize,
    pub shift: (f64, f64),
}

impl TorusGrid {
    pub fn new(resolution: usize) -> Self {
        TorusGrid { resolution, shift: (0.0, 0.0) }
    }

    pub fn with_shift(resolution: usize, shift: (f64, f64)) -> Self {
        TorusGrid { resolution, shift }
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.resolution as f64
    }

    /// Unwrapped coordinate of node index `i` along one axis.
    fn coord(&self, i: usize, shift: f64) -> f64 {
        -PI + shift + i as f64 * self.step()
    }

    pub fn theta2(&self, i: usize) -> f64 {
        wrap_angle(self.coord(i % self.resolution, self.shift.0))
    }

    pub fn theta3(&self, j: usize) -> f64 {
        wrap_angle(self.coord(j % self.resolution, self.shift.1))
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.theta2(i), self.theta3(j))
    }

    /// Cell containing `(θ2, θ3)`; cell `(i, j)` spans nodes `i..=i+1`, `j..=j+1`.
    pub fn cell_of(&self, theta2: f64, theta3: f64) -> (usize, usize) {
        let n = self.resolution;
        let idx = |theta: f64, shift: f64| {
            let u = (theta + PI - shift).rem_euclid(2.0 * PI) / self.step();
            (u.floor() as usize).min(n - 1)
        };
        (idx(theta2, self.shift.0), idx(theta3, self.shift.1))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.step();
        (wrap_angle(self.coord(i, self.shift.0) + h / 2.0), wrap_angle(self.coord(j, self.shift.1) + h / 2.0))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        (i % self.resolution) * self.resolution + (j % self.resolution)
    }
}

/// Distance on the flat torus.
pub fn torus_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    wrap_angle(a.0 - b.0).hypot(wrap_angle(a.1 - b.1))
}
