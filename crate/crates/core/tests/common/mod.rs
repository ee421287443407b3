#![allow(dead_code)]

use cuspidal_atlas::DesignParams;

/// One row of the reference manipulator table.
pub struct Reference {
    pub label: &'static str,
    pub d3: f64,
    pub r2: f64,
    pub d4: f64,
    pub aspects: usize,
    pub cuspidal: bool,
    pub class: &'static str,
    pub cusps: usize,
}

impl Reference {
    pub fn params(&self) -> DesignParams {
        DesignParams::new(self.d3, self.r2, self.d4).unwrap()
    }
}

pub const ROWS: [Reference; 8] = [
    Reference { label: "a", d3: 0.21, r2: 0.1, d4: 0.05, aspects: 2, cuspidal: false, class: "binary", cusps: 0 },
    Reference { label: "b", d3: 0.21, r2: 0.19, d4: 0.25, aspects: 4, cuspidal: false, class: "binary", cusps: 0 },
    Reference { label: "c", d3: 0.21, r2: 0.2, d4: 0.21, aspects: 4, cuspidal: true, class: "n.g", cusps: 4 },
    Reference { label: "d", d3: 1.36, r2: 0.35, d4: 0.75, aspects: 2, cuspidal: true, class: "2(1,0)", cusps: 4 },
    Reference { label: "e", d3: 0.75, r2: 0.52, d4: 0.85, aspects: 4, cuspidal: true, class: "n.g", cusps: 2 },
    Reference { label: "f", d3: 1.11, r2: 0.13, d4: 1.4, aspects: 4, cuspidal: true, class: "n.g", cusps: 2 },
    Reference { label: "g", d3: 1.97, r2: 1.0, d4: 0.1, aspects: 2, cuspidal: false, class: "binary", cusps: 0 },
    Reference { label: "h", d3: 1.97, r2: 1.0, d4: 1.54, aspects: 2, cuspidal: true, class: "2(1,0)", cusps: 4 },
];

pub fn row(label: &str) -> &'static Reference {
    ROWS.iter().find(|r| r.label == label).unwrap()
}

/// Four-cusp design whose section has an inner 4-posture pocket inside a 2-posture region.
pub fn pocket_design() -> DesignParams {
    DesignParams::new(2.0, 1.0, 1.5).unwrap()
}
