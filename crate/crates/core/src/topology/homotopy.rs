//! Homotopy classes `n(n2, n3)` of closed singular curves.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use super::SingularCurve;
use crate::error::{Error, Result};

/// Largest distance of `Δ/2π` from an integer accepted for a closed curve.
const WRAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomotopyGroup {
    pub count: usize,
    pub n2: u32,
    pub n3: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomotopySignature {
    pub groups: Vec<HomotopyGroup>,
}

impl HomotopySignature {
    pub fn curve_count(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }
}

impl fmt::Display for HomotopySignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, g) in self.groups.iter().enumerate() {
            if k > 0 {
                f.write_str("+")?;
            }
            write!(f, "{}({},{})", g.count, g.n2, g.n3)?;
        }
        Ok(())
    }
}

fn wraps(delta: f64) -> Result<u32> {
    let turns = delta / (2.0 * PI);
    let r = turns.round();
    if (turns - r).abs() > WRAP_TOL {
        return Err(Error::TracingInconsistency(format!("{turns} turns is not an integer")));
    }
    Ok(r.abs() as u32)
}

/// Groups closed curves by their absolute wrap numbers.
pub fn homotopy_class(curves: &[SingularCurve]) -> Result<HomotopySignature> {
    let mut groups: Vec<HomotopyGroup> = Vec::new();
    for (k, c) in curves.iter().enumerate() {
        if !c.closed {
            return Err(Error::UntraceableCurve(format!("curve {k} is open")));
        }
        let (n2, n3) = (wraps(c.unwrapped_delta.0)?, wraps(c.unwrapped_delta.1)?);
        match groups.iter_mut().find(|g| g.n2 == n2 && g.n3 == n3) {
            Some(g) => g.count += 1,
            None => groups.push(HomotopyGroup { count: 1, n2, n3 }),
        }
    }
    groups.sort_by_key(|g| (g.n2, g.n3));
    Ok(HomotopySignature { groups })
}
