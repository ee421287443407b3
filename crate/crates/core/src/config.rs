//! Analysis settings and the `key = value` configuration file.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kinematics::IkOptions;
use crate::quartic::TripleRootOptions;

/// Numerical thresholds. Relative ones are scaled as noted per field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Root clustering, relative to `1 + |t|`.
    pub cluster_tol: f64,
    /// Accepted IK residual, relative to `1 + |p|`.
    pub eps_ik: f64,
    /// `|P|, |P'|, |P''|` bound for a certified triple root.
    pub eps_triple: f64,
    /// Lower bound on `|P'''|` at a certified cusp.
    pub eps_nondeg: f64,
    /// Gradient threshold at singular points, relative to `max |det J|`.
    pub eps_grad: f64,
    /// Distance below which two singular curves are taken to meet (radians).
    pub eps_curve: f64,
    /// Rank threshold relative to the largest singular value.
    pub eps_rank: f64,
    /// Cusps closer than this to the axis `ρ = 0` are dropped, relative to reach.
    pub eps_axis: f64,
    /// Cusps closer than this are merged, relative to reach.
    pub eps_dedup: f64,
    /// Finite-difference step in joint space (radians).
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cluster_tol: 1e-6,
            eps_ik: 1e-8,
            eps_triple: 1e-10,
            eps_nondeg: 1e-6,
            eps_grad: 1e-4,
            eps_curve: 1e-9,
            eps_rank: 1e-6,
            eps_axis: 1e-6,
            eps_dedup: 1e-4,
            fd_step: 1e-5,
        }
    }
}

impl Tolerances {
    pub fn ik_options(&self) -> IkOptions {
        IkOptions { cluster_tol: self.cluster_tol, eps_rel: self.eps_ik }
    }

    pub fn triple_root_options(&self) -> TripleRootOptions {
        TripleRootOptions { eps_triple: self.eps_triple, eps_nondeg: self.eps_nondeg, ..TripleRootOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tolerances: Tolerances,
    /// Starting joint-space grid size for aspect counting.
    pub joint_resolution: usize,
    /// Largest joint-space grid tried before giving up.
    pub joint_resolution_cap: usize,
    /// Cross-section raster size.
    pub section_resolution: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tolerances: Tolerances::default(),
            joint_resolution: 256,
            joint_resolution_cap: 4096,
            section_resolution: 256,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("joint_resolution", self.joint_resolution),
            ("joint_resolution_cap", self.joint_resolution_cap),
            ("section_resolution", self.section_resolution),
        ] {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::Config(format!("{name} must be a power of two >= 16, got {n}")));
            }
        }
        if self.joint_resolution > self.joint_resolution_cap {
            return Err(Error::Config("joint_resolution exceeds joint_resolution_cap".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("cluster_tol", t.cluster_tol),
            ("eps_ik", t.eps_ik),
            ("eps_triple", t.eps_triple),
            ("eps_nondeg", t.eps_nondeg),
            ("eps_grad", t.eps_grad),
            ("eps_curve", t.eps_curve),
            ("eps_rank", t.eps_rank),
            ("eps_axis", t.eps_axis),
            ("eps_dedup", t.eps_dedup),
            ("fd_step", t.fd_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let float =
            || value.parse::<f64>().map_err(|_| Error::Config(format!("{key}: expected a number, got {value:?}")));
        let int =
            || value.parse::<usize>().map_err(|_| Error::Config(format!("{key}: expected an integer, got {value:?}")));
        let t = &mut self.tolerances;
        match key {
            "cluster_tol" => t.cluster_tol = float()?,
            "eps_ik" => t.eps_ik = float()?,
            "eps_triple" => t.eps_triple = float()?,
            "eps_nondeg" => t.eps_nondeg = float()?,
            "eps_grad" => t.eps_grad = float()?,
            "eps_curve" => t.eps_curve = float()?,
            "eps_rank" => t.eps_rank = float()?,
            "eps_axis" => t.eps_axis = float()?,
            "eps_dedup" => t.eps_dedup = float()?,
            "fd_step" => t.fd_step = float()?,
            "joint_resolution" => self.joint_resolution = int()?,
            "joint_resolution_cap" => self.joint_resolution_cap = int()?,
            "section_resolution" => self.section_resolution = int()?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            s.set(k.trim(), v.trim()).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Settings::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides_and_comments() {
        let s = Settings::parse("# run\njoint_resolution = 512\neps_ik=1e-9 # tighter\n").unwrap();
        assert_eq!(s.joint_resolution, 512);
        assert_eq!(s.tolerances.eps_ik, 1e-9);
        assert_eq!(s.section_resolution, 256);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Settings::parse("joint_resolution = 300").is_err());
        assert!(Settings::parse("joint_resolution = 8192").is_err());
        assert!(Settings::parse("eps_ik = -1").is_err());
        assert!(Settings::parse("colour = blue").is_err());
        assert!(Settings::parse("just words").is_err());
    }
}
