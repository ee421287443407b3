//! Posture, singularity and cusp classification of orthogonal 3R positioning
//! manipulators with `α2 = −90°`, `α3 = +90°`, `r3 = 0`, normalised so that
//! `d2 = 1`. A member of the family is fixed by `(d3, r2, d4)`.
//!
//! ```
//! use cuspidal_atlas::{classify, DesignParams, Settings};
//!
//! let params = DesignParams::new(1.36, 0.35, 0.75).unwrap();
//! let report = classify(&params, &Settings::default()).unwrap();
//! assert_eq!(report.cusps, 4);
//! assert_eq!(report.class, "2(1,0)");
//! ```

pub mod classify;
pub mod config;
pub mod error;
pub mod kinematics;
pub mod output;
pub mod quartic;
pub mod topology;
pub mod workspace;

pub use classify::{classify, ClassificationReport, Kind, Signature};
pub use config::{Settings, Tolerances};
pub use error::{Error, Result};
pub use kinematics::{fk, ik_quartic, jacobian_det, solve_ik, CartesianPoint, DesignParams, JointConfig};
pub use quartic::{real_roots, Quartic, RootSet};
pub use workspace::{find_cusps, posture_count, section_raster, SectionPoint};
