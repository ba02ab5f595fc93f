use serde::{Deserialize, Serialize};

/// Weight base of Day's norm: tuple entry i carries weight `DAY_WEIGHT_BASE^i`.
pub const DAY_WEIGHT_BASE: f64 = 0.25;

/// Matrices with reciprocal condition number below this are treated as singular.
pub const RCOND_MIN: f64 = 1e-10;

/// Entrywise tolerance for matrix de-duplication in groups.
pub const GROUP_TOL: f64 = 1e-9;

/// Central tolerance record.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Tolerances {
    pub eval: f64,
    pub axiom: f64,
    pub isometry: f64,
    pub max_iter: usize,
    pub dual_starts: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eval: 1e-10, axiom: 1e-10, isometry: 1e-7, max_iter: 200, dual_starts: 64 }
    }
}
