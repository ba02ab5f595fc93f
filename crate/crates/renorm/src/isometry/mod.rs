//! Isometry verification, candidate enumeration from pimple tips, and the
//! numerical falsifier.

mod falsify;
mod group;
mod tips;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, serde_rows_vec, serde_vec, Matrix, Vector};
use crate::norm::{NormKind, NormObject};

pub use falsify::{falsify_search, FalsifierReport, FalsifyConfig, KnownSet};
pub use group::{group_closure, groups_isomorphic, isomorphism, FiniteMatrixGroup};
pub use tips::{enumerate_tip_candidates, TipCandidates, TipStats};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyResult {
    pub ok: bool,
    /// Largest |eval(Tx) − eval(x)| / eval(x) seen.
    pub worst: f64,
    #[serde(with = "serde_vec")]
    pub witness: Vector,
}

/// Points a norm carries besides random samples: basis vectors and tips.
pub(crate) fn structured_points(norm: &NormObject) -> Vec<Vector> {
    let n = norm.dim;
    let mut pts: Vec<Vector> = (0..n).map(|i| linalg::basis(n, i)).collect();
    if let NormKind::PimpleHull { spec } = &norm.kind {
        pts.extend(spec.tips());
        pts.extend(spec.points.iter().cloned());
    }
    pts
}

pub fn verify_isometry(t: &Matrix, norm: &NormObject, samples: usize, tol: f64, seed: u64) -> Result<VerifyResult> {
    linalg::check_invertible(t)?;
    if t.nrows() != norm.dim {
        return Err(crate::error::Error::Dimension { expected: norm.dim, got: t.nrows() });
    }
    let mut pts = structured_points(norm);
    let mut r = linalg::rng(seed);
    for _ in 0..samples {
        pts.push(linalg::unit_gaussian(&mut r, norm.dim));
    }
    let mut res = VerifyResult { ok: true, worst: 0.0, witness: Vector::zeros(norm.dim) };
    for x in pts {
        let fx = norm.eval(&x)?;
        let ft = norm.eval(&(t * &x))?;
        let dev = (ft - fx).abs() / fx;
        if dev > res.worst {
            res.worst = dev;
            res.witness = x;
        }
    }
    res.ok = res.worst <= tol;
    Ok(res)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsometryGroupReport {
    #[serde(with = "serde_rows_vec")]
    pub elements: Vec<Matrix>,
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    pub target: String,
    pub isomorphic_to_target: bool,
    pub contains_given_group: bool,
    pub tip_stats: TipStats,
    pub falsifier: FalsifierReport,
}
