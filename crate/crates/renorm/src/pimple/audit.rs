//! A-posteriori checks of the pimple conclusions: deviation locality,
//! tip isolation and facet widths.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, serde_vec, Vector};
use crate::norm::NormObject;
use crate::optimize;

use super::PimpleSpec;

/// Gauge of conv(B ∪ {±x/λ}) at y: min_t base(y − t x) + λ|t|.
pub(crate) fn single_pimple(base: &NormObject, x: &Vector, lam: f64, y: &Vector) -> f64 {
    let b = base.eval(y).unwrap_or(f64::INFINITY);
    let lim = b / lam;
    let (_, v) = optimize::golden_min(|t| base.eval(&(y - x * t)).unwrap_or(f64::INFINITY) + lam * t.abs(), -lim, lim, 1e-13);
    v.min(b)
}

fn probe_dirs(x: &Vector) -> Vec<Vector> {
    let n = x.len();
    let xh = x.normalize();
    let mut out = Vec::new();
    let mut cands: Vec<Vector> = (0..n).map(|i| linalg::basis(n, i)).collect();
    let mut r = linalg::rng(0xde71);
    for _ in 0..12 {
        cands.push(linalg::unit_gaussian(&mut r, n));
    }
    for c in cands {
        let w = &c - &xh * xh.dot(&c);
        if w.norm() > 1e-6 {
            let w = w.normalize();
            out.push(w.clone());
            out.push(-w);
        }
    }
    out
}

/// Largest base distance from x to a base-unit point where the single pimple
/// {±x/λ} lowers the norm.
pub fn deviation_radius(base: &NormObject, x: &Vector, lam: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for w in probe_dirs(x) {
        let at = |s: f64| -> Vector {
            let v = x + &w * s;
            let e = base.eval(&v).unwrap_or(1.0);
            v / e
        };
        let inside = |s: f64| single_pimple(base, x, lam, &at(s)) < 1.0 - 1e-12;
        let mut hi = 1e-3;
        while inside(hi) && hi < 64.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst = worst.max(base.eval(&(x - at(hi)))?);
    }
    Ok(worst)
}

/// Smallest λ ≥ 1/2 whose single cone at x stays within base distance `rho`.
pub(crate) fn min_lambda_for_radius(base: &NormObject, x: &Vector, rho: f64) -> Result<f64> {
    if deviation_radius(base, x, 0.5)? <= rho {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid >= 1.0 || mid == lo || mid == hi {
            break;
        }
        if deviation_radius(base, x, mid)? <= rho {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FacetWidth {
    pub point: usize,
    pub min: f64,
    pub max: f64,
    /// λ_k^{-1} − 1.
    pub lower_bound: f64,
    pub b: Option<f64>,
    pub pass: bool,
}

/// Lengths (in the base norm) of the maximal flat boundary segments leaving
/// the tip x_k/λ_k, measured in planes through the tip.
pub fn facet_widths(spec: &PimpleSpec, k: usize) -> Result<FacetWidth> {
    let lam = spec.lambdas[k];
    let tip = &spec.points[k] / lam;
    let e1 = tip.normalize();
    let mut widths = Vec::new();
    for w in probe_dirs(&spec.points[k]) {
        let e2 = (&w - &e1 * e1.dot(&w)).normalize();
        let boundary = |phi: f64| -> Result<Vector> {
            let v = &e1 * phi.cos() + &e2 * phi.sin();
            Ok(&v / spec.eval(&v)?)
        };
        let flat = |phi: f64| -> Result<bool> {
            let q = boundary(phi)?;
            let m = spec.eval(&((&tip + &q) * 0.5))?;
            Ok(m > 1.0 - 1e-9)
        };
        if !flat(1e-6)? {
            widths.push(0.0);
            continue;
        }
        let (mut lo, mut hi) = (1e-6, std::f64::consts::FRAC_PI_2);
        if flat(hi)? {
            lo = hi;
        } else {
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if flat(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        widths.push(spec.base.eval(&(boundary(lo)? - &tip))?);
    }
    let min = widths.iter().copied().fold(f64::INFINITY, f64::min);
    let max = widths.iter().copied().fold(0.0, f64::max);
    let lower_bound = 1.0 / lam - 1.0;
    let b = spec.widths.get(k).copied();
    let pass = min >= lower_bound - 1e-6 && b.is_none_or(|b| max <= b + 1e-9);
    Ok(FacetWidth { point: k, min, max, lower_bound, b, pass })
}

/// Protrusion of each tip beyond the hull of the base ball and the other
/// points' tips: gauge_{without k}(x_k)/λ_k − 1 (positive for isolated tips).
pub fn tip_isolation(spec: &PimpleSpec) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for k in 0..spec.points.len() {
        let pts: Vec<Vector> = spec.points.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, p)| p.clone()).collect();
        let lams: Vec<f64> = spec.lambdas.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, l)| *l).collect();
        let g = if pts.is_empty() {
            spec.base.eval(&spec.points[k])?
        } else {
            let mut sub = PimpleSpec::new(spec.base.clone(), spec.group.clone(), pts, lams);
            sub.tol = spec.tol;
            sub.eval(&spec.points[k])?
        };
        out.push(g / spec.lambdas[k] - 1.0);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalityReport {
    pub samples: usize,
    pub deviating: usize,
    pub violations: usize,
    #[serde(with = "serde_vec")]
    pub worst_witness: Vector,
    /// Largest min_{g,k} base(g x_k − y)/δ_k among deviating samples.
    pub worst_ratio: f64,
}

/// Every sampled unit y with pimple(y) < 1 lies within δ_k of some g x_k.
pub fn deviation_locality(spec: &PimpleSpec, samples: usize, seed: u64) -> Result<LocalityReport> {
    let n = spec.dim();
    let mut r = linalg::rng(seed);
    let tol = spec.tol.eval;
    let mut rep = LocalityReport { samples, deviating: 0, violations: 0, worst_witness: Vector::zeros(n), worst_ratio: 0.0 };
    for _ in 0..samples {
        let v = linalg::gaussian(&mut r, n);
        let y = &v / spec.base.eval(&v)?;
        if spec.eval(&y)? >= 1.0 - 10.0 * tol {
            continue;
        }
        rep.deviating += 1;
        let mut best = f64::INFINITY;
        for (k, x) in spec.points.iter().enumerate() {
            let dk = spec.deltas.get(k).copied().unwrap_or(f64::INFINITY);
            for g in &spec.group.elements {
                best = best.min(spec.base.eval(&(g * x - &y))? / dk);
            }
        }
        if best >= 1.0 {
            rep.violations += 1;
        }
        if best > rep.worst_ratio {
            rep.worst_ratio = best;
            rep.worst_witness = y;
        }
    }
    Ok(rep)
}
