//! Candidate isometries of a pimple norm: linear maps permuting the tips.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::norm::NormObject;
use crate::optimize;
use crate::pimple::{facet_widths, PimpleSpec};

use super::verify_isometry;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TipStats {
    pub tips: usize,
    /// Auxiliary points added when the tips do not span.
    pub auxiliary: usize,
    pub classes: usize,
    /// Measured facet width range per generating point.
    pub facet_widths: Vec<(f64, f64)>,
    pub assignments_tried: usize,
    pub consistent_maps: usize,
    pub verified_maps: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TipCandidates {
    #[serde(with = "crate::linalg::serde_rows_vec")]
    pub maps: Vec<Matrix>,
    pub stats: TipStats,
}

const SIG_TOL: f64 = 1e-6;
const MAP_TOL: f64 = 1e-7;

/// Points of the unit sphere farthest (in the pimple norm) from the tip set;
/// this set is mapped to itself by every isometry.
fn farthest_from_tips(spec: &PimpleSpec, tips: &[Vector]) -> Result<Vec<Vector>> {
    let n = spec.dim();
    let score = |v: &Vector| -> f64 {
        let e = match spec.eval(v) {
            Ok(e) if e > 0.0 => e,
            _ => return f64::NEG_INFINITY,
        };
        let u = v / e;
        tips.iter().map(|t| spec.eval(&(&u - t)).unwrap_or(f64::INFINITY)).fold(f64::INFINITY, f64::min)
    };
    let mut cands: Vec<(f64, Vector)> = Vec::new();
    if n == 2 {
        let m = 1440;
        let vals: Vec<f64> = (0..m)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / m as f64;
                score(&linalg::vector(&[t.cos(), t.sin()]))
            })
            .collect();
        for j in 0..m {
            let (a, b) = (vals[(j + m - 1) % m], vals[(j + 1) % m]);
            if vals[j] >= a && vals[j] >= b {
                let h = std::f64::consts::TAU / m as f64;
                let t0 = h * j as f64;
                let (t, v) = optimize::golden_min(|t| -score(&linalg::vector(&[t.cos(), t.sin()])), t0 - h, t0 + h, 1e-12);
                cands.push((-v, linalg::vector(&[t.cos(), t.sin()])));
            }
        }
    } else {
        let mut r = linalg::rng(0xfa7);
        for _ in 0..64 {
            let s = linalg::unit_gaussian(&mut r, n);
            let (x, v) = optimize::nelder_mead_restarts(|p| -score(&Vector::from_column_slice(p)), s.as_slice(), 0.2, 1e-14, 3000, 3);
            cands.push((-v, Vector::from_vec(x)));
        }
    }
    let best = cands.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<Vector> = Vec::new();
    for (v, x) in cands {
        if v >= best - 1e-7 * best.abs().max(1.0) {
            let u = &x / spec.eval(&x)?;
            if !out.iter().any(|o| (o - &u).amax() < 1e-6) {
                out.push(u);
            }
        }
    }
    Ok(out)
}

fn signatures_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= SIG_TOL * x.abs().max(1.0))
}

pub fn enumerate_tip_candidates(spec: &PimpleSpec, seed: u64) -> Result<TipCandidates> {
    let n = spec.dim();
    let norm = NormObject::pimple(spec.clone());
    let tips = spec.tips();
    let mut stats = TipStats { tips: tips.len(), ..Default::default() };
    for k in 0..spec.points.len() {
        let fw = facet_widths(spec, k)?;
        stats.facet_widths.push((fw.min, fw.max));
    }
    let mut pts: Vec<Vector> = tips.clone();
    let mut kind: Vec<usize> = vec![0; tips.len()];
    if linalg::rank(&tips, 1e-8) < n {
        let aux = farthest_from_tips(spec, &tips)?;
        stats.auxiliary = aux.len();
        pts.extend(aux.iter().cloned());
        kind.extend(std::iter::repeat_n(1, aux.len()));
        if linalg::rank(&pts, 1e-8) < n {
            return Err(Error::arg("tips do not span the space"));
        }
    }
    let m = pts.len();
    let mut dist = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = spec.eval(&(&pts[i] - &pts[j]))?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let sig: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut s: Vec<f64> = (0..m).filter(|&j| j != i).map(|j| dist[i][j] + 10.0 * kind[j] as f64).collect();
            s.sort_by(|a, b| a.total_cmp(b));
            s
        })
        .collect();
    let mut class = vec![usize::MAX; m];
    let mut nclass = 0;
    for i in 0..m {
        if class[i] != usize::MAX {
            continue;
        }
        for j in i..m {
            if class[j] == usize::MAX && kind[j] == kind[i] && signatures_match(&sig[i], &sig[j]) {
                class[j] = nclass;
            }
        }
        nclass += 1;
    }
    stats.classes = nclass;

    // basis: greedy independent points
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..m {
        let mut cand: Vec<Vector> = basis.iter().map(|&b| pts[b].clone()).collect();
        cand.push(pts[i].clone());
        if linalg::rank(&cand, 1e-8) == cand.len() {
            basis.push(i);
        }
        if basis.len() == n {
            break;
        }
    }
    let bmat = Matrix::from_columns(&basis.iter().map(|&b| pts[b].clone()).collect::<Vec<_>>());
    let binv = bmat.clone().try_inverse().ok_or_else(|| Error::arg("degenerate tip basis"))?;

    let mut maps: Vec<Matrix> = Vec::new();
    let mut assign: Vec<usize> = Vec::new();
    fn rec(depth: usize, assign: &mut Vec<usize>, ctx: &(&[usize], &[usize], &Vec<Vec<f64>>, usize), out: &mut Vec<Vec<usize>>) {
        let (basis, class, dist, m) = *ctx;
        if depth == basis.len() {
            out.push(assign.clone());
            return;
        }
        let b = basis[depth];
        for c in 0..m {
            if class[c] != class[b] || assign.contains(&c) {
                continue;
            }
            let ok = (0..depth).all(|a| {
                let (x, y) = (dist[basis[a]][b], dist[assign[a]][c]);
                (x - y).abs() <= SIG_TOL * x.max(1.0)
            });
            if ok {
                assign.push(c);
                rec(depth + 1, assign, ctx, out);
                assign.pop();
            }
        }
    }
    let mut assignments = Vec::new();
    rec(0, &mut assign, &(&basis, &class, &dist, m), &mut assignments);
    stats.assignments_tried = assignments.len();
    for a in assignments {
        let img = Matrix::from_columns(&a.iter().map(|&c| pts[c].clone()).collect::<Vec<_>>());
        let t = &img * &binv;
        if linalg::rcond(&t) < crate::config::RCOND_MIN {
            continue;
        }
        let mut hit = vec![false; m];
        let consistent = (0..m).all(|i| {
            let ti = &t * &pts[i];
            match (0..m).find(|&j| !hit[j] && kind[j] == kind[i] && (&pts[j] - &ti).amax() <= MAP_TOL) {
                Some(j) => {
                    hit[j] = true;
                    true
                }
                None => false,
            }
        });
        if !consistent {
            continue;
        }
        stats.consistent_maps += 1;
        if verify_isometry(&t, &norm, 128, 1e-7, seed)?.ok {
            maps.push(t);
        }
    }
    stats.verified_maps = maps.len();
    Ok(TipCandidates { maps, stats })
}
