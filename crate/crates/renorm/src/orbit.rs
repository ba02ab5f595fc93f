//! Separated point families built from one point and its group orbit.
//!
//! Type-2 points sit at `a x0 + β g x0` with β chosen by nested trisection so the
//! points stay apart. Type-1 points push the family out of the orbit span.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::FiniteMatrixGroup;
use crate::linalg::{self, serde_vec, Matrix, Vector};
use crate::norm::{self, NormObject};
use crate::optimize;

pub const ALPHA_CAP: f64 = 0.99;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Provenance {
    Seed,
    Type1 {
        #[serde(with = "serde_vec")]
        y: Vector,
        distance_to_span: f64,
    },
    Type2 {
        g: usize,
        beta: f64,
        /// Kept interval after each trisection step, outermost first.
        intervals: Vec<(f64, f64)>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyPoint {
    #[serde(with = "serde_vec")]
    pub x: Vector,
    /// Coefficient of x0 in the decomposition x = a x0 + z.
    pub a: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointFamily {
    pub alpha: f64,
    #[serde(with = "serde_vec")]
    pub x0: Vector,
    /// The seed x0 first, then type-2, then type-1 points.
    pub points: Vec<FamilyPoint>,
    pub spanning: bool,
    /// Smallest base(x_n − g x_k) over (n, g) ≠ (k, Id).
    pub min_separation: f64,
}

impl PointFamily {
    pub fn vectors(&self) -> Vec<Vector> {
        self.points.iter().map(|p| p.x.clone()).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trisection {
    pub g: usize,
    pub beta: f64,
    pub intervals: Vec<(f64, f64)>,
}

pub fn separation_constant(group: &FiniteMatrixGroup, base: &NormObject, x0: &Vector) -> Result<f64> {
    let mut a = f64::INFINITY;
    for (i, g) in group.elements.iter().enumerate() {
        if i == group.identity {
            continue;
        }
        let d = base.eval(&(x0 - g * x0))?;
        if d <= 1e-9 {
            return Err(Error::Separation(format!("element {i} fixes x0")));
        }
        a = a.min(d);
    }
    Ok(a.min(ALPHA_CAP))
}

/// The unit vector a·x0 + β·gx0 with a > 0.
fn type2_point(base: &NormObject, x0: &Vector, gx0: &Vector, beta: f64) -> Result<(Vector, f64)> {
    let z = gx0 * beta;
    let f = |a: f64| base.eval(&(x0 * a + &z)).unwrap_or(f64::NAN) - 1.0;
    let a = optimize::bisect_increasing(f, 1.0 - 2.0 * beta, 1.0 + 2.0 * beta, 1e-15);
    let x = x0 * a + z;
    let v = base.eval(&x)?;
    Ok((x / v, a / v))
}

/// Smallest base(x(β) − p) over β in [lo, hi], by sampling plus golden refinement.
fn min_distance_on(base: &NormObject, x0: &Vector, gx0: &Vector, p: &Vector, lo: f64, hi: f64) -> Result<f64> {
    let d = |b: f64| -> f64 {
        match type2_point(base, x0, gx0, b) {
            Ok((x, _)) => base.eval(&(x - p)).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    };
    let m = 24;
    let h = (hi - lo) / m as f64;
    let vals: Vec<f64> = (0..=m).map(|i| d(lo + h * i as f64)).collect();
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::Construction("distance evaluation failed".into()));
    }
    let (imin, _) = vals.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let c = lo + h * imin as f64;
    let (_, v) = optimize::golden_min(d, (c - h).max(lo), (c + h).min(hi), 1e-13);
    Ok(v.min(vals[imin]))
}

pub fn trisect_select(
    group: &FiniteMatrixGroup,
    base: &NormObject,
    x0: &Vector,
    g_sequence: &[usize],
    alpha: f64,
) -> Result<Vec<Trisection>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg("alpha must lie in (0, 1)"));
    }
    let minus = group.elements.iter().position(|g| linalg::max_abs_diff(g, &(-Matrix::identity(x0.len(), x0.len()))) < 1e-9);
    for &g in g_sequence {
        if g >= group.order() || g == group.identity || Some(g) == minus {
            return Err(Error::arg(format!("g_sequence entry {g} is not in G minus ±Id")));
        }
    }
    let gx: Vec<Vector> = g_sequence.iter().map(|&g| &group.elements[g] * x0).collect();
    let mut intervals: Vec<Vec<(f64, f64)>> = vec![vec![(alpha / 10.0, alpha / 5.0)]; g_sequence.len()];
    let mut chosen: Vec<Vector> = Vec::new();
    let mut out = Vec::new();
    for n in 0..g_sequence.len() {
        if n > 0 {
            let prev = &chosen[n - 1];
            let bound = alpha * alpha / (40.0 * 3f64.powi(n as i32));
            for m in n..g_sequence.len() {
                let (lo, hi) = *intervals[m].last().expect("nonempty");
                let w = (hi - lo) / 3.0;
                let first = (lo, lo + w);
                let last = (hi - w, hi);
                let kept = if min_distance_on(base, x0, &gx[m], prev, first.0, first.1)? >= bound {
                    first
                } else if min_distance_on(base, x0, &gx[m], prev, last.0, last.1)? >= bound {
                    last
                } else {
                    return Err(Error::Construction(format!("both thirds fail at step {n} for sequence entry {m}")));
                };
                intervals[m].push(kept);
            }
        }
        let (lo, hi) = *intervals[n].last().expect("nonempty");
        let beta = 0.5 * (lo + hi);
        chosen.push(type2_point(base, x0, &gx[n], beta)?.0);
        out.push(Trisection { g: g_sequence[n], beta, intervals: intervals[n].clone() });
    }
    Ok(out)
}

/// base-distance from `w` to span(`v`), with the minimizing point of the span.
fn distance_to_span(base: &NormObject, w: &Vector, v: &[Vector]) -> Result<(f64, Vector)> {
    if v.is_empty() {
        return Ok((base.eval(w)?, Vector::zeros(w.len())));
    }
    let comb = |c: &[f64]| -> Vector { v.iter().zip(c).fold(Vector::zeros(w.len()), |acc, (b, &t)| acc + b * t) };
    let c0: Vec<f64> = v.iter().map(|b| b.dot(w)).collect();
    let (c, _) = optimize::nelder_mead_restarts(|c| base.eval(&(w - comb(c))).unwrap_or(f64::INFINITY), &c0, 0.1, 1e-16, 4000, 4);
    let p = comb(&c);
    Ok((base.eval(&(w - &p))?, p))
}

fn orbit_span(group: &FiniteMatrixGroup, pts: &[Vector]) -> Vec<Vector> {
    let all: Vec<Vector> = pts.iter().flat_map(|x| group.elements.iter().map(move |g| g * x)).collect();
    linalg::orthonormal_span(&all, 1e-8)
}

pub fn min_separation(group: &FiniteMatrixGroup, base: &NormObject, pts: &[Vector]) -> Result<(f64, usize, usize)> {
    let mut best = (f64::INFINITY, 0, 0);
    for (k, xk) in pts.iter().enumerate() {
        for (n, xn) in pts.iter().enumerate() {
            for (gi, g) in group.elements.iter().enumerate() {
                if n == k && gi == group.identity {
                    continue;
                }
                let d = base.eval(&(xn - g * xk))?;
                if d < best.0 {
                    best = (d, n, k);
                }
            }
        }
    }
    Ok(best)
}

pub fn build_point_family(group: &FiniteMatrixGroup, base: &NormObject, x0: &Vector) -> Result<PointFamily> {
    let n = x0.len();
    if (base.eval(x0)? - 1.0).abs() > 1e-10 {
        return Err(Error::arg("x0 must have base norm 1"));
    }
    let alpha = separation_constant(group, base, x0)?;
    let lur = norm::lur_modulus(base, x0, alpha, 256)?;
    if lur >= 1.0 - 1e-9 {
        return Err(Error::Construction(format!("base is not LUR at x0 (modulus {lur})")));
    }
    let id = Matrix::identity(n, n);
    let g_seq: Vec<usize> = (0..group.order())
        .filter(|&i| linalg::max_abs_diff(&group.elements[i], &id) > 1e-9 && linalg::max_abs_diff(&group.elements[i], &(-&id)) > 1e-9)
        .collect();
    let mut points = vec![FamilyPoint { x: x0.clone(), a: 1.0, provenance: Provenance::Seed }];
    for t in trisect_select(group, base, x0, &g_seq, alpha)? {
        let gx0 = &group.elements[t.g] * x0;
        let (x, a) = type2_point(base, x0, &gx0, t.beta)?;
        points.push(FamilyPoint { x, a, provenance: Provenance::Type2 { g: t.g, beta: t.beta, intervals: t.intervals } });
    }
    let mut span = orbit_span(group, std::slice::from_ref(x0));
    while span.len() < n {
        let y = (0..n)
            .map(|i| linalg::basis(n, i))
            .find(|e| {
                let mut c = span.clone();
                c.push(e.clone());
                linalg::rank(&c, 1e-8) > span.len()
            })
            .expect("a basis vector leaves a proper subspace");
        let w = span.iter().fold(y.clone(), |acc, b| &acc - b * b.dot(&y));
        let (d, p) = distance_to_span(base, &w, &span)?;
        let z = (&w - p) * (alpha / 10.0 / d);
        let zd = distance_to_span(base, &z, &span)?.0;
        if (zd - alpha / 10.0).abs() > 1e-8 * alpha {
            return Err(Error::Construction(format!("type-1 offset misses α/10 by {}", zd - alpha / 10.0)));
        }
        let (x, a) = type2_point(base, x0, &(&z * (10.0 / alpha)), alpha / 10.0)?;
        points.push(FamilyPoint { x: x.clone(), a, provenance: Provenance::Type1 { y, distance_to_span: zd } });
        let all: Vec<Vector> = points.iter().map(|p| p.x.clone()).collect();
        span = orbit_span(group, &all);
    }
    let xs: Vec<Vector> = points.iter().map(|p| p.x.clone()).collect();
    let (sep, i, k) = min_separation(group, base, &xs)?;
    let idx = i.max(k);
    let bound = alpha * alpha / (40.0 * 3f64.powi(idx as i32 + 1));
    if sep < bound - 1e-9 {
        return Err(Error::Construction(format!("points {i} and {k} are {sep} apart, below {bound}")));
    }
    Ok(PointFamily { alpha, x0: x0.clone(), points, spanning: true, min_separation: sep })
}
