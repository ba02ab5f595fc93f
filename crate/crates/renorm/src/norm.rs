//! Evaluable norms on R^n, axiom probes, the LUR modulus estimate and the
//! gauge-by-bisection oracle.

use serde::{Deserialize, Serialize};

use crate::config::DAY_WEIGHT_BASE;
use crate::error::{Error, Result};
use crate::isometry::FiniteMatrixGroup;
use crate::jarosz::ExtensionW;
use crate::linalg::{self, serde_rows, serde_rows_vec, Matrix, Vector};
use crate::optimize;
use crate::pimple::PimpleSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormObject {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: NormKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormKind {
    Euclidean {
        #[serde(with = "serde_rows")]
        gram: Matrix,
    },
    WeightedLp {
        p: f64,
        weights: Vec<f64>,
    },
    Day,
    MaxSeminorms {
        #[serde(with = "serde_rows_vec")]
        seminorms: Vec<Matrix>,
    },
    GAverage {
        base: Box<NormObject>,
        group: FiniteMatrixGroup,
    },
    SumSquares {
        parts: Vec<NormObject>,
    },
    /// `inner(map · x)`; a seminorm on its own, used to assemble block norms.
    Pullback {
        inner: Box<NormObject>,
        #[serde(with = "serde_rows")]
        map: Matrix,
    },
    PimpleHull {
        spec: Box<PimpleSpec>,
    },
    ExtensionW {
        spec: Box<ExtensionW>,
    },
}

impl NormObject {
    pub fn euclidean(dim: usize) -> Self {
        Self::gram(Matrix::identity(dim, dim))
    }

    pub fn gram(gram: Matrix) -> Self {
        NormObject { dim: gram.nrows(), kind: NormKind::Euclidean { gram } }
    }

    pub fn lp(dim: usize, p: f64) -> Self {
        Self::weighted_lp(p, vec![1.0; dim])
    }

    pub fn weighted_lp(p: f64, weights: Vec<f64>) -> Self {
        NormObject { dim: weights.len(), kind: NormKind::WeightedLp { p, weights } }
    }

    pub fn day(dim: usize) -> Self {
        NormObject { dim, kind: NormKind::Day }
    }

    pub fn max_seminorms(dim: usize, seminorms: Vec<Matrix>) -> Self {
        NormObject { dim, kind: NormKind::MaxSeminorms { seminorms } }
    }

    pub fn g_average(base: NormObject, group: FiniteMatrixGroup) -> Self {
        NormObject { dim: base.dim, kind: NormKind::GAverage { base: Box::new(base), group } }
    }

    pub fn sum_squares(parts: Vec<NormObject>) -> Self {
        let dim = parts.first().map_or(0, |p| p.dim);
        NormObject { dim, kind: NormKind::SumSquares { parts } }
    }

    pub fn pullback(inner: NormObject, map: Matrix) -> Self {
        NormObject { dim: map.ncols(), kind: NormKind::Pullback { inner: Box::new(inner), map } }
    }

    pub fn pimple(spec: PimpleSpec) -> Self {
        NormObject { dim: spec.dim(), kind: NormKind::PimpleHull { spec: Box::new(spec) } }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            NormKind::Euclidean { .. } => "euclidean",
            NormKind::WeightedLp { .. } => "weighted-lp",
            NormKind::Day => "day",
            NormKind::MaxSeminorms { .. } => "max-seminorms",
            NormKind::GAverage { .. } => "g-average",
            NormKind::SumSquares { .. } => "sum-squares",
            NormKind::Pullback { .. } => "pullback",
            NormKind::PimpleHull { .. } => "pimple-hull",
            NormKind::ExtensionW { .. } => "extension-w",
        }
    }

    /// Structural checks run after deserialization.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Schema("dim must be positive".into()));
        }
        let bad = |m: String| Err(Error::Schema(m));
        match &self.kind {
            NormKind::Euclidean { gram } => {
                if gram.nrows() != n || gram.ncols() != n {
                    return bad(format!("gram must be {n}x{n}"));
                }
                if linalg::max_abs_diff(gram, &gram.transpose()) > 1e-12 {
                    return bad("gram must be symmetric".into());
                }
                if gram.clone().cholesky().is_none() {
                    return bad("gram must be positive definite".into());
                }
            }
            NormKind::WeightedLp { p, weights } => {
                if !(p.is_finite() && *p >= 1.0) {
                    return bad("p must be finite and >= 1".into());
                }
                if weights.len() != n || weights.iter().any(|w| !(*w > 0.0)) {
                    return bad("weights must be positive, one per coordinate".into());
                }
            }
            NormKind::Day => {}
            NormKind::MaxSeminorms { seminorms } => {
                if seminorms.iter().any(|m| m.ncols() != n) {
                    return bad("seminorm matrices must have dim columns".into());
                }
                let mut stack = Vec::new();
                for m in seminorms {
                    for i in 0..m.nrows() {
                        stack.push(m.row(i).transpose());
                    }
                }
                if linalg::rank(&stack, 1e-10) < n {
                    return bad("max-seminorms is degenerate (not definite)".into());
                }
            }
            NormKind::GAverage { base, group } => {
                base.validate()?;
                if base.dim != n || group.dim() != n {
                    return bad("g-average dimensions disagree".into());
                }
            }
            NormKind::SumSquares { parts } => {
                if parts.is_empty() || parts.iter().any(|p| p.dim != n) {
                    return bad("sum-squares parts must share dim".into());
                }
                for p in parts {
                    p.validate()?;
                }
            }
            NormKind::Pullback { inner, map } => {
                inner.validate()?;
                if map.ncols() != n || map.nrows() != inner.dim {
                    return bad("pullback map shape disagrees".into());
                }
            }
            NormKind::PimpleHull { spec } => {
                if spec.dim() != n {
                    return bad("pimple spec dim disagrees".into());
                }
            }
            NormKind::ExtensionW { spec } => {
                if spec.dim() != n {
                    return bad("extension spec dim disagrees".into());
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &Vector) -> Result<f64> {
        linalg::check_dim(self.dim, x)?;
        self.eval_unchecked(x)
    }

    pub(crate) fn eval_unchecked(&self, x: &Vector) -> Result<f64> {
        Ok(match &self.kind {
            NormKind::Euclidean { gram } => gram_norm(gram, x),
            NormKind::WeightedLp { p, weights } => weighted_lp(*p, weights, x),
            NormKind::Day => day_norm(x.as_slice()),
            NormKind::MaxSeminorms { seminorms } => seminorms.iter().map(|m| (m * x).norm()).fold(0.0, f64::max),
            NormKind::GAverage { base, group } => {
                let mut s = 0.0;
                for g in &group.elements {
                    s += base.eval_unchecked(&(g * x))?.powi(2);
                }
                s.sqrt()
            }
            NormKind::SumSquares { parts } => {
                let mut s = 0.0;
                for p in parts {
                    s += p.eval_unchecked(x)?.powi(2);
                }
                s.sqrt()
            }
            NormKind::Pullback { inner, map } => inner.eval_unchecked(&(map * x))?,
            NormKind::PimpleHull { spec } => spec.eval(x)?,
            NormKind::ExtensionW { spec } => spec.eval(x)?,
        })
    }

    /// A subgradient (the gradient wherever the norm is differentiable).
    /// Value and gradient together; a single solve for pimple norms.
    pub fn value_and_gradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        if let NormKind::PimpleHull { spec } = &self.kind {
            let ev = spec.evaluate(x)?;
            return Ok((ev.value, ev.dual));
        }
        Ok((self.eval(x)?, self.gradient(x)?))
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        linalg::check_dim(self.dim, x)?;
        if let NormKind::PimpleHull { spec } = &self.kind {
            return Ok(spec.evaluate(x)?.dual);
        }
        let n = self.dim;
        let f = self.eval_unchecked(x)?;
        if f == 0.0 {
            return Ok(Vector::zeros(n));
        }
        Ok(match &self.kind {
            NormKind::Euclidean { gram } => gram * x / f,
            NormKind::WeightedLp { p, weights } => {
                let p = *p;
                Vector::from_fn(n, |i, _| {
                    let a = x[i].abs() / f;
                    weights[i] * a.powf(p - 1.0) * x[i].signum()
                })
            }
            NormKind::Day => {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
                let mut g = Vector::zeros(n);
                let mut w = 1.0;
                for &i in &idx {
                    w *= DAY_WEIGHT_BASE;
                    g[i] = w * x[i] / f;
                }
                g
            }
            NormKind::MaxSeminorms { seminorms } => {
                let (m, v) =
                    seminorms.iter().map(|m| (m, (m * x).norm())).fold((&seminorms[0], -1.0), |a, b| if b.1 > a.1 { b } else { a });
                m.transpose() * (m * x) / v
            }
            NormKind::GAverage { base, group } => {
                let mut g = Vector::zeros(n);
                for h in &group.elements {
                    let hx = h * x;
                    let b = base.eval_unchecked(&hx)?;
                    g += h.transpose() * base.gradient(&hx)? * b;
                }
                g / f
            }
            NormKind::SumSquares { parts } => {
                let mut g = Vector::zeros(n);
                for p in parts {
                    g += p.gradient(x)? * p.eval_unchecked(x)?;
                }
                g / f
            }
            NormKind::Pullback { inner, map } => map.transpose() * inner.gradient(&(map * x))?,
            NormKind::PimpleHull { .. } => unreachable!("handled above"),
            NormKind::ExtensionW { .. } => self.fd_gradient(x)?,
        })
    }

    fn fd_gradient(&self, x: &Vector) -> Result<Vector> {
        let h = 1e-6 * x.norm().max(1e-3);
        let mut g = Vector::zeros(self.dim);
        for i in 0..self.dim {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            g[i] = (self.eval_unchecked(&a)? - self.eval_unchecked(&b)?) / (2.0 * h);
        }
        Ok(g)
    }

    /// Hessian; analytic for euclidean, weighted-lp and their pullbacks,
    /// central differences of the gradient otherwise.
    pub fn hessian(&self, x: &Vector) -> Result<Matrix> {
        let n = self.dim;
        let f = self.eval_unchecked(x)?;
        match &self.kind {
            NormKind::Euclidean { gram } if f > 0.0 => {
                let gx = gram * x;
                Ok((gram - &gx * gx.transpose() / (f * f)) / f)
            }
            NormKind::WeightedLp { p, weights } if f > 0.0 && *p > 1.0 => {
                let p = *p;
                let g = self.gradient(x)?;
                let mut h = Matrix::zeros(n, n);
                for i in 0..n {
                    let a = x[i].abs() / f;
                    h[(i, i)] = weights[i] * a.powf(p - 2.0) / f;
                }
                h -= &g * g.transpose() / f;
                Ok(h * (p - 1.0))
            }
            NormKind::Pullback { inner, map } => Ok(map.transpose() * inner.hessian(&(map * x))? * map),
            _ => {
                let h = 1e-5 * x.norm().max(1e-3);
                let mut m = Matrix::zeros(n, n);
                for i in 0..n {
                    let mut a = x.clone();
                    let mut b = x.clone();
                    a[i] += h;
                    b[i] -= h;
                    let col = (self.gradient(&a)? - self.gradient(&b)?) / (2.0 * h);
                    m.set_column(i, &col);
                }
                Ok((&m + m.transpose()) * 0.5)
            }
        }
    }

    /// Support function of the unit ball (the dual norm).
    pub fn dual(&self, u: &Vector) -> Result<f64> {
        linalg::check_dim(self.dim, u)?;
        match &self.kind {
            NormKind::Euclidean { gram } => {
                let chol = gram.clone().cholesky().ok_or_else(|| Error::arg("gram not positive definite"))?;
                Ok(u.dot(&chol.solve(u)).max(0.0).sqrt())
            }
            NormKind::WeightedLp { p, weights } => {
                let p = *p;
                if p == 1.0 {
                    return Ok(u.iter().zip(weights).map(|(x, w)| x.abs() / w).fold(0.0, f64::max));
                }
                let q = p / (p - 1.0);
                let v: Vec<f64> = u.iter().zip(weights).map(|(x, w)| x * w.powf(-1.0 / p)).collect();
                Ok(weighted_lp(q, &vec![1.0; v.len()], &Vector::from_vec(v)))
            }
            _ => self.dual_numeric(u),
        }
    }

    /// sup ⟨u,v⟩/eval(v) by multistart Nelder-Mead; the ratio is quasi-concave.
    fn dual_numeric(&self, u: &Vector) -> Result<f64> {
        let n = self.dim;
        if u.norm() == 0.0 {
            return Ok(0.0);
        }
        let mut best = 0.0f64;
        let mut starts = vec![u.clone(), self.gradient(u).unwrap_or_else(|_| u.clone())];
        let mut r = linalg::rng(0xd0a1);
        for _ in 0..6 {
            starts.push(linalg::unit_gaussian(&mut r, n));
        }
        for s in starts {
            let ratio = |v: &[f64]| -> f64 {
                let v = Vector::from_column_slice(v);
                match self.eval_unchecked(&v) {
                    Ok(e) if e > 0.0 => -u.dot(&v) / e,
                    _ => 0.0,
                }
            };
            let x0 = s.normalize();
            let (_, v) = optimize::nelder_mead_restarts(ratio, x0.as_slice(), 0.3, 1e-15, 4000, 4);
            best = best.max(-v);
        }
        Ok(best)
    }
}

pub(crate) fn gram_norm(gram: &Matrix, x: &Vector) -> f64 {
    x.dot(&(gram * x)).max(0.0).sqrt()
}

pub(crate) fn weighted_lp(p: f64, w: &[f64], x: &Vector) -> f64 {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return x.iter().zip(w).map(|(v, w)| w * v.abs()).sum();
    }
    let s: f64 = x.iter().zip(w).map(|(v, w)| w * (v.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// Day's norm by decreasing rearrangement: the supremum over tuples is
/// attained by pairing the largest weights with the largest coordinates.
pub fn day_norm(x: &[f64]) -> f64 {
    let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    a.sort_by(|p, q| q.total_cmp(p));
    let mut w = 1.0;
    let mut s = 0.0;
    for v in a {
        w *= DAY_WEIGHT_BASE;
        s += w * v * v;
    }
    s.sqrt()
}

/// Day's norm by enumerating every tuple of distinct indices.
pub fn day_norm_brute_force(x: &[f64]) -> f64 {
    fn rec(x: &[f64], used: &mut Vec<bool>, depth: usize, acc: f64, best: &mut f64) {
        *best = best.max(acc);
        let w = DAY_WEIGHT_BASE.powi(depth as i32 + 1);
        for i in 0..x.len() {
            if !used[i] {
                used[i] = true;
                rec(x, used, depth + 1, acc + w * x[i] * x[i], best);
                used[i] = false;
            }
        }
    }
    let mut best = 0.0;
    rec(x, &mut vec![false; x.len()], 0, 0.0, &mut best);
    best.sqrt()
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct AxiomReport {
    pub samples: usize,
    pub homogeneity: f64,
    pub triangle: f64,
    pub symmetry: f64,
    pub definiteness: f64,
    pub eval_errors: usize,
}

impl AxiomReport {
    pub fn max_violation(&self) -> f64 {
        self.homogeneity.max(self.triangle).max(self.symmetry).max(self.definiteness)
    }
}

pub fn check_norm_axioms(norm: &NormObject, samples: usize, seed: u64) -> AxiomReport {
    check_axioms_fn(norm.dim, |x| norm.eval(x).ok(), samples, seed)
}

/// Axiom probe for an arbitrary evaluator (negative controls use this).
pub fn check_axioms_fn<F: Fn(&Vector) -> Option<f64>>(dim: usize, f: F, samples: usize, seed: u64) -> AxiomReport {
    let mut rng = linalg::rng(seed);
    let mut rep = AxiomReport { samples, ..Default::default() };
    let ev = |x: &Vector, rep: &mut AxiomReport| -> f64 {
        f(x).unwrap_or_else(|| {
            rep.eval_errors += 1;
            f64::NAN
        })
    };
    let zero = ev(&Vector::zeros(dim), &mut rep);
    rep.definiteness = if zero == 0.0 { 0.0 } else { 1.0 };
    for i in 0..dim {
        let e = linalg::basis(dim, i);
        let v = ev(&e, &mut rep);
        if !(v > 0.0) {
            rep.definiteness = 1.0;
        }
    }
    use rand::Rng;
    for _ in 0..samples.max(1) {
        let x = linalg::gaussian(&mut rng, dim);
        let y = linalg::gaussian(&mut rng, dim);
        let t: f64 = rng.random_range(-3.0..3.0);
        let fx = ev(&x, &mut rep);
        let fy = ev(&y, &mut rep);
        let ftx = ev(&(&x * t), &mut rep);
        let fmx = ev(&(-&x), &mut rep);
        let fxy = ev(&(&x + &y), &mut rep);
        let scale = fx.abs().max(1e-300);
        let h = (ftx - t.abs() * fx).abs() / scale;
        let s = (fmx - fx).abs() / scale;
        let tr = ((fxy - fx - fy) / (fx.abs() + fy.abs()).max(1e-300)).max(0.0);
        for (slot, v) in [(&mut rep.homogeneity, h), (&mut rep.symmetry, s), (&mut rep.triangle, tr)] {
            *slot = if v.is_nan() { f64::INFINITY } else { slot.max(v) };
        }
    }
    rep
}

/// Estimate of λ(x,ε) = sup{ eval((x+y)/2) : eval(y)=1, eval(x−y) ≥ ε }.
pub fn lur_modulus(norm: &NormObject, x: &Vector, eps: f64, grid: usize) -> Result<f64> {
    if grid == 0 {
        return Err(Error::arg("grid must be positive"));
    }
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::arg("eps must lie in (0,2]"));
    }
    let n = norm.dim;
    let fx = norm.eval(x)?;
    if (fx - 1.0).abs() > 1e-10 {
        return Err(Error::arg(format!("x must be a unit vector, eval(x) = {fx}")));
    }
    let score = |v: &Vector| -> Option<f64> {
        let e = norm.eval_unchecked(v).ok()?;
        if e <= 0.0 {
            return None;
        }
        let y = v / e;
        let d = norm.eval_unchecked(&(x - &y)).ok()?;
        if d < eps {
            return None;
        }
        norm.eval_unchecked(&((x + &y) * 0.5)).ok()
    };
    let mut dirs: Vec<Vector> = Vec::new();
    if n == 2 {
        for j in 0..grid {
            let t = std::f64::consts::TAU * j as f64 / grid as f64;
            let (s, c) = t.sin_cos();
            dirs.push(linalg::vector(&[c * x[0] - s * x[1], s * x[0] + c * x[1]]));
        }
    } else {
        dirs.push(-x);
        for i in 0..n {
            dirs.push(linalg::basis(n, i));
            dirs.push(-linalg::basis(n, i));
        }
        let mut r = linalg::rng(0x10a5);
        while dirs.len() < grid.max(2 * n + 1) {
            dirs.push(linalg::unit_gaussian(&mut r, n));
        }
    }
    let mut scored: Vec<(f64, Vector)> = dirs.into_iter().filter_map(|d| score(&d).map(|s| (s, d))).collect();
    if scored.is_empty() {
        return Ok(0.0);
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0].0;
    let mut r = linalg::rng(0x1c11);
    let step0 = if n == 2 { std::f64::consts::TAU / grid as f64 } else { 0.3 };
    for (s0, d0) in scored.into_iter().take(6) {
        let (mut s, mut d) = (s0, d0.normalize());
        let mut step = step0;
        for _ in 0..120 {
            let cand = (&d + linalg::gaussian(&mut r, n) * step).normalize();
            match score(&cand) {
                Some(v) if v > s => {
                    s = v;
                    d = cand;
                    step *= 1.5;
                }
                _ => step *= 0.7,
            }
            if step < 1e-9 {
                break;
            }
        }
        best = best.max(s);
    }
    Ok(best.min(1.0))
}

/// Gauge of a balanced convex body given only a membership oracle.
pub fn gauge_from_membership<F: Fn(&Vector) -> bool>(member: F, x: &Vector, tol: f64) -> Result<f64> {
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::arg("gauge_from_membership needs x ≠ 0"));
    }
    let mut probes: Vec<(f64, bool)> = Vec::new();
    let test = |s: f64, probes: &mut Vec<(f64, bool)>| -> bool {
        let r = member(&(x / s));
        probes.push((s, r));
        r
    };
    let mut hi = 1.0f64;
    let mut lo;
    if test(1.0, &mut probes) {
        while test(hi * 0.5, &mut probes) {
            hi *= 0.5;
            if hi < 1e-300 {
                return Err(Error::Oracle("body appears unbounded".into()));
            }
        }
        lo = hi * 0.5;
    } else {
        lo = 1.0;
        hi = 2.0;
        while !test(hi, &mut probes) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Oracle("body appears to have empty interior".into()));
            }
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if test(mid, &mut probes) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // spot checks away from the bracket: larger scales must be members, smaller ones not
    for i in 1..=32 {
        let f = 16f64.powf(i as f64 / 32.0);
        test(hi * f, &mut probes);
        if lo > 0.0 {
            test(lo / f, &mut probes);
        }
    }
    let inconsistent = probes.iter().any(|&(a, ra)| probes.iter().any(|&(b, rb)| ra && !rb && b > a));
    if inconsistent {
        return Err(Error::Oracle("membership answers are not monotone in the scale".into()));
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use linalg::vector;

    #[test]
    fn basic_values() {
        assert_eq!(NormObject::euclidean(2).eval(&vector(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(NormObject::day(2).eval(&vector(&[1.0, 0.0])).unwrap(), 0.5);
        let d = NormObject::day(2).eval(&vector(&[1.0, 1.0])).unwrap();
        assert!((d - (5.0f64 / 16.0).sqrt()).abs() < 1e-15);
        let l4 = NormObject::lp(2, 4.0).eval(&vector(&[1.0, 1.0])).unwrap();
        assert!((l4 - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(NormObject::euclidean(2).eval(&vector(&[1.0])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn broken_norm_flagged() {
        let rep = check_axioms_fn(2, |x| Some(x[0]), 100, 1);
        assert!(rep.definiteness > 0.0 && rep.symmetry > 0.0);
    }

    #[test]
    fn lur_examples() {
        let e = NormObject::euclidean(2);
        let x = linalg::basis(2, 0);
        assert!((lur_modulus(&e, &x, 1.0, 720).unwrap() - 0.75f64.sqrt()).abs() < 1e-3);
        assert!(lur_modulus(&e, &x, 2.0, 720).unwrap().abs() < 1e-3);
        let l1 = NormObject::lp(2, 1.0);
        assert!((lur_modulus(&l1, &x, 1.0, 720).unwrap() - 1.0).abs() < 1e-6);
        assert!(lur_modulus(&e, &x, 1.0, 0).is_err());
    }

    #[test]
    fn membership_gauge() {
        let disk = |v: &Vector| v.norm() <= 1.0;
        assert!((gauge_from_membership(disk, &vector(&[2.0, 0.0]), 1e-10).unwrap() - 2.0).abs() < 1e-9);
        assert!((gauge_from_membership(disk, &vector(&[1.0, 1.0]), 1e-10).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        let sq = |v: &Vector| v.amax() <= 1.0;
        assert!((gauge_from_membership(sq, &vector(&[0.5, 1.0]), 1e-10).unwrap() - 1.0).abs() < 1e-9);
        // disk plus a detached annulus: not a scaled family of nested bodies
        let weird = |v: &Vector| v.norm() <= 1.0 || (2.0..=3.0).contains(&v.norm());
        let r = gauge_from_membership(weird, &vector(&[2.5, 0.0]), 1e-10);
        assert!(r.is_err(), "{r:?}");
    }

    #[test]
    fn duals() {
        let u = vector(&[0.3, -1.2, 0.5]);
        for p in [1.0, 1.5, 4.0] {
            let n = NormObject::weighted_lp(p, vec![1.0, 2.0, 0.5]);
            let exact = n.dual(&u).unwrap();
            let num = n.dual_numeric(&u).unwrap();
            assert!((exact - num).abs() < 1e-6 * exact, "p={p}: {exact} vs {num}");
        }
    }
}
