//! Gauge evaluation for pimple hulls.
//!
//! Primal: min_t base(y − Σ t_i d_i) + Σ λ_i |t_i|, solved by a log-barrier
//! Newton method on a working set of directions. Dual: ⟨u,y⟩ / h_W(u) for
//! candidate u taken from the primal solution. The value is returned only
//! when the two bounds meet.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, serde_vec, Matrix, Vector};
use crate::norm::{NormKind, NormObject};
use crate::optimize;

use super::PimpleSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PimpleEval {
    /// Primal value (an upper bound attained by an explicit decomposition).
    pub value: f64,
    /// Certified lower bound ⟨u,y⟩/h_W(u).
    pub lower: f64,
    /// Dual vector scaled so that h_W(dual) = 1; a subgradient of the gauge at y.
    #[serde(with = "serde_vec")]
    pub dual: Vector,
    /// Directions carrying a nonzero coefficient.
    pub active: Vec<usize>,
}

fn closed_form_dual(base: &NormObject) -> bool {
    matches!(base.kind, NormKind::Euclidean { .. } | NormKind::WeightedLp { .. })
}

/// h_B(u) for u that is known to be a (scaled) gradient of the base norm.
fn base_dual(base: &NormObject, u: &Vector, grad_scale: Option<f64>) -> f64 {
    if closed_form_dual(base) {
        return base.dual(u).unwrap_or(f64::INFINITY);
    }
    match grad_scale {
        Some(s) => s,
        None => base.dual(u).unwrap_or(f64::INFINITY),
    }
}

struct Ctx<'a> {
    spec: &'a PimpleSpec,
    y: &'a Vector,
}

impl Ctx<'_> {
    fn hw(&self, u: &Vector, hb: f64) -> f64 {
        let p = self.spec.prepared();
        let mut h = hb;
        for (d, l) in p.dirs.iter().zip(&p.lams) {
            h = h.max(u.dot(d).abs() / l);
        }
        h
    }

    fn ratio(&self, u: &Vector, hb: f64) -> f64 {
        let h = self.hw(u, hb);
        if h > 0.0 {
            u.dot(self.y) / h
        } else {
            0.0
        }
    }
}

pub(crate) fn evaluate(spec: &PimpleSpec, y: &Vector, tol: f64) -> Result<PimpleEval> {
    let base = &spec.base;
    let n = spec.dim();
    let b = base.eval(y)?;
    if b == 0.0 {
        return Ok(PimpleEval { value: 0.0, lower: 0.0, dual: Vector::zeros(n), active: vec![] });
    }
    let ctx = Ctx { spec, y };
    let p = spec.prepared();
    let u0 = base.gradient(y)?;
    let hb0 = base_dual(base, &u0, Some(1.0));
    let hw0 = ctx.hw(&u0, hb0);
    if hw0 <= hb0 * (1.0 + 1e-14) {
        let lower = u0.dot(y) / hw0;
        return Ok(PimpleEval { value: b, lower: lower.min(b), dual: &u0 / hw0, active: vec![] });
    }
    let gap_ok = |upper: f64, lower: f64| upper - lower <= 10.0 * tol * upper.max(1.0);
    let violators = |u: &Vector, hb: f64, ws: &[usize]| -> Vec<usize> {
        let mut v: Vec<(usize, f64)> = (0..p.dirs.len())
            .filter(|j| !ws.contains(j))
            .map(|j| (j, u.dot(&p.dirs[j]).abs() / p.lams[j] / hb))
            .filter(|&(_, r)| r > 1.0 + 1e-12)
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v.into_iter().map(|x| x.0).collect()
    };
    let mut best_upper = b;
    let mut best_lower = u0.dot(y) / hw0;
    let mut best_u = &u0 / hw0;
    let mut best_active = vec![];
    // a loose barrier followed by the support Newton polish usually suffices;
    // the tight pass only runs when it does not
    for barrier_tol in [1e-3f64.max(tol), 1e-6f64.max(tol), tol] {
        let mut ws = violators(&u0, hb0, &[]);
        for _round in 0..=p.dirs.len() {
            let sol = restricted(base, y, &ws, p, barrier_tol)?;
            if sol.upper < best_upper {
                best_upper = sol.upper;
                best_active = sol.active.clone();
            }
            let mut added = Vec::new();
            for (u, hb) in sol.duals {
                let r = ctx.ratio(&u, hb);
                if r > best_lower {
                    best_lower = r;
                    best_u = &u / ctx.hw(&u, hb);
                }
                for j in violators(&u, hb, &ws) {
                    if !added.contains(&j) {
                        added.push(j);
                    }
                }
            }
            if gap_ok(best_upper, best_lower) {
                return Ok(PimpleEval { value: best_upper, lower: best_lower.min(best_upper), dual: best_u, active: best_active });
            }
            if added.is_empty() {
                break;
            }
            ws.extend(added);
        }
    }
    let (lower, u) = dual_search(&ctx, spec.tol.dual_starts, 0xd1a1, Some(&best_u))?;
    if lower > best_lower {
        best_lower = lower;
        best_u = u;
    }
    if gap_ok(best_upper, best_lower) {
        return Ok(PimpleEval { value: best_upper, lower: best_lower.min(best_upper), dual: best_u, active: best_active });
    }
    Err(Error::Solver { msg: "pimple primal/dual gap did not close".into(), primal: best_upper, dual: best_lower })
}

struct Restricted {
    upper: f64,
    active: Vec<usize>,
    /// Candidate dual vectors with their h_B values.
    duals: Vec<(Vector, f64)>,
}

/// Solve the problem restricted to the directions in `ws`.
fn restricted(base: &NormObject, y: &Vector, ws: &[usize], p: &super::Prepared, tol: f64) -> Result<Restricted> {
    let n = y.len();
    let k = ws.len();
    let b = base.eval(y)?;
    let yn = y / b;
    let d = DMatrix::from_fn(n, k, |i, j| p.dirs[ws[j]][i]);
    let lam: Vec<f64> = ws.iter().map(|&j| p.lams[j]).collect();
    let t = barrier_solve(base, &yn, &d, &lam, tol)?;
    let value_at = |t: &Vector| -> Result<f64> {
        let r = &yn - &d * t;
        Ok(base.eval(&r)? + t.iter().zip(&lam).map(|(a, l)| l * a.abs()).sum::<f64>())
    };
    let mut best_t = t.clone();
    let mut upper = value_at(&t)?;
    let scale = t.amax().max(1.0);
    let mut duals = Vec::new();
    let r = &yn - &d * &t;
    if base.eval(&r)? > 0.0 {
        let g = base.gradient(&r)?;
        let hb = base_dual(base, &g, Some(1.0));
        duals.push((g, hb));
    }
    // an inexact barrier point leaves small spurious coefficients, so the
    // support is guessed at several cutoffs
    let mut supports: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    for cut in [1e-8, 1e-6, 1e-4, 1e-2] {
        let act: Vec<usize> = (0..k).filter(|&i| t[i].abs() > cut * scale).collect();
        let sigma = act.iter().map(|&i| t[i].signum()).collect();
        if !act.is_empty() && !supports.contains(&(act.clone(), sigma)) {
            supports.push((act.clone(), act.iter().map(|&i| t[i].signum()).collect()));
        }
    }
    if let Some((sup, tb)) = basis_pursuit(&yn, &d, &lam) {
        let v = value_at(&tb)?;
        if v < upper {
            upper = v;
            best_t = tb;
        }
        if !supports.contains(&sup) {
            supports.push(sup);
        }
    }
    for (act, sigma) in &supports {
        let act = act.as_slice();
        if let Some((tp, up)) = newton_polish(base, &yn, &d, &lam, &t, act, sigma)? {
            if up <= upper {
                upper = up;
                best_t = tp.clone();
            }
            let r = &yn - &d * &tp;
            if base.eval(&r)? > 0.0 {
                let g = base.gradient(&r)?;
                let hb = base_dual(base, &g, Some(1.0));
                duals.push((g, hb));
            }
        }
        // pure-tip candidate: y in the cone over the active tips
        let da = DMatrix::from_fn(n, act.len(), |i, j| d[(i, act[j])]);
        let rhs = DVector::from_fn(act.len(), |i, _| sigma[i] * lam[act[i]]);
        if let Some(u) = min_dual_on_affine(base, &da, &rhs) {
            let hb = base_dual(base, &u, None);
            duals.push((u, hb));
        }
        {
            let svd = da.clone().svd(true, true);
            if let Ok(tt) = svd.solve(&yn, 1e-13) {
                if (&da * &tt - &yn).amax() < 1e-14 {
                    let mut full = Vector::zeros(k);
                    for (j, &i) in act.iter().enumerate() {
                        full[i] = tt[j];
                    }
                    let v = value_at(&full)?;
                    if v < upper {
                        upper = v;
                        best_t = full;
                    }
                }
            }
        }
    }
    // y on a single direction: the barrier cannot reach a zero residual
    // when the base norm is not smooth there, so test it directly
    let ynorm = yn.norm();
    for i in 0..k {
        let di = d.column(i);
        let c = di.dot(&yn) / (di.norm() * ynorm);
        if c.abs() < 1.0 - 1e-13 {
            continue;
        }
        let ti = di.dot(&yn) / di.norm_squared();
        let mut full = Vector::zeros(k);
        full[i] = ti;
        let v = value_at(&full)?;
        if v < upper {
            upper = v;
            best_t = full;
        }
        let da = DMatrix::from_fn(n, 1, |r, _| d[(r, i)]);
        let rhs = DVector::from_element(1, ti.signum() * lam[i]);
        if let Some(u) = min_dual_on_affine(base, &da, &rhs) {
            let hb = base_dual(base, &u, None);
            duals.push((u, hb));
        }
    }
    let active = (0..k).filter(|&i| best_t[i].abs() > 1e-8 * scale).map(|i| ws[i]).collect();
    Ok(Restricted { upper: upper * b, active, duals })
}

/// argmin Σ λ_i |t_i| subject to D t = y with its signed support: the best decomposition
/// with zero residual. The barrier cannot reach that regime when the base norm
/// is not smooth at the origin.
fn basis_pursuit(y: &Vector, d: &Matrix, lam: &[f64]) -> Option<((Vec<usize>, Vec<f64>), Vector)> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let (n, k) = d.shape();
    if k < n || d.clone().svd(false, false).rank(1e-10) < n {
        return None;
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let pos: Vec<_> = lam.iter().map(|&l| lp.add_var(l, (0.0, f64::INFINITY))).collect();
    let neg: Vec<_> = lam.iter().map(|&l| lp.add_var(l, (0.0, f64::INFINITY))).collect();
    for i in 0..n {
        let row: Vec<_> = (0..k).flat_map(|j| [(pos[j], d[(i, j)]), (neg[j], -d[(i, j)])]).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, y[i]);
    }
    let sol = lp.solve().ok()?;
    let t: Vec<f64> = (0..k).map(|j| sol[pos[j]] - sol[neg[j]]).collect();
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let act: Vec<usize> = (0..k).filter(|&j| t[j].abs() > 1e-9 * scale).collect();
    let sigma = act.iter().map(|&j| t[j].signum()).collect();
    (!act.is_empty()).then(|| ((act, sigma), Vector::from_vec(t)))
}

/// argmin h_B(u) subject to D_Aᵀu = rhs.
fn min_dual_on_affine(base: &NormObject, da: &Matrix, rhs: &Vector) -> Option<Vector> {
    let n = da.nrows();
    let m = da.ncols();
    if let NormKind::Euclidean { gram } = &base.kind {
        let ginv = gram.clone().try_inverse()?;
        let a = da.transpose() * &ginv * da;
        let w = a.lu().solve(rhs)?;
        return Some(ginv * da * w);
    }
    // minimum euclidean-norm particular solution plus null-space search
    let svd = da.transpose().svd(true, true);
    let up = svd.solve(rhs, 1e-13).ok()?;
    if m >= n {
        return Some(up);
    }
    let vt = svd.v_t?;
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-12).count();
    // complete the row space to a full orthonormal basis, keep the complement
    let rows: Vec<Vector> = (0..rank).map(|i| vt.row(i).transpose()).collect();
    let mut all = rows.clone();
    for i in 0..n {
        all.push(linalg::basis(n, i));
    }
    let basis = linalg::orthonormal_span(&all, 1e-10);
    let null: Vec<Vector> = basis[rank..].to_vec();
    if null.is_empty() {
        return Some(up);
    }
    let f = |z: &[f64]| -> f64 {
        let mut u = up.clone();
        for (c, v) in z.iter().zip(&null) {
            u += v * *c;
        }
        base.dual(&u).unwrap_or(f64::INFINITY)
    };
    let (z, _) = optimize::nelder_mead_restarts(f, &vec![0.0; null.len()], 0.1, 1e-15, 3000, 3);
    let mut u = up;
    for (c, v) in z.iter().zip(&null) {
        u += v * *c;
    }
    Some(u)
}

/// Newton iteration on D_Aᵀ∇base(y − D_A t_A) = σλ_A with the support fixed.
fn newton_polish(
    base: &NormObject,
    y: &Vector,
    d: &Matrix,
    lam: &[f64],
    t0: &Vector,
    act: &[usize],
    sigma: &[f64],
) -> Result<Option<(Vector, f64)>> {
    let n = y.len();
    let m = act.len();
    if m > n {
        return Ok(None);
    }
    let da = DMatrix::from_fn(n, m, |i, j| d[(i, act[j])]);
    let target = DVector::from_fn(m, |i, _| sigma[i] * lam[act[i]]);
    let mut ta = DVector::from_fn(m, |i, _| t0[act[i]]);
    let value = |ta: &Vector| -> Result<f64> {
        let r = y - &da * ta;
        Ok(base.eval(&r)? + ta.iter().zip(act).map(|(a, &i)| lam[i] * a.abs()).sum::<f64>())
    };
    for _ in 0..30 {
        let r = y - &da * &ta;
        if base.eval(&r)? < 1e-12 {
            return Ok(None);
        }
        let g = base.gradient(&r)?;
        let f = da.transpose() * &g - &target;
        if f.amax() < 1e-15 {
            break;
        }
        let h = base.hessian(&r)?;
        let jac = da.transpose() * h * &da;
        let step = match jac.lu().solve(&f) {
            Some(s) => s,
            None => return Ok(None),
        };
        // Jacobian of F wrt t is −jac, so Newton step is +jac⁻¹F
        let mut alpha = 1.0;
        let v0 = value(&ta)?;
        let mut moved = false;
        while alpha > 1e-6 {
            let cand = &ta + &step * alpha;
            if cand.iter().zip(sigma).all(|(t, s)| t * s > 0.0) && value(&cand)? <= v0 + 1e-15 {
                ta = cand;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if !ta.iter().zip(sigma).all(|(t, s)| t * s > 0.0) {
        return Ok(None);
    }
    let mut full = Vector::zeros(d.ncols());
    for (j, &i) in act.iter().enumerate() {
        full[i] = ta[j];
    }
    let v = value(&ta)?;
    Ok(Some((full, v)))
}

/// How the epigraph constraint τ ≥ base(r) enters the barrier.
enum Epigraph {
    /// Second-order cone τ² ≥ rᵀGr.
    Soc(Matrix),
    /// Power cones |c_i r_i| ≤ w_i^{1/p} τ^{1−1/p} with Σ w_i ≤ τ, for the
    /// weighted ℓp norm. Stays self-concordant as r → 0, where the plain
    /// −log(τ − base(r)) barrier stalls.
    Power { p: f64, c: Vec<f64> },
    /// −log(τ − base(r)) using the base norm's own derivatives.
    Generic,
}

/// −log(x^{2α} y^{2−2α} − z²) − (1−α) log x − α log y with gradient and
/// Hessian in (x, y, z).
fn power_cone_barrier(alpha: f64, x: f64, y: f64, z: f64) -> Option<(f64, [f64; 3], [[f64; 3]; 3])> {
    if x <= 0.0 || y <= 0.0 {
        return None;
    }
    let (a, b) = (2.0 * alpha, 2.0 - 2.0 * alpha);
    let xy = x.powf(a) * y.powf(b);
    let psi = xy - z * z;
    if psi <= 0.0 {
        return None;
    }
    let dpsi = [a * xy / x, b * xy / y, -2.0 * z];
    let hpsi = [
        [a * (a - 1.0) * xy / (x * x), a * b * xy / (x * y), 0.0],
        [a * b * xy / (x * y), b * (b - 1.0) * xy / (y * y), 0.0],
        [0.0, 0.0, -2.0],
    ];
    let f = -psi.ln() - (1.0 - alpha) * x.ln() - alpha * y.ln();
    let mut g = [0.0; 3];
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        g[i] = -dpsi[i] / psi;
        for j in 0..3 {
            h[i][j] = dpsi[i] * dpsi[j] / (psi * psi) - hpsi[i][j] / psi;
        }
    }
    g[0] -= (1.0 - alpha) / x;
    g[1] -= alpha / y;
    h[0][0] += (1.0 - alpha) / (x * x);
    h[1][1] += alpha / (y * y);
    Some((f, g, h))
}

/// Log-barrier path following on (t, s, τ[, w]):
/// minimize τ + Σ λ_i s_i subject to τ ≥ base(y − D t), s_i ≥ |t_i|.
fn barrier_solve(base: &NormObject, y: &Vector, d: &Matrix, lam: &[f64], tol: f64) -> Result<Vector> {
    let n = y.len();
    let k = d.ncols();
    let epi = match &base.kind {
        NormKind::Euclidean { gram } => Epigraph::Soc(gram.clone()),
        NormKind::WeightedLp { p, weights } if *p > 1.0 => Epigraph::Power { p: *p, c: weights.iter().map(|w| w.powf(1.0 / p)).collect() },
        _ => Epigraph::Generic,
    };
    let extra = if matches!(epi, Epigraph::Power { .. }) { n } else { 0 };
    let nv = 2 * k + 1 + extra;
    let it = 2 * k; // index of τ
    let nu = 2.0 * k as f64
        + match epi {
            Epigraph::Soc(_) => 2.0,
            Epigraph::Power { .. } => 3.0 * n as f64 + 1.0,
            Epigraph::Generic => 1.0,
        };
    let mut c = DVector::zeros(nv);
    for i in 0..k {
        c[k + i] = lam[i];
    }
    c[it] = 1.0;
    let mut z = DVector::zeros(nv);
    for i in 0..k {
        z[k + i] = 1.0;
    }
    let by = base.eval(y)?.max(1e-300);
    z[it] = if extra > 0 { (n as f64 + 1.0) * by + 1.0 } else { 2.0 * by + 1.0 };
    for i in 0..extra {
        z[it + 1 + i] = z[it] / (n as f64 + 1.0);
    }
    let dgd = match &epi {
        Epigraph::Soc(gram) => Some(d.transpose() * gram * d),
        _ => None,
    };

    // barrier value, gradient and Hessian; None outside the domain
    let barrier = |z: &Vector, want_hess: bool| -> Result<Option<(f64, Vector, Matrix)>> {
        let t = z.rows(0, k).into_owned();
        let tau = z[it];
        let r = y - d * &t;
        let mut g = DVector::zeros(nv);
        let mut h = if want_hess { DMatrix::zeros(nv, nv) } else { DMatrix::zeros(0, 0) };
        let mut f = 0.0;
        for i in 0..k {
            let (ti, si) = (z[i], z[k + i]);
            let a = si - ti;
            let cc = si + ti;
            if a <= 0.0 || cc <= 0.0 {
                return Ok(None);
            }
            f -= a.ln() + cc.ln();
            g[i] += 1.0 / a - 1.0 / cc;
            g[k + i] += -1.0 / a - 1.0 / cc;
            if want_hess {
                let (ia, ic) = (1.0 / (a * a), 1.0 / (cc * cc));
                h[(i, i)] += ia + ic;
                h[(k + i, k + i)] += ia + ic;
                h[(i, k + i)] += -ia + ic;
                h[(k + i, i)] += -ia + ic;
            }
        }
        match &epi {
            Epigraph::Power { p, c } => {
                let alpha = 1.0 / p;
                let mut slack = tau;
                for i in 0..n {
                    let iw = it + 1 + i;
                    slack -= z[iw];
                    let zi = c[i] * r[i];
                    let Some((fi, gi, hi)) = power_cone_barrier(alpha, z[iw], tau, zi) else {
                        return Ok(None);
                    };
                    f += fi;
                    // z_i = c_i (y_i − D_i t): ∂z_i/∂t_j = −c_i D_ij
                    g[iw] += gi[0];
                    g[it] += gi[1];
                    for j in 0..k {
                        g[j] -= gi[2] * c[i] * d[(i, j)];
                    }
                    if want_hess {
                        h[(iw, iw)] += hi[0][0];
                        h[(iw, it)] += hi[0][1];
                        h[(it, iw)] += hi[1][0];
                        h[(it, it)] += hi[1][1];
                        for j in 0..k {
                            let dj = -c[i] * d[(i, j)];
                            h[(iw, j)] += hi[0][2] * dj;
                            h[(j, iw)] += hi[2][0] * dj;
                            h[(it, j)] += hi[1][2] * dj;
                            h[(j, it)] += hi[2][1] * dj;
                            for l in 0..k {
                                h[(j, l)] += hi[2][2] * dj * (-c[i] * d[(i, l)]);
                            }
                        }
                    }
                }
                if slack <= 0.0 {
                    return Ok(None);
                }
                f -= slack.ln();
                g[it] -= 1.0 / slack;
                for i in 0..n {
                    g[it + 1 + i] += 1.0 / slack;
                }
                if want_hess {
                    let s2 = 1.0 / (slack * slack);
                    for a in 0..=n {
                        for b in 0..=n {
                            let sa = if a == 0 { 1.0 } else { -1.0 };
                            let sb = if b == 0 { 1.0 } else { -1.0 };
                            h[(it + a, it + b)] += sa * sb * s2;
                        }
                    }
                }
            }
            _ => {
                // gradient of the constraint function q in (t, τ) coordinates
                let mut gq = DVector::zeros(nv);
                let mut hq = if want_hess { DMatrix::zeros(nv, nv) } else { DMatrix::zeros(0, 0) };
                let q;
                if let Epigraph::Soc(gram) = &epi {
                    let gr = gram * &r;
                    q = tau * tau - r.dot(&gr);
                    if tau <= 0.0 || q <= 0.0 {
                        return Ok(None);
                    }
                    let dt = d.transpose() * &gr * 2.0;
                    gq.rows_mut(0, k).copy_from(&dt);
                    gq[it] = 2.0 * tau;
                    if want_hess {
                        let m = dgd.as_ref().expect("set for Soc") * -2.0;
                        hq.view_mut((0, 0), (k, k)).copy_from(&m);
                        hq[(it, it)] = 2.0;
                    }
                } else {
                    let br = base.eval(&r)?;
                    q = tau - br;
                    if q <= 0.0 {
                        return Ok(None);
                    }
                    if br > 0.0 {
                        let gb = base.gradient(&r)?;
                        gq.rows_mut(0, k).copy_from(&(d.transpose() * gb));
                        if want_hess {
                            let hb = base.hessian(&r)?;
                            let m = d.transpose() * hb * d * -1.0;
                            hq.view_mut((0, 0), (k, k)).copy_from(&m);
                        }
                    }
                    gq[it] = 1.0;
                }
                f -= q.ln();
                g -= &gq / q;
                if want_hess {
                    h += &gq * gq.transpose() / (q * q) - hq / q;
                }
            }
        }
        Ok(Some((f, g, h)))
    };

    let mut kappa = 1.0;
    let target = 0.05 * tol;
    loop {
        for _ in 0..80 {
            let (f0, g, h) = match barrier(&z, true)? {
                Some(v) => v,
                None => return Err(Error::Solver { msg: "barrier left its domain".into(), primal: f64::NAN, dual: f64::NAN }),
            };
            let grad = &c * kappa + &g;
            let step = solve_spd(&h, &(-&grad));
            let dec2 = -grad.dot(&step);
            if !(dec2 > 2e-12) {
                break;
            }
            let slope = grad.dot(&step);
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-14 {
                let cand = &z + &step * alpha;
                if let Some((f1, _, _)) = barrier(&cand, false)? {
                    let df = kappa * c.dot(&step) * alpha + (f1 - f0);
                    if df <= 0.25 * alpha * slope {
                        z = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if nu / kappa <= target {
            break;
        }
        kappa *= 8.0;
    }
    Ok(z.rows(0, k).into_owned())
}

fn solve_spd(h: &Matrix, rhs: &Vector) -> Vector {
    if let Some(ch) = h.clone().cholesky() {
        return ch.solve(rhs);
    }
    let n = h.nrows();
    let mut reg = 1e-14 * h.diagonal().amax().max(1.0);
    for _ in 0..20 {
        let m = h + Matrix::identity(n, n) * reg;
        if let Some(ch) = m.cholesky() {
            return ch.solve(rhs);
        }
        reg *= 100.0;
    }
    h.clone().lu().solve(rhs).unwrap_or_else(|| rhs.clone())
}

/// Multistart maximization of ⟨u,y⟩/h_W(u); returns the bound and the
/// maximizer normalized to h_W = 1.
fn dual_search(ctx: &Ctx, starts: usize, seed: u64, hint: Option<&Vector>) -> Result<(f64, Vector)> {
    let spec = ctx.spec;
    let n = spec.dim();
    let mut r = linalg::rng(seed);
    let mut cands = vec![spec.base.gradient(ctx.y)?];
    if let Some(h) = hint {
        cands.push(h.clone());
    }
    while cands.len() < starts.max(1) {
        cands.push(linalg::unit_gaussian(&mut r, n));
    }
    let mut best = (f64::NEG_INFINITY, Vector::zeros(n));
    for s in cands {
        let s = if s.dot(ctx.y) < 0.0 { -s } else { s };
        let f = |v: &[f64]| -> f64 {
            let u = Vector::from_column_slice(v);
            let h = spec.support(&u).unwrap_or(f64::INFINITY);
            if h > 0.0 && h.is_finite() {
                -u.dot(ctx.y) / h
            } else {
                0.0
            }
        };
        let x0 = s.normalize();
        let (x, v) = optimize::nelder_mead_restarts(f, x0.as_slice(), 0.2, 1e-16, 4000, 6);
        if -v > best.0 {
            let u = Vector::from_vec(x);
            let h = spec.support(&u)?;
            best = (-v, u / h);
        }
    }
    Ok(best)
}

pub(crate) fn dual_multistart(spec: &PimpleSpec, y: &Vector, starts: usize, seed: u64) -> Result<f64> {
    linalg::check_dim(spec.dim(), y)?;
    if y.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let ctx = Ctx { spec, y };
    Ok(dual_search(&ctx, starts, seed, None)?.0)
}
