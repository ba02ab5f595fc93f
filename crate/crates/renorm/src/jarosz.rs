//! Explicit complex norms: the five-seminorm norm on C² with only trivial real
//! isometries, the double norms on finite Γ, the disjoint-support criterion and
//! the extension gauge on X ⊕ C.
//!
//! Complex coordinates are stored as consecutive real pairs (re, im).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::{falsify_search, FalsifierReport, FalsifyConfig, KnownSet};
use crate::linalg::{self, serde_vec, Matrix, Vector};
use crate::norm::NormObject;
use crate::optimize;

/// Complex multiplication by i on C^m, as a real 2m × 2m matrix.
pub fn complex_i(m: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        j[(2 * k, 2 * k + 1)] = -1.0;
        j[(2 * k + 1, 2 * k)] = 1.0;
    }
    j
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Real matrix of z ↦ w·z (conj = false) or z ↦ w·conj(z) (conj = true) on C.
fn scalar_block(w: (f64, f64), conj: bool) -> [[f64; 2]; 2] {
    let (r, i) = w;
    if conj {
        [[r, i], [i, -r]]
    } else {
        [[r, -i], [i, r]]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct C2NormSpec {
    /// λ_1..λ_4 as (re, im); λ_0 = 0 is implicit.
    pub lambdas: Vec<(f64, f64)>,
}

impl Default for C2NormSpec {
    fn default() -> Self {
        Self::from_angles(&[0.2, 0.5, 0.9, 1.4])
    }
}

impl C2NormSpec {
    pub fn from_angles(thetas: &[f64]) -> Self {
        C2NormSpec { lambdas: thetas.iter().map(|t| (t.cos(), t.sin())).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.len() != 4 {
            return Err(Error::Spec(format!("expected 4 multipliers, got {}", self.lambdas.len())));
        }
        for (k, &(r, i)) in self.lambdas.iter().enumerate() {
            if ((r * r + i * i).sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::Spec(format!("λ_{} is not unimodular", k + 1)));
            }
            if r <= 0.0 {
                return Err(Error::Spec(format!("λ_{} has nonpositive real part", k + 1)));
            }
        }
        let mut pairs = Vec::new();
        for j in 0..4 {
            for k in j..4 {
                pairs.push(((j, k), cmul(self.lambdas[j], self.lambdas[k])));
            }
        }
        for a in 0..pairs.len() {
            for b in (a + 1)..pairs.len() {
                let (p, q) = (pairs[a].1, pairs[b].1);
                if (p.0 - q.0).hypot(p.1 - q.1) < 1e-8 {
                    let ((j, k), (l, m)) = (pairs[a].0, pairs[b].0);
                    return Err(Error::Spec(format!("λ_{}λ_{} = λ_{}λ_{}", j + 1, k + 1, l + 1, m + 1)));
                }
            }
        }
        Ok(())
    }
}

/// max over k of |x − λ_k y| on C² = R⁴, coordinates (Re x, Im x, Re y, Im y).
pub fn c2_norm_build(spec: &C2NormSpec) -> Result<NormObject> {
    spec.validate()?;
    let mut semis = vec![linalg::matrix(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0])];
    for &(r, i) in &spec.lambdas {
        semis.push(linalg::matrix(2, 4, &[1.0, 0.0, -r, i, 0.0, 1.0, -i, -r]));
    }
    Ok(NormObject::max_seminorms(4, semis))
}

/// Point (x, y) ∈ C² as a real 4-vector.
pub fn c2_point(x: (f64, f64), y: (f64, f64)) -> Vector {
    linalg::vector(&[x.0, x.1, y.0, y.1])
}

/// The non-trivial candidate shapes T(x,y) = (x or x̄, d·y or d·ȳ) left by the
/// isometry classification.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateForm {
    /// (x, d ȳ)
    ConjugateSecond,
    /// (x̄, d y)
    ConjugateFirst,
    /// (x̄, d ȳ)
    ConjugateBoth,
}

impl CandidateForm {
    pub const ALL: [CandidateForm; 3] = [CandidateForm::ConjugateSecond, CandidateForm::ConjugateFirst, CandidateForm::ConjugateBoth];

    pub fn matrix(self, phase: f64) -> Matrix {
        let d = (phase.cos(), phase.sin());
        let (c1, c2) = match self {
            CandidateForm::ConjugateSecond => (false, true),
            CandidateForm::ConjugateFirst => (true, false),
            CandidateForm::ConjugateBoth => (true, true),
        };
        let a = scalar_block((1.0, 0.0), c1);
        let b = scalar_block(d, c2);
        let mut t = Matrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                t[(i, j)] = a[i][j];
                t[(2 + i, 2 + j)] = b[i][j];
            }
        }
        t
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormRejection {
    pub form: CandidateForm,
    /// Smallest worst-case relative deviation over the sampled phases d.
    pub min_deviation: f64,
    /// Phase of d attaining it, and the witness vector there.
    pub phase: f64,
    #[serde(with = "serde_vec")]
    pub witness: Vector,
    pub rejected: bool,
}

fn witness_set(spec: &C2NormSpec, thetas: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    for s in 0..thetas {
        let th = std::f64::consts::TAU * s as f64 / thetas as f64;
        let e = (th.cos(), th.sin());
        out.push(c2_point(e, (0.0, 0.0)));
        for &l in &spec.lambdas {
            let y = cmul((-l.0, l.1), e);
            out.push(c2_point(e, y));
        }
    }
    out
}

fn worst_deviation(norm: &NormObject, t: &Matrix, xs: &[Vector]) -> Result<(f64, usize)> {
    let mut best = (0.0, 0);
    for (i, x) in xs.iter().enumerate() {
        let a = norm.eval(x)?;
        let d = (norm.eval(&(t * x))? - a).abs() / a;
        if d > best.0 {
            best = (d, i);
        }
    }
    Ok(best)
}

/// Relative deviation that counts as a witness. The max-seminorm evaluation is
/// closed form, so anything this far above rounding is genuine.
pub const REJECT_MARGIN: f64 = 1e-6;

/// Shows each conjugation-type candidate fails to be an isometry for every
/// unimodular d, by a phase grid with golden refinement around the best phase.
pub fn reject_candidate_forms(spec: &C2NormSpec) -> Result<Vec<FormRejection>> {
    let norm = c2_norm_build(spec)?;
    let xs = witness_set(spec, 256);
    let grid = 720;
    let mut out = Vec::new();
    for form in CandidateForm::ALL {
        let mut best = (f64::INFINITY, 0.0);
        for s in 0..grid {
            let ph = std::f64::consts::TAU * s as f64 / grid as f64;
            let (d, _) = worst_deviation(&norm, &form.matrix(ph), &xs)?;
            if d < best.0 {
                best = (d, ph);
            }
        }
        let h = std::f64::consts::TAU / grid as f64;
        let f = |ph: f64| worst_deviation(&norm, &form.matrix(ph), &xs).map_or(f64::INFINITY, |r| r.0);
        let (ph, v) = optimize::golden_min(f, best.1 - h, best.1 + h, 1e-12);
        let (ph, v) = if v < best.0 { (ph, v) } else { (best.1, best.0) };
        let (_, wi) = worst_deviation(&norm, &form.matrix(ph), &xs)?;
        out.push(FormRejection { form, min_deviation: v, phase: ph, witness: xs[wi].clone(), rejected: v > REJECT_MARGIN });
    }
    Ok(out)
}

/// Falsifier run against the circle of complex scalars.
pub fn c2_falsify(spec: &C2NormSpec, cfg: &FalsifyConfig) -> Result<FalsifierReport> {
    let norm = c2_norm_build(spec)?;
    falsify_search(&norm, &KnownSet::Circle(complex_i(2)), cfg)
}

/// The norms on C^n = R^{2n}: variant 2 is max(sup |x_γ|, sup_{γ<β} |2x_γ + x_β|);
/// variant 1 also includes |(3/2) x_0 + i x_1|.
pub fn double_norm_build(gamma_count: usize, variant: u8) -> Result<NormObject> {
    let n = gamma_count;
    if n < 2 {
        return Err(Error::arg("need at least two coordinates"));
    }
    if variant != 1 && variant != 2 {
        return Err(Error::arg("variant must be 1 or 2"));
    }
    let coord = |rows: &mut Matrix, g: usize, w: (f64, f64)| {
        let b = scalar_block(w, false);
        for i in 0..2 {
            for j in 0..2 {
                rows[(i, 2 * g + j)] += b[i][j];
            }
        }
    };
    let mut semis = Vec::new();
    for g in 0..n {
        let mut m = Matrix::zeros(2, 2 * n);
        coord(&mut m, g, (1.0, 0.0));
        semis.push(m);
    }
    for g in 0..n {
        for b in (g + 1)..n {
            let mut m = Matrix::zeros(2, 2 * n);
            coord(&mut m, g, (2.0, 0.0));
            coord(&mut m, b, (1.0, 0.0));
            semis.push(m);
        }
    }
    if variant == 1 {
        let mut m = Matrix::zeros(2, 2 * n);
        coord(&mut m, 0, (1.5, 0.0));
        coord(&mut m, 1, (0.0, 1.0));
        semis.push(m);
    }
    Ok(NormObject::max_seminorms(2 * n, semis))
}

/// Coordinatewise conjugation on C^n.
pub fn conjugation(n: usize) -> Matrix {
    let mut c = Matrix::identity(2 * n, 2 * n);
    for k in 0..n {
        c[(2 * k + 1, 2 * k + 1)] = -1.0;
    }
    c
}

fn coord(x: &Vector, k: usize) -> (f64, f64) {
    (x[2 * k], x[2 * k + 1])
}

/// Decides whether x and y have overlapping supports through the norm-only
/// criterion: some z and ε = ±1 with ‖z‖, ‖x+z‖, ‖εy+z‖ ≤ 1 < ‖x+εy+z‖.
/// Returns true when such a z is found (supports overlap).
pub fn disjoint_support_test(norm: &NormObject, x: &Vector, y: &Vector, seed: u64) -> Result<bool> {
    let n = norm.dim / 2;
    let tol = 1e-12;
    let ok = |z: &Vector, eps: f64| -> Result<bool> {
        let ey = y * eps;
        Ok(norm.eval(z)? <= 1.0 + tol
            && norm.eval(&(x + z))? <= 1.0 + tol
            && norm.eval(&(&ey + z))? <= 1.0 + tol
            && norm.eval(&(x + &ey + z))? > 1.0 + 1e-9)
    };
    for k in 0..n {
        let (xr, xi) = coord(x, k);
        let (yr, yi) = coord(y, k);
        let ax = xr.hypot(xi);
        if ax < 1e-14 || yr.hypot(yi) < 1e-14 {
            continue;
        }
        let eps = if xr * yr + xi * yi >= 0.0 { 1.0 } else { -1.0 };
        let (yr, yi) = (eps * yr, eps * yi);
        let l1 = 1.0 / ax - 1.0;
        // |y_k + l x_k| = 1: l² |x|² + 2 l ⟨x,y⟩ + |y|² − 1 = 0
        let (a, b, c) = (ax * ax, 2.0 * (xr * yr + xi * yi), yr * yr + yi * yi - 1.0);
        let disc = (b * b - 4.0 * a * c).max(0.0);
        let l2 = ((-b + disc.sqrt()) / (2.0 * a)).max(0.0);
        let l = l1.min(l2).max(0.0);
        let mut z = Vector::zeros(2 * n);
        z[2 * k] = l * xr;
        z[2 * k + 1] = l * xi;
        if ok(&z, eps)? {
            return Ok(true);
        }
    }
    let mut r = linalg::rng(seed);
    for _ in 0..256 {
        let z = linalg::unit_gaussian(&mut r, 2 * n) * 0.5;
        for eps in [1.0, -1.0] {
            if ok(&z, eps)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Extension gauge on Y = X ⊕ C, X = C^m stored as R^{2m}: the hull of the
/// bidisk-type set A = {max(‖x‖, |α|) ≤ 1} and all rotations of the face
/// C = {(x + x0, 2) : p(x) ≤ 1}, where p = scale·(p_raw + ‖.‖).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionW {
    pub inner: NormObject,
    pub p_raw: NormObject,
    pub scale: f64,
    #[serde(with = "serde_vec")]
    pub x0: Vector,
    /// Factor applied to the supplied x0 to reach ‖x0‖ ≤ 0.1.
    pub x0_scale: f64,
}

impl ExtensionW {
    /// Normalizes p to p ≥ 1000‖.‖ and shrinks x0 to ‖x0‖ ≤ 0.1.
    pub fn new(inner: NormObject, p_raw: NormObject, x0: Vector) -> Result<Self> {
        let n = inner.dim;
        if n % 2 == 1 || p_raw.dim != n || x0.len() != n {
            return Err(Error::arg("inner, p and x0 must share an even dimension"));
        }
        let mut r = linalg::rng(0xc0de);
        let j = complex_i(n / 2);
        for _ in 0..32 {
            let x = linalg::unit_gaussian(&mut r, n);
            let th: f64 = rand::Rng::random_range(&mut r, 0.0..std::f64::consts::TAU);
            let rot = Matrix::identity(n, n) * th.cos() + &j * th.sin();
            for nm in [&inner, &p_raw] {
                let (a, b) = (nm.eval(&x)?, nm.eval(&(&rot * &x))?);
                if (a - b).abs() > 1e-9 * a {
                    return Err(Error::Spec("norms on X must be invariant under complex scalars".into()));
                }
            }
        }
        let nx = inner.eval(&x0)?;
        let x0_scale = if nx > 0.1 { 0.1 / nx } else { 1.0 };
        Ok(ExtensionW { inner, p_raw, scale: 1000.0, x0: x0 * x0_scale, x0_scale })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim + 2
    }

    pub fn p(&self, x: &Vector) -> Result<f64> {
        Ok(self.scale * (self.p_raw.eval(x)? + self.inner.eval(x)?))
    }

    fn split(&self, y: &Vector) -> (Vector, (f64, f64)) {
        let n = self.inner.dim;
        (y.rows(0, n).into_owned(), (y[n], y[n + 1]))
    }

    fn gauge_a(&self, y: &Vector) -> f64 {
        let (x, a) = self.split(y);
        self.inner.eval(&x).unwrap_or(f64::INFINITY).max(a.0.hypot(a.1))
    }

    fn gauge_b(&self, y: &Vector) -> f64 {
        let (w, b) = self.split(y);
        let half = (b.0 / 2.0, b.1 / 2.0);
        let m = self.inner.dim / 2;
        let mut v = w.clone();
        for k in 0..m {
            let c = cmul(half, (self.x0[2 * k], self.x0[2 * k + 1]));
            v[2 * k] -= c.0;
            v[2 * k + 1] -= c.1;
        }
        self.p(&v).unwrap_or(f64::INFINITY).max(half.0.hypot(half.1))
    }

    /// Gauge as the infimal convolution of the two pieces' gauges.
    pub fn eval(&self, y: &Vector) -> Result<f64> {
        linalg::check_dim(self.dim(), y)?;
        let n = self.dim();
        if y.amax() == 0.0 {
            return Ok(0.0);
        }
        let f = |c: &[f64]| {
            let y2 = Vector::from_column_slice(c);
            self.gauge_a(&(y - &y2)) + self.gauge_b(&y2)
        };
        let mut best = (f64::INFINITY, vec![0.0; n]);
        // starts: all in A, and the α-part pushed entirely into a face
        let (_, a) = self.split(y);
        let mut face = Vector::zeros(n);
        face[n - 2] = a.0;
        face[n - 1] = a.1;
        let m = self.inner.dim / 2;
        for k in 0..m {
            let c = cmul((a.0 / 2.0, a.1 / 2.0), (self.x0[2 * k], self.x0[2 * k + 1]));
            face[2 * k] = c.0;
            face[2 * k + 1] = c.1;
        }
        for start in [Vector::zeros(n), face.clone(), face * 0.9] {
            let (c, v) = optimize::nelder_mead_restarts(f, start.as_slice(), 0.05 * y.amax(), 1e-15, 20_000, 6);
            if v < best.0 {
                best = (v, c);
            }
        }
        let _ = best.1;
        Ok(best.0)
    }

    /// Support function of the unit ball at u.
    pub fn support(&self, u: &Vector) -> Result<f64> {
        let (ux, ua) = self.split(u);
        let ha = self.inner.dual(&ux)? + ua.0.hypot(ua.1);
        // dual of p = scale·(p_raw + inner) by ratio maximization
        let pd = self.p_dual(&ux)?;
        let m = self.inner.dim / 2;
        // c = Σ conj(u_k) x0_k + 2 conj(u_α); the rotated faces contribute |c|
        let mut re = 2.0 * ua.0;
        let mut im = -2.0 * ua.1;
        for k in 0..m {
            re += ux[2 * k] * self.x0[2 * k] + ux[2 * k + 1] * self.x0[2 * k + 1];
            im += ux[2 * k] * self.x0[2 * k + 1] - ux[2 * k + 1] * self.x0[2 * k];
        }
        Ok(ha.max(pd + re.hypot(im)))
    }

    fn p_dual(&self, u: &Vector) -> Result<f64> {
        let n = u.len();
        let f = |c: &[f64]| {
            let x = Vector::from_column_slice(c);
            match self.p(&x) {
                Ok(v) if v > 0.0 => -u.dot(&x) / v,
                _ => f64::INFINITY,
            }
        };
        let (_, v) = optimize::nelder_mead_restarts(f, u.as_slice(), 0.2 * u.amax().max(1e-3), 1e-15, 4000 * n, 4);
        Ok(-v)
    }

    /// Lower bound sup_u ⟨u,y⟩ / h(u) by multistart search.
    pub fn dual_bound(&self, y: &Vector, starts: usize, seed: u64) -> Result<f64> {
        let n = self.dim();
        let mut r = linalg::rng(seed);
        let mut best = 0.0f64;
        let f = |c: &[f64]| {
            let u = Vector::from_column_slice(c);
            match self.support(&u) {
                Ok(h) if h > 0.0 => -u.dot(y) / h,
                _ => f64::INFINITY,
            }
        };
        for s in 0..starts {
            let u0 = if s == 0 { y.clone() } else { linalg::unit_gaussian(&mut r, n) };
            let (_, v, _) = optimize::nelder_mead(f, u0.as_slice(), 0.3, 1e-14, 3000);
            best = best.max(-v);
        }
        Ok(best)
    }
}
