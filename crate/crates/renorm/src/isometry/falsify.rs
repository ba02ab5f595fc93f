//! Multistart Levenberg-Marquardt search for isometries outside a known set.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, serde_rows, Matrix, Vector};
use crate::norm::NormObject;

use super::FiniteMatrixGroup;

/// The set of isometries already accounted for.
#[derive(Clone, Debug)]
pub enum KnownSet {
    Finite(FiniteMatrixGroup),
    /// The circle {cos θ I + sin θ J}.
    Circle(Matrix),
}

impl KnownSet {
    /// Max-entry distance from `t` to the set.
    pub fn distance(&self, t: &Matrix) -> f64 {
        match self {
            KnownSet::Finite(g) => g.elements.iter().map(|e| linalg::max_abs_diff(e, t)).fold(f64::INFINITY, f64::min),
            KnownSet::Circle(j) => {
                // best θ by least squares in the Frobenius inner product, then refine in max-norm
                let n = t.nrows() as f64;
                let a = t.trace() / n;
                let b = (j.transpose() * t).trace() / n;
                let th = b.atan2(a);
                let id = Matrix::identity(t.nrows(), t.ncols());
                let at = |th: f64| linalg::max_abs_diff(&(&id * th.cos() + j * th.sin()), t);
                let (_, v) = crate::optimize::golden_min(at, th - 0.3, th + 0.3, 1e-12);
                v.min(at(th))
            }
        }
    }

    fn sample(&self, r: &mut linalg::Rng64) -> Matrix {
        use rand::Rng;
        match self {
            KnownSet::Finite(g) => g.elements[r.random_range(0..g.order())].clone(),
            KnownSet::Circle(j) => {
                let th: f64 = r.random_range(0.0..std::f64::consts::TAU);
                Matrix::identity(j.nrows(), j.ncols()) * th.cos() + j * th.sin()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FalsifyConfig {
    pub starts: usize,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        FalsifyConfig { starts: 200, steps: 40, samples: 64, seed: 7 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FalsifierReport {
    pub starts: usize,
    pub steps: usize,
    pub samples: usize,
    /// Starts that ended within 1e-3 of the known set.
    pub converged_to_known: usize,
    /// Starts abandoned after a singular iterate or solver failure.
    pub aborted: usize,
    /// Smallest RMS sphere discrepancy among final maps farther than 1e-3 from
    /// the known set; `None` when every start collapsed onto it.
    pub best_intruder_residual: Option<f64>,
    #[serde(with = "serde_rows::option")]
    pub best_intruder: Option<Matrix>,
    pub best_intruder_distance: Option<f64>,
}

impl FalsifierReport {
    /// The report supports exactness of the known set at `threshold`.
    pub fn supports_exactness(&self, threshold: f64) -> bool {
        self.best_intruder_residual.is_none_or(|r| r > threshold)
    }
}

/// Residuals eval(T x_s) − 1 and the gradients of eval at T x_s.
fn residuals(norm: &NormObject, t: &Matrix, xs: &[Vector]) -> Result<(Vec<f64>, Vec<Vector>)> {
    let mut r = Vec::with_capacity(xs.len());
    let mut g = Vec::with_capacity(xs.len());
    for x in xs {
        let (v, d) = norm.value_and_gradient(&(t * x))?;
        r.push(v - 1.0);
        g.push(d);
    }
    Ok((r, g))
}

fn rms(r: &[f64]) -> f64 {
    (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
}

/// Rescales `t` so the mean of eval(T x_s) is one.
fn reproject(norm: &NormObject, t: &Matrix, xs: &[Vector]) -> Result<Matrix> {
    let mut s = 0.0;
    for x in xs {
        s += norm.eval(&(t * x))?;
    }
    Ok(t / (s / xs.len() as f64))
}

fn local_search(norm: &NormObject, t0: Matrix, xs: &[Vector], steps: usize) -> Result<Option<(Matrix, f64)>> {
    let n = t0.nrows();
    let mut t = reproject(norm, &t0, xs)?;
    let (mut r, mut grads) = residuals(norm, &t, xs)?;
    let mut cost = rms(&r);
    let mut mu = 1e-3;
    for _ in 0..steps {
        if cost < 1e-12 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(xs.len(), n * n);
        for (s, (x, g)) in xs.iter().zip(&grads).enumerate() {
            for i in 0..n {
                for j in 0..n {
                    jac[(s, i * n + j)] = g[i] * x[j];
                }
            }
        }
        let jtj = jac.transpose() * &jac;
        let rv = DMatrix::from_column_slice(r.len(), 1, &r);
        let jtr = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..8 {
            let mut a = jtj.clone();
            for d in 0..n * n {
                a[(d, d)] += mu * (jtj[(d, d)] + 1e-9);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&jtr)) else {
                mu *= 4.0;
                continue;
            };
            let mut cand = t.clone();
            for i in 0..n {
                for j in 0..n {
                    cand[(i, j)] -= delta[(i * n + j, 0)];
                }
            }
            if linalg::rcond(&cand) < 1e-6 {
                return Ok(None);
            }
            let (rc, gc) = residuals(norm, &cand, xs)?;
            let c = rms(&rc);
            if c < cost {
                t = cand;
                r = rc;
                grads = gc;
                let improvement = cost - c;
                cost = c;
                mu = (mu / 3.0).max(1e-12);
                improved = improvement > 1e-14;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Ok(Some((t, cost)))
}

/// Searches for linear maps T with eval(Tx) = eval(x) on the sampled sphere that
/// are not in `known`.
pub fn falsify_search(norm: &NormObject, known: &KnownSet, cfg: &FalsifyConfig) -> Result<FalsifierReport> {
    let n = norm.dim;
    let mut rng = linalg::rng(cfg.seed);
    let mut xs = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let x = linalg::gaussian(&mut rng, n);
        let v = norm.eval(&x)?;
        xs.push(x / v);
    }
    let mut rep = FalsifierReport {
        starts: cfg.starts,
        steps: cfg.steps,
        samples: cfg.samples,
        converged_to_known: 0,
        aborted: 0,
        best_intruder_residual: None,
        best_intruder: None,
        best_intruder_distance: None,
    };
    for s in 0..cfg.starts {
        let t0 = match s % 3 {
            0 => linalg::random_orthogonal(&mut rng, n),
            1 => linalg::random_signed_permutation(&mut rng, n) + linalg::gaussian_matrix(&mut rng, n) * 0.1,
            _ => known.sample(&mut rng) + linalg::gaussian_matrix(&mut rng, n) * 0.2,
        };
        match local_search(norm, t0, &xs, cfg.steps) {
            Ok(Some((t, res))) => {
                let d = known.distance(&t);
                if d <= 1e-3 {
                    rep.converged_to_known += 1;
                } else if rep.best_intruder_residual.is_none_or(|b| res < b) {
                    rep.best_intruder_residual = Some(res);
                    rep.best_intruder = Some(t);
                    rep.best_intruder_distance = Some(d);
                }
            }
            Ok(None) | Err(_) => rep.aborted += 1,
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_has_intruders() {
        let e = NormObject::euclidean(2);
        let known = KnownSet::Finite(FiniteMatrixGroup::plus_minus_id(2));
        let cfg = FalsifyConfig { starts: 6, steps: 30, samples: 32, seed: 1 };
        let r = falsify_search(&e, &known, &cfg).unwrap();
        assert!(r.best_intruder_residual.unwrap() < 1e-8);
    }

    #[test]
    fn circle_distance() {
        let j = linalg::rotation2(std::f64::consts::FRAC_PI_2);
        let k = KnownSet::Circle(j);
        assert!(k.distance(&linalg::rotation2(0.7)) < 1e-9);
        assert!(k.distance(&linalg::matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])) > 0.5);
    }
}
