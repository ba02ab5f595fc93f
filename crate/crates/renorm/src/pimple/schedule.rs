//! Computable parameter schedules replacing the implicit constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::FiniteMatrixGroup;
use crate::linalg::Vector;
use crate::norm::NormObject;

use super::{audit, validate_parts, PimpleSpec};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    /// Every cone stays inside B(g x_k, δ_k) and the width chain
    /// λ_{k-1}^{-1} − 1 > 2 b_k ≥ 2·width_k is enforced by measurement.
    Strict,
    /// Tips are made to protrude: λ_k is placed a `safety` fraction of the way
    /// from λ_{k-1} to the largest value at which x_k/λ_k still leaves the
    /// hull of the earlier pimples.
    Desk,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    pub mode: ScheduleMode,
    /// Lower bound m for every λ_k.
    pub m: f64,
    pub safety: f64,
    /// Cap δ on δ_0.
    pub delta: f64,
    /// First λ in desk mode.
    pub lambda0: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig { mode: ScheduleMode::Desk, m: 0.5, safety: 0.5, delta: 1.0, lambda0: 0.7 }
    }
}

/// Extra desk attempts, each halfway closer to λ = 1 and with half the safety.
pub const DESK_RETRIES: usize = 4;

fn desk_chain(base: &NormObject, group: &FiniteMatrixGroup, points: &[Vector], l0: f64, s: f64) -> Result<Vec<f64>> {
    let mut lambdas = vec![l0];
    for k in 1..points.len() {
        let sub = PimpleSpec::new(base.clone(), group.clone(), points[..k].to_vec(), lambdas.clone());
        let gamma = sub.eval(&points[k])?;
        let prev = lambdas[k - 1];
        if gamma <= prev + 1e-6 {
            return Err(Error::Schedule { k, msg: format!("x_{k} cannot protrude with λ above {prev} (hull value {gamma})") });
        }
        lambdas.push(prev + s * (gamma - prev));
    }
    Ok(lambdas)
}

pub fn schedule_parameters(base: &NormObject, group: &FiniteMatrixGroup, points: &[Vector], cfg: &ScheduleConfig) -> Result<PimpleSpec> {
    if points.is_empty() {
        return Err(Error::Schedule { k: 0, msg: "empty point list".into() });
    }
    if !(cfg.safety > 0.0 && cfg.safety < 1.0) {
        return Err(Error::arg("safety must lie in (0,1)"));
    }
    let rep = validate_parts(base, group, points, None)?;
    if let Some(h) = rep.hypotheses.iter().find(|h| !h.pass) {
        return Err(Error::Spec(format!("hypothesis {} fails: {}", h.name, h.detail)));
    }
    let s = cfg.safety;
    let c = &rep.separation;
    let epsilons: Vec<f64> = c.iter().map(|c| c / 2.0).collect();
    let mut deltas = Vec::new();
    for (k, (&ck, &lk)) in c.iter().zip(&rep.lur_estimate).enumerate() {
        if lk >= 1.0 {
            return Err(Error::Schedule { k, msg: format!("LUR estimate {lk} is not below 1") });
        }
        let own = s * (ck / 4.0).min(1.0 - lk);
        deltas.push(if k == 0 { own.min(s * cfg.delta) } else { own.min(deltas[k - 1]) });
    }
    let floor = cfg.m.max(0.5);
    let mut lambdas: Vec<f64> = Vec::new();
    let mut widths: Vec<f64> = Vec::new();
    match cfg.mode {
        ScheduleMode::Strict => {
            let mut measured = Vec::new();
            for k in 0..points.len() {
                let lo = if k == 0 { floor } else { lambdas[k - 1] };
                let mut lam = audit::min_lambda_for_radius(base, &points[k], deltas[k])?.max(lo + 1e-12);
                let single = |l: f64| -> Result<f64> {
                    let sp = PimpleSpec::new(base.clone(), group.clone(), vec![points[k].clone()], vec![l]);
                    Ok(audit::facet_widths(&sp, 0)?.max)
                };
                if k > 0 {
                    let cap = s * (1.0 / lambdas[k - 1] - 1.0) / 2.0;
                    if single(lam)? > cap {
                        let (mut a, mut b) = (lam, 1.0f64);
                        for _ in 0..200 {
                            let mid = 0.5 * (a + b);
                            if mid <= a || mid >= b {
                                break;
                            }
                            if single(mid)? > cap {
                                a = mid;
                            } else {
                                b = mid;
                            }
                        }
                        lam = b;
                    }
                }
                if lam >= 1.0 - 1e-15 || (k > 0 && lam <= lambdas[k - 1]) {
                    return Err(Error::Schedule { k, msg: "width chain is infeasible in double precision".into() });
                }
                measured.push(single(lam)?);
                lambdas.push(lam);
            }
            for k in 0..points.len() {
                let b = if k == 0 { measured[0] / s } else { 0.5 * (measured[k] + (1.0 / lambdas[k - 1] - 1.0) / 2.0) };
                widths.push(b);
            }
        }
        ScheduleMode::Desk => {
            let l0 = cfg.lambda0.max(floor + 1e-9);
            if l0 >= 1.0 {
                return Err(Error::Schedule { k: 0, msg: "lambda0 must be below 1".into() });
            }
            // clustered families can starve late points of room; retry with
            // smaller pimples and slower growth before giving up
            let mut attempt = (l0, s);
            let mut last = None;
            for _ in 0..=DESK_RETRIES {
                match desk_chain(base, group, points, attempt.0, attempt.1) {
                    Ok(l) => {
                        lambdas = l;
                        break;
                    }
                    Err(e @ Error::Schedule { .. }) => {
                        last = Some(e);
                        attempt = (attempt.0 + (1.0 - attempt.0) / 2.0, attempt.1 / 2.0);
                    }
                    Err(e) => return Err(e),
                }
            }
            if lambdas.is_empty() {
                return Err(last.expect("at least one attempt"));
            }
            widths.push(1.0 / lambdas[0] - 1.0);
            for k in 1..points.len() {
                widths.push(attempt.1 * (1.0 / lambdas[k - 1] - 1.0) / 2.0);
            }
        }
    }
    let mut spec = PimpleSpec::new(base.clone(), group.clone(), points.to_vec(), lambdas);
    spec.widths = widths;
    spec.deltas = deltas;
    spec.epsilons = epsilons;

    // required in both modes: every tip on the unit sphere and isolated
    let tol = spec.tol.eval;
    for (k, x) in spec.points.iter().enumerate() {
        let v = spec.eval(x)?;
        if (v - spec.lambdas[k]).abs() > 10.0 * tol {
            return Err(Error::Schedule { k, msg: format!("tip not normalized: pimple(x_k) = {v}, λ_k = {}", spec.lambdas[k]) });
        }
    }
    for (k, p) in audit::tip_isolation(&spec)?.into_iter().enumerate() {
        if p <= 1e-9 {
            return Err(Error::Schedule { k, msg: format!("tip is not isolated (protrusion {p:.3e})") });
        }
    }
    if cfg.mode == ScheduleMode::Strict {
        let loc = audit::deviation_locality(&spec, 400, 0x4c0c)?;
        if loc.violations > 0 {
            return Err(Error::Schedule { k: 0, msg: format!("deviation locality fails on {} samples", loc.violations) });
        }
        for k in 0..spec.points.len() {
            let fw = audit::facet_widths(&spec, k)?;
            if !fw.pass {
                return Err(Error::Schedule {
                    k,
                    msg: format!("facet width {:?} outside [{}, {:?}]", (fw.min, fw.max), fw.lower_bound, fw.b),
                });
            }
        }
    }
    Ok(spec)
}
