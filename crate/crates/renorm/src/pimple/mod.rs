//! Λ,G-pimple norms: the gauge of conv(B ∪ {±g x_k / λ_k}).

mod audit;
mod oracle;
mod schedule;
mod solve;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::isometry::FiniteMatrixGroup;
use crate::linalg::{self, serde_vecs, Vector};
use crate::norm::{self, NormObject};

pub use audit::{deviation_locality, deviation_radius, facet_widths, tip_isolation, FacetWidth, LocalityReport};
pub use oracle::PolygonOracle;
pub use schedule::{schedule_parameters, ScheduleConfig, ScheduleMode};
pub use solve::PimpleEval;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PimpleSpec {
    pub base: NormObject,
    pub group: FiniteMatrixGroup,
    #[serde(with = "serde_vecs")]
    pub points: Vec<Vector>,
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub widths: Vec<f64>,
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub tol: Tolerances,
    #[serde(skip)]
    prepared: OnceLock<Prepared>,
}

/// One signed coefficient per orbit line: directions d = g x_k up to sign.
#[derive(Clone, Debug)]
pub(crate) struct Prepared {
    pub dirs: Vec<Vector>,
    pub lams: Vec<f64>,
    pub point_of: Vec<usize>,
}

impl PimpleSpec {
    /// Spec with the given λ_k; ε_k = c_k/2 and no width/δ schedule.
    pub fn new(base: NormObject, group: FiniteMatrixGroup, points: Vec<Vector>, lambdas: Vec<f64>) -> Self {
        PimpleSpec {
            base,
            group,
            points,
            lambdas,
            widths: Vec::new(),
            deltas: Vec::new(),
            epsilons: Vec::new(),
            tol: Tolerances::default(),
            prepared: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub(crate) fn prepared(&self) -> &Prepared {
        self.prepared.get_or_init(|| {
            let mut dirs: Vec<Vector> = Vec::new();
            let mut lams = Vec::new();
            let mut point_of = Vec::new();
            for (k, (x, &lam)) in self.points.iter().zip(&self.lambdas).enumerate() {
                for g in &self.group.elements {
                    let d = g * x;
                    let hit = dirs.iter().position(|e| (e - &d).amax() < 1e-10 || (e + &d).amax() < 1e-10);
                    match hit {
                        Some(i) if lam < lams[i] => {
                            lams[i] = lam;
                            point_of[i] = k;
                        }
                        Some(_) => {}
                        None => {
                            dirs.push(d);
                            lams.push(lam);
                            point_of.push(k);
                        }
                    }
                }
            }
            Prepared { dirs, lams, point_of }
        })
    }

    /// The isolated extreme points g·x_k/λ_k, de-duplicated within 1e-10.
    pub fn tips(&self) -> Vec<Vector> {
        let p = self.prepared();
        let mut out = Vec::new();
        for (d, l) in p.dirs.iter().zip(&p.lams) {
            out.push(d / *l);
            out.push(-d / *l);
        }
        out
    }

    /// Index of the generating point for each entry of `tips()`.
    pub fn tip_points(&self) -> Vec<usize> {
        self.prepared().point_of.iter().flat_map(|&k| [k, k]).collect()
    }

    pub fn eval(&self, y: &Vector) -> Result<f64> {
        Ok(self.evaluate(y)?.value)
    }

    /// Primal value with its certifying dual vector.
    pub fn evaluate(&self, y: &Vector) -> Result<PimpleEval> {
        linalg::check_dim(self.dim(), y)?;
        solve::evaluate(self, y, self.tol.eval)
    }

    /// Support function of the pimpled ball.
    pub fn support(&self, u: &Vector) -> Result<f64> {
        let p = self.prepared();
        let mut h = self.base.dual(u)?;
        for (d, l) in p.dirs.iter().zip(&p.lams) {
            h = h.max(u.dot(d).abs() / l);
        }
        Ok(h)
    }

    /// Independent dual route: multistart maximization of ⟨u,y⟩/h_W(u).
    pub fn dual_bound(&self, y: &Vector, starts: usize, seed: u64) -> Result<f64> {
        solve::dual_multistart(self, y, starts, seed)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    /// c_k = min over (j,g) ≠ (k,Id) of base(x_j − g x_k).
    pub separation: Vec<f64>,
    /// (j, group index) attaining c_k.
    pub separation_witness: Vec<(usize, usize)>,
    pub lur_estimate: Vec<f64>,
    /// Smallest λ whose single cone at x_k stays within base distance c_k/4.
    pub min_lambda_candidate: Vec<f64>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub pass: bool,
}

/// Checks that the base is G-invariant on sampled vectors; errors with a witness.
pub fn check_invariance(base: &NormObject, group: &FiniteMatrixGroup, samples: usize, seed: u64) -> Result<()> {
    let mut r = linalg::rng(seed);
    for _ in 0..samples {
        let x = linalg::gaussian(&mut r, base.dim);
        let fx = base.eval(&x)?;
        for (i, g) in group.elements.iter().enumerate() {
            let fg = base.eval(&(g * &x))?;
            if (fg - fx).abs() > 1e-9 * fx {
                return Err(Error::Spec(format!(
                    "base norm not invariant under group element {i}: witness x = {:?} ({fx} vs {fg})",
                    x.as_slice()
                )));
            }
        }
    }
    Ok(())
}

/// Separation constants c_k with witnesses.
pub fn separation_constants(base: &NormObject, group: &FiniteMatrixGroup, points: &[Vector]) -> Result<Vec<(f64, usize, usize)>> {
    let mut out = Vec::new();
    for (k, xk) in points.iter().enumerate() {
        let mut best = (f64::INFINITY, 0, 0);
        for (j, xj) in points.iter().enumerate() {
            for (gi, g) in group.elements.iter().enumerate() {
                if j == k && gi == group.identity {
                    continue;
                }
                let d = base.eval(&(xj - g * xk))?;
                if d < best.0 {
                    best = (d, j, gi);
                }
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Strict convexity probe: midpoints of sampled unit pairs at distance ≥ 0.1.
pub fn strict_convexity_probe(base: &NormObject, samples: usize, seed: u64) -> Result<f64> {
    let mut r = linalg::rng(seed);
    let mut worst = 0.0f64;
    let mut taken = 0;
    while taken < samples {
        let a = linalg::gaussian(&mut r, base.dim);
        let b = linalg::gaussian(&mut r, base.dim);
        let a = &a / base.eval(&a)?;
        let b = &b / base.eval(&b)?;
        if base.eval(&(&a - &b))? < 0.1 {
            continue;
        }
        taken += 1;
        worst = worst.max(base.eval(&((&a + &b) * 0.5))?);
    }
    Ok(worst)
}

pub fn validate_spec(spec: &PimpleSpec) -> Result<ValidationReport> {
    validate_parts(&spec.base, &spec.group, &spec.points, Some(&spec.lambdas))
}

pub(crate) fn validate_parts(
    base: &NormObject,
    group: &FiniteMatrixGroup,
    points: &[Vector],
    lambdas: Option<&[f64]>,
) -> Result<ValidationReport> {
    if !group.contains_minus_id {
        return Err(Error::Spec("group does not contain −Id".into()));
    }
    if group.dim() != base.dim {
        return Err(Error::Spec("group and base dimensions differ".into()));
    }
    check_invariance(base, group, 24, 0x1a7)?;
    let mut hyp = Vec::new();
    let mut unit_ok = true;
    for (k, x) in points.iter().enumerate() {
        let v = base.eval(x)?;
        if (v - 1.0).abs() > 1e-10 {
            unit_ok = false;
            hyp.push(HypothesisCheck { name: "unit points".into(), pass: false, detail: format!("x_{k} has base norm {v}") });
        }
    }
    if unit_ok {
        hyp.push(HypothesisCheck { name: "unit points".into(), pass: true, detail: String::new() });
    }
    if let Some(l) = lambdas {
        let bad: Vec<_> = l.iter().enumerate().filter(|(_, &v)| !(v > 0.5 && v < 1.0)).collect();
        hyp.push(HypothesisCheck {
            name: "1/2 < λ_k < 1".into(),
            pass: bad.is_empty() && l.len() == points.len(),
            detail: if l.len() != points.len() { "one λ per point required".into() } else { format!("{bad:?}") },
        });
    }
    let sep = separation_constants(base, group, points)?;
    let tol = 1e-10;
    let mut lur = Vec::new();
    let mut minlam = Vec::new();
    for (k, &(c, j, gi)) in sep.iter().enumerate() {
        hyp.push(HypothesisCheck {
            name: format!("separation c_{k} > 0"),
            pass: c > tol,
            detail: format!("c_{k} = {c:.6e} attained at (j={j}, g={gi})"),
        });
        let est = if c > tol && unit_ok { norm::lur_modulus(base, &points[k], c.min(2.0), 360)? } else { 1.0 };
        hyp.push(HypothesisCheck {
            name: format!("LUR at x_{k}"),
            pass: est < 1.0 - 1e-12,
            detail: format!("λ(x_{k}, c_{k}) ≈ {est:.9}"),
        });
        lur.push(est);
        minlam.push(if c > tol && unit_ok { audit::min_lambda_for_radius(base, &points[k], c / 4.0)? } else { f64::NAN });
    }
    let sc = strict_convexity_probe(base, 200, 0x5c)?;
    hyp.push(HypothesisCheck {
        name: "strict convexity".into(),
        pass: sc < 1.0 - 1e-12,
        detail: format!("max sampled midpoint norm {sc:.12}"),
    });
    let pass = hyp.iter().all(|h| h.pass);
    Ok(ValidationReport {
        separation: sep.iter().map(|s| s.0).collect(),
        separation_witness: sep.iter().map(|s| (s.1, s.2)).collect(),
        lur_estimate: lur,
        min_lambda_candidate: minlam,
        hypotheses: hyp,
        pass,
    })
}
