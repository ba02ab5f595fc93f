//! Small derivative-free and one-dimensional optimizers.

/// Nelder-Mead minimization. Returns (argmin, min, evaluations).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], step: f64, ftol: f64, max_evals: usize) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i].abs() > 1e-12 { step * p[i].abs().max(1.0) } else { step };
        simplex.push(p);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let spread = (vals[n] - vals[0]).abs();
        let size =
            simplex[1..].iter().map(|p| p.iter().zip(&simplex[0]).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))).fold(0.0f64, f64::max);
        if spread <= ftol * (vals[0].abs() + 1e-300) && size < 1e-14_f64.max(ftol) {
            break;
        }
        if size < 1e-15 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let lerp = |t: f64, p: &[f64]| -> Vec<f64> { centroid.iter().zip(p).map(|(c, x)| c + t * (x - c)).collect() };
        let xr = lerp(-alpha, &simplex[n]);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = lerp(-gamma, &simplex[n]);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = lerp(-rho, &simplex[n]);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = lerp(rho, &simplex[n]);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for (x, b) in simplex[i].iter_mut().zip(&best) {
                        *x = b + sigma * (*x - b);
                    }
                    vals[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let (bi, bv) = vals.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    (simplex[bi].clone(), bv, evals)
}

/// Nelder-Mead with restarts from the incumbent until no further progress.
pub fn nelder_mead_restarts<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    ftol: f64,
    max_evals: usize,
    restarts: usize,
) -> (Vec<f64>, f64) {
    let (mut x, mut v, mut used) = nelder_mead(&mut f, x0, step, ftol, max_evals);
    let mut s = step;
    for _ in 0..restarts {
        if used >= max_evals * (restarts + 1) {
            break;
        }
        s *= 0.3;
        let (x2, v2, e) = nelder_mead(&mut f, &x, s.max(1e-9), ftol, max_evals);
        used += e;
        let improved = v2 < v - ftol * v.abs().max(1e-300);
        if v2 < v {
            x = x2;
            v = v2;
        }
        if !improved && s < 1e-6 {
            break;
        }
    }
    (x, v)
}

/// Golden-section search for a unimodal function on [a, b].
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for the root of an increasing function with f(lo) < 0 < f(hi).
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
