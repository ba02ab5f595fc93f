//! Acceptance suite. One line per criterion; exits non-zero if any fails.
//!
//! Run with `cargo test --release -p renorm --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use renorm::cli_io::{ConstructionInput, RunManifest};
use renorm::complex::{canonical_residual, complex_structures, complexify_norm, kalton_projections, l2_canonical_form, standard_j};
use renorm::isometry::{group_closure, verify_isometry, FalsifyConfig, FiniteMatrixGroup};
use renorm::jarosz::{self, c2_point, C2NormSpec};
use renorm::linalg::{self, Matrix};
use renorm::norm::{day_norm, NormObject};
use renorm::pimple::{PimpleSpec, PolygonOracle};
use renorm::pipeline::{recover_group, represent, BaseChoice, RepresentConfig};
use renorm::rep::{self, GroupTable};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(rel: &str) -> PathBuf {
    root().join("corpus").join(rel)
}

fn construction(name: &str) -> PimpleSpec {
    let path = corpus(&format!("constructions/{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    let inp: ConstructionInput = renorm::cli_io::parse_json(&text, name).unwrap();
    inp.build_spec().unwrap()
}

const CORPUS_SPECS: [&str; 6] = ["disk_single", "disk_pm", "disk_c4", "l3_weighted_pm", "euclid3_c6", "l4_q8"];

/// Tuple enumeration over every ordered selection of distinct indices, written
/// independently of the library: walks all permutations and takes every prefix.
fn day_oracle(x: &[f64]) -> f64 {
    let n = x.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = 0.0f64;
    let mut visit = |p: &[usize]| {
        let mut s = 0.0;
        let mut w = 1.0;
        for &i in p {
            w /= 4.0;
            s += w * x[i] * x[i];
            best = best.max(s);
        }
    };
    // Heap's algorithm
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best.sqrt()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = linalg::rng(0x1da7);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        for _ in 0..1000 {
            let x = linalg::gaussian(&mut rng, n);
            let fast = NormObject::day(n).eval(&x).unwrap();
            worst = worst.max((fast - day_oracle(x.as_slice())).abs());
            worst = worst.max((day_norm(x.as_slice()) - fast).abs());
        }
    }
    let el = t.elapsed();
    outcome(worst <= 1e-12 && el < Duration::from_secs(10), format!("max |fast - brute| = {worst:.2e} over dims 1..=6, {el:.2?}"))
}

fn criterion_2() -> Outcome {
    let v2 = jarosz::double_norm_build(2, 2).unwrap();
    let v1 = jarosz::double_norm_build(2, 1).unwrap();
    // coordinates (Re x_0, Im x_0, Re x_1, Im x_1)
    let cases = [
        (&v2, [2.0, 0.0, 1.0, 0.0], 5.0, "|2e0+e1|_2"),
        (&v2, [1.0, 0.0, 1.0, 0.0], 3.0, "|e0+e1|_2"),
        (&v1, [1.0, 0.0, 0.0, 1.0], 5f64.sqrt(), "|e0+ie1|_1"),
        (&v1, [1.0, 0.0, 0.0, -1.0], 2.5, "|e0-ie1|_1"),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (norm, x, want, name) in cases {
        let got = norm.eval(&linalg::vector(&x)).unwrap();
        worst = worst.max((got - want).abs());
        parts.push(format!("{name}={got:.15}"));
    }
    outcome(worst <= 1e-12, format!("{} (max err {worst:.1e})", parts.join(", ")))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let spec = C2NormSpec::default();
    let norm = jarosz::c2_norm_build(&spec).unwrap();
    let mut worst = 0.0f64;
    for s in 0..64 {
        let th = std::f64::consts::TAU * s as f64 / 64.0;
        let e = (th.cos(), th.sin());
        worst = worst.max((norm.eval(&c2_point(e, (0.0, 0.0))).unwrap() - 1.0).abs());
        for &(a, b) in &spec.lambdas {
            // −conj(λ)·e^{iθ}
            let y = (-(a * e.0 + b * e.1), -(a * e.1 - b * e.0));
            worst = worst.max((norm.eval(&c2_point(e, y)).unwrap() - 2.0).abs());
        }
    }
    let forms = jarosz::reject_candidate_forms(&spec).unwrap();
    let witnessed = forms.iter().all(|f| {
        let t = f.form.matrix(f.phase);
        let a = norm.eval(&f.witness).unwrap();
        f.rejected && (norm.eval(&(t * &f.witness)).unwrap() - a).abs() > jarosz::REJECT_MARGIN * a
    });
    let fals = jarosz::c2_falsify(&spec, &FalsifyConfig::default()).unwrap();
    let el = t.elapsed();
    let pass = worst <= 1e-10 && witnessed && fals.supports_exactness(1e-4) && el < Duration::from_secs(300);
    let devs: Vec<String> = forms.iter().map(|f| format!("{:.2e}", f.min_deviation)).collect();
    outcome(
        pass,
        format!(
            "identity err {worst:.1e}; forms 2-4 min deviation [{}]; falsifier best intruder {:?} ({} starts); {el:.2?}",
            devs.join(", "),
            fals.best_intruder_residual,
            fals.starts
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in CORPUS_SPECS {
        let spec = construction(name);
        let tol = spec.tol.eval;
        let m = spec.lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut rng = linalg::rng(0x5a4d);
        let (mut sandwich, mut gap) = (0.0f64, 0.0f64);
        let oracle = (spec.dim() == 2).then(|| PolygonOracle::new(&spec, 65536).unwrap());
        let mut poly = 0.0f64;
        for _ in 0..1000 {
            let v = linalg::gaussian(&mut rng, spec.dim());
            let y = &v / spec.base.eval(&v).unwrap();
            let ev = spec.evaluate(&y).unwrap();
            sandwich = sandwich.max(m - ev.value).max(ev.value - 1.0);
            gap = gap.max(ev.value - ev.lower);
            if let Some(o) = &oracle {
                poly = poly.max((ev.value - o.gauge(&y).unwrap()).abs());
            }
        }
        let tips = spec.points.iter().zip(&spec.lambdas).map(|(x, l)| (spec.eval(x).unwrap() - l).abs()).fold(0.0, f64::max);
        let ok = sandwich <= 10.0 * tol && tips <= 10.0 * tol && gap <= 10.0 * tol && poly <= 1e-6;
        pass &= ok;
        let poly = if oracle.is_some() { format!(" polygon {poly:.1e}") } else { String::new() };
        parts.push(format!("{name}[sandwich {sandwich:.1e} tips {tips:.1e} gap {gap:.1e}{poly}]"));
    }
    outcome(pass, parts.join(" "))
}

struct GroupCase {
    label: &'static str,
    order: usize,
    isomorphic: bool,
    residual: Option<f64>,
    exact: bool,
}

fn collapse_case(label: &'static str, spec: &PimpleSpec, target: &GroupTable, expect: Option<&FiniteMatrixGroup>) -> GroupCase {
    let r = recover_group(spec, target, &FalsifyConfig::default()).unwrap();
    let found = FiniteMatrixGroup::from_elements(r.elements.clone()).unwrap();
    let exact = match expect {
        Some(g) => g.order() == found.order() && g.elements.iter().all(|e| found.distance(e) < 1e-7),
        None => true,
    };
    GroupCase {
        label,
        order: r.order,
        isomorphic: r.isomorphic_to_target,
        residual: r.falsifier.best_intruder_residual,
        exact: exact && r.falsifier.supports_exactness(1e-4),
    }
}

fn criterion_5(q8: &renorm::pipeline::RepresentReport, q8_time: Duration) -> (Outcome, FiniteMatrixGroup) {
    let t = Instant::now();
    let single = construction("disk_single");
    let refl = group_closure(&[linalg::matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]), linalg::matrix(2, 2, &[-1.0, 0.0, 0.0, 1.0])], 8).unwrap();
    let a = collapse_case("(a) single pair", &single, &GroupTable::klein4(), Some(&refl));
    let b = collapse_case("(b) {+-Id}", &construction("disk_pm"), &GroupTable::cyclic(2), Some(&FiniteMatrixGroup::plus_minus_id(2)));
    let c4_spec = construction("disk_c4");
    let c = collapse_case("(c) C4", &c4_spec, &GroupTable::cyclic(4), Some(&FiniteMatrixGroup::rotations(4)));
    let d = GroupCase {
        label: "(d) Q8 on R4, l4",
        order: q8.isometries.order,
        isomorphic: q8.isometries.isomorphic_to_target,
        residual: q8.isometries.falsifier.best_intruder_residual,
        exact: q8.isometries.contains_given_group && q8.isometries.falsifier.supports_exactness(1e-4),
    };
    let el = t.elapsed() + q8_time;
    let mut pass = el < Duration::from_secs(600);
    let mut parts = Vec::new();
    for (case, want) in [(&a, 4), (&b, 2), (&c, 4), (&d, 8)] {
        pass &= case.order == want && case.isomorphic && case.exact;
        parts.push(format!("{} order {} iso {} residual {:?}", case.label, case.order, case.isomorphic, case.residual));
    }
    let c4_found = FiniteMatrixGroup::from_elements(
        recover_group(&c4_spec, &GroupTable::cyclic(4), &FalsifyConfig { starts: 0, ..Default::default() }).unwrap().elements,
    )
    .unwrap();
    (outcome(pass, format!("{}; {el:.2?}", parts.join("; "))), c4_found)
}

fn corpus_groups() -> Vec<GroupTable> {
    let mut v: Vec<GroupTable> = [1, 2, 3, 4, 5, 6, 8, 12, 16].iter().map(|&n| GroupTable::cyclic(n)).collect();
    v.push(GroupTable::klein4());
    v.push(GroupTable::dihedral(3));
    v.push(GroupTable::dihedral(4));
    v.push(GroupTable::quaternion8());
    v.push(GroupTable::preset("z2xz4").unwrap());
    v
}

fn cli(args: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_renorm")).args(args).output().unwrap();
    (out.status.success(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn criterion_6(q8: &renorm::pipeline::RepresentReport) -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut involutions = 0;
    for g in corpus_groups() {
        let fini = rep::fini_rep(&g, 0);
        let ft = rep::fini_table(&g);
        worst = worst.max(rep::homomorphism_defect(&ft, &fini));
        let n = fini[0].nrows();
        // the pair (identity, −1) sits at index 1
        pass &= fini[1] == -Matrix::identity(n, n);
        for j in rep::central_involutions(&g) {
            let split = rep::coset_split(&g, j).unwrap();
            let ims = rep::classical_rep(&g, &split);
            worst = worst.max(rep::homomorphism_defect(&g, &ims));
            let d = ims[0].nrows();
            pass &= ims[j] == -Matrix::identity(d, d);
            involutions += 1;
        }
    }
    pass &= worst == 0.0;
    let mut reports = Vec::new();
    for (group, dim, order) in [("cyclic4", "2", 4usize), ("quaternion8", "4", 8)] {
        let (ok, text) = cli(&["represent", group, "--dim", dim]);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
        let iso = &v["isometries"];
        let good = ok && iso["isomorphic_to_target"] == true && iso["order"] == order && iso["target"] == group;
        pass &= good;
        reports.push(format!("represent {group} --dim {dim}: order {} iso {}", iso["order"], iso["isomorphic_to_target"]));
    }
    pass &= q8.homomorphism_defect == 0.0;
    outcome(
        pass,
        format!(
            "defect {worst} over {} groups ({involutions} central involutions, T_j = -Id); {}",
            corpus_groups().len(),
            reports.join("; ")
        ),
    )
}

fn criterion_7(c4_found: &FiniteMatrixGroup) -> Outcome {
    let r = complex_structures(c4_found).unwrap();
    let first = r.roots.len() == 2 && r.classes.len() == 2;
    let base = NormObject::lp(2, 3.0);
    let (norm, j, c) = complexify_norm(&base);
    let g = group_closure(&[j.clone(), c.clone()], 64).unwrap();
    let isos = g.elements.iter().all(|e| verify_isometry(e, &norm, 200, 1e-12, 3).unwrap().ok);
    let s = complex_structures(&g).unwrap();
    let minus_j = -&j;
    let pm = s.matrices.len() == 2
        && s.matrices.iter().all(|m| linalg::max_abs_diff(m, &j) < 1e-12 || linalg::max_abs_diff(m, &minus_j) < 1e-12);
    let conj = linalg::max_abs_diff(&(&c * &j * c.try_inverse().unwrap()), &minus_j) < 1e-12;
    let second = pm && s.classes.len() == 1 && conj && isos;
    outcome(
        first && second,
        format!(
            "C4 norm: {} roots in {} classes; complexified l3 square: {} roots (+-J {pm}) in {} class, cJc^-1 = -J {conj}, closure elements are isometries {isos}",
            r.roots.len(),
            r.classes.len(),
            s.roots.len(),
            s.classes.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let mut rng = linalg::rng(0x12);
    let mut worst = 0.0f64;
    for n in (2..=10).step_by(2) {
        for _ in 0..100 {
            let q = linalg::random_orthogonal(&mut rng, n);
            let a = &q * standard_j(n) * q.transpose();
            let u = l2_canonical_form(&a).unwrap();
            let (orth, block) = canonical_residual(&a, &u);
            worst = worst.max(orth).max(block);
        }
    }
    let el = t.elapsed();
    outcome(worst <= 1e-10 && el < Duration::from_secs(10), format!("max block residual {worst:.2e} over 500 instances; {el:.2?}"))
}

/// Commuting structures A, B built blockwise on 2-planes and conjugated by a
/// signed permutation, so every entry is exact.
fn block_pair(rng: &mut linalg::Rng64, n: usize) -> (Matrix, Matrix) {
    use rand::Rng;
    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, n);
    for k in 0..n / 2 {
        let (i, j) = (2 * k, 2 * k + 1);
        let sa = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let sb = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        a[(i, j)] = -sa;
        a[(j, i)] = sa;
        b[(i, j)] = -sb;
        b[(j, i)] = sb;
    }
    let p = linalg::random_signed_permutation(rng, n);
    (&p * a * p.transpose(), &p * b * p.transpose())
}

fn criterion_9() -> Outcome {
    let mut rng = linalg::rng(0x9a);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in (2..=10).step_by(2) {
        for _ in 0..20 {
            let (a, b) = block_pair(&mut rng, n);
            worst = worst.max(kalton_projections(&a, &b).unwrap().residuals.max());
            count += 1;
        }
    }
    outcome(worst <= 1e-12, format!("max identity residual {worst:.1e} over {count} block pairs"))
}

fn criterion_10() -> Outcome {
    let dir = corpus("manifests");
    let mut names: Vec<PathBuf> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    let mut pass = !names.is_empty();
    let mut diffs = Vec::new();
    for p in &names {
        RunManifest::load(p).unwrap();
        let p = p.to_str().unwrap();
        let (ok1, a) = cli(&["run", p]);
        let (ok2, b) = cli(&["run", p]);
        if !(ok1 && ok2 && a == b && !a.is_empty()) {
            pass = false;
            diffs.push(p.to_string());
        }
    }
    outcome(
        pass,
        format!(
            "{} manifests run twice, byte-identical: {}",
            names.len(),
            if diffs.is_empty() { "all".into() } else { format!("not {diffs:?}") }
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut report = |k: usize, o: Outcome| {
        println!("criterion {k:>2}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, o));
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    let t = Instant::now();
    let q8_cfg = RepresentConfig { dim: 4, base: BaseChoice::L4, schedule: Default::default(), falsify: FalsifyConfig::default() };
    let q8 = represent(&GroupTable::quaternion8(), &q8_cfg).unwrap();
    let q8_time = t.elapsed();
    let (c5, c4_found) = criterion_5(&q8, q8_time);
    report(5, c5);
    report(6, criterion_6(&q8));
    report(7, criterion_7(&c4_found));
    report(8, criterion_8());
    report(9, criterion_9());
    report(10, criterion_10());
    let failed: Vec<usize> = results.iter().filter(|(_, o)| !o.pass).map(|(k, _)| *k).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", results.len());
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
