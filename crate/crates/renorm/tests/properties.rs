use std::path::Path;
use std::sync::OnceLock;

use proptest::prelude::*;

use renorm::complex::{self, canonical_residual, complex_structures, kalton_projections, l2_canonical_form, standard_j};
use renorm::isometry::{enumerate_tip_candidates, group_closure, verify_isometry, FiniteMatrixGroup};
use renorm::jarosz::{self, c2_point, complex_i, conjugation, C2NormSpec, ExtensionW};
use renorm::linalg::{self, Matrix, Vector};
use renorm::norm::{day_norm, day_norm_brute_force, NormObject};
use renorm::orbit::{build_point_family, min_separation, Provenance};
use renorm::pimple::{deviation_locality, schedule_parameters, validate_spec, PimpleSpec, PolygonOracle, ScheduleConfig, ScheduleMode};
use renorm::rep::{self, GroupTable};

const SPECS: [&str; 6] = ["disk_single", "disk_pm", "disk_c4", "l3_weighted_pm", "euclid3_c6", "l4_q8"];

fn specs() -> &'static Vec<PimpleSpec> {
    static CELL: OnceLock<Vec<PimpleSpec>> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/specs");
        SPECS.iter().map(|s| serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{s}.json"))).unwrap()).unwrap()).collect()
    })
}

fn oracles() -> &'static Vec<Option<PolygonOracle>> {
    static CELL: OnceLock<Vec<Option<PolygonOracle>>> = OnceLock::new();
    CELL.get_or_init(|| specs().iter().map(|s| (s.dim() == 2).then(|| PolygonOracle::new(s, 65536).unwrap())).collect())
}

fn vec_in(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-3.0f64..3.0, n).prop_map(Vector::from_vec)
}

fn nonzero(n: usize) -> impl Strategy<Value = Vector> {
    vec_in(n).prop_filter("nonzero", |v| v.norm() > 1e-3)
}

/// A handful of norms on R^n of every non-pimple kind.
fn norm_zoo(n: usize) -> Vec<NormObject> {
    let mut r = linalg::rng(n as u64);
    let a = linalg::gaussian_matrix(&mut r, n) + Matrix::identity(n, n) * 2.0;
    let weights: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.5).collect();
    let perms = group_closure(&[linalg::random_signed_permutation(&mut r, n), -Matrix::identity(n, n)], 4096).unwrap();
    vec![
        NormObject::euclidean(n),
        NormObject::gram(a.transpose() * &a),
        NormObject::lp(n, 1.0),
        NormObject::lp(n, 3.5),
        NormObject::weighted_lp(4.0, weights),
        NormObject::day(n),
        NormObject::max_seminorms(n, vec![a.clone(), Matrix::identity(n, n)]),
        NormObject::g_average(NormObject::lp(n, 3.0), perms),
        NormObject::sum_squares(vec![NormObject::lp(n, 1.0), NormObject::day(n)]),
        NormObject::pullback(NormObject::lp(n, 4.0), a),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_axioms(n in 1usize..6, x in vec_in(6), y in vec_in(6), t in -5.0f64..5.0) {
        let x = x.rows(0, n).into_owned();
        let y = y.rows(0, n).into_owned();
        for nm in norm_zoo(n) {
            let (fx, fy) = (nm.eval(&x).unwrap(), nm.eval(&y).unwrap());
            prop_assert!((nm.eval(&(&x * t)).unwrap() - t.abs() * fx).abs() <= 1e-10 * (1.0 + t.abs() * fx));
            prop_assert!(nm.eval(&(&x + &y)).unwrap() <= fx + fy + 1e-10 * (1.0 + fx + fy));
            prop_assert_eq!(nm.eval(&(-&x)).unwrap(), fx);
            prop_assert_eq!(nm.eval(&Vector::zeros(n)).unwrap(), 0.0);
            if x.amax() > 0.0 {
                prop_assert!(fx > 0.0);
            }
        }
    }

    #[test]
    fn day_fast_matches_brute(x in prop::collection::vec(-10.0f64..10.0, 1..8)) {
        prop_assert!((day_norm(&x) - day_norm_brute_force(&x)).abs() <= 1e-12 * (1.0 + day_norm(&x)));
    }

    #[test]
    fn g_average_is_invariant(x in vec_in(3), gens in prop::collection::vec(0u64..1000, 1..3)) {
        let mut r = linalg::rng(gens[0]);
        let mut ms: Vec<Matrix> = gens.iter().map(|_| linalg::random_signed_permutation(&mut r, 3)).collect();
        ms.push(-Matrix::identity(3, 3));
        let g = group_closure(&ms, 64).unwrap();
        let nm = NormObject::g_average(NormObject::weighted_lp(3.0, vec![1.0, 2.0, 3.0]), g.clone());
        let fx = nm.eval(&x).unwrap();
        for e in &g.elements {
            prop_assert!((nm.eval(&(e * &x)).unwrap() - fx).abs() <= 1e-12 * (1.0 + fx));
        }
    }

    #[test]
    fn sum_squares_strictly_convex(a in nonzero(3), b in nonzero(3)) {
        // ℓ1 alone has flat faces; adding a euclidean part rounds them
        let nm = NormObject::sum_squares(vec![NormObject::lp(3, 1.0), NormObject::euclidean(3)]);
        let a = &a / nm.eval(&a).unwrap();
        let b = &b / nm.eval(&b).unwrap();
        prop_assume!(nm.eval(&(&a - &b)).unwrap() > 1e-3);
        prop_assert!(nm.eval(&((&a + &b) * 0.5)).unwrap() < 1.0);
    }
}

#[test]
fn corpus_specs_are_well_formed() {
    for (name, s) in SPECS.iter().zip(specs()) {
        for x in &s.points {
            assert!((s.base.eval(x).unwrap() - 1.0).abs() <= 1e-10, "{name}");
        }
        assert!(s.lambdas.iter().all(|&l| l > 0.5 && l < 1.0), "{name}");
        for k in 1..s.lambdas.len() {
            assert!(s.lambdas[k - 1] < s.lambdas[k], "{name}: λ not increasing");
            assert!(s.widths[k - 1] > s.widths[k], "{name}: widths not decreasing");
            assert!(1.0 / s.lambdas[k - 1] - 1.0 > 2.0 * s.widths[k], "{name}: width chain");
        }
        assert!(validate_spec(s).unwrap().pass, "{name}");
    }
}

/// Locality is only promised for strict schedules; desk pimples are wider than δ_k
/// on purpose, and strict chains with several orbits do not fit in double precision.
#[test]
fn deviation_is_local() {
    let cfg = ScheduleConfig { mode: ScheduleMode::Strict, ..Default::default() };
    for (p, th) in [(2.0, 0.0), (3.0, 0.3), (4.0, 1.1), (2.5, 2.0)] {
        let base = NormObject::lp(2, p);
        let x = linalg::vector(&[f64::cos(th), f64::sin(th)]);
        let x = &x / base.eval(&x).unwrap();
        let s = schedule_parameters(&base, &FiniteMatrixGroup::plus_minus_id(2), &[x], &cfg).unwrap();
        let rep = deviation_locality(&s, 400, 3).unwrap();
        assert!(rep.deviating > 0);
        assert_eq!(rep.violations, 0, "p = {p}: worst ratio {}", rep.worst_ratio);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn pimple_sandwich_and_duality(k in 0usize..6, v in nonzero(4)) {
        let s = &specs()[k];
        let y = v.rows(0, s.dim()).into_owned();
        prop_assume!(y.norm() > 1e-3);
        let b = s.base.eval(&y).unwrap();
        let m = s.lambdas.iter().cloned().fold(1.0, f64::min);
        let tol = 10.0 * s.tol.eval * b.max(1.0);
        let ev = s.evaluate(&y).unwrap();
        prop_assert!(ev.value >= m * b - tol && ev.value <= b + tol);
        prop_assert!(ev.value - ev.lower <= tol);
        if let Some(o) = &oracles()[k] {
            prop_assert!((ev.value - o.gauge(&y).unwrap()).abs() <= 1e-6 * b);
        }
    }

    #[test]
    fn pimple_tips_are_normalized(k in 0usize..6, t in 0.1f64..4.0) {
        let s = &specs()[k];
        for (x, &l) in s.points.iter().zip(&s.lambdas) {
            for g in &s.group.elements {
                prop_assert!((s.eval(&(g * x * t)).unwrap() - t * l).abs() <= 10.0 * s.tol.eval * t.max(1.0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn orbit_family_invariants(k in prop::sample::select(vec![2usize, 4, 6, 8]), th in 0.0f64..std::f64::consts::TAU, p in 2.0f64..5.0) {
        let base = NormObject::lp(2, if k == 4 || k == 2 { p } else { 2.0 });
        let g = FiniteMatrixGroup::rotations(k);
        let x0 = linalg::vector(&[th.cos(), th.sin()]);
        let x0 = &x0 / base.eval(&x0).unwrap();
        let f = build_point_family(&g, &base, &x0).unwrap();
        let xs = f.vectors();
        for fp in &f.points {
            prop_assert!((base.eval(&fp.x).unwrap() - 1.0).abs() <= 1e-10);
            prop_assert!(fp.a >= 1.0 - f.alpha / 5.0 - 1e-12 && fp.a <= 1.0 + f.alpha / 5.0 + 1e-12);
            if let Provenance::Type2 { beta, .. } = fp.provenance {
                prop_assert!(beta >= f.alpha / 10.0 && beta <= f.alpha / 5.0);
            }
        }
        let (sep, i, j) = min_separation(&g, &base, &xs).unwrap();
        let idx = i.max(j) as i32;
        prop_assert!(sep >= f.alpha * f.alpha / (40.0 * 3f64.powi(idx + 1)) - 1e-9);
        prop_assert!(f.spanning && linalg::rank(&xs.iter().flat_map(|x| g.elements.iter().map(move |e| e * x)).collect::<Vec<_>>(), 1e-8) == 2);
        let spec = PimpleSpec::new(base, g, xs.clone(), vec![0.75; xs.len()]);
        prop_assert!(validate_spec(&spec).unwrap().pass);
    }
}

fn mult_consistent(g: &FiniteMatrixGroup) -> bool {
    let n = g.order();
    (0..n).all(|a| {
        (0..n).all(|b| linalg::max_abs_diff(&(&g.elements[a] * &g.elements[b]), &g.elements[g.table[a][b]]) < 1e-9)
            && g.table[a][g.inverse[a]] == g.identity
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_a_group(seed in 0u64..10_000, count in 1usize..4, n in 1usize..4) {
        let mut r = linalg::rng(seed);
        let gens: Vec<Matrix> = (0..count).map(|_| linalg::random_signed_permutation(&mut r, n)).collect();
        let g = group_closure(&gens, 48).unwrap();
        prop_assert!(mult_consistent(&g));
        for m in &gens {
            prop_assert!(g.index_of(m).is_some());
        }
        let again = group_closure(&g.elements, 48).unwrap();
        prop_assert_eq!(again.order(), g.order());
    }

    #[test]
    fn square_roots_and_classes(seed in 0u64..10_000, k in prop::sample::select(vec![4usize, 8, 12])) {
        let mut r = linalg::rng(seed);
        // a dihedral group on R⁴, conjugated by a random orthogonal map
        let q = linalg::random_orthogonal(&mut r, 4);
        let mut rot = Matrix::zeros(4, 4);
        rot.view_mut((0, 0), (2, 2)).copy_from(&linalg::rotation2(std::f64::consts::TAU / k as f64));
        rot.view_mut((2, 2), (2, 2)).copy_from(&linalg::rotation2(std::f64::consts::TAU / k as f64));
        let flip = Matrix::from_diagonal(&linalg::vector(&[1.0, -1.0, 1.0, -1.0]));
        let gens: Vec<Matrix> = [rot, flip].iter().map(|m| &q * m * q.transpose()).collect();
        let g = group_closure(&gens, 256).unwrap();
        let rep = complex_structures(&g).unwrap();
        let id = Matrix::identity(4, 4);
        for m in &rep.matrices {
            prop_assert!(linalg::max_abs(&(m * m + &id)) <= 1e-9);
        }
        let mut all: Vec<usize> = rep.classes.concat();
        all.sort();
        let mut roots = rep.roots.clone();
        roots.sort();
        prop_assert_eq!(all, roots);
    }

    #[test]
    fn rotations_by_a_root_preserve_quadratic_averages(seed in 0u64..10_000, th in 0.0f64..std::f64::consts::TAU, x in vec_in(4)) {
        let mut r = linalg::rng(seed);
        let a = linalg::gaussian_matrix(&mut r, 4) + Matrix::identity(4, 4) * 2.0;
        let j = standard_j(4);
        let g = group_closure(std::slice::from_ref(&j), 8).unwrap();
        let nm = NormObject::g_average(NormObject::gram(a.transpose() * &a), g.clone());
        for ji in complex::find_square_roots_of_minus_id(&g) {
            let jm = &g.elements[ji];
            let rot = Matrix::identity(4, 4) * th.cos() + jm * th.sin();
            let fx = nm.eval(&x).unwrap();
            prop_assert!((nm.eval(&(&rot * &x)).unwrap() - fx).abs() <= 1e-9 * (1.0 + fx));
        }
    }

    #[test]
    fn canonical_form_is_orthogonal(seed in 0u64..10_000, half in 1usize..6) {
        let n = 2 * half;
        let mut r = linalg::rng(seed);
        let q = linalg::random_orthogonal(&mut r, n);
        let a = &q * standard_j(n) * q.transpose();
        let u = l2_canonical_form(&a).unwrap();
        prop_assert!(linalg::max_abs(&(u.transpose() * &u - Matrix::identity(n, n))) <= 1e-9);
        prop_assert!(canonical_residual(&a, &u).1 <= 1e-9);
    }

    #[test]
    fn kalton_identities(seed in 0u64..10_000, half in 1usize..6) {
        use rand::Rng;
        let n = 2 * half;
        let mut r = linalg::rng(seed);
        let mut a = Matrix::zeros(n, n);
        let mut b = Matrix::zeros(n, n);
        for k in 0..half {
            let (s, t) = (if r.random_bool(0.5) { 1.0 } else { -1.0 }, if r.random_bool(0.5) { 1.0 } else { -1.0 });
            a[(2 * k, 2 * k + 1)] = -s;
            a[(2 * k + 1, 2 * k)] = s;
            b[(2 * k, 2 * k + 1)] = -t;
            b[(2 * k + 1, 2 * k)] = t;
        }
        let p = linalg::random_signed_permutation(&mut r, n);
        let (a, b) = (&p * a * p.transpose(), &p * b * p.transpose());
        prop_assert!(kalton_projections(&a, &b).unwrap().residuals.max() <= 1e-12);
    }

    #[test]
    fn c2_norm_is_rotation_invariant(th in 0.0f64..std::f64::consts::TAU, x in nonzero(4)) {
        let nm = jarosz::c2_norm_build(&C2NormSpec::default()).unwrap();
        let rot = Matrix::identity(4, 4) * th.cos() + complex_i(2) * th.sin();
        let fx = nm.eval(&x).unwrap();
        prop_assert!((nm.eval(&(&rot * &x)).unwrap() - fx).abs() <= 1e-10 * (1.0 + fx));
    }

    #[test]
    fn double_norm_symmetries(th in 0.0f64..std::f64::consts::TAU, x in nonzero(6)) {
        let v2 = jarosz::double_norm_build(3, 2).unwrap();
        let mu = Matrix::identity(6, 6) * th.cos() + complex_i(3) * th.sin();
        let fx = v2.eval(&x).unwrap();
        prop_assert!((v2.eval(&(&mu * &x)).unwrap() - fx).abs() <= 1e-10 * (1.0 + fx));
        prop_assert!((v2.eval(&(conjugation(3) * &x)).unwrap() - fx).abs() <= 1e-10 * (1.0 + fx));
    }

    #[test]
    fn representations_are_exact(pick in 0usize..7, extra in 0usize..3) {
        let t = [
            GroupTable::cyclic(4),
            GroupTable::cyclic(6),
            GroupTable::klein4(),
            GroupTable::dihedral(4),
            GroupTable::quaternion8(),
            GroupTable::preset("z2xz4").unwrap(),
            GroupTable::cyclic(8),
        ][pick].clone();
        let fini = rep::fini_rep(&t, extra);
        prop_assert_eq!(rep::homomorphism_defect(&rep::fini_table(&t), &fini), 0.0);
        let d = fini[0].nrows();
        prop_assert_eq!(&fini[1], &(-Matrix::identity(d, d)));
        for j in rep::central_involutions(&t) {
            let split = rep::coset_split(&t, j).unwrap();
            let ims = rep::classical_rep(&t, &split);
            prop_assert_eq!(rep::homomorphism_defect(&t, &ims), 0.0);
            let d = ims[0].nrows();
            prop_assert_eq!(&ims[j], &(-Matrix::identity(d, d)));
            let x0 = linalg::basis(d, 0);
            for (gi, m) in ims.iter().enumerate() {
                for nm in [NormObject::lp(d, 4.0), NormObject::day(d)] {
                    prop_assert!(verify_isometry(m, &nm, 50, 1e-12, 5).unwrap().ok);
                }
                if gi != t.identity && gi != j {
                    prop_assert!(NormObject::lp(d, 4.0).eval(&(&x0 - m * &x0)).unwrap() > 0.0);
                }
            }
        }
    }
}

#[test]
fn conjugation_fails_for_the_first_double_norm() {
    let v1 = jarosz::double_norm_build(2, 1).unwrap();
    let x = linalg::vector(&[1.0, 0.0, 0.0, 1.0]);
    let a = v1.eval(&x).unwrap();
    let b = v1.eval(&(conjugation(2) * &x)).unwrap();
    assert!((a - b).abs() > 0.1, "{a} vs {b}");
}

#[test]
fn finite_average_alone_is_not_enough() {
    // ℓ4 is C4-invariant but rotating by π/4 changes it
    let g = FiniteMatrixGroup::rotations(4);
    let nm = NormObject::g_average(NormObject::lp(2, 4.0), g.clone());
    let j = &g.elements[complex::find_square_roots_of_minus_id(&g)[0]];
    let rot = Matrix::identity(2, 2) * std::f64::consts::FRAC_PI_4.cos() + j * std::f64::consts::FRAC_PI_4.sin();
    let x = linalg::basis(2, 0);
    assert!((nm.eval(&(rot * &x)).unwrap() - nm.eval(&x).unwrap()).abs() > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn extension_matches_the_bidisk_part(x in nonzero(2), frac in 0.0f64..1.0, phase in 0.0f64..std::f64::consts::TAU) {
        let e = NormObject::euclidean(2);
        let w = ExtensionW::new(e.clone(), e, linalg::vector(&[0.05, 0.0])).unwrap();
        let r = frac * x.norm();
        let y = linalg::vector(&[x[0], x[1], r * phase.cos(), r * phase.sin()]);
        prop_assert!((w.eval(&y).unwrap() - x.norm().max(r)).abs() <= 1e-7 * x.norm());
    }
}

#[test]
fn candidates_form_a_group_containing_the_spec_group() {
    for k in [0usize, 1, 2, 4] {
        let s = &specs()[k];
        let c = enumerate_tip_candidates(s, 7).unwrap();
        let g = group_closure(&c.maps, 256).unwrap();
        assert_eq!(g.order(), c.maps.len(), "{}", SPECS[k]);
        for e in &s.group.elements {
            assert!(c.maps.iter().any(|m| linalg::max_abs_diff(m, e) < 1e-7), "{}", SPECS[k]);
        }
    }
}

#[test]
fn c2_points_sit_on_the_sphere() {
    let spec = C2NormSpec::default();
    let nm = jarosz::c2_norm_build(&spec).unwrap();
    assert!((nm.eval(&c2_point((1.0, 0.0), (0.0, 0.0))).unwrap() - 1.0).abs() < 1e-12);
}
