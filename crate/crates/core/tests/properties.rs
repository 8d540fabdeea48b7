use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kleinlab::arith::{arithmeticity_test, trace_field};
use kleinlab::circle::{circle_through, is_linked, random_linked_unit, CCircle, LinkedPair};
use kleinlab::cocycle::{cocycle_u, sample_start, ExactTarget, FloatTarget, ReturnMap, Target};
use kleinlab::graphs::{classify_limit, graph_product_form, sampled_hausdorff, Cross, LimitClass, PointSet};
use kleinlab::moebius::{vertex_angle, CMat, FlowElement};
use kleinlab::padic::{tree_distance, PAdicScalar};
use kleinlab::presentation::{mat, parse_poly_expr, GroupPresentation};
use kleinlab::presets::Preset;
use kleinlab::surfaces::{circle_stabilizer, preserves, ExactCircle};
use kleinlab::{dist_h3, law_of_cosines_side, Field, H3Point, Moebius, NumberField, ProjPoint};

fn cx() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Unimodular complex matrices with moderate entries.
fn cmat() -> impl Strategy<Value = CMat> {
    (cx(), cx(), cx(), cx())
        .prop_filter("nearly singular", |(a, b, c, d)| (a * d - b * c).norm() > 0.2)
        .prop_map(|(a, b, c, d)| Moebius::from_entries(a, b, c, d).normalized())
}

fn h3() -> impl Strategy<Value = H3Point> {
    (cx(), 0.2..4.0f64).prop_map(|(z, t)| H3Point::new(z * 0.7, t).unwrap())
}

fn pt() -> impl Strategy<Value = ProjPoint<Complex64>> {
    cx().prop_map(ProjPoint::from_c)
}

fn h3_close(p: &H3Point, q: &H3Point) -> f64 {
    dist_h3(p, q).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn action_on_p1_is_projective(g in cmat(), x in pt(), l in cx()) {
        prop_assume!(l.norm() > 0.1);
        let a = g.apply(&x);
        let b = g.scale(&l).apply(&x);
        prop_assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(a.proj_eq(&b, 1e-9));
        }
    }

    #[test]
    fn isometries_preserve_distance(g in cmat(), p in h3(), q in h3()) {
        let d0 = dist_h3(&p, &q).unwrap();
        let d1 = dist_h3(&g.act_on_h3(&p), &g.act_on_h3(&q)).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-9, "{} vs {}", d0, d1);
    }

    #[test]
    fn action_is_a_homomorphism(g in cmat(), h in cmat(), p in h3()) {
        let a = g.compose(&h).act_on_h3(&p);
        let b = g.act_on_h3(&h.act_on_h3(&p));
        prop_assert!(h3_close(&a, &b) < 1e-9);
    }

    #[test]
    fn law_of_cosines_closes_triangles(p in h3(), q in h3(), r in h3()) {
        let (b, c) = (dist_h3(&p, &q).unwrap(), dist_h3(&p, &r).unwrap());
        prop_assume!(b > 1e-3 && c > 1e-3);
        let theta = vertex_angle(&p, &q, &r);
        let a = law_of_cosines_side(b, c, theta).unwrap();
        prop_assert!((a - dist_h3(&q, &r).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn one_parameter_groups(s in -5.0..5.0f64, t in -5.0..5.0f64, th in 0.0..2.0 * PI, ph in 0.0..2.0 * PI) {
        prop_assert_eq!(FlowElement::a(s).compose(&FlowElement::a(t)), Some(FlowElement::a(s + t)));
        prop_assert!(CMat::a_t(s).compose(&CMat::a_t(t)).proj_eq(&CMat::a_t(s + t), 1e-12));
        let sum = (th + ph) % (2.0 * PI);
        prop_assert!(CMat::r_theta(th).compose(&CMat::r_theta(ph)).proj_eq(&CMat::r_theta(sum), 1e-12));
    }

    #[test]
    fn circles_are_covariant(g in cmat(), p1 in pt(), p2 in pt(), p3 in pt()) {
        let ok = |a: &ProjPoint<Complex64>, b: &ProjPoint<Complex64>| a.chordal(b) > 1e-2;
        prop_assume!(ok(&p1, &p2) && ok(&p2, &p3) && ok(&p1, &p3));
        let c = circle_through(&p1, &p2, &p3).unwrap();
        let gp = |p: &ProjPoint<Complex64>| g.apply(p).unwrap();
        let direct = circle_through(&gp(&p1), &gp(&p2), &gp(&p3)).unwrap();
        prop_assert!(direct.proj_eq(&c.transform(&g).unwrap(), 1e-9));
    }

    #[test]
    fn linking_is_invariant(g in cmat(), x in pt(), y in pt(), center in cx(), r in 0.3..3.0f64) {
        let c = CCircle::from_center_radius(center, r);
        let gc = c.transform(&g).unwrap();
        let (gx, gy) = (g.apply(&x).unwrap(), g.apply(&y).unwrap());
        let margin = |circle: &CCircle, p: &ProjPoint<Complex64>| circle.relative_value(p).abs() > 1e-6;
        prop_assume!(margin(&c, &x) && margin(&c, &y) && margin(&gc, &gx) && margin(&gc, &gy));
        prop_assert_eq!(is_linked(&x, &y, &c).unwrap(), is_linked(&gx, &gy, &gc).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pencil_inversions_are_fixed_point_free_involutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (xi, xi2) = random_linked_unit(&mut rng);
        let pair = LinkedPair::new(xi, xi2, CCircle::unit()).unwrap();
        let m = pair.inversion_as_moebius().unwrap();
        prop_assert!(m.trace().abs() / m.norm() < 1e-9);
        for k in 0..64 {
            let t = 2.0 * PI * (k as f64 + 0.5) / 64.0;
            let p = ProjPoint::from_c(Complex64::new(t.cos(), t.sin()));
            let q = pair.pencil_inversion(&p).unwrap();
            prop_assert!(q.chordal(&p) > 1e-6);
            prop_assert!(pair.pencil_inversion(&q).unwrap().chordal(&p) < 1e-9);
        }
    }

    #[test]
    fn tree_distance_invariances(
        e in proptest::array::uniform4((-30i64..30, 1i64..30)),
        l in (1i64..50, 1i64..50),
        p in prop_oneof![Just(2u64), Just(3), Just(5), Just(7)],
    ) {
        let s = |(n, d): (i64, i64)| PAdicScalar::from_ints(n, d, p);
        let g = Moebius::from_entries(s(e[0]), s(e[1]), s(e[2]), s(e[3]));
        prop_assume!(!g.det().is_zero_tol(0.0));
        let d = tree_distance(&g).unwrap();
        prop_assert_eq!(tree_distance(&g.scale(&s(l))).unwrap(), d);
        prop_assert_eq!(tree_distance(&g.adjugate()).unwrap(), d);
    }

    #[test]
    fn tree_triangle_inequality(
        a in proptest::array::uniform4(-60i64..60),
        b in proptest::array::uniform4(-60i64..60),
        p in prop_oneof![Just(2u64), Just(3), Just(5)],
    ) {
        let m = |e: [i64; 4]| {
            let s = |n: i64| PAdicScalar::from_ints(n, 1, p);
            Moebius::from_entries(s(e[0]), s(e[1]), s(e[2]), s(e[3]))
        };
        let (g, h) = (m(a), m(b));
        prop_assume!(!g.det().is_zero_tol(0.0) && !h.det().is_zero_tol(0.0));
        let gh = tree_distance(&g.compose(&h)).unwrap();
        prop_assert!(gh <= tree_distance(&g).unwrap() + tree_distance(&h).unwrap());
    }

    #[test]
    fn product_form_is_projective(g in cmat(), l in cx()) {
        prop_assume!(g.c.norm() > 0.05 && l.norm() > 0.1);
        let (u, v, w) = graph_product_form(&g).unwrap();
        let (u2, v2, w2) = graph_product_form(&g.scale(&l)).unwrap();
        let tol = 1e-9 * (1.0 + u.norm() + v.norm() + w.norm());
        prop_assert!((u - u2).norm() < tol && (v - v2).norm() < tol && (w - w2).norm() < tol);
        // det = 1 representative: w = -1/c^2
        prop_assert!((w + 1.0 / (g.c * g.c)).norm() < tol);
    }
}

/// `h1 diag(2^k, 2^-k) h2`, which tends to the cross through `h2^{-1} 0` and `h1 ∞`.
fn diverging(h1: &CMat, h2: &CMat, kmax: i32) -> Vec<CMat> {
    (0..=kmax)
        .map(|k| h1.compose(&CMat::from_f64(2f64.powi(k), 0.0, 0.0, 2f64.powi(-k))).compose(h2))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn inverse_sequences_swap_cross_coordinates(h1 in cmat(), h2 in cmat()) {
        let seq = diverging(&h1, &h2, 20);
        let inv: Vec<CMat> = seq.iter().map(|g| g.adjugate()).collect();
        let (LimitClass::CrossLimit { alpha, beta }, LimitClass::CrossLimit { alpha: a2, beta: b2 }) =
            (classify_limit(&seq, 1e-6).unwrap(), classify_limit(&inv, 1e-6).unwrap())
        else {
            return Err(TestCaseError::fail("expected cross limits"));
        };
        prop_assert!(alpha.chordal(&b2) < 1e-6 && beta.chordal(&a2) < 1e-6);
        let zero = h2.adjugate().apply(&ProjPoint::from_c(Complex64::new(0.0, 0.0))).unwrap();
        prop_assert!(alpha.chordal(&zero) < 1e-6);
        prop_assert!(beta.chordal(&h1.apply(&ProjPoint::inf()).unwrap()) < 1e-6);
    }

    #[test]
    fn hausdorff_to_cross_shrinks_along_the_tail(h1 in cmat(), h2 in cmat()) {
        let seq = diverging(&h1, &h2, 20);
        let LimitClass::CrossLimit { alpha, beta } = classify_limit(&seq, 1e-6).unwrap() else {
            return Err(TestCaseError::fail("expected a cross limit"));
        };
        let cross = PointSet::Cross(Cross { alpha, beta });
        let d: Vec<f64> = seq[10..]
            .iter()
            .map(|g| sampled_hausdorff(&PointSet::Graph(g.clone()), &cross, 300))
            .collect();
        let up = d.windows(2).filter(|w| w[1] > w[0] * 1.1).count();
        prop_assert!(up as f64 <= 0.1 * (d.len() - 1) as f64, "{:?}", d);
    }

    #[test]
    fn embeddings_are_ring_homomorphisms(
        x in proptest::collection::vec((-20i64..20, 1i64..9), 3),
        y in proptest::collection::vec((-20i64..20, 1i64..9), 3),
        which in 0usize..4,
    ) {
        let poly = ["x^2 + 1", "x^2 - x + 1", "x^2 - 2", "x^3 - 2"][which];
        let f = NumberField::new(parse_poly_expr(poly).unwrap()).unwrap();
        let el = |v: &[(i64, i64)]| {
            f.element(v[..f.degree()].iter().map(|&(n, d)| num_rational::BigRational::new(n.into(), d.into())).collect())
        };
        let (a, b) = (el(&x), el(&y));
        for e in f.embeddings() {
            let (sa, sb) = (e.apply(&a), e.apply(&b));
            let scale = 1.0 + sa.norm() * (1.0 + sb.norm()) + sb.norm();
            prop_assert!((e.apply(&a.plus(&b)) - (sa + sb)).norm() < 1e-10 * scale);
            prop_assert!((e.apply(&a.times(&b)) - sa * sb).norm() < 1e-10 * scale);
        }
    }
}

fn conjugated(gens: &GroupPresentation, h: &kleinlab::presentation::Mat) -> GroupPresentation {
    let hi = h.adjugate();
    let g: Vec<_> = gens.generators.iter().map(|m| h.compose(m).compose(&hi)).collect();
    GroupPresentation::new(gens.field.clone(), g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_field_is_conjugation_invariant(e in proptest::array::uniform4((-3i64..4, -3i64..4))) {
        let gens = Preset::BianchiZi.presentation();
        let f = &gens.field;
        let s = |(a, b): (i64, i64)| format!("{a}{b:+}x");
        let h = mat(f, [&s(e[0]), &s(e[1]), &s(e[2]), &s(e[3])]);
        prop_assume!(!h.det().is_zero_tol(0.0));
        let t0 = trace_field(&gens).unwrap();
        let t1 = trace_field(&conjugated(&gens, &h)).unwrap();
        prop_assert_eq!(t0.degree(), t1.degree());
        prop_assert!(t1.express(&t0.theta).is_some() && t0.express(&t1.theta).is_some());
    }

    #[test]
    fn float_cocycle_identity(seed in any::<u64>(), n in 1usize..12, m in 1usize..12) {
        let p = Preset::BianchiZi;
        let (d, field, s) = (p.domain().unwrap(), p.presentation().field, p.sampler().unwrap());
        let rm = ReturnMap::new(d, FloatTarget::new(d, field.identity_embedding()));
        let g = sample_start(&s, d, &mut ChaCha8Rng::seed_from_u64(seed));
        let lhs = cocycle_u(&rm, n + m, &g).unwrap();
        let shifted = CMat::a_t(m as f64).compose(&g);
        let rhs = rm.target.mul(&cocycle_u(&rm, m, &g).unwrap(), &cocycle_u(&rm, n, &shifted).unwrap());
        prop_assert!(lhs.m.proj_eq(&rhs.m, 1e-9));
        prop_assert!((lhs.distance() - rhs.distance()).abs() < 1e-9 * (1.0 + lhs.distance()));
    }
}

fn named(gens: &GroupPresentation, label: &str) -> ExactCircle {
    let c = gens.circles.iter().find(|c| c.label == label).unwrap();
    kleinlab::circle::Circle::new(c.a.clone(), c.b.clone(), c.c.clone()).unwrap()
}

#[test]
fn stabilizers_are_exact_and_equivariant() {
    let gens = Preset::BianchiZi.presentation();
    let f = &gens.field;
    let gammas = [mat(f, ["1", "x", "0", "1"]), mat(f, ["0", "-1", "1", "x"]), mat(f, ["x", "0", "0", "-x"])];
    for label in ["unit", "norm2"] {
        let c = named(&gens, label);
        let sc = circle_stabilizer(label, &c, &gens, 4).unwrap();
        assert!(sc.stabilizer.iter().all(|e| preserves(&c, &e.mat).unwrap()));
        for g in &gammas {
            let gc = c.transform(g).unwrap();
            let sg = circle_stabilizer("image", &gc, &gens, 4).unwrap();
            assert!(sg.stabilizer.iter().all(|e| preserves(&gc, &e.mat).unwrap()));
            for e in &sc.stabilizer {
                assert!(preserves(&gc, &g.compose(&e.mat).compose(&g.adjugate())).unwrap());
            }
            for e in &sg.stabilizer {
                assert!(preserves(&c, &g.adjugate().compose(&e.mat).compose(g)).unwrap());
            }
        }
    }
}

#[test]
fn exact_cocycle_identity_small() {
    let p = Preset::BianchiZw;
    let (d, field, s) = (p.domain().unwrap(), p.presentation().field, p.sampler().unwrap());
    let rm = ReturnMap::new(d, ExactTarget::new(d, field, None));
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..50 {
        let (n, m) = (1 + k % 7, 1 + (k * 5) % 9);
        let g = sample_start(&s, d, &mut rng);
        let lhs = cocycle_u(&rm, n + m, &g).unwrap();
        let rhs = rm.target.mul(
            &cocycle_u(&rm, m, &g).unwrap(),
            &cocycle_u(&rm, n, &CMat::a_t(m as f64).compose(&g)).unwrap(),
        );
        assert!(lhs.proj_eq(&rhs, 0.0));
    }
}

#[test]
fn verdicts_never_revert_to_arithmetic() {
    for gens in [Preset::BianchiZi.presentation(), Preset::BianchiZw.presentation()] {
        for len in 3..=5 {
            assert_eq!(arithmeticity_test(&gens, len).unwrap().name(), "Arithmetic");
        }
    }
}

#[test]
fn lyapunov_ci_shrinks_like_root_n() {
    use kleinlab::cocycle::lyapunov_estimate;
    use kleinlab::config::ExperimentConfig;
    let p = Preset::BianchiZi;
    let (d, field, s) = (p.domain().unwrap(), p.presentation().field, p.sampler().unwrap());
    let rm = ReturnMap::new(d, FloatTarget::new(d, field.identity_embedding()));
    let width = |samples| {
        let cfg = ExperimentConfig {
            n: 100,
            samples,
            seed: 4,
            ..ExperimentConfig::default()
        };
        let r = lyapunov_estimate(&rm, &s, &cfg).unwrap();
        r.ci_high - r.ci_low
    };
    let ratio = width(50) / width(200);
    assert!((1.0..=4.0).contains(&ratio), "ratio {ratio}");
}
