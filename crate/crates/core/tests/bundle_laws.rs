use proptest::prelude::*;
use theta_bundle::bundles::*;

fn all_bundles() -> Vec<BundleType<f64>> {
    let mut out = BundleType::table_representatives();
    for k in [2, 3, -1] {
        for tag in [BundleTag::C, BundleTag::D, BundleTag::E] {
            out.push(BundleType::representative(tag, Some(k)).unwrap());
        }
    }
    // hyperbolic with negative trace, and a second positive one
    let neg = MonodromyPair::new(IntMat2::new(-2, -1, -1, -1), IntMat2::IDENTITY).unwrap();
    out.push(classify(neg).unwrap());
    let pos = MonodromyPair::new(IntMat2::new(3, 1, 5, 2), IntMat2::NEG_IDENTITY).unwrap();
    out.push(classify(pos).unwrap());
    out
}

fn point() -> impl Strategy<Value = TotalPoint<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, s, t)| TotalPoint::new(x, y, s, t))
}

fn element() -> impl Strategy<Value = GroupElement> {
    (-2i64..=2, -2i64..=2, -3i64..=3, -3i64..=3).prop_map(|(a, b, c, d)| GroupElement::new(a, b, c, d))
}

#[test]
fn imaginary_part_of_omega_is_positive() {
    for b in all_bundles() {
        for j in 0..1000 {
            let x = -2.0 + 4.0 * j as f64 / 999.0;
            let w = b.omega(x);
            assert!(w.im > 0.0 && w.im.is_finite(), "{} x={x}: {w}", b.label());
        }
    }
}

#[test]
fn omega_moves_by_the_mobius_action() {
    for b in all_bundles() {
        for x in [-1.3, -0.4, 0.0, 0.25, 0.9] {
            let r = b.omega_transform_check(TotalPoint::new(x, 0.3, 0.2, -0.6));
            let scale = b.omega(x + 1.0).norm().max(1.0);
            assert!(r.residual_omega < 1e-12 * scale, "{} x={x}: {r:?}", b.label());
            assert!(r.residual_z < 1e-11 * scale, "{} x={x}: {r:?}", b.label());
        }
    }
}

#[test]
fn coframe_cocycle() {
    let inv = |m: [[f64; 2]; 2], a: IntMat2| {
        let ai = a.inverse_sl2();
        let f = |i: usize, j: usize| ai.0[i][j] as f64;
        [
            [f(0, 0) * m[0][0] + f(0, 1) * m[1][0], f(0, 0) * m[0][1] + f(0, 1) * m[1][1]],
            [f(1, 0) * m[0][0] + f(1, 1) * m[1][0], f(1, 0) * m[0][1] + f(1, 1) * m[1][1]],
        ]
    };
    let bundles = [
        BundleType::<f64>::representative(BundleTag::C, Some(2)).unwrap(),
        BundleType::representative(BundleTag::F, None).unwrap(),
        BundleType::representative(BundleTag::A, None).unwrap(),
    ];
    for b in bundles {
        for (x, y) in [(0.3, 0.0), (-0.7, 1.0), (1.25, 0.0)] {
            let here = b.left_invariant_coframe(x, y).unwrap();
            let next = b.left_invariant_coframe(x + 1.0, y).unwrap();
            let want = inv(here, b.pair().a());
            for i in 0..2 {
                for j in 0..2 {
                    assert!((next[i][j] - want[i][j]).abs() < 1e-12 * (1.0 + want[i][j].abs()), "{} {x} {y}", b.label());
                }
            }
        }
    }
    let elliptic = BundleType::<f64>::representative(BundleTag::B2, None).unwrap();
    assert!(elliptic.left_invariant_coframe(0.5, 0.0).is_err());
    assert!(elliptic.left_invariant_coframe(2.0, 0.0).is_ok());
}

#[test]
fn relators_fix_points_exactly() {
    let p = TotalPoint::new(0.25, -0.5, 0.375, 0.625);
    for b in all_bundles() {
        for (name, word) in b.relator_words() {
            assert_eq!(b.apply_word(&word, p), p, "{} {name}", b.label());
            assert!(b.element_of_word(&word).is_identity(), "{} {name}", b.label());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_is_a_group_action(g in element(), h in element(), p in point(), which in 0usize..16) {
        let bundles = all_bundles();
        let b = &bundles[which % bundles.len()];
        let lhs = b.act(&b.compose(&g, &h), p);
        let rhs = b.act(&g, b.act(&h, p));
        let scale = rhs.to_array().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(lhs.max_abs_diff(rhs) < 1e-12 * scale);
        let back = b.act(&b.inverse(&g), b.act(&g, p));
        prop_assert!(back.max_abs_diff(p) < 1e-12 * scale.max(1.0) * 10.0);
        prop_assert!(b.compose(&g, &b.inverse(&g)).is_identity());
    }

    #[test]
    fn normal_form_word_reproduces_element(g in element(), which in 0usize..16) {
        let bundles = all_bundles();
        let b = &bundles[which % bundles.len()];
        prop_assert_eq!(b.element_of_word(&g.word()), g);
    }

    #[test]
    fn classification_round_trips(tag_index in 0usize..10, k in 1i64..5) {
        let tag = BundleTag::ALL[tag_index];
        let param = tag.has_parameter().then_some(k);
        let b = BundleType::<f64>::representative(tag, param).unwrap();
        let again = classify::<f64>(b.pair()).unwrap();
        prop_assert_eq!(again.tag(), tag);
        prop_assert_eq!(again.parameter(), param);
    }
}
