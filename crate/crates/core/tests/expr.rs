use hormander::expr::{jet_at, parse, Expression, Smoothness};
use hormander::Error;
use proptest::prelude::*;

fn fd(e: &Expression, x: &[f64], i: usize) -> f64 {
    let h = 1e-6;
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += h;
    b[i] -= h;
    (e.eval(&a) - e.eval(&b)) / (2.0 * h)
}

#[test]
fn derivative_of_product_with_sine() {
    let e = parse("x1^2*sin(x2)", 2).unwrap();
    let d = e.differentiate(0);
    let v = d.eval(&[1.0, 0.5]);
    assert!((v - 2.0 * 0.5f64.sin()).abs() < 1e-14);
}

#[test]
fn abs_uses_sign_derivative_with_zero_at_kink() {
    let e = parse("abs(x1)", 1).unwrap();
    let d = e.differentiate(0);
    assert_eq!(d.eval(&[0.0]), 0.0);
    assert_eq!(d.eval(&[-2.0]), -1.0);
    assert_eq!(parse("sign(x1)", 1).unwrap().differentiate(0).eval(&[0.3]), 0.0);
}

#[test]
fn min_max_derivatives_pick_the_active_branch() {
    let e = parse("min(x1^2, x2)", 2).unwrap();
    assert!((e.differentiate(0).eval(&[0.5, 1.0]) - 1.0).abs() < 1e-15);
    assert_eq!(e.differentiate(0).eval(&[2.0, 1.0]), 0.0);
    let m = parse("max(x1, 2*x1)", 1).unwrap();
    assert_eq!(m.differentiate(0).eval(&[1.0]), 2.0);
    assert_eq!(m.differentiate(0).eval(&[-1.0]), 1.0);
}

#[test]
fn parse_errors_report_line_and_column() {
    match parse("x1 + * x2", 2) {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 6)),
        other => panic!("unexpected {:?}", other),
    }
    match parse("x1 +\n  x7", 3) {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
        other => panic!("unexpected {:?}", other),
    }
    assert!(parse("x1^2.5", 1).is_err());
    assert!(parse("x1^-1", 1).is_err());
    assert!(parse("foo(x1)", 1).is_err());
    assert!(parse("(x1", 1).is_err());
    assert!(parse("x17", 16).is_err());
}

#[test]
fn scientific_literals_and_precedence() {
    let e = parse("-2.5e-1*x1^2 + 3/x2 - -1", 2).unwrap();
    let v = e.eval(&[2.0, 4.0]);
    assert!((v - (-0.25 * 4.0 + 0.75 + 1.0)).abs() < 1e-15);
    assert_eq!(parse("-x1^2", 1).unwrap().eval(&[3.0]), -9.0);
    assert_eq!(parse("2^3^1", 1).is_err(), true);
}

#[test]
fn jet_coefficients_match_hand_expansion() {
    // x1*x2 + x1^3 at (1, 2): value 3, d1 = x2 + 3x1^2 = 5, d2 = x1 = 1,
    // d11/2 = 3x1 = 3, d12 = 1, d22/2 = 0, d111/6 = 1.
    let e = parse("x1*x2 + x1^3", 2).unwrap();
    let j = e.jet(&[1.0, 2.0], 3);
    assert_eq!(j.coeff(&[0, 0]), 3.0);
    assert_eq!(j.coeff(&[1, 0]), 5.0);
    assert_eq!(j.coeff(&[0, 1]), 1.0);
    assert_eq!(j.coeff(&[2, 0]), 3.0);
    assert_eq!(j.coeff(&[1, 1]), 1.0);
    assert_eq!(j.coeff(&[0, 2]), 0.0);
    assert_eq!(j.coeff(&[3, 0]), 1.0);
}

#[test]
fn jets_agree_with_symbolic_partials() {
    let e = parse("exp(x1)*cos(x2) + x1/(2 + x2^2) + abs(x1 - 0.3)*x2", 2).unwrap();
    let x0 = [0.7, -0.4];
    let j = e.jet(&x0, 3);
    for alpha in [[0u8, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2], [3, 0], [2, 1], [1, 2], [0, 3]] {
        let sym = e.partial(&alpha).eval(&x0);
        let jv = j.derivative(&alpha);
        assert!((sym - jv).abs() < 1e-12 * (1.0 + sym.abs()), "{:?}: {} vs {}", alpha, sym, jv);
    }
}

#[test]
fn jet_order_is_limited_by_declared_smoothness() {
    let e = parse("x1*abs(x1)", 1).unwrap();
    assert!(jet_at(&e, Smoothness::CkLip(1), &[0.0], 2).is_ok());
    assert!(matches!(
        jet_at(&e, Smoothness::CkLip(1), &[0.0], 3),
        Err(Error::Smoothness(_))
    ));
    assert!(jet_at(&e, Smoothness::Ck(1), &[0.0], 2).is_err());
}

#[test]
fn smoothness_text_round_trips() {
    for s in [Smoothness::Ck(3), Smoothness::CkLip(1)] {
        assert_eq!(Smoothness::parse(&s.to_string()), Some(s));
    }
    assert_eq!(Smoothness::parse("C{2,3}"), None);
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (1usize..=3).prop_map(|i| format!("x{}", i)),
        (-3.0f64..3.0).prop_map(|c| format!("({})", c)),
    ]
}

fn smooth_expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} + {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} - {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} * {})", a, b)),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({})^{}", a, n)),
            inner.clone().prop_map(|a| format!("sin({})", a)),
            inner.clone().prop_map(|a| format!("cos({})", a)),
            inner.clone().prop_map(|a| format!("exp(0.3*{})", a)),
            (inner.clone(), inner).prop_map(|(a, b)| format!("{}/(2 + ({})^2)", a, b)),
        ]
    })
}

fn any_expr() -> impl Strategy<Value = String> {
    smooth_expr().prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| format!("abs({})", a)),
            inner.clone().prop_map(|a| format!("sign({})", a)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("min({}, {})", a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| format!("max({}, {})", a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(src in any_expr()) {
        let e = parse(&src, 3).unwrap();
        let again = parse(&e.to_string(), 3).unwrap();
        prop_assert_eq!(&again, &e);
    }

    #[test]
    fn derivative_matches_central_difference(src in smooth_expr(),
            x in proptest::collection::vec(-1.0f64..1.0, 3), i in 0usize..3) {
        let e = parse(&src, 3).unwrap();
        let sym = e.differentiate(i).eval(&x);
        let num = fd(&e, &x, i);
        prop_assume!(sym.is_finite() && num.is_finite() && sym.abs() < 1e6);
        prop_assert!((sym - num).abs() <= 1e-6 * (1.0 + sym.abs()), "{} vs {}", sym, num);
    }

    #[test]
    fn jet_first_order_matches_symbolic(src in any_expr(),
            x in proptest::collection::vec(-1.0f64..1.0, 3)) {
        let e = parse(&src, 3).unwrap();
        let j = e.jet(&x, 2);
        let v = e.eval(&x);
        prop_assume!(v.is_finite() && v.abs() < 1e8);
        prop_assert!((j.value() - v).abs() <= 1e-9 * (1.0 + v.abs()));
        for i in 0..3 {
            let mut a = [0u8; 3];
            a[i] = 1;
            let s = e.differentiate(i).eval(&x);
            prop_assume!(s.is_finite() && s.abs() < 1e8);
            prop_assert!((j.derivative(&a) - s).abs() <= 1e-8 * (1.0 + s.abs()));
        }
    }
}
