use hormander::expr::Smoothness;
use hormander::flows::exp_map;
use hormander::inequality::*;
use hormander::metric::Flavor;
use hormander::{registry, rng, Error};
use rand::Rng;

const TOL: f64 = 1e-10;

fn poly(text: &str, dim: usize) -> TestFunction {
    TestFunction::parse("f", text, dim, Smoothness::Ck(8)).unwrap()
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

#[test]
fn x_gradient_on_grushin() {
    let g = registry::get("grushin").unwrap();
    let x = [0.3, -0.2];
    assert_eq!(x_gradient(&g, &poly("x1", 2), &x).unwrap(), vec![1.0, 0.0]);
    assert_eq!(x_gradient(&g, &poly("x2", 2), &x).unwrap(), vec![0.0, 0.3]);
    assert_eq!(
        x_gradient(&g, &TestFunction::constant(2.5, 2), &x).unwrap(),
        vec![0.0, 0.0]
    );
}

#[test]
fn x_gradient_matches_derivatives_along_flows() {
    let mut r = rng::stream(2, "xgrad", 0);
    for name in registry::NAMES {
        let s = registry::get(name).unwrap();
        let u = TestFunction::from_system(&s, "v").unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..s.dim).map(|_| r.gen_range(-0.5..0.5)).collect();
            let g = x_gradient(&s, &u, &x).unwrap();
            for i in 1..=s.n() {
                let h = 1e-5;
                let a = u.eval(&exp_map(&s, i, h, &x, 1e-13).unwrap());
                let b = u.eval(&exp_map(&s, i, -h, &x, 1e-13).unwrap());
                let fd = (a - b) / (2.0 * h);
                assert!((fd - g[i - 1]).abs() <= 1e-5, "{} X{}: {} vs {}", name, i, fd, g[i - 1]);
            }
        }
    }
}

#[test]
fn constant_functions_give_zero() {
    let h = registry::get("heisenberg").unwrap();
    let c = TestFunction::constant(1.0, 3);
    let ball = BallMeasure::new(&h, &[0.0; 3], 0.1, 2.0, Flavor::D1, 4, TOL).unwrap();
    let rep = poincare_ratio(&h, &c, &ball, 5000, 1).unwrap();
    assert_eq!((rep.lhs, rep.implied_constant), (0.0, 0.0));
    let b1 = BallMeasure::new(&h, &[0.0; 3], 0.1, 1.0, Flavor::D1, 4, TOL).unwrap();
    let rep = p_poincare_ratio(&h, &c, &b1, 2.0, 5000, 1).unwrap();
    assert_eq!(rep.implied_constant, 0.0);
    let g = registry::get("grushin_c11").unwrap();
    let ball = BallMeasure::new(&g, &[0.0; 2], 0.05, 2.0, Flavor::D1, 4, TOL).unwrap();
    let rough = rough_poincare_decomposition(&g, &TestFunction::constant(1.0, 2), &ball, 5000, 1)
        .unwrap();
    assert_eq!((rough.lhs, rough.x_term, rough.remainder_term), (0.0, 0.0, 0.0));
}

#[test]
fn poincare_on_the_plane_is_scale_free() {
    let e = registry::get("euclid2").unwrap();
    let u = poly("x1", 2);
    let cs: Vec<f64> = (3..=6)
        .map(|k| {
            let ball =
                BallMeasure::new(&e, &[0.0, 0.0], 0.5f64.powi(k), 2.0, Flavor::D1, 4, TOL).unwrap();
            poincare_ratio(&e, &u, &ball, 50_000, 1).unwrap().implied_constant
        })
        .collect();
    assert!(spread(&cs) <= 1.1, "{:?}", cs);
}

#[test]
fn poincare_on_grushin_is_bounded() {
    let g = registry::get("grushin").unwrap();
    let u = poly("x2", 2);
    let cs: Vec<f64> = (3..=7)
        .map(|k| {
            let ball =
                BallMeasure::new(&g, &[0.0, 0.0], 0.5f64.powi(k), 2.0, Flavor::D1, 4, TOL).unwrap();
            poincare_ratio(&g, &u, &ball, 50_000, 1).unwrap().implied_constant
        })
        .collect();
    assert!(spread(&cs) <= 1.3, "{:?}", cs);
}

#[test]
fn p_poincare_with_p_one_is_the_mean_value_form() {
    let g = registry::get("grushin_c11").unwrap();
    let u = TestFunction::from_system(&g, "v").unwrap();
    let ball = BallMeasure::new(&g, &[0.1, 0.0], 0.1, 1.0, Flavor::D1, 4, TOL).unwrap();
    let a = poincare_ratio(&g, &u, &ball, 20_000, 4).unwrap();
    let b = p_poincare_ratio(&g, &u, &ball, 1.0, 20_000, 4).unwrap();
    assert!((a.implied_constant - b.implied_constant).abs() <= 1e-9 * a.implied_constant);
    let ball2 = BallMeasure::new(&g, &[0.1, 0.0], 0.1, 2.0, Flavor::D1, 4, TOL).unwrap();
    assert!(matches!(
        p_poincare_ratio(&g, &u, &ball2, 2.0, 1000, 1),
        Err(Error::Invalid(_))
    ));
}

#[test]
fn p_poincare_on_heisenberg_is_bounded() {
    let h = registry::get("heisenberg").unwrap();
    let u = poly("x3", 3);
    let cs: Vec<f64> = (3..=5)
        .map(|k| {
            let ball =
                BallMeasure::new(&h, &[0.1, 0.0, 0.0], 0.5f64.powi(k), 1.0, Flavor::D1, 4, TOL)
                    .unwrap();
            p_poincare_ratio(&h, &u, &ball, 2.0, 50_000, 1).unwrap().implied_constant
        })
        .collect();
    assert!(spread(&cs) <= 1.3, "{:?}", cs);
}

#[test]
fn doubling_the_budget_moves_constants_little() {
    let h = registry::get("heisenberg_c11").unwrap();
    let u = TestFunction::from_system(&h, "v").unwrap();
    let ball = BallMeasure::new(&h, &[0.0; 3], 0.0625, 2.0, Flavor::D1, 4, TOL).unwrap();
    let a = poincare_ratio(&h, &u, &ball, 50_000, 9).unwrap().implied_constant;
    let b = poincare_ratio(&h, &u, &ball, 100_000, 9).unwrap().implied_constant;
    assert!((a / b - 1.0).abs() < 0.05, "{} {}", a, b);
}

#[test]
fn d_flavor_balls_are_supported() {
    let g = registry::get("grushin").unwrap();
    let u = poly("x2", 2);
    let ball = BallMeasure::new(&g, &[0.0, 0.0], 0.0625, 2.0, Flavor::D, 8, TOL).unwrap();
    let rep = poincare_ratio(&g, &u, &ball, 20_000, 1).unwrap();
    assert_eq!(rep.flavor, Flavor::D);
    assert!(rep.implied_constant > 0.0 && rep.implied_constant.is_finite());
}

#[test]
fn zero_bump_has_maximal_exponent() {
    let e = registry::get("euclid2").unwrap();
    let rep = sobolev_exponent(&e, &[0.0, 0.0], 0.2, 1.0, 0.0, 2, 2000, 1, TOL).unwrap();
    assert_eq!(rep.k, Some(3.0));
    assert!(rep.rows.iter().all(|r| r.ratios.iter().all(|v| *v == 0.0)));
}

#[test]
fn bumps_outside_the_ball_are_rejected() {
    let e = registry::get("euclid2").unwrap();
    let ball = BallMeasure::new(&e, &[0.0, 0.0], 0.1, 1.0, Flavor::D1, 8, TOL).unwrap();
    let phi = Bump::new(&e, &[0.0, 0.0], 0.2, 1.0).unwrap().test_function().unwrap();
    assert!(matches!(
        sobolev_ratio(&e, &phi, &ball, 1.0, &[1.5], 1000, 1),
        Err(Error::Support(_))
    ));
    let plain = poly("x1", 2);
    assert!(matches!(
        sobolev_ratio(&e, &plain, &ball, 1.0, &[1.5], 1000, 1),
        Err(Error::Support(_))
    ));
}

#[test]
fn lagrange_fixtures() {
    let g = registry::get("grushin").unwrap();
    let s = 0.3;
    let rep = lagrange_check(&g, &poly("x1^2", 2), &[0.0, 0.0], &[s, 0.0], TOL).unwrap();
    assert!((rep.lhs - s * s).abs() < 1e-12);
    assert!((rep.rhs - 2f64.sqrt() * s * s).abs() < 1e-9, "{:?}", rep);
    assert!(rep.holds);
    let c = lagrange_check(&g, &TestFunction::constant(3.0, 2), &[0.1, 0.2], &[0.3, 0.1], TOL)
        .unwrap();
    assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    assert!(c.holds);
    let same = lagrange_check(&g, &poly("x1 + x2", 2), &[0.1, 0.2], &[0.1, 0.2], TOL).unwrap();
    assert_eq!((same.lhs, same.rhs), (0.0, 0.0));
}

#[test]
fn lagrange_holds_on_random_pairs() {
    let mut r = rng::stream(21, "lagrange-test", 0);
    for name in registry::NAMES {
        let s = registry::get(name).unwrap();
        for fname in ["u", "v"] {
            let f = TestFunction::from_system(&s, fname).unwrap();
            for _ in 0..3 {
                let a: Vec<f64> = (0..s.dim).map(|_| r.gen_range(-0.5..0.5)).collect();
                let b: Vec<f64> = a.iter().map(|v| v + r.gen_range(-0.1..0.1)).collect();
                let rep = lagrange_check(&s, &f, &a, &b, TOL).unwrap();
                assert!(rep.holds, "{} {}: {:?}", name, fname, rep);
            }
        }
    }
}

#[test]
fn rough_poincare_remainder() {
    let g = registry::get("grushin").unwrap();
    let u = poly("x2", 2);
    let ball = BallMeasure::new(&g, &[0.0, 0.0], 0.05, 2.0, Flavor::D1, 4, TOL).unwrap();
    let rep = rough_poincare_decomposition(&g, &u, &ball, 5000, 1).unwrap();
    assert_eq!(rep.remainder_term, 0.0);

    let c = registry::get("grushin_c11").unwrap();
    let coeffs: Vec<f64> = (3..=6)
        .map(|k| {
            let ball =
                BallMeasure::new(&c, &[0.0, 0.0], 0.5f64.powi(k), 2.0, Flavor::D1, 4, TOL).unwrap();
            rough_poincare_decomposition(&c, &u, &ball, 20_000, 1).unwrap().coefficient
        })
        .collect();
    for w in coeffs.windows(2) {
        assert!(w[1] < w[0], "{:?}", coeffs);
    }
    assert!(coeffs[3] < 0.25 * coeffs[0], "{:?}", coeffs);
}

#[test]
fn samples_are_reproducible() {
    let h = registry::get("heisenberg").unwrap();
    let ball = BallMeasure::new(&h, &[0.0; 3], 0.1, 2.0, Flavor::D1, 4, TOL).unwrap();
    let a = ball.samples(5000, 3);
    let b = ball.samples(5000, 3);
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(p, q)| p.point == q.point && p.inner == q.inner));
    assert!(a.iter().all(|p| ball.contains(&p.point) || !p.inner));
}
