use hormander::fields::{BasisFamily, MultiIndex};
use hormander::flows::*;
use hormander::{registry, Error};

const TOL: f64 = 1e-10;

fn mi(v: &[usize]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

fn close(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
}

#[test]
fn exponential_matches_closed_forms() {
    let g = registry::get("grushin").unwrap();
    let y = exp_map(&g, 2, 0.5, &[0.5, 0.0], TOL).unwrap();
    assert!(close(&y, &[0.5, 0.25], 1e-13));
    let h = registry::get("heisenberg").unwrap();
    let x = [0.1, -0.3, 0.2];
    let t = 0.4;
    let y = exp_map(&h, 1, t, &x, TOL).unwrap();
    assert!(close(&y, &[x[0] + t, x[1], x[2] - x[1] * t / 2.0], 1e-13));
    let y = exp_map(&h, 2, -t, &x, TOL).unwrap();
    assert!(close(&y, &[x[0], x[1] - t, x[2] - x[0] * t / 2.0], 1e-13));
    // Nonpolynomial flow: X2 = (x + 0.3 x|x|) d_y keeps x fixed.
    let c = registry::get("grushin_c11").unwrap();
    let y = exp_map(&c, 2, 0.3, &[-0.4, 0.1], TOL).unwrap();
    assert!(close(&y, &[-0.4, 0.1 + 0.3 * (-0.4 - 0.3 * 0.16)], 1e-13));
}

#[test]
fn flows_leaving_the_domain_fail() {
    let g = registry::get("grushin").unwrap();
    assert!(matches!(
        exp_map(&g, 1, 2.5, &[0.0, 0.0], TOL),
        Err(Error::OutsideDomain { .. })
    ));
}

#[test]
fn factor_counts_follow_the_recursion() {
    assert_eq!(factor_count(1), 1);
    assert_eq!(factor_count(2), 4);
    assert_eq!(factor_count(3), 10);
    assert_eq!(c_factors(&mi(&[1, 1, 2]), 0.3).len(), 10);
    let f = c_factors(&mi(&[1, 2]), 0.5);
    let times: Vec<(usize, f64)> = f.iter().map(|x| (x.field, x.time)).collect();
    assert_eq!(times, vec![(1, 0.5), (2, 0.5), (1, -0.5), (2, -0.5)]);
}

#[test]
fn quasi_exponential_hand_checks() {
    let h = registry::get("heisenberg").unwrap();
    for t in [0.3, 0.05] {
        let y = quasi_exp(&h, &mi(&[1, 2]), t, &[0.0; 3], TOL).unwrap();
        assert!(close(&y, &[0.0, 0.0, t * t], 1e-14));
    }
    let y = e_map(&h, &mi(&[1, 2]), -0.2, &[0.0; 3], TOL).unwrap();
    assert!(close(&y, &[0.0, 0.0, -0.2], 1e-14));
    let g = registry::get("grushin").unwrap();
    let y = quasi_exp(&g, &mi(&[1, 2]), 0.3, &[0.0, 0.0], TOL).unwrap();
    assert!(close(&y, &[0.0, 0.09], 1e-14));
    let y = quasi_exp_general(&h, &mi(&[1, 2]), &[0.2, 0.5], &[0.0; 3], TOL).unwrap();
    assert!(close(&y, &[0.0, 0.0, 0.1], 1e-14));
}

#[test]
fn expansion_residuals_vanish_on_step_two_nilpotent_systems() {
    for name in ["heisenberg", "grushin"] {
        let sys = registry::get(name).unwrap();
        for t in [1e-1, 1e-2] {
            let r = expansion_residual(&sys, &mi(&[1, 2]), t, &vec![0.2; sys.dim], TOL).unwrap();
            assert!(r <= 1e-7, "{} t={} r={}", name, t, r);
        }
    }
}

#[test]
fn expansion_residual_decays_linearly_beyond_nilpotent_cases() {
    let text = "dim = 3\nnfields = 2\nstep = 3\ndomain = [-1,1]x[-1,1]x[-1,1]\n\
                field 1 smooth C{4}: 1 ; 0 ; 0\nfield 2 smooth C{4}: 0 ; 1 ; x1^2 + x1^3\n";
    let sys = hormander::fields::parse_system(text).unwrap();
    let res: Vec<f64> = (3..=8)
        .map(|k| {
            let t = 2f64.powi(-k);
            expansion_residual(&sys, &mi(&[1, 1, 2]), t, &[0.1, 0.0, 0.0], 1e-13).unwrap()
        })
        .collect();
    let slope = (res[0] / res[5]).ln() / (32f64).ln();
    assert!(slope >= 0.9, "slope {} residuals {:?}", slope, res);
}

#[test]
fn mixed_derivative_matches_bracket() {
    let h = registry::get("heisenberg").unwrap();
    let r = mixed_derivative_check(&h, 1, 2, &[0.0; 3], TOL).unwrap();
    assert!(close(&r.lhs, &[0.0, 0.0, 1.0], 1e-6));
    assert!(r.max_abs_diff <= 1e-6);
    for sys in registry::all() {
        for x in sys.inner.grid(3) {
            for i in 1..=sys.n() {
                for j in 1..=sys.n() {
                    let r = mixed_derivative_check(&sys, i, j, &x, TOL).unwrap();
                    let scale = 1.0 + hormander::linalg::norm(&r.lhs);
                    assert!(r.max_abs_diff <= 1e-6 * scale, "{} {:?} {}", sys.name, x, r.max_abs_diff);
                }
            }
        }
    }
}

#[test]
fn admissible_schedule_on_grushin() {
    let g = registry::get("grushin").unwrap();
    let d = 0.2;
    let spec = FlowSpec {
        pieces: vec![
            ControlPiece { duration: 0.5, controls: vec![(mi(&[1]), d)] },
            ControlPiece { duration: 0.5, controls: vec![(mi(&[2]), d)] },
        ],
    };
    let tr = admissible_solve(&g, &spec, &[0.0, 0.0], TOL, 4).unwrap();
    assert!(close(&tr.end, &[d / 2.0, d * d / 4.0], 1e-14));
    assert!((tr.class_bound - d).abs() < 1e-15);
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("s,x1,x2,piece\n"));
    assert_eq!(text.lines().count(), 10);
    let bad = FlowSpec { pieces: vec![ControlPiece { duration: 0.7, controls: vec![] }] };
    assert!(admissible_solve(&g, &bad, &[0.0, 0.0], TOL, 1).is_err());
}

#[test]
fn commutator_controls_drive_brackets() {
    let h = registry::get("heisenberg").unwrap();
    let spec = FlowSpec {
        pieces: vec![ControlPiece { duration: 1.0, controls: vec![(mi(&[1, 2]), 0.04)] }],
    };
    let tr = admissible_solve(&h, &spec, &[0.0; 3], TOL, 1).unwrap();
    assert!(close(&tr.end, &[0.0, 0.0, 0.04], 1e-14));
    assert!((tr.class_bound - 0.2).abs() < 1e-12);
}

#[test]
fn heisenberg_chart_closed_form_and_inverse() {
    let h = registry::get("heisenberg").unwrap();
    let basis = BasisFamily(vec![mi(&[1]), mi(&[2]), mi(&[1, 2])]);
    let chart = chart_at(&h, &[0.0; 3], &basis, TOL).unwrap();
    let bank = FieldBank::base(&h);
    let opts = FlowOptions::new(TOL).within(&h.domain);
    let hh = [0.2, -0.1, 0.05];
    let y = chart_forward(&bank, &chart, &hh, &opts).unwrap();
    assert!(close(&y, &[0.2, -0.1, 0.05 + 0.01], 1e-14));
    let inv = chart_inverse(&bank, &chart, &y, &opts).unwrap();
    assert!(close(&inv.h, &hh, 1e-9), "{:?}", inv);
    let back = chart_forward(&bank, &chart, &inv.h, &opts).unwrap();
    assert!(close(&back, &y, 10.0 * TOL));
}

#[test]
fn chart_inverse_round_trips_on_all_systems() {
    for sys in registry::all() {
        let bank = FieldBank::base(&sys);
        let opts = FlowOptions::new(TOL).within(&sys.domain);
        for x in sys.inner.shrink(0.2).grid(3) {
            let basis = hormander::fields::optimal_basis(&sys, &x, 0.05).unwrap().basis;
            let chart = chart_at(&sys, &x, &basis, TOL).unwrap();
            let y: Vec<f64> = x.iter().enumerate().map(|(k, v)| v + 0.01 * (k as f64 + 1.0)).collect();
            let inv = chart_inverse(&bank, &chart, &y, &opts).unwrap();
            let back = chart_forward(&bank, &chart, &inv.h, &opts).unwrap();
            assert!(close(&back, &y, 10.0 * TOL), "{} {:?}", sys.name, x);
        }
    }
}

#[test]
fn chart_inverse_refuses_far_targets() {
    let h = registry::get("heisenberg").unwrap();
    let basis = BasisFamily(vec![mi(&[1]), mi(&[2]), mi(&[1, 2])]);
    let chart = chart_at(&h, &[0.5, 0.5, 0.5], &basis, TOL).unwrap();
    let bank = FieldBank::base(&h);
    let opts = FlowOptions::new(TOL).within(&h.domain);
    assert!(matches!(
        chart_inverse(&bank, &chart, &[-0.5, -0.5, -0.5], &opts),
        Err(Error::Convergence(_))
    ));
}

#[test]
fn certified_integration_reports_small_discrepancy() {
    let c = registry::get("heisenberg_c11").unwrap();
    let bank = FieldBank::base(&c);
    let f = bank.single(2).unwrap();
    let opts = FlowOptions::new(TOL);
    let (out, err) = integrate_certified(f, &[-0.3, 0.1, 0.0], 0.6, &opts).unwrap();
    assert!(err <= 10.0 * TOL);
    assert!(out.accepted >= 1);
}

#[test]
fn class_bound_of_factor_lists() {
    let f = c_factors(&mi(&[1, 2]), 0.1);
    assert!((class_bound(&f) - 0.4).abs() < 1e-15);
    let drift = [Factor { field: 0, time: 0.04 }];
    assert!((class_bound(&drift) - 0.2).abs() < 1e-15);
}
