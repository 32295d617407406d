use hormander::fields::*;
use hormander::registry;
use hormander::Error;

fn mi(v: &[usize]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

// Independent oracle: [X, Y] = (DY) X - (DX) Y with finite-difference Jacobians
// of the plain field evaluations.
fn fd_bracket(
    x_field: &dyn Fn(&[f64]) -> Vec<f64>,
    y_field: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
) -> Vec<f64> {
    let p = x.len();
    let h = 1e-5;
    let jac = |f: &dyn Fn(&[f64]) -> Vec<f64>| -> Vec<Vec<f64>> {
        let mut j = vec![vec![0.0; p]; p];
        for m in 0..p {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[m] += h;
            b[m] -= h;
            let (fa, fb) = (f(&a), f(&b));
            for r in 0..p {
                j[r][m] = (fa[r] - fb[r]) / (2.0 * h);
            }
        }
        j
    };
    let (jx, jy) = (jac(x_field), jac(y_field));
    let (vx, vy) = (x_field(x), y_field(x));
    (0..p)
        .map(|r| (0..p).map(|m| jy[r][m] * vx[m] - jx[r][m] * vy[m]).sum())
        .collect()
}

#[test]
fn heisenberg_bracket_is_vertical_everywhere() {
    let sys = registry::get("heisenberg").unwrap();
    for x in [[0.0, 0.0, 0.0], [0.3, -0.7, 0.2], [-0.5, 0.5, 0.9]] {
        let v = commutator(&sys, &mi(&[1, 2]), &x).unwrap();
        assert!((v[0]).abs() < 1e-15 && v[1].abs() < 1e-15);
        assert!((v[2] - 1.0).abs() < 1e-15);
        let w = commutator(&sys, &mi(&[2, 1]), &x).unwrap();
        assert!((w[2] + 1.0).abs() < 1e-15);
    }
}

#[test]
fn martinet_third_order_bracket() {
    let sys = registry::get("martinet").unwrap();
    let v = commutator(&sys, &mi(&[1, 1, 2]), &[0.2, 0.1, -0.3]).unwrap();
    assert_eq!(v, vec![0.0, 0.0, 2.0]);
    let w = commutator(&sys, &mi(&[1, 2]), &[0.25, 0.0, 0.0]).unwrap();
    assert!((w[2] - 0.5).abs() < 1e-15);
}

#[test]
fn brackets_match_finite_difference_oracle() {
    for name in registry::NAMES {
        let sys = registry::get(name).unwrap();
        let x = vec![0.31; sys.dim];
        for i in 1..=sys.n() {
            for j in 1..=sys.n() {
                let fi = |y: &[f64]| sys.field(i).unwrap().eval_vec(y);
                let fj = |y: &[f64]| sys.field(j).unwrap().eval_vec(y);
                let oracle = fd_bracket(&fi, &fj, &x);
                let got = commutator(&sys, &mi(&[i, j]), &x).unwrap();
                for (a, b) in got.iter().zip(&oracle) {
                    assert!((a - b).abs() < 1e-7, "{} ({},{}) {} vs {}", name, i, j, a, b);
                }
            }
        }
    }
}

#[test]
fn jet_and_symbolic_brackets_agree() {
    for name in registry::NAMES {
        let sys = registry::get(name).unwrap();
        for idx in canonical_indices(&sys) {
            let sym = symbolic_bracket(&sys, &idx).unwrap();
            for x in sys.inner.grid(3) {
                let a = commutator(&sys, &idx, &x).unwrap();
                for (k, e) in sym.iter().enumerate() {
                    assert!((e.eval(&x) - a[k]).abs() < 1e-12, "{} {} at {:?}", name, idx, x);
                }
            }
        }
    }
}

#[test]
fn bracket_preconditions_are_enforced() {
    let sys = registry::get("heisenberg").unwrap();
    assert!(matches!(
        commutator(&sys, &mi(&[1, 2, 1]), &[0.0; 3]),
        Err(Error::WeightExceedsStep { weight: 3, step: 2 })
    ));
    assert!(matches!(commutator(&sys, &mi(&[3]), &[0.0; 3]), Err(Error::Index(_))));
    assert!(matches!(commutator(&sys, &mi(&[0]), &[0.0; 3]), Err(Error::Index(_))));
    let c11 = registry::get("grushin_c11").unwrap();
    let mut deep = c11.clone();
    deep.step = 4;
    assert!(matches!(
        commutator(&deep, &mi(&[1, 1, 1, 2]), &[0.1, 0.0]),
        Err(Error::Smoothness(_))
    ));
}

#[test]
fn antisymmetry_and_jacobi_identity() {
    let sys = registry::get("martinet").unwrap();
    let x = [0.4, -0.2, 0.1];
    let a = commutator(&sys, &mi(&[1, 2]), &x).unwrap();
    let b = commutator(&sys, &mi(&[2, 1]), &x).unwrap();
    for k in 0..3 {
        assert_eq!(a[k], -b[k]);
    }
    // [X1,[X2,X1]] + [X2,[X1,X1]] + [X1,[X1,X2]] = 0 reduces to antisymmetry of the outer bracket.
    let c = commutator(&sys, &mi(&[1, 2, 1]), &x).unwrap();
    let d = commutator(&sys, &mi(&[1, 1, 2]), &x).unwrap();
    for k in 0..3 {
        assert!((c[k] + d[k]).abs() < 1e-14);
    }
}

#[test]
fn rank_and_best_basis() {
    let g = registry::get("grushin").unwrap();
    let r = hormander_rank(&g, &[0.0, 0.0]).unwrap();
    assert_eq!(r.rank, 2);
    assert_eq!(r.basis, BasisFamily(vec![mi(&[1]), mi(&[1, 2])]));
    for name in registry::NAMES {
        let sys = registry::get(name).unwrap();
        for x in sys.inner.grid(5) {
            assert_eq!(hormander_rank(&sys, &x).unwrap().rank, sys.dim, "{}", name);
        }
    }
    let m = registry::get("martinet").unwrap();
    let r = hormander_rank(&m, &[0.0; 3]).unwrap();
    assert_eq!(r.basis, BasisFamily(vec![mi(&[1]), mi(&[2]), mi(&[1, 1, 2])]));
}

#[test]
fn rank_deficiency_is_reported_with_the_point() {
    let text = "dim = 2\nnfields = 1\nstep = 2\ndomain = [-1,1]x[-1,1]\nfield 1 smooth C{2}: 1 ; 0\n";
    let sys = parse_system(text).unwrap();
    match hormander_rank(&sys, &[0.5, 0.5]) {
        Err(Error::RankDeficient { point, rank, dim }) => {
            assert_eq!((point, rank, dim), (vec![0.5, 0.5], 1, 2))
        }
        other => panic!("unexpected {:?}", other),
    }
}

#[test]
fn optimal_basis_follows_scale() {
    let g = registry::get("grushin").unwrap();
    let b = optimal_basis(&g, &[1.0, 0.0], 0.01).unwrap();
    assert_eq!(b.basis, BasisFamily(vec![mi(&[1]), mi(&[2])]));
    let b = optimal_basis(&g, &[0.0, 0.0], 0.5).unwrap();
    assert_eq!(b.basis, BasisFamily(vec![mi(&[1]), mi(&[1, 2])]));
    let b = optimal_basis(&g, &[0.01, 0.0], 0.5).unwrap();
    assert_eq!(b.basis, BasisFamily(vec![mi(&[1]), mi(&[1, 2])]));
    let h = registry::get("heisenberg").unwrap();
    for rho in [1e-3, 0.1, 1.0] {
        let b = optimal_basis(&h, &[0.2, 0.3, 0.0], rho).unwrap();
        assert_eq!(b.basis, BasisFamily(vec![mi(&[1]), mi(&[2]), mi(&[1, 2])]));
    }
    // One-half threshold against every candidate.
    for rho in [0.003, 0.05, 0.4] {
        let x = [0.1, 0.2];
        let b = optimal_basis(&g, &x, rho).unwrap();
        for c in candidate_bases(&g) {
            let other = lambda(&g, &c, &x).unwrap().abs() * rho.powi(c.weight() as i32);
            assert!(b.score > 0.5 * other);
        }
    }
}

#[test]
fn taylor_system_is_exact_for_polynomial_fields() {
    let h = registry::get("heisenberg").unwrap();
    let t = taylor_system(&h, &[0.1, -0.2, 0.3]).unwrap();
    for x in h.inner.grid(3) {
        for i in 1..=2 {
            let a = h.field(i).unwrap().eval_vec(&x);
            let b = t.system.field(i).unwrap().eval_vec(&x);
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-15);
            }
        }
    }
    assert!(t.validity_radius >= 0.5 - 1e-12);
}

#[test]
fn taylor_remainder_decays_for_lipschitz_systems() {
    for name in ["grushin_c11", "heisenberg_c11"] {
        let sys = registry::get(name).unwrap();
        let x0 = vec![0.0; sys.dim];
        let t = taylor_system(&sys, &x0).unwrap();
        for idx in canonical_indices(&sys) {
            let expect = sys.step as f64 - idx.weight() as f64 + 0.9;
            let sup = |s: f64| {
                let mut m: f64 = 0.0;
                for k in 0..16 {
                    let th = k as f64 * std::f64::consts::PI / 8.0 + 0.1;
                    let mut x = x0.clone();
                    x[0] = s * th.cos();
                    x[1] = s * th.sin();
                    let a = commutator(&sys, &idx, &x).unwrap();
                    let b = commutator(&t.system, &idx, &x).unwrap();
                    m = m.max(hormander::linalg::dist(&a, &b));
                }
                m
            };
            let (s1, s2) = (1.0 / 64.0, 1.0 / 512.0);
            let (r1, r2) = (sup(s1), sup(s2));
            if r1 < 1e-13 {
                continue;
            }
            let slope = (r1 / r2).ln() / (s1 / s2).ln();
            assert!(slope >= expect, "{} {} slope {}", name, idx, slope);
        }
    }
}

#[test]
fn taylor_remainder_is_refused_outside_validity() {
    let sys = registry::get("grushin_c11").unwrap();
    let t = taylor_system(&sys, &[0.0, 0.0]).unwrap();
    let far = [t.validity_radius * 1.5, 0.0];
    assert!(matches!(
        taylor_remainder(&sys, &t, &mi(&[2]), &far),
        Err(Error::OutsideValidity { .. })
    ));
    let near = [t.validity_radius * 0.25, 0.0];
    assert!(taylor_remainder(&sys, &t, &mi(&[2]), &near).is_ok());
}

#[test]
fn system_files_round_trip() {
    for name in registry::NAMES {
        let sys = registry::get(name).unwrap();
        let text = system_to_text(&sys);
        let again = parse_system(&text).unwrap();
        assert_eq!(again, sys, "{}", name);
    }
}

#[test]
fn system_file_errors_carry_positions() {
    let bad = "dim = 2\nnfields = 1\nstep = 2\ndomain = [-1,1]x[-1,1]\nfield 1 smooth C{2}: 1 ; x1 + * 2\n";
    match parse_system(bad) {
        Err(Error::Parse { line, column, .. }) => {
            assert_eq!(line, 5);
            assert_eq!(&bad.lines().nth(4).unwrap()[column - 1..column], "*");
        }
        other => panic!("unexpected {:?}", other),
    }
    let wrong_count = "dim = 2\nnfields = 1\nstep = 2\ndomain = [-1,1]x[-1,1]\nfield 1 smooth C{2}: 1\n";
    assert!(matches!(parse_system(wrong_count), Err(Error::Parse { line: 5, .. })));
    let missing = "dim = 2\nnfields = 2\nstep = 2\ndomain = [-1,1]x[-1,1]\nfield 1 smooth C{2}: 1 ; 0\n";
    assert!(matches!(parse_system(missing), Err(Error::System(_))));
}

#[test]
fn smoothness_audit_flags_overclaimed_regularity() {
    for sys in registry::all() {
        assert!(audit_smoothness(&sys).is_empty(), "{}", sys.name);
    }
    let text = "dim = 2\nnfields = 2\nstep = 2\ndomain = [-1,1]x[-1,1]\nfield 1 smooth C{4}: 1 ; 0\nfield 2 smooth C{2}: 0 ; x1*abs(x1)\n";
    let sys = parse_system(text).unwrap();
    let issues = audit_smoothness(&sys);
    assert!(!issues.is_empty());
    assert_eq!(issues[0].field, 2);
}
