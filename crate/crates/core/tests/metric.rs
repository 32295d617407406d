use hormander::metric::*;
use hormander::{registry, rng, Error};
use rand::Rng;

const TOL: f64 = 1e-10;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn identical_points_have_zero_distance() {
    for name in registry::NAMES {
        let s = registry::get(name).unwrap();
        let x = vec![0.1; s.dim];
        let up = d1_upper(&s, &x, &x, TOL).unwrap();
        assert_eq!((up.lower, up.upper), (0.0, 0.0));
        assert!(up.witness.unwrap().segments.is_empty());
        let res = Resolution::for_scale(0.1, 8);
        assert_eq!(d1_graph(&s, &x, &x, &res, TOL).unwrap(), 0.0);
        assert_eq!(d_graph(&s, &x, &x, 0.1, &res, 12, TOL).unwrap(), 0.0);
        let p = connect(&s, &x, &x, TOL).unwrap();
        assert!(p.segments.is_empty());
        let sub = subunit_reparametrize(&p, s.n()).unwrap();
        assert_eq!(sub.subunit.unwrap().hitting_time, 0.0);
    }
    let e = registry::get("euclid2").unwrap();
    let c = euclid_constants(&e, 5).unwrap();
    let b = euclid_bracket(&e, &c, &[0.2, 0.1], &[0.2, 0.1]).unwrap();
    assert_eq!((b.lower, b.upper), (0.0, 0.0));
}

#[test]
fn d1_upper_on_heisenberg() {
    let h = registry::get("heisenberg").unwrap();
    let a = 0.05;
    let up = d1_upper(&h, &[0.0; 3], &[a, 0.0, 0.0], TOL).unwrap();
    assert!(up.upper <= 1.05 * a, "{}", up.upper);
    let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&c: &f64| d1_upper(&h, &[0.0; 3], &[0.0, 0.0, c], TOL).unwrap().upper / c.sqrt())
        .collect();
    for r in &ratios {
        assert!(rel(*r, ratios[0]) <= 0.1, "{:?}", ratios);
    }
}

#[test]
fn witnesses_reproduce_their_bounds() {
    let mut r = rng::stream(3, "metric-witness", 0);
    for name in ["grushin", "heisenberg", "martinet", "heisenberg_c11"] {
        let s = registry::get(name).unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..s.dim).map(|_| r.gen_range(-0.5..0.5)).collect();
            let y: Vec<f64> = x.iter().map(|v| v + r.gen_range(-0.1..0.1)).collect();
            let up = d1_upper(&s, &x, &y, TOL).unwrap();
            let w = up.witness.unwrap();
            let end = w.reintegrate(&s, TOL).unwrap();
            let miss = hormander::linalg::dist(&end, &y);
            assert!(miss <= 10.0 * TOL, "{} miss {}", name, miss);
            assert_eq!(w.class_bound, up.upper);
            // Every coefficient of the unit-time schedule is at most the bound.
            let spec = w.schedule();
            for piece in &spec.pieces {
                for (idx, a) in &piece.controls {
                    assert!(a.abs() <= up.upper.powi(idx.weight() as i32) * (1.0 + 1e-12));
                }
            }
        }
    }
}

#[test]
fn d1_graph_matches_straight_lines() {
    let g = registry::get("grushin").unwrap();
    let res = Resolution::for_scale(0.2, 8);
    let d = d1_graph(&g, &[0.0, 0.0], &[0.2, 0.0], &res, TOL).unwrap();
    assert!((d - 0.2).abs() <= res.step + 1e-12, "{}", d);
    let e = registry::get("euclid2").unwrap();
    let mut r = rng::stream(5, "metric-euclid", 0);
    for _ in 0..10 {
        let x = [r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5)];
        let y = [x[0] + r.gen_range(-0.2..0.2), x[1] + r.gen_range(-0.2..0.2)];
        let exact = hormander::linalg::dist(&x, &y);
        let res = Resolution::for_scale(exact, 8);
        let d1 = d1_graph(&e, &x, &y, &res, TOL).unwrap();
        let d = d_graph(&e, &x, &y, d1, &res, 12, TOL).unwrap();
        assert!((d1 - exact).abs() <= 2.0 * res.step, "{} vs {}", d1, exact);
        assert!((d - exact).abs() <= 2.0 * res.step, "{} vs {}", d, exact);
    }
}

#[test]
fn graph_distances_scale_with_the_square_root_on_heisenberg() {
    let h = registry::get("heisenberg").unwrap();
    let mut c1 = Vec::new();
    let mut cd = Vec::new();
    for c in [1e-2, 1e-3] {
        let y = [0.0, 0.0, c];
        let up = d1_upper(&h, &[0.0; 3], &y, TOL).unwrap().upper;
        let res = Resolution::for_scale(up, 8);
        let d1 = d1_graph(&h, &[0.0; 3], &y, &res, TOL).unwrap();
        let d = d_graph(&h, &[0.0; 3], &y, d1, &res, 12, TOL).unwrap();
        assert!(d <= d1 + 2.0 * res.step);
        c1.push(d1 / c.sqrt());
        cd.push(d / c.sqrt());
    }
    assert!(rel(c1[1], c1[0]) <= 0.1, "{:?}", c1);
    assert!(rel(cd[1], cd[0]) <= 0.1, "{:?}", cd);
}

#[test]
fn d1_graph_is_a_metric_up_to_resolution() {
    let g = registry::get("grushin").unwrap();
    let res = Resolution::for_scale(0.1, 8);
    let mut r = rng::stream(11, "metric-axioms", 0);
    for _ in 0..20 {
        let c = [r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5)];
        let p: Vec<Vec<f64>> = (0..3)
            .map(|_| vec![c[0] + r.gen_range(-0.05..0.05), c[1] + r.gen_range(-0.005..0.005)])
            .collect();
        let d = |a: usize, b: usize| d1_graph(&g, &p[a], &p[b], &res, TOL).unwrap();
        let (ab, ba, bc, ac) = (d(0, 1), d(1, 0), d(1, 2), d(0, 2));
        assert!((ab - ba).abs() <= 2.0 * res.step, "{} {}", ab, ba);
        assert!(ac <= ab + bc + 3.0 * res.step, "{} > {} + {}", ac, ab, bc);
    }
}

#[test]
fn euclidean_bracket_constants() {
    let e = registry::get("euclid2").unwrap();
    let c = euclid_constants(&e, 5).unwrap();
    // Only X1 and X2 are nonzero among brackets of weight <= 2, each of norm 1.
    assert!((c.k - 2.0).abs() < 1e-12, "{}", c.k);
    let (x, y) = ([0.1, 0.2], [0.4, -0.2]);
    let b = euclid_bracket(&e, &c, &x, &y).unwrap();
    assert!((b.lower - 0.5 / c.k).abs() < 1e-12);
    assert!(b.lower <= 0.5 && 0.5 <= b.upper);

    let h = registry::get("heisenberg").unwrap();
    let c = euclid_constants(&h, 5).unwrap();
    let up = |s: f64| euclid_bracket(&h, &c, &[0.0; 3], &[0.0, 0.0, s]).unwrap().upper;
    let ratio = up(1e-4) / up(1e-6);
    assert!(rel(ratio, 10.0) <= 0.05, "{}", ratio);
}

#[test]
fn euclidean_bracket_encloses_graph_distances() {
    let h = registry::get("heisenberg").unwrap();
    let c = euclid_constants(&h, 5).unwrap();
    let mut r = rng::stream(7, "metric-order", 0);
    for _ in 0..5 {
        let x: Vec<f64> = (0..3).map(|_| r.gen_range(-0.4..0.4)).collect();
        let y: Vec<f64> = x.iter().map(|v| v + r.gen_range(-0.02..0.02)).collect();
        let b = euclid_bracket(&h, &c, &x, &y).unwrap();
        let up = d1_upper(&h, &x, &y, TOL).unwrap().upper;
        let res = Resolution::for_scale(up, 8);
        let d1 = d1_graph(&h, &x, &y, &res, TOL).unwrap();
        let d = d_graph(&h, &x, &y, d1, &res, 12, TOL).unwrap();
        let slack = 2.0 * res.step;
        assert!(b.lower <= d + slack && d <= b.upper + slack, "{:?} {}", b, d);
        assert!(d <= d1 + slack && d1 <= up + slack, "{} {} {}", d, d1, up);
    }
}

#[test]
fn euclidean_ball_area() {
    let e = registry::get("euclid2").unwrap();
    let rho = 0.1;
    let b = ball_volume(
        &e,
        &[0.0, 0.0],
        rho,
        Flavor::D1,
        BallMethod::FloodFill { steps: 16 },
        1,
        TOL,
    )
    .unwrap();
    let area = std::f64::consts::PI * rho * rho;
    assert!(rel(b.volume, area) <= 0.03, "{} vs {}", b.volume, area);
    let z = ball_volume(&e, &[0.0, 0.0], 0.0, Flavor::D1, BallMethod::FloodFill { steps: 8 }, 1, TOL)
        .unwrap();
    assert_eq!(z.volume, 0.0);
}

#[test]
fn rejection_sampling_agrees_with_flood_fill() {
    let e = registry::get("euclid2").unwrap();
    let m = BallMethod::Rejection {
        samples: 20_000,
        membership: Membership::Graph,
    };
    let b = ball_volume(&e, &[0.0, 0.0], 0.1, Flavor::D1, m, 1, TOL).unwrap();
    let area = std::f64::consts::PI * 0.01;
    assert!(b.ci.0 <= area * 1.03 && area * 0.97 <= b.ci.1, "{:?} vs {}", b.ci, area);
    let again = ball_volume(&e, &[0.0, 0.0], 0.1, Flavor::D1, m, 1, TOL).unwrap();
    assert_eq!(b.volume, again.volume);
}

#[test]
fn chart_membership_gives_an_inner_ball() {
    // Chart paths on the plane run along the axes, so their class bound is
    // |a| + |b| and the chart ball is the diamond of area 2 rho^2.
    let e = registry::get("euclid2").unwrap();
    let m = BallMethod::Rejection {
        samples: 20_000,
        membership: Membership::Chart,
    };
    let b = ball_volume(&e, &[0.0, 0.0], 0.1, Flavor::D1, m, 1, TOL).unwrap();
    assert!(b.ci.0 <= 0.02 && 0.02 <= b.ci.1, "{:?}", b.ci);
}

#[test]
fn heisenberg_doubles_by_sixteen() {
    let h = registry::get("heisenberg").unwrap();
    let rows = doubling_sweep(&h, &[0.0; 3], &[0.0625, 0.03125], Flavor::D1, 8, TOL).unwrap();
    for row in rows {
        assert!(rel(row.ratio, 16.0) <= 0.1, "{:?}", row);
    }
}

#[test]
fn volume_formula_ratios_are_stable() {
    let radii = [0.0625, 0.03125, 0.015625];
    let check = |name: &str, x0: &[f64], weight: usize| {
        let s = registry::get(name).unwrap();
        let rows = volume_formula_ratio(&s, x0, &radii, Flavor::D1, 8, TOL).unwrap();
        for row in &rows {
            assert_eq!(row.dominant_weight, weight, "{} {:?}", name, row);
            assert!(rel(row.ratio, rows[0].ratio) <= 0.15, "{} {:?}", name, rows);
        }
    };
    check("heisenberg", &[0.0; 3], 4);
    check("grushin", &[0.0, 0.0], 3);
    check("grushin", &[0.5, 0.0], 2);
}

#[test]
fn ball_inclusion_constants() {
    let g = registry::get("grushin").unwrap();
    let rep = ball_inclusion_check(&g, &[0.0, 0.0], 0.1, 8, TOL).unwrap();
    assert!(rel(rep.c1, 1.0) <= 0.125 && rel(rep.c2, 1.0) <= 0.125, "{:?}", rep);
    let c = registry::get("grushin_c11").unwrap();
    let rep = ball_inclusion_check(&c, &[0.0, 0.0], 0.1, 8, TOL).unwrap();
    assert!(rep.c1 >= 0.5 && rep.c2 <= 2.0 && rep.c1 <= 1.0 && rep.c2 >= 1.0, "{:?}", rep);
}

#[test]
fn connect_reproduces_closed_form_paths() {
    let h = registry::get("heisenberg").unwrap();
    let c = 0.01f64;
    let p = connect(&h, &[0.0; 3], &[0.0, 0.0, c], TOL).unwrap();
    let fields: Vec<usize> = p.segments.iter().map(|f| f.field).collect();
    assert_eq!(fields, vec![1, 2, 1, 2]);
    let s = c.sqrt();
    for (f, sign) in p.segments.iter().zip([1.0, 1.0, -1.0, -1.0]) {
        assert!((f.time - sign * s).abs() < 1e-9, "{:?}", p.segments);
    }
    let sub = subunit_reparametrize(&p, 2).unwrap().subunit.unwrap();
    assert!((sub.hitting_time - 4.0 * s).abs() < 1e-9);
    for piece in &sub.pieces {
        assert!(piece.controls.iter().map(|a| a * a).sum::<f64>() <= 1.0);
    }

    let g = registry::get("grushin").unwrap();
    let p = connect(&g, &[0.0, 0.0], &[0.3, 0.0], TOL).unwrap();
    assert_eq!(p.segments.len(), 1);
    assert_eq!(p.segments[0].field, 1);
    assert!((p.segments[0].time - 0.3).abs() < 1e-12);
    let sub = subunit_reparametrize(&p, 2).unwrap().subunit.unwrap();
    assert!((sub.hitting_time - 0.3).abs() < 1e-12);
    assert_eq!(sub.pieces[0].controls, vec![1.0, 0.0]);
}

#[test]
fn connect_handles_random_pairs() {
    for name in registry::NAMES {
        let s = registry::get(name).unwrap();
        let mut r = rng::stream(17, name, 0);
        for _ in 0..10 {
            let x: Vec<f64> = (0..s.dim).map(|_| r.gen_range(-0.8..0.8)).collect();
            let y: Vec<f64> = (0..s.dim).map(|_| r.gen_range(-0.8..0.8)).collect();
            let p = connect(&s, &x, &y, TOL).unwrap();
            let end = p.reintegrate(&s, TOL).unwrap();
            assert!(hormander::linalg::dist(&end, &y) <= 10.0 * TOL, "{}", name);
        }
    }
}

#[test]
fn subunit_form_rejects_drift() {
    let text = "name = drifted
dim = 2
nfields = 1
step = 2
domain = [-1,1]x[-1,1]
drift smooth C{4}: 0 ; x1
field 1 smooth C{4}: 1 ; 0
";
    let s = hormander::fields::parse_system(text).unwrap();
    let p = AdmissiblePath {
        flavor: Flavor::D1,
        start: vec![0.0, 0.0],
        target: vec![0.0, 0.0],
        segments: vec![hormander::flows::Factor { field: 0, time: 0.1 }],
        nodes: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        class_bound: 0.1,
        subunit: None,
    };
    assert!(matches!(subunit_reparametrize(&p, s.n()), Err(Error::Invalid(_))));
}

#[test]
fn distance_equivalence_on_the_plane() {
    let e = registry::get("euclid2").unwrap();
    let pairs = vec![
        (vec![0.0, 0.0], vec![0.05, 0.02]),
        (vec![0.1, 0.1], vec![0.1, 0.1]),
        (vec![-0.2, 0.3], vec![-0.23, 0.34]),
    ];
    let stats = distance_equivalence_ratio(&e, &pairs, 8, TOL).unwrap();
    assert_eq!(stats.skipped, 1);
    assert_eq!(stats.violations, 0);
    for p in &stats.pairs {
        assert!((p.ratio - 1.0).abs() <= 0.25, "{:?}", p);
    }
}

#[test]
fn connect_routes_around_the_singular_plane() {
    // Moving x3 far on martinet is cheap only away from x1 = 0; the straight
    // chart chain costs about 40 here.
    let s = registry::get("martinet").unwrap();
    let x = [0.573, 0.637, 0.458];
    let y = [-0.224, 0.667, -0.419];
    let p = connect(&s, &x, &y, TOL).unwrap();
    let end = p.reintegrate(&s, TOL).unwrap();
    assert!(hormander::linalg::dist(&end, &y) <= 10.0 * TOL);
    let up = d1_upper(&s, &x, &y, TOL).unwrap().upper;
    let res = Resolution::for_pair(&s, up, 8);
    let d = d1_graph(&s, &x, &y, &res, TOL).unwrap();
    assert!(p.class_bound <= 2.0 * (d + 2.0 * res.step), "{} vs {}", p.class_bound, d);
}

#[test]
fn far_pairs_resolve_on_the_graph() {
    // Loose chart bounds exceed the domain; the resolution is capped by it.
    let s = registry::get("heisenberg").unwrap();
    let x = [-0.748, 0.736, 0.525];
    let y = [-0.350, 0.553, -0.740];
    let up = d1_upper(&s, &x, &y, TOL).unwrap().upper;
    assert!(up > 2.0);
    let res = Resolution::for_pair(&s, up, 8);
    assert!(res.step <= 0.25);
    let d = d1_graph(&s, &x, &y, &res, TOL).unwrap();
    assert!(d > 0.0 && d <= up);
}
