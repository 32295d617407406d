use super::commands::{expansion_sweep, random_pairs, random_point, variation};
use super::report::{Report, Table};
use super::RunConfig;
use crate::error::{Error, Result};
use crate::fields::{
    bracket_values, canonical_indices, hormander_rank, symbolic_bracket, VectorFieldSystem,
};
use crate::flows::mixed_derivative_check;
use crate::inequality::{lagrange_check, poincare_ratio, BallMeasure, TestFunction};
use crate::linalg;
use crate::metric::{connect, doubling_sweep, Flavor, DEFAULT_STEPS};
use crate::rng;
use crate::stats;
use serde_json::{json, Map, Value};

const POINTS: usize = 5;
const PAIRS: usize = 10;
const POINCARE_SAMPLES: usize = 20_000;
const POINCARE_STEPS: usize = 4;

struct Suite {
    report: Report,
    table: Table,
    estimate: Map<String, Value>,
}

impl Suite {
    fn record(&mut self, name: &str, outcome: Result<(bool, f64, String)>) {
        let (passed, value, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, f64::NAN, e.to_string()),
        };
        self.table.push(vec![
            name.to_string(),
            passed.to_string(),
            value.to_string(),
            detail.clone(),
        ]);
        self.estimate.insert(
            name.to_string(),
            if value.is_finite() { json!(value) } else { Value::Null },
        );
        self.report.check(name, passed, detail);
    }
}

/// Quick end-to-end checks of one system with small budgets.
pub fn certify(sys: &VectorFieldSystem, config: &RunConfig) -> Result<Report> {
    let tol = config.tol;
    let seed = config.seed;
    let mut r = rng::stream(seed, "certify", 0);
    let points: Vec<Vec<f64>> = (0..POINTS).map(|_| random_point(sys, &mut r)).collect();
    let mut s = Suite {
        report: Report::new("certify"),
        table: Table::new("certify", &["check", "passed", "value", "detail"]),
        estimate: Map::new(),
    };
    s.report.parameters = json!({"points": POINTS, "pairs": PAIRS,
        "poincare_samples": POINCARE_SAMPLES, "tol": tol});

    s.record("rank", rank(sys));
    s.record("commutators", commutators(sys, &points));
    s.record("mixed_derivative", mixed(sys, &points, tol));
    s.record("expansion", expansion(sys, tol));
    if sys.has_drift() {
        let skip = Err(Error::Invalid("not available for systems with drift".into()));
        for name in ["connect", "doubling", "poincare", "lagrange"] {
            s.record(name, skip.clone());
        }
    } else {
        s.record("connect", connectivity(sys, seed, tol));
        s.record("doubling", doubling(sys, tol));
        s.record("poincare", poincare(sys, seed, tol));
        s.record("lagrange", lagrange(sys, seed, tol));
    }
    let Suite {
        mut report,
        table,
        estimate,
    } = s;
    report.estimate = Value::Object(estimate);
    report.resolution = json!({"steps": DEFAULT_STEPS, "poincare_steps": POINCARE_STEPS});
    report.tables = vec![table];
    Ok(report)
}

fn rank(sys: &VectorFieldSystem) -> Result<(bool, f64, String)> {
    let grid = sys.inner.grid(4);
    let mut min_det = f64::INFINITY;
    for x in &grid {
        min_det = min_det.min(hormander_rank(sys, x)?.det.abs());
    }
    Ok((
        min_det > 0.0,
        min_det,
        format!("full rank on {} grid points, min |det| {:.3e}", grid.len(), min_det),
    ))
}

fn commutators(sys: &VectorFieldSystem, points: &[Vec<f64>]) -> Result<(bool, f64, String)> {
    let mut worst: f64 = 0.0;
    for x in points {
        let vals = bracket_values(sys, x)?;
        for (idx, v) in vals.indices.iter().zip(&vals.values) {
            let sym: Vec<f64> = symbolic_bracket(sys, idx)?.iter().map(|e| e.eval(x)).collect();
            worst = worst.max(linalg::max_abs_diff(v, &sym) / (1.0 + linalg::norm(v)));
        }
    }
    Ok((
        worst <= 1e-10,
        worst,
        format!("jet vs symbolic, max relative difference {:.3e}", worst),
    ))
}

fn mixed(sys: &VectorFieldSystem, points: &[Vec<f64>], tol: f64) -> Result<(bool, f64, String)> {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 1..=sys.n() {
        for j in (i + 1)..=sys.n() {
            for x in points {
                match mixed_derivative_check(sys, i, j, x, tol) {
                    Ok(rep) => {
                        worst = worst.max(rep.max_abs_diff);
                        checked += 1;
                    }
                    Err(Error::Smoothness(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok((
        worst <= 1e-4,
        worst,
        format!("{} evaluations, max difference {:.3e}", checked, worst),
    ))
}

fn expansion(sys: &VectorFieldSystem, tol: f64) -> Result<(bool, f64, String)> {
    let x = sys.inner.center();
    let tol = tol.min(1e-12);
    let mut worst_slope = f64::INFINITY;
    let mut failed = Vec::new();
    let mut checked = 0;
    for idx in canonical_indices(sys).into_iter().filter(|i| i.len() >= 2) {
        let (rows, slope, ok) = match expansion_sweep(sys, &idx, &x, 3, 8, tol) {
            Ok(v) => v,
            Err(Error::Smoothness(_)) => continue,
            Err(e) => return Err(e),
        };
        checked += 1;
        let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        if max > 1e-7 {
            worst_slope = worst_slope.min(slope);
        }
        if !ok {
            failed.push(format!("{} slope {:.3}", idx, slope));
        }
    }
    Ok((
        failed.is_empty(),
        if worst_slope.is_finite() { worst_slope } else { f64::NAN },
        format!("{} brackets at {:?}, failures {:?}", checked, x, failed),
    ))
}

fn connectivity(sys: &VectorFieldSystem, seed: u64, tol: f64) -> Result<(bool, f64, String)> {
    let mut r = rng::stream(seed, "certify-connect", 0);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..PAIRS {
        let x = random_point(sys, &mut r);
        let y = random_point(sys, &mut r);
        match connect(sys, &x, &y, tol).and_then(|p| p.reintegrate(sys, tol)) {
            Ok(end) => worst = worst.max(linalg::dist(&end, &y)),
            Err(_) => failures += 1,
        }
    }
    Ok((
        failures == 0 && worst <= 10.0 * tol,
        worst,
        format!("{} pairs, {} failures, max miss {:.3e}", PAIRS, failures, worst),
    ))
}

fn doubling(sys: &VectorFieldSystem, tol: f64) -> Result<(bool, f64, String)> {
    let x0 = sys.inner.center();
    let radii: Vec<f64> = (4..=6).map(|k| 0.5f64.powi(k)).collect();
    let ratios: Vec<f64> = doubling_sweep(sys, &x0, &radii, Flavor::D1, DEFAULT_STEPS, tol)?
        .iter()
        .map(|row| row.ratio)
        .collect();
    let var = variation(&ratios);
    Ok((var < 0.25, var, format!("d1 ratios {:?}", ratios)))
}

fn poincare(sys: &VectorFieldSystem, seed: u64, tol: f64) -> Result<(bool, f64, String)> {
    let u = TestFunction::from_system(sys, "u")?;
    let x0 = sys.inner.center();
    let mut cs = Vec::new();
    for k in 3..=5 {
        let rho = 0.5f64.powi(k);
        let ball = BallMeasure::new(sys, &x0, rho, 2.0, Flavor::D1, POINCARE_STEPS, tol)?;
        cs.push(poincare_ratio(sys, &u, &ball, POINCARE_SAMPLES, seed)?.implied_constant);
    }
    let spread = if cs.iter().all(|c| *c == 0.0) {
        1.0
    } else {
        stats::spread(&cs)
    };
    Ok((spread <= 3.0, spread, format!("implied constants {:?}", cs)))
}

fn lagrange(sys: &VectorFieldSystem, seed: u64, tol: f64) -> Result<(bool, f64, String)> {
    let f = TestFunction::from_system(sys, "u")?;
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for (a, b) in random_pairs(sys, 5, 0.1, seed, "certify-lagrange") {
        let rep = lagrange_check(sys, &f, &a, &b, tol)?;
        if rep.rhs > 0.0 {
            worst = worst.max(rep.lhs / rep.rhs);
        }
        if !rep.holds {
            bad += 1;
        }
    }
    Ok((bad == 0, worst, format!("5 pairs, {} violations, max lhs/rhs {:.4}", bad, worst)))
}
