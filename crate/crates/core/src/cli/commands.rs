use super::report::{point_cell, Report, Table};
use super::{certify, Command, FlavorArg, MapArg, MethodArg, RunConfig};
use crate::error::{Error, Result};
use crate::fields::{
    audit_smoothness, bracket_values, canonical_indices, hormander_rank, symbolic_bracket,
    MultiIndex, VectorFieldSystem,
};
use crate::flows::{
    admissible_solve, c_factors, e_factors, expansion_residual, ControlPiece, Factor, FlowSpec,
};
use crate::inequality::{
    lagrange_check, p_poincare_ratio, poincare_ratio, rough_poincare_decomposition,
    sobolev_exponent, BallMeasure, TestFunction, DEFAULT_SAMPLES,
};
use crate::linalg;
use crate::metric::{
    ball_inclusion_check, ball_volume, connect, d1_graph, d1_upper, d_graph, doubling_sweep,
    euclid_bracket, euclid_constants, subunit_reparametrize, volume_denominator, BallMethod,
    Flavor, Membership, Resolution,
};
use crate::rng;
use crate::stats;
use rand::Rng;
use serde_json::{json, Value};

/// Runs the command; parse errors propagate, other errors become a failed report.
pub fn dispatch(sys: &VectorFieldSystem, config: &RunConfig) -> Result<Report> {
    let (name, result) = match &config.command {
        Command::Check { grid } => ("check", check(sys, *grid)),
        Command::Bracket { point } => ("bracket", bracket(sys, point.as_deref())),
        Command::Expand {
            index,
            point,
            kmin,
            kmax,
        } => (
            "expand",
            expand(sys, index.as_deref(), point.as_deref(), *kmin, *kmax, config.tol),
        ),
        Command::Flow {
            index,
            time,
            point,
            map,
            samples,
        } => (
            "flow",
            flow(sys, index, *time, point.as_deref(), *map, *samples, config.tol),
        ),
        Command::Dist { x, y, graph } => (
            "dist",
            dist(sys, x.as_deref(), y, graph.steps, config.tol),
        ),
        Command::Connect { x, y, pairs } => (
            "connect",
            connect_cmd(sys, x.as_deref(), y.as_deref(), *pairs, config),
        ),
        Command::Ball {
            point,
            sweep,
            flavor,
            method,
            graph,
            inclusion,
        } => (
            "ball",
            ball(
                sys,
                point.as_deref(),
                &sweep.radii(),
                *flavor,
                *method,
                graph.steps,
                *inclusion,
                config,
            ),
        ),
        Command::Poincare {
            function,
            point,
            sweep,
            lambda,
            p,
            graph,
            stability,
            rough,
        } => (
            "poincare",
            poincare(
                sys,
                function,
                point.as_deref(),
                &sweep.radii(),
                *lambda,
                *p,
                graph.steps,
                *stability,
                *rough,
                config,
            ),
        ),
        Command::Sobolev {
            point,
            rho,
            p,
            levels,
        } => (
            "sobolev",
            sobolev(sys, point.as_deref(), *rho, *p, *levels, config),
        ),
        Command::Lagrange {
            function,
            x0,
            x,
            pairs,
            scale,
        } => (
            "lagrange",
            lagrange(sys, function, x0.as_deref(), x.as_deref(), *pairs, *scale, config),
        ),
        Command::Certify => ("certify", certify::certify(sys, config)),
    };
    match result {
        Ok(r) => Ok(r),
        Err(e @ (Error::Parse { .. } | Error::System(_))) => Err(e),
        Err(e) => Ok(Report::failed(name, Value::Null, &e)),
    }
}

/// Comma-separated coordinates.
pub fn parse_point(text: &str, dim: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(',').map(|s| s.trim()).collect();
    if parts.len() != dim {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("expected {} coordinates, got {:?}", dim, text),
        });
    }
    let mut column = 1;
    parts
        .iter()
        .map(|s| {
            let v = s.parse::<f64>().map_err(|_| Error::Parse {
                line: 1,
                column,
                message: format!("not a number: {:?}", s),
            });
            column += s.len() + 1;
            v
        })
        .collect()
}

fn point_or_center(sys: &VectorFieldSystem, text: Option<&str>) -> Result<Vec<f64>> {
    match text {
        Some(t) => parse_point(t, sys.dim),
        None => Ok(sys.inner.center()),
    }
}

fn parse_index(text: &str) -> Result<MultiIndex> {
    MultiIndex::parse(text).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line: 1,
            column: 1,
            message: other.to_string(),
        },
    })
}

/// Uniform point of the inner domain.
pub fn random_point<R: Rng>(sys: &VectorFieldSystem, r: &mut R) -> Vec<f64> {
    sys.inner
        .lo
        .iter()
        .zip(&sys.inner.hi)
        .map(|(a, b)| r.gen_range(*a..*b))
        .collect()
}

/// Pairs `(x, y)` in the inner domain with `|x - y| = scale` in random directions.
pub fn random_pairs(
    sys: &VectorFieldSystem,
    n: usize,
    scale: f64,
    seed: u64,
    label: &str,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::with_capacity(n);
    let mut r = rng::stream(seed, label, 0);
    while out.len() < n {
        let x = random_point(sys, &mut r);
        let d: Vec<f64> = (0..sys.dim).map(|_| r.gen_range(-1.0..1.0)).collect();
        let nd = linalg::norm(&d);
        if !(nd > 1e-3 && nd <= 1.0) {
            continue;
        }
        let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + scale * b / nd).collect();
        if sys.inner.contains(&y) {
            out.push((x, y));
        }
    }
    out
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn check(sys: &VectorFieldSystem, grid: usize) -> Result<Report> {
    let mut r = Report::new("check");
    r.parameters = json!({"grid": grid});
    let mut t = Table::new("check", &["point", "rank", "basis", "det"]);
    let mut failures = Vec::new();
    let pts = sys.inner.grid(grid);
    for x in &pts {
        match hormander_rank(sys, x) {
            Ok(rep) => t.push(vec![
                point_cell(x),
                rep.rank.to_string(),
                rep.basis.to_string(),
                fmt(rep.det),
            ]),
            Err(e) => {
                t.push(vec![point_cell(x), "-".into(), "-".into(), "-".into()]);
                failures.push(e.to_string());
            }
        }
    }
    r.check(
        "hormander rank equals dimension on the grid",
        failures.is_empty(),
        format!("{} grid points, failures: {:?}", pts.len(), failures),
    );
    let issues = audit_smoothness(sys);
    let mut a = Table::new("audit", &["field", "component", "alpha", "location", "message"]);
    for i in &issues {
        a.push(vec![
            i.field.to_string(),
            i.component.to_string(),
            format!("{:?}", i.alpha),
            point_cell(&i.location),
            i.message.clone(),
        ]);
    }
    r.check(
        "declared smoothness consistent with sampled derivatives",
        issues.is_empty(),
        format!("{} issues", issues.len()),
    );
    r.estimate = json!({"grid_points": pts.len(), "audit_issues": issues.len()});
    r.tables = vec![t, a];
    Ok(r)
}

fn bracket(sys: &VectorFieldSystem, point: Option<&str>) -> Result<Report> {
    let x = point_or_center(sys, point)?;
    let mut r = Report::new("bracket");
    r.parameters = json!({"point": x});
    let vals = bracket_values(sys, &x)?;
    let mut t = Table::new("bracket", &["index", "value", "symbolic_value", "difference"]);
    let mut worst: f64 = 0.0;
    for (idx, v) in vals.indices.iter().zip(&vals.values) {
        let sym: Vec<f64> = symbolic_bracket(sys, idx)?.iter().map(|e| e.eval(&x)).collect();
        let d = linalg::max_abs_diff(v, &sym) / (1.0 + linalg::norm(v));
        worst = worst.max(d);
        t.push(vec![idx.to_string(), point_cell(v), point_cell(&sym), fmt(d)]);
    }
    r.check(
        "jet and symbolic commutators agree",
        worst <= 1e-10,
        format!("max relative difference {:.3e} at {:?}", worst, x),
    );
    r.estimate = json!({"brackets": vals.indices.len(), "max_difference": worst});
    r.tables = vec![t];
    Ok(r)
}

/// First canonical bracket of maximal weight.
fn default_index(sys: &VectorFieldSystem) -> MultiIndex {
    let all = canonical_indices(sys);
    let top = all.iter().map(|i| i.weight()).max().unwrap_or(1);
    all.into_iter()
        .find(|i| i.weight() == top)
        .unwrap_or_else(|| MultiIndex::single(1))
}

/// Residual sweep: passes when every residual is at most `1e-7` or the
/// log-log slope of the residuals above the floor `10 tol` is at least 0.9.
pub fn expansion_sweep(
    sys: &VectorFieldSystem,
    index: &MultiIndex,
    x: &[f64],
    kmin: i32,
    kmax: i32,
    tol: f64,
) -> Result<(Vec<(f64, f64)>, f64, bool)> {
    let rows: Vec<(f64, f64)> = (kmin..=kmax)
        .map(|k| {
            let t = 0.5f64.powi(k);
            Ok((t, expansion_residual(sys, index, t, x, tol)?))
        })
        .collect::<Result<_>>()?;
    // The residual divides an absolute error by t^|I|, so integration and
    // rounding errors set a floor that grows as t shrinks.
    let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let abs_floor = 10.0 * tol.max(f64::EPSILON * scale);
    let w = index.weight() as i32;
    let floor = |t: f64| abs_floor / t.powi(w);
    let above: Vec<&(f64, f64)> = rows.iter().filter(|(t, e)| *e > floor(*t)).collect();
    let slope = if above.len() >= 2 {
        let ts: Vec<f64> = above.iter().map(|r| r.0).collect();
        let es: Vec<f64> = above.iter().map(|r| r.1).collect();
        stats::loglog_slope(&ts, &es)
    } else {
        f64::NAN
    };
    let exact = rows.iter().all(|(t, e)| *e <= 1e-7f64.max(floor(*t)));
    Ok((rows, slope, exact || slope >= 0.9))
}

fn expand(
    sys: &VectorFieldSystem,
    index: Option<&str>,
    point: Option<&str>,
    kmin: i32,
    kmax: i32,
    tol: f64,
) -> Result<Report> {
    let index = match index {
        Some(t) => parse_index(t)?,
        None => default_index(sys),
    };
    let x = point_or_center(sys, point)?;
    let mut r = Report::new("expand");
    r.parameters = json!({"index": index.to_string(), "point": x, "kmin": kmin, "kmax": kmax, "tol": tol});
    let (rows, slope, ok) = expansion_sweep(sys, &index, &x, kmin, kmax, tol)?;
    let mut t = Table::new("expand", &["t", "residual"]);
    for (a, b) in &rows {
        t.push(vec![fmt(*a), fmt(*b)]);
    }
    r.check(
        "expansion residual vanishes or decays with slope >= 0.9",
        ok,
        format!("index {} at {:?}: slope {:.4}", index, x, slope),
    );
    r.estimate = json!({"slope": if slope.is_nan() { Value::Null } else { json!(slope) },
        "max_residual": rows.iter().map(|r| r.1).fold(0.0, f64::max)});
    r.tables = vec![t];
    Ok(r)
}

fn flow(
    sys: &VectorFieldSystem,
    index: &str,
    time: f64,
    point: Option<&str>,
    map: MapArg,
    samples: usize,
    tol: f64,
) -> Result<Report> {
    let index = parse_index(index)?;
    crate::fields::check_bracket(sys, &index)?;
    let x = point_or_center(sys, point)?;
    let factors: Vec<Factor> = match map {
        MapArg::Exp => {
            if index.len() != 1 {
                return Err(Error::Invalid("the exponential map takes a single field".into()));
            }
            vec![Factor {
                field: index.0[0],
                time,
            }]
        }
        MapArg::Quasi => {
            if time < 0.0 {
                return Err(Error::Invalid("quasiexponential maps take t >= 0".into()));
            }
            c_factors(&index, time)
        }
        MapArg::E => e_factors(&index, time),
    };
    // Unit-time schedule: factor k runs for |t_k| / T at speed T.
    let total: f64 = factors.iter().map(|f| f.time.abs()).sum();
    if total == 0.0 {
        return Err(Error::Invalid("the map is the identity for t = 0".into()));
    }
    let spec = FlowSpec {
        pieces: factors
            .iter()
            .filter(|f| f.time != 0.0)
            .map(|f| ControlPiece {
                duration: f.time.abs() / total,
                controls: vec![(MultiIndex::single(f.field), f.time.signum() * total)],
            })
            .collect(),
    };
    let traj = admissible_solve(sys, &spec, &x, tol, samples)?;
    let direct = match map {
        MapArg::Exp => crate::flows::exp_map(sys, index.0[0], time, &x, tol)?,
        MapArg::Quasi => crate::flows::quasi_exp(sys, &index, time, &x, tol)?,
        MapArg::E => crate::flows::e_map(sys, &index, time, &x, tol)?,
    };
    let mut r = Report::new("flow");
    r.parameters = json!({"index": index.to_string(), "time": time, "point": x,
        "map": format!("{:?}", map).to_lowercase()});
    let gap = linalg::dist(&traj.end, &direct);
    r.check(
        "trajectory endpoint matches the map",
        gap <= 10.0 * tol * (1.0 + linalg::norm(&direct)) * factors.len().max(1) as f64,
        format!("gap {:.3e} for {} factors", gap, factors.len()),
    );
    let mut header = vec!["s".to_string()];
    header.extend((1..=sys.dim).map(|i| format!("x{}", i)));
    header.push("piece".into());
    let mut t = Table {
        name: "trajectory".into(),
        header,
        rows: Vec::new(),
    };
    for s in &traj.samples {
        let mut row = vec![fmt(s.s)];
        row.extend(s.point.iter().map(|v| fmt(*v)));
        row.push(s.piece.to_string());
        t.push(row);
    }
    r.estimate = json!({"end": direct, "factors": factors.len()});
    r.tables = vec![t];
    Ok(r)
}

fn dist(
    sys: &VectorFieldSystem,
    x: Option<&str>,
    y: &str,
    steps: usize,
    tol: f64,
) -> Result<Report> {
    let x = point_or_center(sys, x)?;
    let y = parse_point(y, sys.dim)?;
    let mut r = Report::new("dist");
    r.parameters = json!({"x": x, "y": y, "steps": steps, "tol": tol});
    let mut t = Table::new("dist", &["quantity", "value", "method"]);
    if linalg::dist(&x, &y) == 0.0 {
        for q in ["euclid_lower", "euclid_upper", "d1_upper", "d1_graph", "d_graph"] {
            t.push(vec![q.into(), "0".into(), "identical points".into()]);
        }
        r.estimate = json!({"d1_upper": 0.0, "d1_graph": 0.0, "d_graph": 0.0});
        r.ci = json!([0.0, 0.0]);
        r.check("identical points give zero distances", true, "x = y");
        r.tables = vec![t];
        return Ok(r);
    }
    let consts = euclid_constants(sys, 5)?;
    let eb = euclid_bracket(sys, &consts, &x, &y)?;
    let up = d1_upper(sys, &x, &y, tol)?;
    let witness = up.witness.as_ref().expect("d1_upper keeps its witness");
    let miss = linalg::dist(&witness.reintegrate(sys, tol)?, &y);
    r.check(
        "witness re-integrates to the target",
        miss <= 10.0 * tol,
        format!("miss {:.3e} from {:?} to {:?}", miss, x, y),
    );
    t.push(vec!["euclid_lower".into(), fmt(eb.lower), eb.lower_method.clone()]);
    t.push(vec!["euclid_upper".into(), fmt(eb.upper), eb.upper_method.clone()]);
    t.push(vec!["d1_upper".into(), fmt(up.upper), up.upper_method.clone()]);
    let mut estimate = json!({"euclid_lower": eb.lower, "euclid_upper": eb.upper, "d1_upper": up.upper,
        "witness_segments": witness.segments.len()});
    if !sys.has_drift() {
        let res = Resolution::for_pair(sys, up.upper, steps);
        let g1 = d1_graph(sys, &x, &y, &res, tol)?;
        let g = d_graph(sys, &x, &y, g1, &res, 12, tol)?;
        let slack = 2.0 * res.step;
        t.push(vec!["d1_graph".into(), fmt(g1), format!("graph, step {}", res.step)]);
        t.push(vec!["d_graph".into(), fmt(g), format!("graph bisection, step {}", res.step)]);
        r.check(
            "euclid lower <= d_graph <= d1_graph <= d1_upper (graph slack)",
            eb.lower <= g + slack && g <= g1 + slack && g1 <= up.upper + slack,
            format!(
                "{:.6} <= {:.6} <= {:.6} <= {:.6} with slack {:.3e}",
                eb.lower, g, g1, up.upper, slack
            ),
        );
        estimate["d1_graph"] = json!(g1);
        estimate["d_graph"] = json!(g);
        r.resolution = json!({"step": res.step, "directions": res.directions, "cell": res.cell});
    }
    r.ci = json!([eb.lower, up.upper]);
    r.estimate = estimate;
    r.tables = vec![t];
    Ok(r)
}

fn connect_cmd(
    sys: &VectorFieldSystem,
    x: Option<&str>,
    y: Option<&str>,
    pairs: usize,
    config: &RunConfig,
) -> Result<Report> {
    let tol = config.tol;
    let list: Vec<(Vec<f64>, Vec<f64>)> = match (x, y) {
        (_, Some(y)) => vec![(point_or_center(sys, x)?, parse_point(y, sys.dim)?)],
        _ => {
            let mut r = rng::stream(config.seed, "connect", 0);
            (0..pairs)
                .map(|_| (random_point(sys, &mut r), random_point(sys, &mut r)))
                .collect()
        }
    };
    let mut r = Report::new("connect");
    r.parameters = json!({"pairs": list.len(), "tol": tol});
    let mut t = Table::new(
        "connect",
        &["x", "y", "segments", "class_bound", "hitting_time", "miss"],
    );
    let mut failures = Vec::new();
    let mut worst_speed: f64 = 0.0;
    for (x, y) in &list {
        let outcome = connect(sys, x, y, tol).and_then(|p| {
            let miss = linalg::dist(&p.reintegrate(sys, tol)?, y);
            let sub = if sys.has_drift() {
                None
            } else {
                Some(subunit_reparametrize(&p, sys.n())?)
            };
            Ok((p, miss, sub))
        });
        match outcome {
            Ok((p, miss, sub)) => {
                let hit = sub.as_ref().and_then(|s| s.subunit.as_ref()).map(|s| {
                    for piece in &s.pieces {
                        let sq: f64 = piece.controls.iter().map(|a| a * a).sum();
                        worst_speed = worst_speed.max(sq);
                    }
                    s.hitting_time
                });
                if miss > 10.0 * tol {
                    failures.push(format!("{:?} -> {:?}: miss {:.3e}", x, y, miss));
                }
                t.push(vec![
                    point_cell(x),
                    point_cell(y),
                    p.segments.len().to_string(),
                    fmt(p.class_bound),
                    hit.map_or("-".into(), fmt),
                    fmt(miss),
                ]);
            }
            Err(e) => failures.push(format!("{:?} -> {:?}: {}", x, y, e)),
        }
    }
    r.check(
        "every pair connected within 10 tol",
        failures.is_empty(),
        format!("{} failures: {:?}", failures.len(), failures),
    );
    r.check(
        "subunit controls satisfy sum a_j^2 <= 1",
        worst_speed <= 1.0,
        format!("max sum a_j^2 = {}", worst_speed),
    );
    r.estimate = json!({"connected": list.len() - failures.len()});
    r.tables = vec![t];
    Ok(r)
}

/// `(max - min) / min`.
pub fn variation(v: &[f64]) -> f64 {
    stats::spread(v) - 1.0
}

fn flavors(f: FlavorArg) -> Vec<Flavor> {
    match f {
        FlavorArg::D => vec![Flavor::D],
        FlavorArg::D1 => vec![Flavor::D1],
        FlavorArg::Both => vec![Flavor::D1, Flavor::D],
    }
}

#[allow(clippy::too_many_arguments)]
fn ball(
    sys: &VectorFieldSystem,
    point: Option<&str>,
    radii: &[f64],
    flavor: FlavorArg,
    method: MethodArg,
    steps: usize,
    inclusion: bool,
    config: &RunConfig,
) -> Result<Report> {
    let x0 = point_or_center(sys, point)?;
    let tol = config.tol;
    let mut r = Report::new("ball");
    r.parameters = json!({"point": x0, "radii": radii, "steps": steps,
        "method": format!("{:?}", method).to_lowercase(), "inclusion": inclusion});
    r.resolution = json!({"steps": steps});
    let mut t = Table::new(
        "ball",
        &[
            "flavor",
            "rho",
            "volume",
            "ci_low",
            "ci_high",
            "volume_double",
            "doubling_ratio",
            "denominator",
            "formula_ratio",
        ],
    );
    let mut estimate = serde_json::Map::new();
    for fl in flavors(flavor) {
        let rows: Vec<(f64, f64, (f64, f64), f64)> = match method {
            MethodArg::Flood => doubling_sweep(sys, &x0, radii, fl, steps, tol)?
                .into_iter()
                .map(|d| (d.rho, d.volume, (f64::NAN, f64::NAN), d.volume_double))
                .collect(),
            MethodArg::Rejection => {
                let samples = config.budget.unwrap_or(20_000);
                let m = BallMethod::Rejection {
                    samples,
                    membership: Membership::Chart,
                };
                radii
                    .iter()
                    .map(|&rho| {
                        let a = ball_volume(sys, &x0, rho, fl, m, config.seed, tol)?;
                        let b = ball_volume(sys, &x0, 2.0 * rho, fl, m, config.seed, tol)?;
                        Ok((rho, a.volume, a.ci, b.volume))
                    })
                    .collect::<Result<_>>()?
            }
        };
        let mut ratios = Vec::new();
        let mut formula = Vec::new();
        for (rho, v, ci, v2) in &rows {
            let (den, _) = volume_denominator(sys, &x0, *rho)?;
            ratios.push(v2 / v);
            formula.push(v / den);
            t.push(vec![
                fl.to_string(),
                fmt(*rho),
                fmt(*v),
                fmt(ci.0),
                fmt(ci.1),
                fmt(*v2),
                fmt(v2 / v),
                fmt(den),
                fmt(v / den),
            ]);
        }
        let var = variation(&ratios);
        let band = stats::spread(&formula);
        r.check(
            &format!("doubling ratio varies < 25% ({})", fl),
            var < 0.25,
            format!("ratios {:?} at {:?}", ratios, x0),
        );
        r.check(
            &format!("volume formula band c2/c1 <= 4 ({})", fl),
            band <= 4.0,
            format!("ratios {:?} at {:?}", formula, x0),
        );
        estimate.insert(
            fl.to_string(),
            json!({"doubling": ratios, "formula_ratio": formula}),
        );
    }
    let mut tables = vec![t];
    if inclusion {
        let mut ti = Table::new("inclusion", &["rho", "c1", "c2"]);
        let mut rows = Vec::new();
        for &rho in radii {
            let rep = ball_inclusion_check(sys, &x0, rho, steps, tol)?;
            ti.push(vec![fmt(rho), fmt(rep.c1), fmt(rep.c2)]);
            rows.push((rep.c1, rep.c2));
        }
        r.check(
            "c1 <= 1 <= c2 with c1 > 0",
            rows.iter().all(|(a, b)| *a > 0.0 && *a <= 1.0 && *b >= 1.0),
            format!("(c1, c2) = {:?}", rows),
        );
        estimate.insert("inclusion".into(), json!(rows));
        tables.push(ti);
    }
    r.estimate = Value::Object(estimate);
    r.tables = tables;
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn poincare(
    sys: &VectorFieldSystem,
    function: &str,
    point: Option<&str>,
    radii: &[f64],
    lambda: f64,
    p: Option<f64>,
    steps: usize,
    stability: bool,
    rough: bool,
    config: &RunConfig,
) -> Result<Report> {
    let u = TestFunction::from_system(sys, function)?;
    let x0 = point_or_center(sys, point)?;
    let samples = config.budget.unwrap_or(DEFAULT_SAMPLES);
    let lambda = if p.is_some() { 1.0 } else { lambda };
    let mut r = Report::new("poincare");
    r.parameters = json!({"function": function, "point": x0, "radii": radii, "lambda": lambda,
        "p": p.unwrap_or(1.0), "samples": samples, "steps": steps});
    r.resolution = json!({"steps": steps, "samples": samples});
    let mut t = Table::new(
        "poincare",
        &["rho", "lhs", "rhs", "implied_constant", "implied_constant_double_budget"],
    );
    let mut tr = Table::new(
        "rough_poincare",
        &["rho", "lhs", "x_term", "remainder_term", "coefficient"],
    );
    let mut cs = Vec::new();
    let mut drift: f64 = 0.0;
    for &rho in radii {
        let ball = BallMeasure::new(sys, &x0, rho, lambda, Flavor::D1, steps, config.tol)?;
        let eval = |n: usize| match p {
            Some(p) => p_poincare_ratio(sys, &u, &ball, p, n, config.seed),
            None => poincare_ratio(sys, &u, &ball, n, config.seed),
        };
        let rep = eval(samples)?;
        let double = if stability {
            let d = eval(2 * samples)?;
            if rep.implied_constant > 0.0 {
                drift = drift.max((d.implied_constant / rep.implied_constant - 1.0).abs());
            }
            fmt(d.implied_constant)
        } else {
            "-".into()
        };
        t.push(vec![
            fmt(rho),
            fmt(rep.lhs),
            fmt(rep.rhs),
            fmt(rep.implied_constant),
            double,
        ]);
        cs.push(rep.implied_constant);
        if rough {
            let rr = rough_poincare_decomposition(sys, &u, &ball, samples, config.seed)?;
            tr.push(vec![
                fmt(rho),
                fmt(rr.lhs),
                fmt(rr.x_term),
                fmt(rr.remainder_term),
                fmt(rr.coefficient),
            ]);
        }
    }
    let spread = stats::spread(&cs);
    let constant = cs.iter().all(|c| *c == 0.0);
    r.check(
        "implied constants max/min <= 3 over the sweep",
        constant || spread <= 3.0,
        format!("{} on {} at {:?}: {:?}", function, sys.name, x0, cs),
    );
    if stability {
        r.check(
            "doubling the budget moves implied constants < 5%",
            drift < 0.05,
            format!("max relative change {:.4}", drift),
        );
    }
    r.estimate = json!({"implied_constants": cs, "spread": if constant { 0.0 } else { spread }});
    r.tables = vec![t];
    if rough {
        r.tables.push(tr);
    }
    Ok(r)
}

fn sobolev(
    sys: &VectorFieldSystem,
    point: Option<&str>,
    rho: f64,
    p: f64,
    levels: u32,
    config: &RunConfig,
) -> Result<Report> {
    let x0 = point_or_center(sys, point)?;
    let samples = config.budget.unwrap_or(20_000);
    let rep = sobolev_exponent(sys, &x0, rho, p, 1.0, levels, samples, config.seed, config.tol)?;
    let mut r = Report::new("sobolev");
    r.parameters = json!({"point": x0, "rho": rho, "p": p, "levels": levels, "samples": samples});
    r.resolution = json!({"samples": samples, "sigma": rep.sigma});
    let mut header = vec!["s".to_string()];
    header.extend(rep.ks.iter().map(|k| format!("k={}", k)));
    let mut t = Table {
        name: "sobolev".into(),
        header,
        rows: Vec::new(),
    };
    for row in &rep.rows {
        let mut cells = vec![fmt(row.s)];
        cells.extend(row.ratios.iter().map(|v| fmt(*v)));
        t.push(cells);
    }
    r.check(
        "some exponent k > 1 keeps the ratio under the cap",
        rep.k.is_some(),
        format!("cap {} on {} at {:?}", rep.cap, sys.name, x0),
    );
    r.estimate = json!({"k": rep.k, "cap": rep.cap});
    r.tables = vec![t];
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn lagrange(
    sys: &VectorFieldSystem,
    function: &str,
    x0: Option<&str>,
    x: Option<&str>,
    pairs: usize,
    scale: f64,
    config: &RunConfig,
) -> Result<Report> {
    let f = TestFunction::from_system(sys, function)?;
    let list = match x {
        Some(x) => vec![(point_or_center(sys, x0)?, parse_point(x, sys.dim)?)],
        None => random_pairs(sys, pairs, scale, config.seed, "lagrange"),
    };
    let mut r = Report::new("lagrange");
    r.parameters = json!({"function": function, "pairs": list.len(), "scale": scale});
    let mut t = Table::new("lagrange", &["x0", "x", "lhs", "rhs", "rho", "holds"]);
    let mut bad = Vec::new();
    for (a, b) in &list {
        let rep = lagrange_check(sys, &f, a, b, config.tol)?;
        if !rep.holds {
            bad.push(format!("{:?} -> {:?}: {} > {}", a, b, rep.lhs, rep.rhs));
        }
        t.push(vec![
            point_cell(a),
            point_cell(b),
            fmt(rep.lhs),
            fmt(rep.rhs),
            fmt(rep.rho),
            rep.holds.to_string(),
        ]);
    }
    r.check(
        "gradient bound holds on every pair",
        bad.is_empty(),
        format!("{} violations: {:?}", bad.len(), bad),
    );
    r.estimate = json!({"violations": bad.len()});
    r.tables = vec![t];
    Ok(r)
}
