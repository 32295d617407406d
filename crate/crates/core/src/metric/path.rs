//! Connecting paths built from chart inverses.

use crate::error::{Error, Result};
use crate::fields::{field_weight, optimal_basis, MultiIndex, VectorFieldSystem};
use crate::flows::{
    apply_factors, chart_at, chart_factors, chart_inverse, class_bound, ControlPiece, Factor,
    FieldBank, FlowOptions, FlowSpec,
};
use super::graph::axis_route;
use crate::linalg;
use serde::Serialize;

/// Maximal nesting of midpoint chaining in [`connect`].
pub const MAX_CHAIN_DEPTH: usize = 32;

/// Maximal dyadic refinement level in [`d1_upper`].
pub const MAX_REFINE_LEVEL: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Controls along all commutators, `|a_I| <= delta^{|I|}`.
    D,
    /// Controls along the base fields only, `|a_0| <= delta^2`, `|a_i| <= delta`.
    D1,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Flavor::D => "d",
            Flavor::D1 => "d1",
        })
    }
}

/// One piece of a subunit control: `|a| = 1` on a single field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubunitPiece {
    pub duration: f64,
    /// `a_j`, one entry per base field.
    pub controls: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubunitForm {
    pub pieces: Vec<SubunitPiece>,
    pub hitting_time: f64,
}

/// Piecewise path through exponential factors of single fields.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissiblePath {
    pub flavor: Flavor,
    pub start: Vec<f64>,
    pub target: Vec<f64>,
    /// Flows `exp(time X_field)` in application order.
    pub segments: Vec<Factor>,
    /// Start point followed by the end point of every segment.
    pub nodes: Vec<Vec<f64>>,
    pub class_bound: f64,
    pub subunit: Option<SubunitForm>,
}

impl AdmissiblePath {
    fn empty(x: &[f64]) -> AdmissiblePath {
        AdmissiblePath {
            flavor: Flavor::D1,
            start: x.to_vec(),
            target: x.to_vec(),
            segments: Vec::new(),
            nodes: vec![x.to_vec()],
            class_bound: 0.0,
            subunit: None,
        }
    }

    pub fn end(&self) -> &[f64] {
        self.nodes.last().expect("nodes start with the start point")
    }

    /// `sum |t_k|` over all segments.
    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|f| f.time.abs()).sum()
    }

    /// Replays the segments from the start point.
    pub fn reintegrate(&self, sys: &VectorFieldSystem, tol: f64) -> Result<Vec<f64>> {
        let bank = FieldBank::base(sys);
        apply_factors(&bank, &self.segments, &self.start, &options(sys, tol))
    }

    /// Unit-time control schedule with every coefficient at its class bound:
    /// segment `k` runs for `|t_k| / delta^{p_k}` with `a = sign(t_k) delta^{p_k}`.
    pub fn schedule(&self) -> FlowSpec {
        let d = self.class_bound;
        let pieces = self
            .segments
            .iter()
            .filter(|f| f.time != 0.0)
            .map(|f| {
                let scale = d.powi(field_weight(f.field) as i32);
                ControlPiece {
                    duration: f.time.abs() / scale,
                    controls: vec![(MultiIndex::single(f.field), f.time.signum() * scale)],
                }
            })
            .collect();
        FlowSpec { pieces }
    }
}

fn options(sys: &VectorFieldSystem, tol: f64) -> FlowOptions {
    FlowOptions::new(tol).within(&sys.domain)
}

/// One chart step: invert `E_eta(x, .)` at `y` with the basis chosen for the
/// scale `|x - y|^{1/r}`.
fn chart_step(
    sys: &VectorFieldSystem,
    bank: &FieldBank,
    x: &[f64],
    y: &[f64],
    tol: f64,
) -> Result<(Vec<Factor>, Vec<Vec<f64>>)> {
    let scale = linalg::dist(x, y).powf(1.0 / sys.step as f64);
    let basis = optimal_basis(sys, x, scale)?.basis;
    let chart = chart_at(sys, x, &basis, tol)?;
    let opts = options(sys, tol);
    let inv = chart_inverse(bank, &chart, y, &opts)?;
    let factors: Vec<Factor> = chart_factors(&chart, &inv.h)
        .into_iter()
        .filter(|f| f.time != 0.0)
        .collect();
    let mut nodes = Vec::with_capacity(factors.len());
    let mut z = x.to_vec();
    for f in &factors {
        z = apply_factors(bank, std::slice::from_ref(f), &z, &opts)?;
        nodes.push(z.clone());
    }
    let end = nodes.last().map_or(x, |v| v.as_slice());
    let miss = linalg::dist(end, y);
    if miss > 10.0 * tol {
        return Err(Error::Convergence(format!(
            "chart path misses the target by {:.3e}",
            miss
        )));
    }
    Ok((factors, nodes))
}

fn connect_into(
    sys: &VectorFieldSystem,
    bank: &FieldBank,
    x: &[f64],
    y: &[f64],
    tol: f64,
    depth: usize,
    path: &mut AdmissiblePath,
) -> Result<Vec<f64>> {
    if linalg::dist(x, y) == 0.0 {
        return Ok(x.to_vec());
    }
    match chart_step(sys, bank, x, y, tol) {
        Ok((factors, nodes)) => {
            let end = nodes.last().cloned().unwrap_or_else(|| x.to_vec());
            path.segments.extend(factors);
            path.nodes.extend(nodes);
            Ok(end)
        }
        Err(e) => {
            if depth >= MAX_CHAIN_DEPTH {
                return Err(Error::Convergence(format!(
                    "chaining depth {} exceeded ({})",
                    MAX_CHAIN_DEPTH, e
                )));
            }
            let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
            let z = connect_into(sys, bank, x, &mid, tol, depth + 1, path)?;
            connect_into(sys, bank, &z, y, tol, depth + 1, path)
        }
    }
}

fn finish(mut path: AdmissiblePath, y: &[f64]) -> AdmissiblePath {
    path.target = y.to_vec();
    path.class_bound = class_bound(&path.segments);
    path
}

/// Path of d1 flavor from `x` to `y` through chart inverses, chained through
/// midpoints of the straight segment when a chart step fails.
///
/// Chart paths follow the straight segment, which is far from optimal for
/// distant points (Martinet: moving `x3` is cheap only away from `x1 = 0`).
/// When the chart path is longer than a quarter of the narrowest domain side,
/// a route through a breadth-first search over single-field moves is tried
/// as well, finished by a chart path from the last cell, and the shorter of
/// the two is returned.
pub fn connect(sys: &VectorFieldSystem, x: &[f64], y: &[f64], tol: f64) -> Result<AdmissiblePath> {
    sys.check_point(x)?;
    sys.check_point(y)?;
    let bank = FieldBank::base(sys);
    let mut path = AdmissiblePath::empty(x);
    connect_into(sys, &bank, x, y, tol, 0, &mut path)?;
    let path = finish(path, y);
    let width = sys
        .domain
        .lo
        .iter()
        .zip(&sys.domain.hi)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    if sys.has_drift() || path.class_bound <= ROUTE_THRESHOLD * width {
        return Ok(path);
    }
    match routed(sys, &bank, x, y, path.class_bound.min(width), tol) {
        Some(r) if r.class_bound < path.class_bound => Ok(r),
        _ => Ok(path),
    }
}

/// Fraction of the narrowest domain side above which [`connect`] also tries
/// a graph route.
pub const ROUTE_THRESHOLD: f64 = 0.25;

const ROUTE_STEPS: usize = 8;
const ROUTE_NODES: usize = 200_000;
const ROUTE_STAGES: usize = 4;

fn routed(
    sys: &VectorFieldSystem,
    bank: &FieldBank,
    x: &[f64],
    y: &[f64],
    scale: f64,
    tol: f64,
) -> Option<AdmissiblePath> {
    let opts = options(sys, tol);
    let mut path = AdmissiblePath::empty(x);
    let mut z = x.to_vec();
    let mut scale = scale;
    // Each stage lands within a few cells of `y` at its scale; the next one
    // starts from there on a quarter of the scale.
    for _ in 0..ROUTE_STAGES {
        let factors = axis_route(sys, &z, y, scale, ROUTE_STEPS, ROUTE_NODES, tol).ok()??;
        for f in factors {
            z = apply_factors(bank, std::slice::from_ref(&f), &z, &opts).ok()?;
            path.segments.push(f);
            path.nodes.push(z.clone());
        }
        scale *= 0.25;
    }
    connect_into(sys, bank, &z, y, tol, 0, &mut path).ok()?;
    Some(finish(path, y))
}

/// Chains `connect` through `pieces` equal parts of the straight segment.
pub fn connect_subdivided(
    sys: &VectorFieldSystem,
    x: &[f64],
    y: &[f64],
    pieces: usize,
    tol: f64,
) -> Result<AdmissiblePath> {
    sys.check_point(x)?;
    sys.check_point(y)?;
    let bank = FieldBank::base(sys);
    let mut path = AdmissiblePath::empty(x);
    let mut z = x.to_vec();
    for k in 1..=pieces.max(1) {
        let s = k as f64 / pieces.max(1) as f64;
        let w: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + s * (b - a)).collect();
        z = connect_into(sys, &bank, &z, &w, tol, 0, &mut path)?;
    }
    Ok(finish(path, y))
}

/// Rewrites a drift-free path with unit-speed controls: each segment becomes
/// a piece of duration `|t_k|` with `a_{field} = sign(t_k)`.
pub fn subunit_reparametrize(path: &AdmissiblePath, n: usize) -> Result<AdmissiblePath> {
    if path.segments.iter().any(|f| f.field == 0) {
        return Err(Error::Invalid(
            "subunit form is undefined for paths using the drift".into(),
        ));
    }
    let pieces: Vec<SubunitPiece> = path
        .segments
        .iter()
        .map(|f| {
            if f.field > n {
                return Err(Error::Index(format!("no field X_{}", f.field)));
            }
            let mut controls = vec![0.0; n];
            controls[f.field - 1] = f.time.signum();
            Ok(SubunitPiece {
                duration: f.time.abs(),
                controls,
            })
        })
        .collect::<Result<_>>()?;
    let hitting_time = pieces.iter().map(|p| p.duration).sum();
    let mut out = path.clone();
    out.subunit = Some(SubunitForm {
        pieces,
        hitting_time,
    });
    Ok(out)
}

/// Bracket on a distance with the methods used for each side.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceEstimate {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: String,
    pub upper_method: String,
    pub witness: Option<AdmissiblePath>,
}

/// Upper bound on `d1(x, y)` by the class bound of a connecting path.
/// The straight segment is cut into `2^k` equal parts, `k = 0, 1, ...`, until
/// the bound changes by less than 1%; the best witness is kept.
pub fn d1_upper(sys: &VectorFieldSystem, x: &[f64], y: &[f64], tol: f64) -> Result<DistanceEstimate> {
    sys.check_point(x)?;
    sys.check_point(y)?;
    if linalg::dist(x, y) == 0.0 {
        return Ok(DistanceEstimate {
            lower: 0.0,
            upper: 0.0,
            lower_method: "trivial".into(),
            upper_method: "trivial".into(),
            witness: Some(AdmissiblePath::empty(x)),
        });
    }
    let mut best: Option<AdmissiblePath> = None;
    let mut last_error = None;
    for k in 0..=MAX_REFINE_LEVEL {
        let path = match connect_subdivided(sys, x, y, 1 << k, tol) {
            Ok(p) => p,
            Err(e) => {
                last_error = Some(e);
                continue;
            }
        };
        match &best {
            None => best = Some(path),
            Some(b) => {
                let improved = path.class_bound < b.class_bound;
                let change = (b.class_bound - path.class_bound).abs() / b.class_bound;
                if improved {
                    best = Some(path);
                }
                if change < 0.01 || !improved {
                    break;
                }
            }
        }
    }
    let best = best.ok_or_else(|| {
        last_error.unwrap_or_else(|| Error::Convergence("no connecting path".into()))
    })?;
    Ok(DistanceEstimate {
        lower: 0.0,
        upper: best.class_bound,
        lower_method: "trivial".into(),
        upper_method: format!("chart path, {} segments", best.segments.len()),
        witness: Some(best),
    })
}
