use super::{x_norm, TestFunction};
use crate::error::{Error, Result};
use crate::fields::{field_weight, VectorFieldSystem};
use crate::flows::{integrate_to_times, FieldBank, FlowOptions};
use crate::metric::connect;
use serde::Serialize;

/// Gauss-Legendre nodes per path segment.
pub const GAUSS_NODES: usize = 32;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct LagrangeReport {
    pub x0: Vec<f64>,
    pub x: Vec<f64>,
    /// `|f(x) - f(x0)|`.
    pub lhs: f64,
    /// `sqrt(n) rho int_0^1 |Xf(gamma(t))| dt`.
    pub rhs: f64,
    /// Class bound of the connecting path.
    pub rho: f64,
    pub segments: usize,
    pub holds: bool,
}

/// Relative slack allowed for quadrature error.
const SLACK: f64 = 1e-3;

/// `|f(x) - f(x0)| <= sqrt(n) rho int_0^1 |Xf(gamma(t))| dt` along the path
/// returned by [`connect`], parametrised on `[0, 1]` at its class bound.
pub fn lagrange_check(
    sys: &VectorFieldSystem,
    f: &TestFunction,
    x0: &[f64],
    x: &[f64],
    tol: f64,
) -> Result<LagrangeReport> {
    if sys.has_drift() {
        return Err(Error::Invalid("the gradient bound is stated for drift-free systems".into()));
    }
    let path = connect(sys, x0, x, tol)?;
    let lhs = (f.eval(x) - f.eval(x0)).abs();
    let rule = gauss_legendre(GAUSS_NODES);
    let bank = FieldBank::base(sys);
    let opts = FlowOptions::new(tol).within(&sys.domain);
    let rho = path.class_bound;
    let mut integral = 0.0;
    for (seg, start) in path.segments.iter().zip(&path.nodes) {
        let len = seg.time.abs();
        if len == 0.0 {
            continue;
        }
        let field = bank
            .single(seg.field)
            .ok_or_else(|| Error::Index(format!("no field X_{}", seg.field)))?;
        let times: Vec<f64> = rule.iter().map(|(s, _)| s * len).collect();
        let pts = integrate_to_times(field, start, seg.time, &times, &opts)?;
        let mean: f64 = pts
            .iter()
            .zip(&rule)
            .map(|(y, (_, w))| w * x_norm(sys, &f.gradient(y), y))
            .sum();
        // Time spent on the segment in the unit parametrisation.
        let duration = len / rho.powi(field_weight(seg.field) as i32);
        integral += duration * mean;
    }
    let rhs = (sys.n() as f64).sqrt() * rho * integral;
    let holds = lhs <= rhs * (1.0 + SLACK) + 1e-14;
    Ok(LagrangeReport {
        x0: x0.to_vec(),
        x: x.to_vec(),
        lhs,
        rhs,
        rho,
        segments: path.segments.len(),
        holds,
    })
}
