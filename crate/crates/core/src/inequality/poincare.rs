use super::sampler::{BallMeasure, BallSample};
use super::{x_norm, TestFunction};
use crate::error::{Error, Result};
use crate::fields::{taylor_system, VectorFieldSystem};
use crate::linalg;
use crate::metric::Flavor;
use rayon::prelude::*;
use serde::Serialize;

/// Left side, right-hand core and their quotient for one ball.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub implied_constant: f64,
    pub samples: usize,
    pub inner_samples: usize,
    pub x0: Vec<f64>,
    pub rho: f64,
    pub lambda: f64,
    pub p: f64,
    pub flavor: Flavor,
    pub steps: usize,
}

/// Values of `u` and `|Xu|` at the samples.
fn evaluate(sys: &VectorFieldSystem, u: &TestFunction, samples: &[BallSample]) -> Vec<(f64, f64, bool)> {
    samples
        .par_iter()
        .map(|s| {
            let g = u.gradient(&s.point);
            (u.eval(&s.point), x_norm(sys, &g, &s.point), s.inner)
        })
        .collect()
}

fn check_dim(sys: &VectorFieldSystem, u: &TestFunction) -> Result<()> {
    if u.dim() != sys.dim {
        return Err(Error::Invalid(format!(
            "test function {} lives in dimension {}, system in {}",
            u.name,
            u.dim(),
            sys.dim
        )));
    }
    Ok(())
}

fn inner_mean(vals: &[(f64, f64, bool)]) -> Result<(f64, usize)> {
    let inner: Vec<f64> = vals.iter().filter(|v| v.2).map(|v| v.0).collect();
    if inner.is_empty() {
        return Err(Error::Budget("no sample fell in the inner ball".into()));
    }
    Ok((inner.iter().sum::<f64>() / inner.len() as f64, inner.len()))
}

fn quotient(lhs: f64, rhs: f64, scale: f64) -> Result<f64> {
    if rhs > 0.0 {
        Ok(lhs / rhs)
    } else if lhs <= 1e-12 * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::Degenerate(format!(
            "right side vanishes while the left side is {:.3e}",
            lhs
        )))
    }
}

/// `int_B |u - u_B|` against `rho int_{lambda B} |Xu|` with matched samples of `lambda B`.
pub fn poincare_ratio(
    sys: &VectorFieldSystem,
    u: &TestFunction,
    ball: &BallMeasure,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    check_dim(sys, u)?;
    let pts = ball.samples(samples, seed);
    let vals = evaluate(sys, u, &pts);
    let (ub, inner) = inner_mean(&vals)?;
    let lhs_mean = vals.iter().filter(|v| v.2).map(|v| (v.0 - ub).abs()).sum::<f64>() / inner as f64;
    let lhs = ball.volume * lhs_mean;
    let grad_mean = vals.iter().map(|v| v.1).sum::<f64>() / vals.len() as f64;
    let rhs = ball.rho * ball.outer_volume * grad_mean;
    Ok(InequalityReport {
        lhs,
        rhs,
        implied_constant: quotient(lhs, rhs, ub.abs())?,
        samples: vals.len(),
        inner_samples: inner,
        x0: ball.x0.clone(),
        rho: ball.rho,
        lambda: ball.lambda,
        p: 1.0,
        flavor: ball.flavor,
        steps: ball.steps,
    })
}

/// `(mean_B |u - u_B|^p)^{1/p}` against `rho (mean_B |Xu|^p)^{1/p}` on one ball.
pub fn p_poincare_ratio(
    sys: &VectorFieldSystem,
    u: &TestFunction,
    ball: &BallMeasure,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    check_dim(sys, u)?;
    if !(p >= 1.0) {
        return Err(Error::Invalid(format!("exponent must be >= 1, got {}", p)));
    }
    if ball.lambda != 1.0 {
        return Err(Error::Invalid("the p-Poincare form uses lambda = 1".into()));
    }
    let pts = ball.samples(samples, seed);
    let vals = evaluate(sys, u, &pts);
    let (ub, inner) = inner_mean(&vals)?;
    let lhs = (vals
        .iter()
        .filter(|v| v.2)
        .map(|v| (v.0 - ub).abs().powf(p))
        .sum::<f64>()
        / inner as f64)
        .powf(1.0 / p);
    let rhs = ball.rho
        * (vals.iter().filter(|v| v.2).map(|v| v.1.powf(p)).sum::<f64>() / inner as f64)
            .powf(1.0 / p);
    Ok(InequalityReport {
        lhs,
        rhs,
        implied_constant: quotient(lhs, rhs, ub.abs())?,
        samples: vals.len(),
        inner_samples: inner,
        x0: ball.x0.clone(),
        rho: ball.rho,
        lambda: 1.0,
        p,
        flavor: ball.flavor,
        steps: ball.steps,
    })
}

/// Poincare left side next to the two pieces of `rho int_{lambda B} |Su|` for
/// the osculating system `S` at `x0`: the `X` part and the remainder `(S - X)u`.
#[derive(Clone, Debug, Serialize)]
pub struct RoughPoincareReport {
    pub lhs: f64,
    /// `rho int_{lambda B} |Xu|`.
    pub x_term: f64,
    /// `rho int_{lambda B} |(S - X)u|`.
    pub remainder_term: f64,
    /// `int_{lambda B} |grad u|`.
    pub gradient_term: f64,
    /// `remainder_term / (rho^r gradient_term)`.
    pub coefficient: f64,
    pub rho: f64,
    pub lambda: f64,
    pub samples: usize,
}

pub fn rough_poincare_decomposition(
    sys: &VectorFieldSystem,
    u: &TestFunction,
    ball: &BallMeasure,
    samples: usize,
    seed: u64,
) -> Result<RoughPoincareReport> {
    check_dim(sys, u)?;
    let taylor = taylor_system(sys, &ball.x0)?;
    let reach = ball.lambda * ball.rho;
    if taylor.validity_radius < reach {
        return Err(Error::OutsideValidity {
            distance: reach,
            radius: taylor.validity_radius,
        });
    }
    let s = &taylor.system;
    let pts = ball.samples(samples, seed);
    let vals: Vec<(f64, f64, f64, f64, bool)> = pts
        .par_iter()
        .map(|p| {
            let g = u.gradient(&p.point);
            let xu = super::x_gradient_unchecked(sys, &g, &p.point);
            let su = super::x_gradient_unchecked(s, &g, &p.point);
            let diff: Vec<f64> = su.iter().zip(&xu).map(|(a, b)| a - b).collect();
            (
                u.eval(&p.point),
                linalg::norm(&xu),
                linalg::norm(&diff),
                linalg::norm(&g),
                p.inner,
            )
        })
        .collect();
    let inner: Vec<f64> = vals.iter().filter(|v| v.4).map(|v| v.0).collect();
    if inner.is_empty() {
        return Err(Error::Budget("no sample fell in the inner ball".into()));
    }
    let ub = inner.iter().sum::<f64>() / inner.len() as f64;
    let lhs = ball.volume * inner.iter().map(|v| (v - ub).abs()).sum::<f64>() / inner.len() as f64;
    let n = vals.len() as f64;
    let mean = |k: usize| -> f64 {
        vals.iter()
            .map(|v| match k {
                1 => v.1,
                2 => v.2,
                _ => v.3,
            })
            .sum::<f64>()
            / n
    };
    let x_term = ball.rho * ball.outer_volume * mean(1);
    let remainder_term = ball.rho * ball.outer_volume * mean(2);
    let gradient_term = ball.outer_volume * mean(3);
    let coefficient = if gradient_term > 0.0 {
        remainder_term / (ball.rho.powi(sys.step as i32) * gradient_term)
    } else {
        0.0
    };
    Ok(RoughPoincareReport {
        lhs,
        x_term,
        remainder_term,
        gradient_term,
        coefficient,
        rho: ball.rho,
        lambda: ball.lambda,
        samples: vals.len(),
    })
}
