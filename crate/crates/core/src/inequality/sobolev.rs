use super::sampler::BallMeasure;
use super::{x_norm, TestFunction};
use crate::error::{Error, Result};
use crate::expr::{Node, Smoothness};
use crate::fields::{commutator, optimal_basis, VectorFieldSystem};
use crate::linalg;
use crate::metric::{control_directions, Flavor};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Bump `a max(0, 1 - |w|^2)^2` in scaled privileged coordinates at a centre:
/// `y = c + sum_j h_j w_j X_[I_j](c)`.
#[derive(Clone, Debug, Serialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub half_widths: Vec<f64>,
    pub amplitude: f64,
}

impl Bump {
    /// Half-widths `(scale)^{|I_j|}` along the basis selected at `scale`.
    pub fn new(sys: &VectorFieldSystem, center: &[f64], scale: f64, amplitude: f64) -> Result<Bump> {
        let basis = optimal_basis(sys, center, scale)?.basis;
        let rows = basis
            .0
            .iter()
            .map(|i| commutator(sys, i, center))
            .collect::<Result<Vec<_>>>()?;
        let half_widths = basis.weights().iter().map(|&w| scale.powi(w as i32)).collect();
        Ok(Bump {
            center: center.to_vec(),
            rows,
            half_widths,
            amplitude,
        })
    }

    pub fn point(&self, w: &[f64]) -> Vec<f64> {
        let mut y = self.center.clone();
        for ((wj, hj), row) in w.iter().zip(&self.half_widths).zip(&self.rows) {
            for (ym, rm) in y.iter_mut().zip(row) {
                *ym += wj * hj * rm;
            }
        }
        y
    }

    /// Euclidean volume of the box `w in [-1, 1]^p`.
    pub fn box_volume(&self) -> f64 {
        linalg::det(&self.rows).abs()
            * self.half_widths.iter().map(|h| 2.0 * h).product::<f64>()
    }

    pub fn test_function(&self) -> Result<TestFunction> {
        let p = self.center.len();
        let mt: Vec<Vec<f64>> = (0..p)
            .map(|r| (0..p).map(|c| self.rows[c][r]).collect())
            .collect();
        let inv = linalg::inverse(&mt)
            .ok_or_else(|| Error::Degenerate("bump frame is singular".into()))?;
        let mut sq = Node::Const(0.0);
        for (j, row) in inv.iter().enumerate() {
            let mut wj = Node::Const(0.0);
            for (m, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let shifted = Node::sub(Node::Var(m), Node::Const(self.center[m]));
                wj = Node::add(wj, Node::mul(Node::Const(a / self.half_widths[j]), shifted));
            }
            sq = Node::add(sq, Node::pow(wj, 2));
        }
        let core = Node::max(Node::Const(0.0), Node::sub(Node::Const(1.0), sq));
        let node = Node::mul(Node::Const(self.amplitude), Node::pow(core, 2));
        let mut f = TestFunction::from_node("bump", node, p, Smoothness::CkLip(1))?;
        f.bump = Some(self.clone());
        Ok(f)
    }
}

/// Checks that `phi` and its gradient vanish on a sample of the boundary of
/// its support and that the sample lies in the ball. The gradient threshold is
/// relative to `amplitude / min h_j`, the size of the gradient inside.
fn check_support(phi: &TestFunction, bump: &Bump, ball: &BallMeasure, sys: &VectorFieldSystem) -> Result<()> {
    let h = bump.half_widths.iter().cloned().fold(f64::INFINITY, f64::min);
    let g_tol = 1e-12 * (bump.amplitude.abs() / h).max(1.0);
    for w in control_directions(bump.center.len(), 62) {
        let y = bump.point(&w);
        if !sys.domain.contains(&y) || !ball.contains(&y) {
            return Err(Error::Support(format!(
                "support boundary point {:?} lies outside B({:?}, {})",
                y, ball.x0, ball.rho
            )));
        }
        let v = phi.eval(&y).abs();
        let g = linalg::norm(&phi.gradient(&y));
        if v > 1e-12 || g > g_tol {
            return Err(Error::Support(format!(
                "bump does not vanish on its support boundary ({:.3e}, {:.3e})",
                v, g
            )));
        }
    }
    Ok(())
}

/// `(mean_B |phi|^{kp})^{1/kp} / (rho (mean_B |X phi|^p)^{1/p})` for every `k`,
/// with integrals over the support of the bump.
#[allow(clippy::too_many_arguments)]
pub fn sobolev_ratio(
    sys: &VectorFieldSystem,
    phi: &TestFunction,
    ball: &BallMeasure,
    p: f64,
    ks: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let bump = phi
        .bump
        .as_ref()
        .ok_or_else(|| Error::Support("test function carries no support description".into()))?;
    check_support(phi, bump, ball, sys)?;
    let dim = bump.center.len();
    let vals: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, "sobolev", i as u64);
            let w: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
            let y = bump.point(&w);
            (phi.eval(&y).abs(), x_norm(sys, &phi.gradient(&y), &y))
        })
        .collect();
    let jac = bump.box_volume() / samples as f64;
    let grad = jac * vals.iter().map(|v| v.1.powf(p)).sum::<f64>();
    ks.iter()
        .map(|&k| {
            let q = k * p;
            let top = jac * vals.iter().map(|v| v.0.powf(q)).sum::<f64>();
            if top == 0.0 {
                return Ok(0.0);
            }
            if grad == 0.0 {
                return Err(Error::Degenerate("X-gradient of the bump vanishes".into()));
            }
            Ok((top / ball.volume).powf(1.0 / q) / (ball.rho * (grad / ball.volume).powf(1.0 / p)))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SobolevRow {
    /// Bump scale relative to `sigma rho`.
    pub s: f64,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SobolevReport {
    /// Largest `k` of the grid whose ratio stays below the cap at every scale.
    pub k: Option<f64>,
    pub cap: f64,
    pub ks: Vec<f64>,
    pub rows: Vec<SobolevRow>,
    pub rho: f64,
    pub p: f64,
    pub sigma: f64,
}

/// Empirical Sobolev exponent on the fixed ball `B(x0, rho)`: bumps of
/// scale `sigma s rho`, `s = 2^0, ..., 2^{-levels}`, concentrate at `x0`; the
/// reported `k` is the largest grid exponent `1.1, 1.2, ..., 3.0` whose
/// ratio stays at most `cap` on all of them.
#[allow(clippy::too_many_arguments)]
pub fn sobolev_exponent(
    sys: &VectorFieldSystem,
    x0: &[f64],
    rho: f64,
    p: f64,
    amplitude: f64,
    levels: u32,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SobolevReport> {
    let sigma = 0.1;
    let cap = 10.0;
    let ks: Vec<f64> = (11..=30).map(|k| k as f64 / 10.0).collect();
    let ball = BallMeasure::new(sys, x0, rho, 1.0, Flavor::D1, 8, tol)?;
    let mut rows = Vec::new();
    for l in 0..=levels {
        let s = 0.5f64.powi(l as i32);
        let phi = Bump::new(sys, x0, sigma * s * rho, amplitude)?.test_function()?;
        let ratios = sobolev_ratio(sys, &phi, &ball, p, &ks, samples, seed ^ l as u64)?;
        rows.push(SobolevRow { s, ratios });
    }
    let k = ks
        .iter()
        .enumerate()
        .filter(|(j, _)| rows.iter().all(|r| r.ratios[*j] <= cap))
        .map(|(_, &k)| k)
        .last();
    Ok(SobolevReport {
        k,
        cap,
        ks,
        rows,
        rho,
        p,
        sigma,
    })
}
