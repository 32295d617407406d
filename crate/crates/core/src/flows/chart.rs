use super::quasi::{apply_factors, e_factors, Factor};
use super::{FieldBank, FlowOptions};
use crate::error::{Error, Result};
use crate::fields::{commutator, field_weight, BasisFamily, VectorFieldSystem};
use crate::linalg;
use serde::Serialize;

/// Chart `h -> E_eta(x, h)` at a base point for a fixed basis.
#[derive(Clone, Debug, Serialize)]
pub struct ChartData {
    pub base: Vec<f64>,
    pub basis: BasisFamily,
    /// Rows `X_[I_j](x)`: the differential of the chart at `h = 0`.
    pub jacobian: Vec<Vec<f64>>,
    /// Euclidean radius of the neighbourhood on which inversion is attempted.
    pub radius: f64,
    pub tol: f64,
}

pub fn chart_at(
    sys: &VectorFieldSystem,
    x: &[f64],
    basis: &BasisFamily,
    tol: f64,
) -> Result<ChartData> {
    sys.check_point(x)?;
    if basis.len() != sys.dim {
        return Err(Error::Invalid("basis size differs from the dimension".into()));
    }
    let jacobian = basis
        .0
        .iter()
        .map(|i| commutator(sys, i, x))
        .collect::<Result<Vec<_>>>()?;
    if linalg::det(&jacobian) == 0.0 {
        return Err(Error::Degenerate(format!(
            "basis {} is degenerate at {:?}",
            basis, x
        )));
    }
    Ok(ChartData {
        base: x.to_vec(),
        basis: basis.clone(),
        jacobian,
        radius: 0.5 * sys.domain.distance_to_boundary(x),
        tol,
    })
}

/// Factors of `E_{I_1}(h_1) o ... o E_{I_p}(h_p)` in application order
/// (`E_{I_p}` acts first).
pub fn chart_factors(chart: &ChartData, h: &[f64]) -> Vec<Factor> {
    let mut out = Vec::new();
    for (idx, &hj) in chart.basis.0.iter().zip(h).rev() {
        if hj != 0.0 {
            out.extend(e_factors(idx, hj));
        }
    }
    out
}

/// Smallest `delta` with `sum_k |t_k| / delta^{p_k} <= 1`: the class bound of
/// the piecewise path that runs through the factors with durations `|t_k| / delta^{p_k}`.
pub fn class_bound(factors: &[Factor]) -> f64 {
    let lin: f64 = factors
        .iter()
        .filter(|f| field_weight(f.field) == 1)
        .map(|f| f.time.abs())
        .sum();
    let quad: f64 = factors
        .iter()
        .filter(|f| field_weight(f.field) == 2)
        .map(|f| f.time.abs())
        .sum();
    if quad == 0.0 {
        return lin;
    }
    // lin / d + quad / d^2 = 1
    0.5 * (lin + (lin * lin + 4.0 * quad).sqrt())
}

pub fn chart_forward(
    bank: &FieldBank,
    chart: &ChartData,
    h: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<f64>> {
    apply_factors(bank, &chart_factors(chart, h), &chart.base, opts)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartInverse {
    pub h: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton solve of `E_eta(x, h) = y` with a central-difference Jacobian,
/// started from the linearisation at `h = 0`.
pub fn chart_inverse(
    bank: &FieldBank,
    chart: &ChartData,
    y: &[f64],
    opts: &FlowOptions,
) -> Result<ChartInverse> {
    let p = chart.base.len();
    let gap = linalg::dist(y, &chart.base);
    if gap > chart.radius {
        return Err(Error::Convergence(format!(
            "target at distance {:.3e} outside the chart neighbourhood {:.3e}",
            gap, chart.radius
        )));
    }
    let diff: Vec<f64> = y.iter().zip(&chart.base).map(|(a, b)| a - b).collect();
    let mut h = linalg::solve_transposed(&chart.jacobian, &diff)
        .ok_or_else(|| Error::Degenerate("singular chart differential".into()))?;
    let eval = |h: &[f64]| -> Option<Vec<f64>> {
        chart_forward(bank, chart, h, opts)
            .ok()
            .map(|z| z.iter().zip(y).map(|(a, b)| a - b).collect())
    };
    let stop = 0.01 * chart.tol;
    let mut r = eval(&h).ok_or_else(|| Error::Convergence("initial guess leaves the domain".into()))?;
    for it in 0..50 {
        let rn = inf_norm(&r);
        if rn <= stop {
            return Ok(ChartInverse {
                h,
                iterations: it,
                residual: rn,
            });
        }
        let mut jac = vec![vec![0.0; p]; p];
        for j in 0..p {
            let s = (1e-4 * h[j].abs().max(1e-3)).max(1e-7);
            let mut hp = h.clone();
            let mut hm = h.clone();
            hp[j] += s;
            hm[j] -= s;
            let (fp, fm) = match (eval(&hp), eval(&hm)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Convergence("Jacobian probe left the domain".into())),
            };
            for i in 0..p {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * s);
            }
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = linalg::solve(&jac, &rhs)
            .ok_or_else(|| Error::Convergence("singular Newton Jacobian".into()))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let trial: Vec<f64> = h.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            if let Some(rt) = eval(&trial) {
                if inf_norm(&rt) < rn {
                    h = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        let step = lambda * inf_norm(&delta);
        if !accepted || step < 1e-10 * inf_norm(&h).max(1.0) {
            let rn = inf_norm(&r);
            if rn <= 10.0 * chart.tol {
                return Ok(ChartInverse {
                    h,
                    iterations: it + 1,
                    residual: rn,
                });
            }
            return Err(Error::Convergence(format!(
                "Newton stalled with residual {:.3e}",
                rn
            )));
        }
    }
    let rn = inf_norm(&r);
    if rn <= 10.0 * chart.tol {
        return Ok(ChartInverse {
            h,
            iterations: 50,
            residual: rn,
        });
    }
    Err(Error::Convergence(format!(
        "no convergence in 50 iterations (residual {:.3e})",
        rn
    )))
}
