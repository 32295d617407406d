use super::quasi::{apply_factors, c_factors, Factor};
use super::{FieldBank, FlowOptions};
use crate::error::Result;
use crate::fields::{check_bracket, commutator, MultiIndex, VectorFieldSystem};
use crate::linalg;
use serde::Serialize;

/// `|C_l(t)(x) - x - t^{|I|} X_[I](x)| / t^{|I|}` for `t > 0`.
pub fn expansion_residual(
    sys: &VectorFieldSystem,
    index: &MultiIndex,
    t: f64,
    x: &[f64],
    tol: f64,
) -> Result<f64> {
    check_bracket(sys, index)?;
    sys.check_point(x)?;
    let bank = FieldBank::base(sys);
    let opts = FlowOptions::new(tol).within(&sys.domain);
    let y = apply_factors(&bank, &c_factors(index, t), x, &opts)?;
    let v = commutator(sys, index, x)?;
    let tw = t.abs().powi(index.weight() as i32);
    let pred: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + tw * b).collect();
    Ok(linalg::dist(&y, &pred) / tw)
}

#[derive(Clone, Debug, Serialize)]
pub struct MixedDerivativeReport {
    pub i: usize,
    pub j: usize,
    pub point: Vec<f64>,
    /// `d^2 F / dt ds` at `t = s = 0`.
    pub lhs: Vec<f64>,
    /// `(d^2 A / dx dt)(dB/ds) - (d^2 B / ds dx)(dA/dt)` at `t = s = 0`.
    pub rhs: Vec<f64>,
    pub max_abs_diff: f64,
}

/// Checks the mixed second derivative of `F(t, s, x) = A^{-1}(t, B^{-1}(s, A(t, B(s, x))))`
/// with `A(t) = exp(t X_j)` and `B(s) = exp(s X_i)`; both sides equal `[X_i, X_j](x)`.
pub fn mixed_derivative_check(
    sys: &VectorFieldSystem,
    i: usize,
    j: usize,
    x: &[f64],
    tol: f64,
) -> Result<MixedDerivativeReport> {
    sys.check_point(x)?;
    for k in [i, j] {
        let f = sys.field(k)?;
        f.smoothness.check_order(2).map_err(|_| {
            crate::error::Error::Smoothness(format!(
                "X_{} is declared {}, the mixed-derivative check needs C^2",
                k, f.smoothness
            ))
        })?;
    }
    let bank = FieldBank::base(sys);
    let opts = FlowOptions::new(tol).within(&sys.domain);
    let p = x.len();
    let h = 1e-4;
    let f = |t: f64, s: f64| -> Result<Vec<f64>> {
        let factors = [
            Factor { field: i, time: s },
            Factor { field: j, time: t },
            Factor { field: i, time: -s },
            Factor { field: j, time: -t },
        ];
        apply_factors(&bank, &factors, x, &opts)
    };
    let (pp, pm, mp, mm) = (f(h, h)?, f(h, -h)?, f(-h, h)?, f(-h, -h)?);
    let lhs: Vec<f64> = (0..p)
        .map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h))
        .collect();

    let flow = |field: usize, t: f64, y: &[f64]| -> Result<Vec<f64>> {
        apply_factors(&bank, &[Factor { field, time: t }], y, &opts)
    };
    let velocity = |field: usize, y: &[f64]| -> Result<Vec<f64>> {
        let a = flow(field, h, y)?;
        let b = flow(field, -h, y)?;
        Ok(a.iter().zip(&b).map(|(u, v)| (u - v) / (2.0 * h)).collect())
    };
    // Directional derivative of y -> velocity(field, y) along w.
    let along = |field: usize, w: &[f64]| -> Result<Vec<f64>> {
        let mut out = vec![0.0; p];
        for m in 0..p {
            if w[m] == 0.0 {
                continue;
            }
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[m] += h;
            b[m] -= h;
            let (va, vb) = (velocity(field, &a)?, velocity(field, &b)?);
            for k in 0..p {
                out[k] += w[m] * (va[k] - vb[k]) / (2.0 * h);
            }
        }
        Ok(out)
    };
    let db = velocity(i, x)?;
    let da = velocity(j, x)?;
    let t1 = along(j, &db)?;
    let t2 = along(i, &da)?;
    let rhs: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a - b).collect();
    let max_abs_diff = linalg::max_abs_diff(&lhs, &rhs);
    Ok(MixedDerivativeReport {
        i,
        j,
        point: x.to_vec(),
        lhs,
        rhs,
        max_abs_diff,
    })
}
