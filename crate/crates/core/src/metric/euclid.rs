//! Comparison of the control distance with the Euclidean one.

use super::distance::{d1_graph, d_graph};
use super::graph::Resolution;
use super::path::{d1_upper, DistanceEstimate};
use crate::error::{Error, Result};
use crate::fields::{bracket_values, candidate_bases, VectorFieldSystem};
use crate::linalg;
use serde::Serialize;

/// Constants sampled on a grid of the inner domain.
#[derive(Clone, Debug, Serialize)]
pub struct EuclidConstants {
    /// `sup_z sum_{|I| <= r} |X_[I](z)|`.
    pub k: f64,
    /// `inf_z max_eta lambda_min(Gram(X_[I_1](z), ..., X_[I_p](z)))`.
    pub c0: f64,
    pub grid_points: usize,
}

pub fn euclid_constants(sys: &VectorFieldSystem, per_axis: usize) -> Result<EuclidConstants> {
    let grid = sys.inner.grid(per_axis);
    let bases = candidate_bases(sys);
    let mut k = 0.0f64;
    let mut c0 = f64::INFINITY;
    for z in &grid {
        let vals = bracket_values(sys, z)?;
        k = k.max(vals.values.iter().map(|v| linalg::norm(v)).sum());
        let mut best = 0.0f64;
        for b in &bases {
            let rows: Vec<Vec<f64>> = b
                .0
                .iter()
                .map(|i| vals.value(i).expect("canonical bracket").to_vec())
                .collect();
            best = best.max(linalg::gram_min_eigenvalue(&rows));
        }
        c0 = c0.min(best);
    }
    if !(c0 > 0.0) {
        return Err(Error::Degenerate(format!(
            "Gram lower bound {:.3e} on the {}-point grid",
            c0,
            grid.len()
        )));
    }
    Ok(EuclidConstants {
        k,
        c0,
        grid_points: grid.len(),
    })
}

/// `(|x - y| / K, delta)` where `delta` solves `sum_{w=1}^{r} (A / delta^w)^2 = 1`
/// with `A = |x - y| / sqrt(c0)`.
pub fn euclid_bracket(
    sys: &VectorFieldSystem,
    consts: &EuclidConstants,
    x: &[f64],
    y: &[f64],
) -> Result<DistanceEstimate> {
    sys.check_inner(x)?;
    sys.check_inner(y)?;
    let e = linalg::dist(x, y);
    let a = e / consts.c0.sqrt();
    let upper = if e == 0.0 {
        0.0
    } else {
        let g = |d: f64| -> f64 {
            (1..=sys.step)
                .map(|w| (a / d.powi(w as i32)).powi(2))
                .sum::<f64>()
                - 1.0
        };
        let mut lo = 0.0;
        let mut hi = 1.0f64;
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    Ok(DistanceEstimate {
        lower: e / consts.k,
        upper,
        lower_method: format!("euclidean / K, K = {:.6}", consts.k),
        upper_method: format!("gram bound, c0 = {:.6}", consts.c0),
        witness: None,
    })
}

/// Per-pair comparison of the two graph distances.
#[derive(Clone, Debug, Serialize)]
pub struct PairRatio {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub d1: f64,
    pub d: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceStats {
    pub pairs: Vec<PairRatio>,
    pub skipped: usize,
    pub max_ratio: f64,
    /// Pairs with `d > d1 + slack`.
    pub violations: usize,
    pub slack: f64,
}

/// `d1_graph / d_graph` on each pair; resolution per pair is `steps` moves
/// across the chart upper bound of `d1`.
pub fn distance_equivalence_ratio(
    sys: &VectorFieldSystem,
    pairs: &[(Vec<f64>, Vec<f64>)],
    steps: usize,
    tol: f64,
) -> Result<EquivalenceStats> {
    let rows: Vec<Option<(PairRatio, f64)>> = {
        use rayon::prelude::*;
        pairs
            .par_iter()
            .map(|(x, y)| -> Result<Option<(PairRatio, f64)>> {
                if linalg::dist(x, y) == 0.0 {
                    return Ok(None);
                }
                let est = d1_upper(sys, x, y, tol)?.upper;
                let res = Resolution::for_pair(sys, est, steps);
                let d1 = d1_graph(sys, x, y, &res, tol)?;
                let d = d_graph(sys, x, y, d1, &res, 12, tol)?;
                Ok(Some((
                    PairRatio {
                        x: x.clone(),
                        y: y.clone(),
                        d1,
                        d,
                        ratio: d1 / d,
                    },
                    2.0 * res.step,
                )))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let mut out = Vec::new();
    let mut violations = 0;
    let mut slack = 0.0f64;
    for (p, s) in rows.into_iter().flatten() {
        if p.d > p.d1 + s {
            violations += 1;
        }
        slack = slack.max(s);
        out.push(p);
    }
    let max_ratio = out.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(EquivalenceStats {
        pairs: out,
        skipped,
        max_ratio,
        violations,
        slack,
    })
}
