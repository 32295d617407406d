use super::graph::{sweep, CellFrame, DistanceField, MoveSet, Resolution};
use crate::error::{Error, Result};
use crate::fields::{canonical_indices, MultiIndex, VectorFieldSystem};
use crate::flows::FieldBank;
use crate::linalg;

/// Breadth-first flood of the subunit graph from `x0` up to time `radius`.
pub fn flood_d1(
    sys: &VectorFieldSystem,
    x0: &[f64],
    radius: f64,
    res: &Resolution,
    tol: f64,
) -> Result<DistanceField> {
    sys.check_point(x0)?;
    let frame = CellFrame::new(sys, x0, radius, res.step, res.cell)?;
    let moves = MoveSet::subunit(sys, res.directions, res.step)?;
    let levels = (radius / res.step - 1e-9).ceil().max(1.0) as u32;
    Ok(sweep(sys, frame, &moves, levels, None, res.max_nodes, tol)?.0)
}

/// Subunit graph distance: minimal number of moves of duration `step` whose
/// endpoint lands in the cell of `y`, times `step`.
pub fn d1_graph(
    sys: &VectorFieldSystem,
    x: &[f64],
    y: &[f64],
    res: &Resolution,
    tol: f64,
) -> Result<f64> {
    sys.check_point(x)?;
    sys.check_point(y)?;
    let rho = (8.0 * res.step).max(linalg::dist(x, y));
    let frame = CellFrame::new(sys, x, rho, res.step, res.cell)?;
    let moves = MoveSet::subunit(sys, res.directions, res.step)?;
    match sweep(sys, frame, &moves, u32::MAX, Some(y), res.max_nodes, tol)? {
        (_, Some(level)) => Ok(level as f64 * res.step),
        (field, None) => Err(Error::Unreachable {
            bound: field.max_level as f64 * res.step,
        }),
    }
}

/// Canonical brackets whose symbolic expression is not identically zero.
pub(crate) fn active_brackets(sys: &VectorFieldSystem) -> Result<(FieldBank, Vec<MultiIndex>)> {
    let bank = FieldBank::new(sys)?;
    let indices = canonical_indices(sys)
        .into_iter()
        .filter(|i| bank.get(i).map_or(false, |f| !f.is_zero()))
        .collect();
    Ok((bank, indices))
}

/// Whether `y` is reachable in unit time with commutator controls of scale `delta`.
pub(crate) fn reachable_d(
    sys: &VectorFieldSystem,
    bank: &FieldBank,
    indices: &[MultiIndex],
    x: &[f64],
    y: &[f64],
    delta: f64,
    res: &Resolution,
    tol: f64,
) -> Result<Option<DistanceField>> {
    let k = ((delta / res.step).ceil() as u32).max(2);
    let unit = delta / k as f64;
    let frame = CellFrame::new(sys, x, delta, unit, res.cell)?;
    let moves = MoveSet::commutator(res.directions, delta, 1.0 / k as f64, bank, indices);
    let (field, hit) = sweep(sys, frame, &moves, k, Some(y), res.max_nodes, tol)?;
    Ok(hit.map(|_| field))
}

/// Set reachable in unit time with commutator controls of scale `delta`:
/// the graph version of the ball `B(x0, delta)` for `d`.
pub fn flood_d(
    sys: &VectorFieldSystem,
    x0: &[f64],
    delta: f64,
    res: &Resolution,
    tol: f64,
) -> Result<DistanceField> {
    sys.check_point(x0)?;
    let (bank, indices) = active_brackets(sys)?;
    let k = ((delta / res.step).ceil() as u32).max(2);
    let unit = delta / k as f64;
    let frame = CellFrame::new(sys, x0, delta, unit, res.cell)?;
    let moves = MoveSet::commutator(res.directions, delta, 1.0 / k as f64, &bank, &indices);
    Ok(sweep(sys, frame, &moves, k, None, res.max_nodes, tol)?.0)
}

/// Commutator graph distance: smallest `delta` (bisection) for which `y` is
/// reachable in unit time with `sum_I (a_I / delta^{|I|})^2 <= 1`.
pub fn d_graph(
    sys: &VectorFieldSystem,
    x: &[f64],
    y: &[f64],
    upper: f64,
    res: &Resolution,
    bisection_steps: usize,
    tol: f64,
) -> Result<f64> {
    sys.check_point(x)?;
    sys.check_point(y)?;
    if linalg::dist(x, y) == 0.0 {
        return Ok(0.0);
    }
    let (bank, indices) = active_brackets(sys)?;
    let mut hi = upper;
    let mut ok = false;
    for _ in 0..4 {
        if reachable_d(sys, &bank, &indices, x, y, hi, res, tol)?.is_some() {
            ok = true;
            break;
        }
        hi *= 2.0;
    }
    if !ok {
        return Err(Error::Unreachable { bound: hi });
    }
    let mut lo = 0.0;
    for _ in 0..bisection_steps {
        let mid = 0.5 * (lo + hi);
        if reachable_d(sys, &bank, &indices, x, y, mid, res, tol)?.is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
