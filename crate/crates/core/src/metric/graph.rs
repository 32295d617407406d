//! Reachability graphs of piecewise-constant controls.
//!
//! Points reached by concatenating flows of duration `tau` are bucketed into
//! cells of a grid in linearised privileged coordinates at the source: the
//! displacement `y - x0 = sum_j v_j X_[I_j](x0)` is expressed in the basis
//! selected at the source and `v_j` is cut into cells of size `kappa s^{|I_j|}`.
//! The first node to reach a cell becomes its representative. All moves take
//! the same time, so Dijkstra with `(time, node id)` ordering reduces to a
//! breadth-first sweep in insertion order.

use crate::error::{Error, Result};
use crate::fields::{optimal_basis, BasisFamily, VectorFieldSystem, MultiIndex};
use crate::flows::{apply_factors, integrate, Combination, Factor, FieldBank, FlowOptions};
use crate::linalg;
use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

pub const MAX_GRAPH_DIM: usize = 6;

pub type CellKey = [i32; MAX_GRAPH_DIM];

/// Discretisation parameters of a graph search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Duration of one move (absolute time for the subunit graph; for the
    /// commutator graph the spatial length per move at the candidate scale).
    pub step: f64,
    /// Number of sampled control directions in addition to the coordinate axes.
    pub directions: usize,
    /// Cell size factor `kappa`: cells are `kappa step^{|I_j|}` along `v_j`.
    pub cell: f64,
    /// Node budget.
    pub max_nodes: usize,
}

impl Resolution {
    /// `steps` moves across a distance `scale`.
    pub fn for_scale(scale: f64, steps: usize) -> Resolution {
        Resolution {
            step: scale / steps.max(1) as f64,
            directions: 16,
            cell: 0.5,
            max_nodes: 2_000_000,
        }
    }

    /// Like [`Resolution::for_scale`] for a search from `x` to `y` with a known
    /// upper bound on the travel time. Loose bounds would give moves longer
    /// than the domain, so the scale is capped by the narrowest domain side.
    pub fn for_pair(sys: &VectorFieldSystem, upper: f64, steps: usize) -> Resolution {
        let width = sys
            .domain
            .lo
            .iter()
            .zip(&sys.domain.hi)
            .map(|(a, b)| b - a)
            .fold(f64::INFINITY, f64::min);
        Resolution::for_scale(upper.min(width), steps)
    }
}

/// Linearised privileged coordinates at a base point.
#[derive(Clone, Debug, Serialize)]
pub struct CellFrame {
    pub origin: Vec<f64>,
    pub basis: BasisFamily,
    /// Rows `X_[I_j](x0)`.
    rows: Vec<Vec<f64>>,
    /// `(M^T)^{-1}` mapping displacements to `v`.
    inv: Vec<Vec<f64>>,
    pub sizes: Vec<f64>,
    det: f64,
    expo: Vec<f64>,
}

impl CellFrame {
    pub fn new(
        sys: &VectorFieldSystem,
        x0: &[f64],
        rho: f64,
        unit: f64,
        kappa: f64,
    ) -> Result<CellFrame> {
        if sys.dim > MAX_GRAPH_DIM {
            return Err(Error::Invalid(format!(
                "graph search supports dimension <= {}",
                MAX_GRAPH_DIM
            )));
        }
        let basis = optimal_basis(sys, x0, rho)?.basis;
        let rows = basis
            .0
            .iter()
            .map(|i| crate::fields::commutator(sys, i, x0))
            .collect::<Result<Vec<_>>>()?;
        let mt: Vec<Vec<f64>> = (0..sys.dim)
            .map(|r| (0..sys.dim).map(|c| rows[c][r]).collect())
            .collect();
        let inv = linalg::inverse(&mt)
            .ok_or_else(|| Error::Degenerate(format!("degenerate basis at {:?}", x0)))?;
        let sizes = basis
            .weights()
            .iter()
            .map(|&w| kappa * unit.powi(w as i32))
            .collect();
        let det = linalg::det(&rows).abs();
        let expo = basis.weights().iter().map(|&w| 2.0 / w as f64).collect();
        Ok(CellFrame {
            origin: x0.to_vec(),
            basis,
            rows,
            inv,
            sizes,
            det,
            expo,
        })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn coords(&self, y: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = y.iter().zip(&self.origin).map(|(a, b)| a - b).collect();
        self.inv
            .iter()
            .map(|row| row.iter().zip(&d).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn key(&self, y: &[f64]) -> CellKey {
        let p = self.dim();
        let mut k = [0i32; MAX_GRAPH_DIM];
        for (j, kj) in k.iter_mut().enumerate().take(p) {
            let mut v = 0.0;
            for m in 0..p {
                v += self.inv[j][m] * (y[m] - self.origin[m]);
            }
            *kj = (v / self.sizes[j]).floor().clamp(i32::MIN as f64, i32::MAX as f64) as i32;
        }
        k
    }

    /// Point of a cell at fractional position `u in [0,1)^p`.
    pub fn cell_point(&self, key: &CellKey, u: &[f64]) -> Vec<f64> {
        let p = self.dim();
        let v: Vec<f64> = (0..p)
            .map(|j| (key[j] as f64 + u[j]) * self.sizes[j])
            .collect();
        (0..p)
            .map(|m| self.origin[m] + (0..p).map(|j| v[j] * self.rows[j][m]).sum::<f64>())
            .collect()
    }

    /// Homogeneous size `sum_j |v_j|^{2/w_j}` of the displacement from the origin.
    pub fn spread(&self, y: &[f64]) -> f64 {
        self.coords(y)
            .iter()
            .zip(&self.expo)
            .map(|(v, e)| v.abs().powf(*e))
            .sum()
    }

    /// Euclidean volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.sizes.iter().product::<f64>() * self.det
    }
}

/// Unit vectors used as controls: the coordinate axes and `extra` further
/// directions (equally spaced angles in the plane, a Fibonacci lattice otherwise).
pub fn control_directions(n: usize, extra: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let push = |out: &mut Vec<Vec<f64>>, v: Vec<f64>| {
        if !out.iter().any(|w| linalg::dist(w, &v) < 1e-9) {
            out.push(v);
        }
    };
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = s;
            push(&mut out, v);
        }
    }
    if n == 1 {
        return out;
    }
    if n == 2 {
        for k in 0..extra {
            let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / extra as f64;
            push(&mut out, vec![a.cos(), a.sin()]);
        }
        return out;
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for k in 0..extra {
        // Fibonacci lattice on S^2, lifted by alternating signs in higher dimensions.
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / extra as f64;
        let r = (1.0 - z * z).sqrt();
        let th = golden * k as f64;
        let mut v = vec![0.0; n];
        v[0] = r * th.cos();
        v[1] = r * th.sin();
        v[2] = z;
        for (m, vm) in v.iter_mut().enumerate().skip(3) {
            *vm = ((k + m) as f64 * golden).sin();
        }
        let nv = linalg::norm(&v);
        push(&mut out, v.iter().map(|a| a / nv).collect());
    }
    out
}

/// Moves of a reachability graph: each is a fixed linear combination of fields
/// followed for a fixed duration.
pub(crate) struct MoveSet {
    pub bank: FieldBank,
    pub moves: Vec<Vec<(f64, MultiIndex)>>,
    pub duration: f64,
}

impl MoveSet {
    /// Subunit moves `sum_i u_i X_i` with `|u| = 1`.
    pub fn subunit(sys: &VectorFieldSystem, directions: usize, duration: f64) -> Result<MoveSet> {
        if sys.has_drift() {
            return Err(Error::Invalid(
                "graph distances are defined for drift-free systems".into(),
            ));
        }
        let dirs = control_directions(sys.n(), directions);
        let moves = dirs
            .into_iter()
            .map(|u| {
                u.iter()
                    .enumerate()
                    .map(|(i, &c)| (c, MultiIndex::single(i + 1)))
                    .collect()
            })
            .collect();
        Ok(MoveSet {
            bank: FieldBank::base(sys),
            moves,
            duration,
        })
    }

    /// Commutator moves `sum_I u_I delta^{|I|} X_[I]` with `|u| = 1` over the
    /// canonical brackets that do not vanish identically.
    pub fn commutator(
        directions: usize,
        delta: f64,
        duration: f64,
        bank: &FieldBank,
        indices: &[MultiIndex],
    ) -> MoveSet {
        let dirs = control_directions(indices.len(), directions);
        let moves = dirs
            .into_iter()
            .map(|u| {
                u.iter()
                    .zip(indices)
                    .map(|(&c, idx)| (c * delta.powi(idx.weight() as i32), idx.clone()))
                    .collect()
            })
            .collect();
        MoveSet {
            bank: bank.clone(),
            moves,
            duration,
        }
    }
}

/// Result of a sweep: the level (number of moves) at which each cell was first reached.
#[derive(Clone, Debug)]
pub struct DistanceField {
    pub frame: CellFrame,
    pub step: f64,
    cells: FxHashMap<CellKey, u32>,
    order: Vec<CellKey>,
    points: Vec<Vec<f64>>,
    pub max_level: u32,
    pub complete: bool,
}

impl DistanceField {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn level(&self, key: &CellKey) -> Option<u32> {
        self.cells.get(key).copied()
    }

    /// Graph distance of the cell containing `y`, if reached.
    pub fn distance(&self, y: &[f64]) -> Option<f64> {
        self.level(&self.frame.key(y)).map(|l| l as f64 * self.step)
    }

    /// Largest level counted inside a ball of radius `rho`.
    pub fn level_for(&self, rho: f64) -> u32 {
        (rho / self.step + 1e-9).floor() as u32
    }

    pub fn contains(&self, y: &[f64], rho: f64) -> bool {
        let l = self.level_for(rho);
        self.level(&self.frame.key(y)).map_or(false, |v| v <= l)
    }

    /// Cells reached within `rho`, in discovery order.
    pub fn cells_within(&self, rho: f64) -> Vec<CellKey> {
        let l = self.level_for(rho);
        self.order
            .iter()
            .filter(|k| self.cells[*k] <= l)
            .copied()
            .collect()
    }

    /// Representative points of the cells reached within `rho`.
    pub fn points_within(&self, rho: f64) -> Vec<&[f64]> {
        let l = self.level_for(rho);
        self.order
            .iter()
            .zip(&self.points)
            .filter(|(k, _)| self.cells[*k] <= l)
            .map(|(_, p)| p.as_slice())
            .collect()
    }

    /// Volume estimate with a one-cell shell bracket `(estimate, lower, upper)`:
    /// the lower count drops member cells touching a non-member face neighbour,
    /// the upper count adds the non-member face neighbours.
    pub fn volume(&self, rho: f64) -> (f64, f64, f64) {
        let l = self.level_for(rho);
        let p = self.frame.dim();
        let member = |k: &CellKey| self.cells.get(k).map_or(false, |v| *v <= l);
        let mut count = 0usize;
        let mut interior = 0usize;
        let mut shell: FxHashMap<CellKey, ()> = FxHashMap::default();
        for k in &self.order {
            if !member(k) {
                continue;
            }
            count += 1;
            let mut inside = true;
            for j in 0..p {
                for s in [-1, 1] {
                    let mut nb = *k;
                    nb[j] += s;
                    if !member(&nb) {
                        inside = false;
                        shell.insert(nb, ());
                    }
                }
            }
            if inside {
                interior += 1;
            }
        }
        let cv = self.frame.cell_volume();
        (
            count as f64 * cv,
            interior as f64 * cv,
            (count + shell.len()) as f64 * cv,
        )
    }

    /// Volume bracket of every cell reached.
    pub fn volume_all(&self) -> (f64, f64, f64) {
        self.volume(self.max_level as f64 * self.step)
    }

    /// Uniform sample from the union of cells reached within `rho`.
    pub fn sample<R: Rng>(&self, cells: &[CellKey], rng: &mut R) -> Vec<f64> {
        let k = &cells[rng.gen_range(0..cells.len())];
        let u: Vec<f64> = (0..self.frame.dim()).map(|_| rng.gen::<f64>()).collect();
        self.frame.cell_point(k, &u)
    }
}

/// Breadth-first sweep from the frame origin. Stops when the target cell is
/// reached, when `max_level` is exceeded or when the node budget runs out.
pub(crate) fn sweep(
    sys: &VectorFieldSystem,
    frame: CellFrame,
    moves: &MoveSet,
    max_level: u32,
    target: Option<&[f64]>,
    max_nodes: usize,
    tol: f64,
) -> Result<(DistanceField, Option<u32>)> {
    let p = sys.dim;
    let combos: Vec<Combination> = moves
        .moves
        .iter()
        .map(|m| {
            let terms = m
                .iter()
                .map(|(c, idx)| (*c, moves.bank.get(idx).expect("move fields are in the bank")))
                .collect();
            Combination::new(p, terms)
        })
        .collect();
    let opts = FlowOptions::new(tol).within(&sys.domain);
    let origin = frame.origin.clone();
    let target_key = target.map(|t| frame.key(t));
    let mut cells: FxHashMap<CellKey, u32> = FxHashMap::default();
    let mut order = Vec::new();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let root = frame.key(&origin);
    cells.insert(root, 0);
    order.push(root);
    points.push(origin);
    let field = |cells, order, points, max_level, complete| DistanceField {
        frame: frame.clone(),
        step: moves.duration,
        cells,
        order,
        points,
        max_level,
        complete,
    };
    if target_key == Some(root) {
        return Ok((field(cells, order, points, 0, true), Some(0)));
    }
    let mut slot: FxHashMap<CellKey, usize> = FxHashMap::default();
    let mut spreads: Vec<f64> = vec![0.0];
    let mut frontier: Vec<usize> = vec![0];
    let mut level = 0u32;
    while level < max_level && !frontier.is_empty() {
        let mut next = Vec::new();
        for &node in &frontier {
            for c in &combos {
                let y = match integrate(c, &points[node], moves.duration, &opts) {
                    Ok(o) => o.end,
                    Err(_) => continue,
                };
                let key = frame.key(&y);
                if let Some(&l) = cells.get(&key) {
                    // Among arrivals in the same level keep the outermost one.
                    if l == level + 1 {
                        let idx = slot[&key];
                        let r = frame.spread(&y);
                        if r > spreads[idx] {
                            spreads[idx] = r;
                            points[idx] = y;
                        }
                    }
                    continue;
                }
                cells.insert(key, level + 1);
                slot.insert(key, points.len());
                spreads.push(frame.spread(&y));
                order.push(key);
                points.push(y);
                next.push(points.len() - 1);
                if Some(key) == target_key {
                    return Ok((field(cells, order, points, level + 1, false), Some(level + 1)));
                }
                if points.len() > max_nodes {
                    return Err(Error::Unreachable {
                        bound: level as f64 * moves.duration,
                    });
                }
            }
        }
        frontier = next;
        level += 1;
    }
    let complete = frontier.is_empty();
    Ok((field(cells, order, points, level, complete), None))
}

/// Breadth-first search over single-field moves `exp(+-step X_i)` from `x`
/// until a point within `ROUTE_REACH` cells of `y` along every coordinate is
/// reached. Returns the merged factor sequence, or `None` when the node
/// budget runs out first.
const ROUTE_REACH: f64 = 2.0;

pub fn axis_route(
    sys: &VectorFieldSystem,
    x: &[f64],
    y: &[f64],
    scale: f64,
    steps: usize,
    max_nodes: usize,
    tol: f64,
) -> Result<Option<Vec<Factor>>> {
    let step = scale / steps.max(1) as f64;
    // Cells live in coordinates at the target, where the final chart step runs.
    let frame = CellFrame::new(sys, y, scale, step, 0.5)?;
    let vy = frame.coords(y);
    let near = |z: &[f64]| {
        frame
            .coords(z)
            .iter()
            .zip(&vy)
            .zip(&frame.sizes)
            .all(|((a, b), h)| (a - b).abs() <= ROUTE_REACH * h)
    };
    let bank = FieldBank::base(sys);
    let opts = FlowOptions::new(tol).within(&sys.domain);
    let moves: Vec<Factor> = sys
        .field_indices()
        .into_iter()
        .filter(|&i| i != 0)
        .flat_map(|i| [Factor { field: i, time: step }, Factor { field: i, time: -step }])
        .collect();
    let mut seen: FxHashMap<CellKey, ()> = FxHashMap::default();
    let mut points = vec![x.to_vec()];
    let mut parent: Vec<Option<(usize, Factor)>> = vec![None];
    seen.insert(frame.key(x), ());
    let mut found = if near(x) { Some(0) } else { None };
    let mut head = 0;
    while found.is_none() && head < points.len() {
        let node = head;
        head += 1;
        for m in &moves {
            let z = match apply_factors(&bank, std::slice::from_ref(m), &points[node], &opts) {
                Ok(z) => z,
                Err(_) => continue,
            };
            if seen.insert(frame.key(&z), ()).is_some() {
                continue;
            }
            let hit = near(&z);
            points.push(z);
            parent.push(Some((node, *m)));
            if hit {
                found = Some(points.len() - 1);
                break;
            }
        }
        if points.len() > max_nodes {
            return Ok(None);
        }
    }
    let Some(mut node) = found else {
        return Ok(None);
    };
    let mut factors = Vec::new();
    while let Some((prev, f)) = parent[node] {
        factors.push(f);
        node = prev;
    }
    factors.reverse();
    let mut merged: Vec<Factor> = Vec::new();
    for f in factors {
        match merged.last_mut() {
            Some(last) if last.field == f.field => last.time += f.time,
            _ => merged.push(f),
        }
    }
    merged.retain(|f| f.time != 0.0);
    Ok(Some(merged))
}
