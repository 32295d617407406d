//! Volumes of metric balls and comparisons between balls.

use super::distance::{flood_d, flood_d1};
use super::graph::{sweep, CellFrame, DistanceField, MoveSet, Resolution};
use super::path::{connect, Flavor};
use crate::error::{Error, Result};
use crate::fields::{bracket_values, candidate_bases, taylor_system, VectorFieldSystem};
use crate::rng;
use crate::stats;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Default number of graph moves across a ball radius.
pub const DEFAULT_STEPS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    /// Class bound of a chart path, falling back to the graph on failure.
    Chart,
    /// Graph flood from the centre.
    Graph,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BallMethod {
    /// Count the cells reached by a graph flood with `steps` moves per radius.
    FloodFill { steps: usize },
    /// Uniform samples from a box around the centre.
    Rejection { samples: usize, membership: Membership },
}

#[derive(Clone, Debug, Serialize)]
pub struct BallEstimate {
    pub center: Vec<f64>,
    pub radius: f64,
    pub flavor: Flavor,
    pub volume: f64,
    /// One-cell shell bracket (flood fill) or 95% Wilson interval (rejection).
    pub ci: (f64, f64),
    /// Graph nodes (flood fill) or samples drawn (rejection).
    pub samples: usize,
    pub method: BallMethod,
}

/// Graph flood of the ball `B(x0, rho)` in the given flavor.
pub fn flood_ball(
    sys: &VectorFieldSystem,
    x0: &[f64],
    rho: f64,
    flavor: Flavor,
    steps: usize,
    tol: f64,
) -> Result<DistanceField> {
    let res = Resolution::for_scale(rho, steps);
    match flavor {
        Flavor::D1 => flood_d1(sys, x0, rho, &res, tol),
        Flavor::D => flood_d(sys, x0, rho, &res, tol),
    }
}

fn zero_ball(x0: &[f64], flavor: Flavor, method: BallMethod) -> BallEstimate {
    BallEstimate {
        center: x0.to_vec(),
        radius: 0.0,
        flavor,
        volume: 0.0,
        ci: (0.0, 0.0),
        samples: 0,
        method,
    }
}

pub fn ball_volume(
    sys: &VectorFieldSystem,
    x0: &[f64],
    rho: f64,
    flavor: Flavor,
    method: BallMethod,
    seed: u64,
    tol: f64,
) -> Result<BallEstimate> {
    sys.check_point(x0)?;
    if rho < 0.0 {
        return Err(Error::Invalid(format!("negative radius {}", rho)));
    }
    if rho == 0.0 {
        return Ok(zero_ball(x0, flavor, method));
    }
    match method {
        BallMethod::FloodFill { steps } => {
            let field = flood_ball(sys, x0, rho, flavor, steps, tol)?;
            let (v, lo, hi) = field.volume_all();
            Ok(BallEstimate {
                center: x0.to_vec(),
                radius: rho,
                flavor,
                volume: v,
                ci: (lo, hi),
                samples: field.len(),
                method,
            })
        }
        BallMethod::Rejection {
            samples,
            membership,
        } => rejection_volume(sys, x0, rho, flavor, samples, membership, seed, tol)
            .map(|(volume, ci, n)| BallEstimate {
                center: x0.to_vec(),
                radius: rho,
                flavor,
                volume,
                ci,
                samples: n,
                method,
            }),
    }
}

/// Membership oracle for rejection sampling.
struct Oracle<'a> {
    sys: &'a VectorFieldSystem,
    rho: f64,
    tol: f64,
    flood: Option<DistanceField>,
    flavor: Flavor,
    x0: Vec<f64>,
}

impl Oracle<'_> {
    fn graph(&mut self) -> Result<&DistanceField> {
        if self.flood.is_none() {
            self.flood = Some(flood_ball(
                self.sys,
                &self.x0,
                self.rho,
                self.flavor,
                DEFAULT_STEPS,
                self.tol,
            )?);
        }
        Ok(self.flood.as_ref().expect("flood just built"))
    }

    fn contains(&mut self, y: &[f64], membership: Membership) -> Result<bool> {
        if !self.sys.domain.contains(y) {
            return Ok(false);
        }
        if membership == Membership::Chart && self.flavor == Flavor::D1 {
            if let Ok(p) = connect(self.sys, &self.x0, y, self.tol) {
                return Ok(p.class_bound <= self.rho);
            }
        }
        let (rho, flavor) = (self.rho, self.flavor);
        let field = self.graph()?;
        Ok(match flavor {
            Flavor::D1 => field.contains(y, rho),
            Flavor::D => field.distance(y).is_some(),
        })
    }
}

/// Samples the parallelepiped `|v_j| <= b rho^{w_j}` in privileged
/// coordinates; `b` doubles while accepted samples reach its outer 20%.
#[allow(clippy::too_many_arguments)]
fn rejection_volume(
    sys: &VectorFieldSystem,
    x0: &[f64],
    rho: f64,
    flavor: Flavor,
    samples: usize,
    membership: Membership,
    seed: u64,
    tol: f64,
) -> Result<(f64, (f64, f64), usize)> {
    if samples == 0 {
        return Err(Error::Budget("no samples".into()));
    }
    let frame = CellFrame::new(sys, x0, rho, rho, 1.0)?;
    let p = sys.dim;
    let mut oracle = Oracle {
        sys,
        rho,
        tol,
        flood: None,
        flavor,
        x0: x0.to_vec(),
    };
    let mut b = 1.5;
    for attempt in 0..4 {
        let mut r = rng::stream(seed, "rejection", attempt);
        let mut hits = 0usize;
        let mut edge = false;
        for _ in 0..samples {
            let u: Vec<f64> = (0..p).map(|_| r.gen_range(-b..b)).collect();
            let key = [0i32; super::graph::MAX_GRAPH_DIM];
            let y = frame.cell_point(&key, &u);
            if oracle.contains(&y, membership)? {
                hits += 1;
                if u.iter().any(|c| c.abs() > 0.8 * b) {
                    edge = true;
                }
            }
        }
        if edge {
            b *= 2.0;
            continue;
        }
        let box_volume = frame.cell_volume() * (2.0 * b).powi(p as i32);
        let (lo, hi) = stats::wilson(hits, samples, 1.96);
        let v = box_volume * hits as f64 / samples as f64;
        return Ok((v, (lo * box_volume, hi * box_volume), samples));
    }
    Err(Error::Budget(format!(
        "ball of radius {} not enclosed by the sampling box",
        rho
    )))
}

/// `|B(x0, rho)|` and `|B(x0, 2 rho)|` on one row of a doubling sweep.
#[derive(Clone, Debug, Serialize)]
pub struct DoublingRow {
    pub rho: f64,
    pub volume: f64,
    pub volume_double: f64,
    pub ratio: f64,
}

fn flood_volumes(
    sys: &VectorFieldSystem,
    x0: &[f64],
    radii: &[f64],
    flavor: Flavor,
    steps: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    radii
        .par_iter()
        .map(|&r| Ok(flood_ball(sys, x0, r, flavor, steps, tol)?.volume_all().0))
        .collect()
}

/// Doubling ratios over the given radii, one flood per distinct radius.
pub fn doubling_sweep(
    sys: &VectorFieldSystem,
    x0: &[f64],
    radii: &[f64],
    flavor: Flavor,
    steps: usize,
    tol: f64,
) -> Result<Vec<DoublingRow>> {
    let mut all: Vec<f64> = radii.iter().flat_map(|&r| [r, 2.0 * r]).collect();
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
    all.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let vols = flood_volumes(sys, x0, &all, flavor, steps, tol)?;
    let lookup = |r: f64| -> f64 {
        let k = all
            .iter()
            .position(|&a| (a - r).abs() <= 1e-12 * r.abs())
            .expect("radius in the sweep");
        vols[k]
    };
    Ok(radii
        .iter()
        .map(|&rho| {
            let v = lookup(rho);
            let v2 = lookup(2.0 * rho);
            DoublingRow {
                rho,
                volume: v,
                volume_double: v2,
                ratio: v2 / v,
            }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeFormulaRow {
    pub rho: f64,
    pub volume: f64,
    /// `sum_eta |lambda_eta(x0)| rho^{|eta|}`.
    pub denominator: f64,
    pub ratio: f64,
    /// Weight `|eta|` of the largest term of the denominator.
    pub dominant_weight: usize,
}

/// `sum_eta |lambda_eta(x0)| rho^{|eta|}` and the weight of its largest term.
pub fn volume_denominator(sys: &VectorFieldSystem, x0: &[f64], rho: f64) -> Result<(f64, usize)> {
    let vals = bracket_values(sys, x0)?;
    let mut sum = 0.0;
    let mut top = (0.0, 0);
    for b in candidate_bases(sys) {
        let term = vals.det(&b).unwrap_or(0.0).abs() * rho.powi(b.weight() as i32);
        sum += term;
        if term > top.0 {
            top = (term, b.weight());
        }
    }
    Ok((sum, top.1))
}

/// `|B(x0, rho)| / sum_eta |lambda_eta(x0)| rho^{|eta|}` with flood-fill volumes.
pub fn volume_formula_ratio(
    sys: &VectorFieldSystem,
    x0: &[f64],
    radii: &[f64],
    flavor: Flavor,
    steps: usize,
    tol: f64,
) -> Result<Vec<VolumeFormulaRow>> {
    let vols = flood_volumes(sys, x0, radii, flavor, steps, tol)?;
    radii
        .iter()
        .zip(vols)
        .map(|(&rho, volume)| {
            let (denominator, dominant_weight) = volume_denominator(sys, x0, rho)?;
            Ok(VolumeFormulaRow {
                rho,
                volume,
                denominator,
                ratio: volume / denominator,
                dominant_weight,
            })
        })
        .collect()
}

/// Best constants in `B_S(x0, c1 rho) ⊂ B_X(x0, rho) ⊂ B_S(x0, c2 rho)` for the
/// osculating polynomial system `S` at `x0`, read off two floods on a shared grid.
#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub center: Vec<f64>,
    pub rho: f64,
    pub c1: f64,
    pub c2: f64,
    /// Floods reach `reach * rho`; `c2 = reach` means "at least `reach`".
    pub reach: f64,
    pub steps: usize,
}

pub fn ball_inclusion_check(
    sys: &VectorFieldSystem,
    x0: &[f64],
    rho: f64,
    steps: usize,
    tol: f64,
) -> Result<InclusionReport> {
    if !(rho > 0.0) {
        return Err(Error::Invalid(format!("radius must be positive, got {}", rho)));
    }
    let taylor = taylor_system(sys, x0)?;
    if taylor.validity_radius < rho {
        return Err(Error::OutsideValidity {
            distance: rho,
            radius: taylor.validity_radius,
        });
    }
    let reach = 3.0;
    let step = rho / steps.max(1) as f64;
    let res = Resolution::for_scale(rho, steps);
    let levels = (reach * steps as f64).round() as u32;
    let k = steps as u32;
    let frame = CellFrame::new(sys, x0, rho, step, res.cell)?;
    let run = |s: &VectorFieldSystem| -> Result<DistanceField> {
        let moves = MoveSet::subunit(s, res.directions, step)?;
        Ok(sweep(s, frame.clone(), &moves, levels, None, res.max_nodes, tol)?.0)
    };
    let gx = run(sys)?;
    let gs = run(&taylor.system)?;
    // c2: largest S-level over cells of B_X(rho).
    let mut c2_level = 0u32;
    for key in gx.cells_within(rho) {
        c2_level = c2_level.max(gs.level(&key).unwrap_or(levels));
    }
    // c1: one below the smallest S-level over cells outside B_X(rho).
    let mut c1_level = levels;
    for key in gs.cells_within(f64::INFINITY) {
        let outside = gx.level(&key).map_or(true, |l| l > k);
        if outside {
            c1_level = c1_level.min(gs.level(&key).expect("listed cell") - 1);
        }
    }
    Ok(InclusionReport {
        center: x0.to_vec(),
        rho,
        c1: c1_level as f64 / k as f64,
        c2: c2_level as f64 / k as f64,
        reach,
        steps,
    })
}
