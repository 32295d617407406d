use crate::error::{Error, Result};
use crate::fields::VectorFieldSystem;
use crate::metric::graph::CellKey;
use crate::metric::{flood_ball, DistanceField, Flavor};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;

/// Default number of samples per ball.
pub const DEFAULT_SAMPLES: usize = 200_000;

const CHUNK: usize = 4096;

/// Graph approximation of a ball `B = B(x0, rho)` and of `lambda B`, with a
/// uniform sampler on `lambda B` that also reports membership in `B`.
pub struct BallMeasure {
    pub x0: Vec<f64>,
    pub rho: f64,
    pub lambda: f64,
    pub flavor: Flavor,
    pub steps: usize,
    outer: DistanceField,
    outer_cells: Vec<CellKey>,
    /// Separate flood of `B` for the d flavor.
    inner: Option<DistanceField>,
    pub volume: f64,
    pub outer_volume: f64,
}

#[derive(Clone, Debug)]
pub struct BallSample {
    pub point: Vec<f64>,
    pub inner: bool,
}

impl BallMeasure {
    /// `steps` graph moves across `rho`.
    pub fn new(
        sys: &VectorFieldSystem,
        x0: &[f64],
        rho: f64,
        lambda: f64,
        flavor: Flavor,
        steps: usize,
        tol: f64,
    ) -> Result<BallMeasure> {
        if !(rho > 0.0) || !(lambda >= 1.0) {
            return Err(Error::Invalid(format!(
                "need rho > 0 and lambda >= 1, got {} and {}",
                rho, lambda
            )));
        }
        let outer_steps = (steps as f64 * lambda).round().max(1.0) as usize;
        let outer = flood_ball(sys, x0, lambda * rho, flavor, outer_steps, tol)?;
        let outer_cells = outer.cells_within(f64::INFINITY);
        let (inner, volume) = match flavor {
            Flavor::D1 => (None, outer.volume(rho).0),
            Flavor::D if lambda == 1.0 => (None, outer.volume_all().0),
            Flavor::D => {
                let f = flood_ball(sys, x0, rho, flavor, steps, tol)?;
                let v = f.volume_all().0;
                (Some(f), v)
            }
        };
        let outer_volume = outer_cells.len() as f64 * outer.frame.cell_volume();
        Ok(BallMeasure {
            x0: x0.to_vec(),
            rho,
            lambda,
            flavor,
            steps,
            outer,
            outer_cells,
            inner,
            volume,
            outer_volume,
        })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        match (&self.inner, self.flavor) {
            (Some(f), _) => f.distance(y).is_some(),
            (None, Flavor::D1) => self.outer.contains(y, self.rho),
            (None, Flavor::D) => self.outer.distance(y).is_some(),
        }
    }

    /// Membership flood of `B` itself.
    pub fn flood(&self) -> &DistanceField {
        self.inner.as_ref().unwrap_or(&self.outer)
    }

    /// `n` uniform samples of `lambda B` drawn in fixed chunks, each chunk from
    /// its own random stream, so the result does not depend on the thread count.
    pub fn samples(&self, n: usize, seed: u64) -> Vec<BallSample> {
        let chunks = n.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut r = rng::stream(seed, "ball-samples", c as u64);
                let m = CHUNK.min(n - c * CHUNK);
                (0..m)
                    .map(|_| {
                        let key = &self.outer_cells[r.gen_range(0..self.outer_cells.len())];
                        let u: Vec<f64> = (0..self.x0.len()).map(|_| r.gen::<f64>()).collect();
                        let point = self.outer.frame.cell_point(key, &u);
                        let inner = self.contains(&point);
                        BallSample { point, inner }
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }
}
