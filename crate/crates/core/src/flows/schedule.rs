use super::{integrate, Combination, FieldBank, FlowOptions};
use crate::error::{Error, Result};
use crate::fields::{MultiIndex, VectorFieldSystem};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Constant controls `a_I` held for `duration` (a fraction of the unit interval).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPiece {
    pub duration: f64,
    pub controls: Vec<(MultiIndex, f64)>,
}

/// Piecewise-constant control schedule on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub pieces: Vec<ControlPiece>,
}

impl FlowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::Invalid("schedule has no pieces".into()));
        }
        if self.pieces.iter().any(|p| !(p.duration > 0.0)) {
            return Err(Error::Invalid("piece durations must be positive".into()));
        }
        let total: f64 = self.pieces.iter().map(|p| p.duration).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "piece durations sum to {} instead of 1",
                total
            )));
        }
        Ok(())
    }

    /// Smallest `delta` with `|a_I| <= delta^{|I|}` on every piece.
    pub fn class_bound(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.controls.iter())
            .map(|(i, a)| a.abs().powf(1.0 / i.weight() as f64))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySample {
    pub s: f64,
    pub point: Vec<f64>,
    pub piece: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub end: Vec<f64>,
    pub class_bound: f64,
}

impl Trajectory {
    /// CSV with columns `s, x1..xp, piece`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let p = self.end.len();
        let mut header = vec!["s".to_string()];
        header.extend((1..=p).map(|k| format!("x{}", k)));
        header.push("piece".into());
        wr.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for smp in &self.samples {
            let mut rec = vec![format!("{}", smp.s)];
            rec.extend(smp.point.iter().map(|v| format!("{}", v)));
            rec.push(smp.piece.to_string());
            wr.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Solves `phi' = sum_I a_I X_[I](phi)` for a piecewise-constant schedule.
pub fn admissible_solve(
    sys: &VectorFieldSystem,
    spec: &FlowSpec,
    x0: &[f64],
    tol: f64,
    samples_per_piece: usize,
) -> Result<Trajectory> {
    spec.validate()?;
    sys.check_point(x0)?;
    let mut bank = FieldBank::base(sys);
    for piece in &spec.pieces {
        for (idx, _) in &piece.controls {
            bank.ensure(sys, idx)?;
        }
    }
    let opts = FlowOptions::new(tol).within(&sys.domain);
    let n = samples_per_piece.max(1);
    let mut y = x0.to_vec();
    let mut s = 0.0;
    let mut samples = vec![TrajectorySample {
        s,
        point: y.clone(),
        piece: 0,
    }];
    for (k, piece) in spec.pieces.iter().enumerate() {
        let terms = piece
            .controls
            .iter()
            .map(|(idx, a)| (*a, bank.get(idx).expect("ensured above")))
            .collect();
        let field = Combination::new(sys.dim, terms);
        let dt = piece.duration / n as f64;
        for m in 0..n {
            y = integrate(&field, &y, dt, &opts)?.end;
            let s_here = if m + 1 == n { s + piece.duration } else { s + dt * (m + 1) as f64 };
            samples.push(TrajectorySample {
                s: s_here,
                point: y.clone(),
                piece: k,
            });
        }
        s += piece.duration;
    }
    Ok(Trajectory {
        samples,
        end: y,
        class_bound: spec.class_bound(),
    })
}
