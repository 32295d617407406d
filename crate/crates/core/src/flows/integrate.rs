use super::VectorField;
use crate::error::{Error, Result};
use crate::fields::DomainBox;

/// Controls for a single flow integration.
#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_steps: usize,
    /// Trajectories leaving this box are reported as errors.
    pub domain: Option<DomainBox>,
}

impl FlowOptions {
    pub fn new(tol: f64) -> FlowOptions {
        FlowOptions {
            tol,
            max_steps: 100_000,
            domain: None,
        }
    }

    pub fn within(mut self, domain: &DomainBox) -> FlowOptions {
        self.domain = Some(domain.clone());
        self
    }
}

#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub end: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// Step sizes (signed) of the accepted steps.
    pub steps: Vec<f64>,
}

// Dormand-Prince 5(4) tableau; the fields are autonomous so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_DIM: usize = 16;

struct Stages {
    k: [[f64; MAX_DIM]; 7],
}

// One Dormand-Prince step from y with step h; returns (y5, err_norm).
fn step(
    f: &dyn VectorField,
    y: &[f64],
    h: f64,
    tol: f64,
    st: &mut Stages,
    out: &mut [f64],
) -> f64 {
    let p = y.len();
    let mut tmp = [0.0f64; MAX_DIM];
    f.eval(y, &mut st.k[0][..p]);
    for s in 1..7 {
        for i in 0..p {
            let mut acc = y[i];
            for j in 0..s {
                acc += h * A[s][j] * st.k[j][i];
            }
            tmp[i] = acc;
        }
        let (_, tail) = st.k.split_at_mut(s);
        f.eval(&tmp[..p], &mut tail[0][..p]);
    }
    let mut err = 0.0;
    for i in 0..p {
        let mut y5 = y[i];
        let mut e = 0.0;
        for s in 0..7 {
            y5 += h * B5[s] * st.k[s][i];
            e += h * (B5[s] - B4[s]) * st.k[s][i];
        }
        out[i] = y5;
        let sc = tol * (1.0 + y[i].abs().max(y5.abs()));
        err += (e / sc) * (e / sc);
    }
    (err / p as f64).sqrt()
}

fn check_domain(opts: &FlowOptions, y: &[f64]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration("non-finite state".into()));
    }
    if let Some(d) = &opts.domain {
        if !d.contains(y) {
            return Err(Error::OutsideDomain { point: y.to_vec() });
        }
    }
    Ok(())
}

/// Adaptive integration of `x' = V(x)` from `x` for the signed time `t`.
pub fn integrate(f: &dyn VectorField, x: &[f64], t: f64, opts: &FlowOptions) -> Result<FlowOutcome> {
    let p = x.len();
    if p > MAX_DIM || f.dim() != p {
        return Err(Error::Invalid(format!("dimension {} unsupported", p)));
    }
    let mut y = x.to_vec();
    let mut out = FlowOutcome {
        end: y.clone(),
        accepted: 0,
        rejected: 0,
        steps: Vec::new(),
    };
    if t == 0.0 {
        return Ok(out);
    }
    check_domain(opts, &y)?;
    let dir = t.signum();
    let total = t.abs();
    let mut done = 0.0;
    let mut h = total;
    let mut st = Stages {
        k: [[0.0; MAX_DIM]; 7],
    };
    let mut ynew = vec![0.0; p];
    while done < total {
        if out.accepted + out.rejected >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget of {} exhausted at time {}",
                opts.max_steps, done
            )));
        }
        let last = done + h >= total * (1.0 - 1e-14);
        let hh = if last { total - done } else { h };
        let err = step(f, &y, dir * hh, opts.tol, &mut st, &mut ynew);
        if err <= 1.0 {
            check_domain(opts, &ynew)?;
            y.copy_from_slice(&ynew);
            done = if last { total } else { done + hh };
            out.accepted += 1;
            out.steps.push(dir * hh);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = hh * fac;
        } else {
            out.rejected += 1;
            h = hh * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < 1e-14 * total.max(1e-300) {
                return Err(Error::Integration("step size underflow".into()));
            }
        }
    }
    out.end = y;
    Ok(out)
}

/// Integration with an a posteriori check: the accepted step sequence is
/// replayed with every step halved and the endpoints compared. Fails when the
/// discrepancy exceeds `10 tol`.
pub fn integrate_certified(
    f: &dyn VectorField,
    x: &[f64],
    t: f64,
    opts: &FlowOptions,
) -> Result<(FlowOutcome, f64)> {
    let out = integrate(f, x, t, opts)?;
    let p = x.len();
    let mut y = x.to_vec();
    let mut st = Stages {
        k: [[0.0; MAX_DIM]; 7],
    };
    let mut ynew = vec![0.0; p];
    for &h in &out.steps {
        for _ in 0..2 {
            step(f, &y, 0.5 * h, opts.tol, &mut st, &mut ynew);
            y.copy_from_slice(&ynew);
        }
    }
    let err = y
        .iter()
        .zip(&out.end)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if err > 10.0 * opts.tol * (1.0 + crate::linalg::norm(&out.end)) {
        return Err(Error::Integration(format!(
            "step-halving discrepancy {:.3e} exceeds 10 tol",
            err
        )));
    }
    Ok((out, err))
}

/// States at the sorted non-negative times `times` along the flow from `x`.
pub fn integrate_to_times(
    f: &dyn VectorField,
    x: &[f64],
    direction: f64,
    times: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<Vec<f64>>> {
    let mut cur = x.to_vec();
    let mut t_cur = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - t_cur;
        if dt < 0.0 {
            return Err(Error::Invalid("times must be sorted".into()));
        }
        cur = integrate(f, &cur, direction.signum() * dt, opts)?.end;
        t_cur = t;
        out.push(cur.clone());
    }
    Ok(out)
}
