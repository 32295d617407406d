use super::{integrate, FieldBank, FlowOptions};
use crate::error::{Error, Result};
use crate::fields::{check_bracket, field_weight, MultiIndex, VectorFieldSystem};

/// One exponential factor `exp(time X_field)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Factor {
    pub field: usize,
    pub time: f64,
}

/// Number of exponential factors of a quasiexponential map of length `l`:
/// `N_1 = 1`, `N_l = 2 N_{l-1} + 2`.
pub fn factor_count(l: usize) -> usize {
    if l <= 1 {
        1
    } else {
        2 * factor_count(l - 1) + 2
    }
}

/// Inverse of a composition: reversed order, negated times.
pub fn invert_factors(factors: &[Factor]) -> Vec<Factor> {
    factors
        .iter()
        .rev()
        .map(|f| Factor {
            field: f.field,
            time: -f.time,
        })
        .collect()
}

/// Factors of the generalised map `C_l(t_1, ..., t_l)` in application order
/// (first element acts first):
/// `C_l = C_{l-1}(t_2..)^{-1} exp(-t_1 X_{i_1}) C_{l-1}(t_2..) exp(t_1 X_{i_1})`.
pub fn quasi_factors(index: &[usize], times: &[f64]) -> Vec<Factor> {
    let first = Factor {
        field: index[0],
        time: times[0],
    };
    if index.len() == 1 {
        return vec![first];
    }
    let inner = quasi_factors(&index[1..], &times[1..]);
    let mut out = Vec::with_capacity(2 * inner.len() + 2);
    out.push(first);
    out.extend_from_slice(&inner);
    out.push(Factor {
        field: first.field,
        time: -first.time,
    });
    out.extend(invert_factors(&inner));
    out
}

/// Factors of `C_l(t)`, where the slot of `X_i` uses the time `t^{p_i}`.
pub fn c_factors(index: &MultiIndex, t: f64) -> Vec<Factor> {
    let times: Vec<f64> = index
        .0
        .iter()
        .map(|&i| t.powi(field_weight(i) as i32))
        .collect();
    quasi_factors(&index.0, &times)
}

/// Factors of `E_I(t)`: `C_l(t^{1/|I|})` for `t >= 0`, `C_l(|t|^{1/|I|})^{-1}` otherwise.
pub fn e_factors(index: &MultiIndex, t: f64) -> Vec<Factor> {
    let s = t.abs().powf(1.0 / index.weight() as f64);
    let f = c_factors(index, s);
    if t >= 0.0 {
        f
    } else {
        invert_factors(&f)
    }
}

/// Applies the factors in order to `x`.
pub fn apply_factors(
    bank: &FieldBank,
    factors: &[Factor],
    x: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    for f in factors {
        if f.time == 0.0 {
            continue;
        }
        let field = bank
            .single(f.field)
            .ok_or_else(|| Error::Index(format!("no field X_{}", f.field)))?;
        y = integrate(field, &y, f.time, opts)?.end;
    }
    Ok(y)
}

fn options(sys: &VectorFieldSystem, tol: f64) -> FlowOptions {
    FlowOptions::new(tol).within(&sys.domain)
}

/// `exp(t X_i)(x)`.
pub fn exp_map(sys: &VectorFieldSystem, i: usize, t: f64, x: &[f64], tol: f64) -> Result<Vec<f64>> {
    sys.check_point(x)?;
    sys.field(i)?;
    let bank = FieldBank::base(sys);
    apply_factors(&bank, &[Factor { field: i, time: t }], x, &options(sys, tol))
}

/// `C_l(t, X_{i_1}, ..., X_{i_l})(x)`.
pub fn quasi_exp(
    sys: &VectorFieldSystem,
    index: &MultiIndex,
    t: f64,
    x: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    check_bracket(sys, index)?;
    sys.check_point(x)?;
    let bank = FieldBank::base(sys);
    apply_factors(&bank, &c_factors(index, t), x, &options(sys, tol))
}

/// Generalised `C_l(t_1, ..., t_l)(x)` with one time per slot.
pub fn quasi_exp_general(
    sys: &VectorFieldSystem,
    index: &MultiIndex,
    times: &[f64],
    x: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if times.len() != index.len() {
        return Err(Error::Invalid(format!(
            "{} times for an index of length {}",
            times.len(),
            index.len()
        )));
    }
    for &i in &index.0 {
        sys.field(i)?;
    }
    sys.check_point(x)?;
    let bank = FieldBank::base(sys);
    apply_factors(&bank, &quasi_factors(&index.0, times), x, &options(sys, tol))
}

/// `E_I(t)(x)`.
pub fn e_map(
    sys: &VectorFieldSystem,
    index: &MultiIndex,
    t: f64,
    x: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    check_bracket(sys, index)?;
    sys.check_point(x)?;
    let bank = FieldBank::base(sys);
    apply_factors(&bank, &e_factors(index, t), x, &options(sys, tol))
}
