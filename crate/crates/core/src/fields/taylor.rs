use super::basis::{bracket_values, candidate_bases};
use super::commutator::commutator;
use super::{field_weight, Field, MultiIndex, VectorFieldSystem};
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet, Node, Smoothness};
use crate::linalg;

/// Osculating polynomial system at a base point: every coefficient of `X_i`
/// replaced by its Taylor polynomial of degree `r - p_i`.
#[derive(Clone, Debug)]
pub struct TaylorSystem {
    pub base: Vec<f64>,
    pub system: VectorFieldSystem,
    /// Largest dyadic radius on which the polynomial system keeps at least half
    /// of its maximal basis determinant at the base point.
    pub validity_radius: f64,
}

fn jet_polynomial(jet: &Jet, x0: &[f64]) -> Expression {
    let p = x0.len();
    let mut acc = Node::Const(0.0);
    for (m, &c) in jet.space().monomials().iter().zip(jet.coeffs()) {
        if c == 0.0 {
            continue;
        }
        let mut term = Node::Const(c);
        for (i, &a) in m.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let shifted = if x0[i] == 0.0 {
                Node::Var(i)
            } else {
                Node::sub(Node::Var(i), Node::Const(x0[i]))
            };
            term = Node::mul(term, Node::pow(shifted, a as u32));
        }
        acc = Node::add(acc, term);
    }
    Expression::new(acc, p).expect("variables stay within the dimension")
}

/// Polynomial smoothness used for osculating systems.
pub const POLYNOMIAL_SMOOTHNESS: Smoothness = Smoothness::Ck(64);

pub fn taylor_system(sys: &VectorFieldSystem, x0: &[f64]) -> Result<TaylorSystem> {
    sys.check_inner(x0)?;
    let r = sys.step;
    let build = |i: usize| -> Result<Field> {
        let f = sys.field(i)?;
        let order = r.saturating_sub(field_weight(i));
        f.smoothness.check_order(order).map_err(|_| {
            Error::Smoothness(format!(
                "Taylor polynomial of degree {} needs X_{} in C^({},1), declared {}",
                order,
                i,
                order.saturating_sub(1),
                f.smoothness
            ))
        })?;
        let coeffs = f
            .coeffs
            .iter()
            .map(|c| jet_polynomial(&c.jet(x0, order), x0))
            .collect();
        Ok(Field::new(coeffs, POLYNOMIAL_SMOOTHNESS))
    };
    let mut fields = Vec::with_capacity(sys.n());
    for i in 1..=sys.n() {
        fields.push(build(i)?);
    }
    let drift = if sys.has_drift() { Some(build(0)?) } else { None };
    let mut system = VectorFieldSystem::new(
        &format!("{}_taylor", sys.name),
        fields,
        drift,
        r,
        sys.domain.clone(),
    )?;
    system.inner = sys.inner.clone();
    let validity_radius = validity_radius(&system, x0, sys.inner.distance_to_boundary(x0))?;
    Ok(TaylorSystem {
        base: x0.to_vec(),
        system,
        validity_radius,
    })
}

fn max_det(sys: &VectorFieldSystem, x: &[f64]) -> Result<f64> {
    let vals = bracket_values(sys, x)?;
    Ok(candidate_bases(sys)
        .iter()
        .map(|b| vals.det(b).unwrap_or(0.0).abs())
        .fold(0.0, f64::max))
}

fn sphere_points(x0: &[f64], radius: f64) -> Vec<Vec<f64>> {
    let p = x0.len();
    let mut pts = Vec::new();
    for i in 0..p {
        for s in [-1.0, 1.0] {
            let mut y = x0.to_vec();
            y[i] += s * radius;
            pts.push(y);
        }
    }
    let diag = radius / (p as f64).sqrt();
    for mask in 0..(1usize << p) {
        let y = x0
            .iter()
            .enumerate()
            .map(|(i, v)| v + if mask >> i & 1 == 1 { diag } else { -diag })
            .collect();
        pts.push(y);
    }
    pts
}

fn validity_radius(sys: &VectorFieldSystem, x0: &[f64], start: f64) -> Result<f64> {
    let at_base = max_det(sys, x0)?;
    if at_base == 0.0 {
        return Err(Error::RankDeficient {
            point: x0.to_vec(),
            rank: 0,
            dim: sys.dim,
        });
    }
    let mut radius = start.min(1.0);
    for _ in 0..40 {
        let ok = [radius, 0.5 * radius].iter().all(|&r| {
            sphere_points(x0, r).iter().all(|y| {
                sys.domain.contains(y) && max_det(sys, y).map_or(false, |d| d >= 0.5 * at_base)
            })
        });
        if ok {
            return Ok(radius);
        }
        radius *= 0.5;
    }
    Err(Error::Degenerate(format!(
        "no Taylor validity radius found at {:?}",
        x0
    )))
}

/// `|X_[I](x) - S_[I](x)| / |x - x0|^(r - |I|)`.
pub fn taylor_remainder(
    sys: &VectorFieldSystem,
    taylor: &TaylorSystem,
    index: &MultiIndex,
    x: &[f64],
) -> Result<f64> {
    let d = linalg::dist(x, &taylor.base);
    if d > taylor.validity_radius {
        return Err(Error::OutsideValidity {
            distance: d,
            radius: taylor.validity_radius,
        });
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    let a = commutator(sys, index, x)?;
    let b = commutator(&taylor.system, index, x)?;
    let diff = linalg::dist(&a, &b);
    let expo = sys.step as i32 - index.weight() as i32;
    Ok(diff / d.powi(expo))
}
