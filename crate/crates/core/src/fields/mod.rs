//! Vector field systems, iterated commutators, basis selection and osculating
//! polynomial systems.

mod audit;
mod basis;
mod commutator;
mod sysfile;
mod taylor;

pub use audit::{audit_smoothness, AuditIssue};
pub use basis::{
    bracket_values, candidate_bases, canonical_indices, hormander_rank, lambda, optimal_basis,
    BasisFamily, BracketValues, OptimalBasis, RankReport,
};
pub use commutator::{
    bracket_jets, check_bracket, commutator, symbolic_bracket, CommutatorEvaluator,
};
pub use sysfile::{parse_system, system_to_text};
pub use taylor::{taylor_remainder, taylor_system, TaylorSystem};

use crate::error::{Error, Result};
use crate::expr::{Expression, Smoothness};
use serde::{Deserialize, Serialize};
use std::fmt;

/// One vector field `sum_j b_j(x) d/dx_j` with a declared regularity class.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub coeffs: Vec<Expression>,
    pub smoothness: Smoothness,
}

impl Field {
    pub fn new(coeffs: Vec<Expression>, smoothness: Smoothness) -> Field {
        Field { coeffs, smoothness }
    }

    pub fn parse(components: &[&str], smoothness: Smoothness) -> Result<Field> {
        let dim = components.len();
        let coeffs = components
            .iter()
            .map(|c| Expression::parse(c, dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(Field { coeffs, smoothness })
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = c.eval(x);
        }
    }

    pub fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.eval(x)).collect()
    }
}

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_p, hi_p]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<DomainBox> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::System(format!("invalid box {:?} x {:?}", lo, hi)));
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn cube(dim: usize, half: f64) -> DomainBox {
        DomainBox {
            lo: vec![-half; dim],
            hi: vec![half; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    /// Euclidean distance from an interior point to the boundary (0 outside).
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (a, b))| (v - a).min(b - v))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// Box shrunk on each side by `frac` of its width.
    pub fn shrink(&self, frac: f64) -> DomainBox {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                let m = frac * (b - a);
                (a + m, b - m)
            })
            .unzip();
        DomainBox { lo, hi }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Tensor grid with `per_axis` points per coordinate, endpoints included.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let p = self.dim();
        let n = per_axis.max(2);
        let total = n.pow(p as u32);
        (0..total)
            .map(|mut k| {
                (0..p)
                    .map(|i| {
                        let j = k % n;
                        k /= n;
                        self.lo[i] + (self.hi[i] - self.lo[i]) * j as f64 / (n - 1) as f64
                    })
                    .collect()
            })
            .collect()
    }
}

/// Iterated commutator index `I = (i_1, ..., i_l)`; `0` denotes the drift.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(v: Vec<usize>) -> MultiIndex {
        MultiIndex(v)
    }

    pub fn single(i: usize) -> MultiIndex {
        MultiIndex(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Weighted length `|I|`: the drift counts 2, every other field 1.
    pub fn weight(&self) -> usize {
        self.0.iter().map(|&i| field_weight(i)).sum()
    }

    pub fn parse(text: &str) -> Result<MultiIndex> {
        let t = text.trim().trim_start_matches('(').trim_end_matches(')');
        let v = t
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Invalid(format!("bad multi-index '{}'", text)))
            })
            .collect::<Result<Vec<_>>>()?;
        if v.is_empty() {
            return Err(Error::Invalid("empty multi-index".into()));
        }
        Ok(MultiIndex(v))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Weight of field `i`: 2 for the drift `X_0`, 1 otherwise.
pub fn field_weight(i: usize) -> usize {
    if i == 0 {
        2
    } else {
        1
    }
}

/// A Hormander system `X_0 (optional drift), X_1, ..., X_n` of step `r` on a box.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldSystem {
    pub name: String,
    pub dim: usize,
    pub fields: Vec<Field>,
    pub drift: Option<Field>,
    pub step: usize,
    pub domain: DomainBox,
    pub inner: DomainBox,
    pub functions: Vec<(String, Expression)>,
}

/// Fraction of the domain width removed on each side to form the inner domain.
pub const INNER_MARGIN: f64 = 0.1;

impl VectorFieldSystem {
    pub fn new(
        name: &str,
        fields: Vec<Field>,
        drift: Option<Field>,
        step: usize,
        domain: DomainBox,
    ) -> Result<VectorFieldSystem> {
        let dim = domain.dim();
        if fields.is_empty() {
            return Err(Error::System("a system needs at least one field".into()));
        }
        if step == 0 {
            return Err(Error::System("step must be at least 1".into()));
        }
        for f in fields.iter().chain(drift.iter()) {
            if f.coeffs.len() != dim || f.coeffs.iter().any(|c| c.dim() != dim) {
                return Err(Error::System(format!(
                    "field has {} components in dimension {}",
                    f.coeffs.len(),
                    dim
                )));
            }
        }
        let inner = domain.shrink(INNER_MARGIN);
        Ok(VectorFieldSystem {
            name: name.to_string(),
            dim,
            fields,
            drift,
            step,
            domain,
            inner,
            functions: Vec::new(),
        })
    }

    /// Number of non-drift fields `n`.
    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn has_drift(&self) -> bool {
        self.drift.is_some()
    }

    /// Field `X_i`; `i = 0` is the drift.
    pub fn field(&self, i: usize) -> Result<&Field> {
        if i == 0 {
            self.drift
                .as_ref()
                .ok_or_else(|| Error::Index("the system has no drift X_0".into()))
        } else {
            self.fields
                .get(i - 1)
                .ok_or_else(|| Error::Index(format!("field index {} > n = {}", i, self.n())))
        }
    }

    /// Valid field indices, drift first when present.
    pub fn field_indices(&self) -> Vec<usize> {
        let start = if self.has_drift() { 0 } else { 1 };
        (start..=self.n()).collect()
    }

    pub fn with_function(mut self, name: &str, e: Expression) -> Self {
        self.functions.push((name.to_string(), e));
        self
    }

    pub fn function(&self, name: &str) -> Option<&Expression> {
        self.functions.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Invalid(format!(
                "point of dimension {} for a system in dimension {}",
                x.len(),
                self.dim
            )));
        }
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(())
    }

    pub fn check_inner(&self, x: &[f64]) -> Result<()> {
        self.check_point(x)?;
        if !self.inner.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(())
    }
}
