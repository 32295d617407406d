//! Flows of vector fields, quasiexponential maps and the charts built from them.

mod chart;
mod checks;
mod integrate;
mod quasi;
mod schedule;

pub use chart::{
    chart_at, chart_factors, chart_forward, chart_inverse, class_bound, ChartData, ChartInverse,
};
pub use checks::{expansion_residual, mixed_derivative_check, MixedDerivativeReport};
pub use integrate::{integrate, integrate_certified, integrate_to_times, FlowOptions, FlowOutcome};
pub use quasi::{
    apply_factors, c_factors, e_factors, e_map, exp_map, factor_count, invert_factors,
    quasi_exp, quasi_exp_general, quasi_factors, Factor,
};
pub use schedule::{admissible_solve, ControlPiece, FlowSpec, Trajectory, TrajectorySample};

use crate::error::Result;
use crate::fields::{canonical_indices, symbolic_bracket, MultiIndex, VectorFieldSystem};
use crate::expr::Expression;
use std::collections::HashMap;

/// Default local error tolerance of the integrator.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A vector field that can be evaluated pointwise.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

/// Field with symbolic components.
#[derive(Clone, Debug)]
pub struct ExprField {
    comps: Vec<Expression>,
    zero: bool,
}

impl ExprField {
    pub fn new(comps: Vec<Expression>) -> ExprField {
        let zero = comps.iter().all(|c| c.is_zero());
        ExprField { comps, zero }
    }

    /// True when every component simplified to the constant zero.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn components(&self) -> &[Expression] {
        &self.comps
    }
}

impl VectorField for ExprField {
    fn dim(&self) -> usize {
        self.comps.len()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.comps) {
            *o = c.eval(x);
        }
    }
}

/// Linear combination `sum_k c_k V_k` of fields.
pub struct Combination<'a> {
    terms: Vec<(f64, &'a ExprField)>,
    dim: usize,
}

impl<'a> Combination<'a> {
    pub fn new(dim: usize, terms: Vec<(f64, &'a ExprField)>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(c, f)| *c != 0.0 && !f.is_zero())
            .collect();
        Combination { terms, dim }
    }
}

impl VectorField for Combination<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut buf = [0.0f64; 16];
        for (c, f) in &self.terms {
            f.eval(x, &mut buf[..self.dim]);
            for (o, b) in out.iter_mut().zip(&buf[..self.dim]) {
                *o += c * b;
            }
        }
    }
}

/// Symbolic base fields and canonical brackets of a system.
#[derive(Clone, Debug)]
pub struct FieldBank {
    fields: HashMap<MultiIndex, ExprField>,
    dim: usize,
}

impl FieldBank {
    pub fn new(sys: &VectorFieldSystem) -> Result<FieldBank> {
        let mut fields = HashMap::new();
        for idx in canonical_indices(sys) {
            let comps = symbolic_bracket(sys, &idx)?;
            fields.insert(idx, ExprField::new(comps));
        }
        Ok(FieldBank {
            fields,
            dim: sys.dim,
        })
    }

    /// Bank with the base fields only.
    pub fn base(sys: &VectorFieldSystem) -> FieldBank {
        let fields = sys
            .field_indices()
            .into_iter()
            .map(|i| {
                let f = sys.field(i).expect("valid field index");
                (MultiIndex::single(i), ExprField::new(f.coeffs.clone()))
            })
            .collect();
        FieldBank {
            fields,
            dim: sys.dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Field `X_[I]`; brackets outside the canonical list are built on demand
    /// by the caller through [`FieldBank::ensure`].
    pub fn get(&self, idx: &MultiIndex) -> Option<&ExprField> {
        self.fields.get(idx)
    }

    pub fn ensure(&mut self, sys: &VectorFieldSystem, idx: &MultiIndex) -> Result<&ExprField> {
        if !self.fields.contains_key(idx) {
            let comps = symbolic_bracket(sys, idx)?;
            self.fields.insert(idx.clone(), ExprField::new(comps));
        }
        Ok(&self.fields[idx])
    }

    pub fn single(&self, i: usize) -> Option<&ExprField> {
        self.fields.get(&MultiIndex::single(i))
    }
}
