use super::{MultiIndex, VectorFieldSystem};
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet, JetSpace};
use std::collections::HashMap;

/// Validates indices, the step bound and the smoothness needed by `X_[I]`.
pub fn check_bracket(sys: &VectorFieldSystem, index: &MultiIndex) -> Result<()> {
    if index.is_empty() {
        return Err(Error::Index("empty multi-index".into()));
    }
    let w = index.weight();
    if w > sys.step {
        return Err(Error::WeightExceedsStep {
            weight: w,
            step: sys.step,
        });
    }
    let need = index.len() - 1;
    for &i in &index.0 {
        let f = sys.field(i)?;
        f.smoothness.check_order(need).map_err(|_| {
            Error::Smoothness(format!(
                "X_{} is declared {} but X_{} needs {} derivatives",
                i, f.smoothness, index, need
            ))
        })?;
    }
    Ok(())
}

fn field_jets(sys: &VectorFieldSystem, i: usize, x: &[f64], order: usize) -> Result<Vec<Jet>> {
    let space = JetSpace::shared(sys.dim, order);
    Ok(sys
        .field(i)?
        .coeffs
        .iter()
        .map(|c| c.jet_in(&space, x))
        .collect())
}

// [X, Y]_j = sum_m X_m d_m Y_j - Y_m d_m X_j, one order lower than the inputs.
fn jet_bracket(x: &[Jet], y: &[Jet]) -> Vec<Jet> {
    let p = x.len();
    (0..p)
        .map(|j| {
            let mut acc: Option<Jet> = None;
            for m in 0..p {
                let term = x[m].mul(&y[j].partial(m)).sub(&y[m].mul(&x[j].partial(m)));
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
            acc.expect("dimension is positive")
        })
        .collect()
}

/// Memoised jets of brackets sharing a base point.
pub(crate) struct JetTable<'a> {
    sys: &'a VectorFieldSystem,
    x: Vec<f64>,
    top: usize,
    base: HashMap<usize, Vec<Jet>>,
    memo: HashMap<Vec<usize>, Vec<Jet>>,
}

impl<'a> JetTable<'a> {
    /// `top` is the order of the base field jets; brackets of length `l` come out
    /// with order `top + 1 - l`.
    pub(crate) fn new(sys: &'a VectorFieldSystem, x: &[f64], top: usize) -> JetTable<'a> {
        JetTable {
            sys,
            x: x.to_vec(),
            top,
            base: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, index: &[usize]) -> Result<Vec<Jet>> {
        if let Some(j) = self.memo.get(index) {
            return Ok(j.clone());
        }
        let first = index[0];
        if !self.base.contains_key(&first) {
            let jets = field_jets(self.sys, first, &self.x, self.top)?;
            self.base.insert(first, jets);
        }
        let result = if index.len() == 1 {
            self.base[&first].clone()
        } else {
            let inner = self.get(&index[1..])?;
            let outer = self.base[&first].clone();
            jet_bracket(&outer, &inner)
        };
        self.memo.insert(index.to_vec(), result.clone());
        Ok(result)
    }
}

/// Jets of order `order` of the components of `X_[I]` at `x`.
pub fn bracket_jets(
    sys: &VectorFieldSystem,
    index: &MultiIndex,
    x: &[f64],
    order: usize,
) -> Result<Vec<Jet>> {
    check_bracket(sys, index)?;
    let mut table = JetTable::new(sys, x, order + index.len() - 1);
    table.get(&index.0)
}

/// Value `X_[I](x)` computed by jet arithmetic.
pub fn commutator(sys: &VectorFieldSystem, index: &MultiIndex, x: &[f64]) -> Result<Vec<f64>> {
    sys.check_point(x)?;
    Ok(bracket_jets(sys, index, x, 0)?
        .iter()
        .map(|j| j.value())
        .collect())
}

/// Evaluator of a fixed iterated commutator.
#[derive(Clone, Debug)]
pub struct CommutatorEvaluator<'a> {
    sys: &'a VectorFieldSystem,
    index: MultiIndex,
}

impl<'a> CommutatorEvaluator<'a> {
    pub fn new(sys: &'a VectorFieldSystem, index: MultiIndex) -> Result<Self> {
        check_bracket(sys, &index)?;
        Ok(CommutatorEvaluator { sys, index })
    }

    pub fn index(&self) -> &MultiIndex {
        &self.index
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        commutator(self.sys, &self.index, x)
    }
}

/// Components of `X_[I]` as symbolic expressions (a.e. derivative rules).
pub fn symbolic_bracket(sys: &VectorFieldSystem, index: &MultiIndex) -> Result<Vec<Expression>> {
    check_bracket(sys, index)?;
    symbolic_rec(sys, &index.0)
}

fn symbolic_rec(sys: &VectorFieldSystem, index: &[usize]) -> Result<Vec<Expression>> {
    let outer = sys.field(index[0])?.coeffs.clone();
    if index.len() == 1 {
        return Ok(outer);
    }
    let inner = symbolic_rec(sys, &index[1..])?;
    let p = sys.dim;
    Ok((0..p)
        .map(|j| {
            let mut acc = Expression::constant(0.0, p);
            for m in 0..p {
                acc = acc
                    .add(&outer[m].mul(&inner[j].differentiate(m)))
                    .sub(&inner[m].mul(&outer[j].differentiate(m)));
            }
            acc
        })
        .collect())
}
