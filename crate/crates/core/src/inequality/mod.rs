//! Poincare, Sobolev and Lagrange type inequalities evaluated on metric balls.

mod lagrange;
mod poincare;
mod sampler;
mod sobolev;

pub use lagrange::{lagrange_check, LagrangeReport, GAUSS_NODES};
pub use poincare::{
    p_poincare_ratio, poincare_ratio, rough_poincare_decomposition, InequalityReport,
    RoughPoincareReport,
};
pub use sampler::{BallMeasure, BallSample, DEFAULT_SAMPLES};
pub use sobolev::{sobolev_exponent, sobolev_ratio, Bump, SobolevReport, SobolevRow};

use crate::error::{Error, Result};
use crate::expr::{Expression, Node, Smoothness};
use crate::fields::VectorFieldSystem;
use crate::linalg;

/// Test function with its symbolic gradient.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub name: String,
    pub expr: Expression,
    pub smoothness: Smoothness,
    grad: Vec<Expression>,
    pub bump: Option<Bump>,
}

impl TestFunction {
    pub fn new(name: &str, expr: Expression, smoothness: Smoothness) -> Result<TestFunction> {
        if smoothness.max_order() < 1 {
            return Err(Error::Smoothness(format!(
                "test function {} must be C^1, declared {}",
                name, smoothness
            )));
        }
        let grad = (0..expr.dim()).map(|i| expr.differentiate(i)).collect();
        Ok(TestFunction {
            name: name.to_string(),
            expr,
            smoothness,
            grad,
            bump: None,
        })
    }

    /// Named function of a system file. Kink-free expressions count as smooth,
    /// expressions with `abs`, `sign`, `min` or `max` as Lipschitz only.
    pub fn from_system(sys: &VectorFieldSystem, name: &str) -> Result<TestFunction> {
        let e = sys
            .function(name)
            .ok_or_else(|| Error::Invalid(format!("system {} has no function {}", sys.name, name)))?;
        let s = if e.has_kinks() {
            Smoothness::CkLip(0)
        } else {
            Smoothness::Ck(64)
        };
        TestFunction::new(name, e.clone(), s)
    }

    pub fn parse(name: &str, text: &str, dim: usize, smoothness: Smoothness) -> Result<TestFunction> {
        TestFunction::new(name, Expression::parse(text, dim)?, smoothness)
    }

    pub fn constant(c: f64, dim: usize) -> TestFunction {
        TestFunction::new("constant", Expression::constant(c, dim), Smoothness::Ck(64))
            .expect("constants are smooth")
    }

    pub fn dim(&self) -> usize {
        self.expr.dim()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.expr.eval(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval(x)).collect()
    }

    pub(crate) fn from_node(name: &str, node: Node, dim: usize, smoothness: Smoothness) -> Result<TestFunction> {
        TestFunction::new(name, Expression::new(node, dim)?, smoothness)
    }
}

/// `(X_1 u(x), ..., X_n u(x))` with `X_i u = b_i . grad u`.
pub fn x_gradient(sys: &VectorFieldSystem, u: &TestFunction, x: &[f64]) -> Result<Vec<f64>> {
    if u.dim() != sys.dim {
        return Err(Error::Invalid(format!(
            "test function in dimension {} for a system in dimension {}",
            u.dim(),
            sys.dim
        )));
    }
    sys.check_point(x)?;
    Ok(x_gradient_unchecked(sys, &u.gradient(x), x))
}

pub(crate) fn x_gradient_unchecked(sys: &VectorFieldSystem, grad: &[f64], x: &[f64]) -> Vec<f64> {
    sys.fields
        .iter()
        .map(|f| {
            f.coeffs
                .iter()
                .zip(grad)
                .map(|(b, g)| if *g == 0.0 { 0.0 } else { b.eval(x) * g })
                .sum()
        })
        .collect()
}

pub(crate) fn x_norm(sys: &VectorFieldSystem, grad: &[f64], x: &[f64]) -> f64 {
    linalg::norm(&x_gradient_unchecked(sys, grad, x))
}
