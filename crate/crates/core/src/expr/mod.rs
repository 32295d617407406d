//! Coefficient expressions: parsing, printing, evaluation, differentiation and jets.
//!
//! Nonsmooth primitives follow almost-everywhere conventions: `sign(0) = 0`,
//! `d|u| = sign(u) du`, `d sign(u) = 0`, and `min`/`max` are differentiated
//! through `min(a, b) = (a + b - |a - b|) / 2`.

mod jet;
mod parse;

pub use jet::{Jet, JetSpace};
pub use parse::parse;

use crate::error::{Error, Result};
use std::fmt::{self, Display};

/// Unary primitive functions of the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Abs,
    Sign,
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Abs => v.abs(),
            Func::Sign => sign(v),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        }
    }
}

/// Sign with `sign(0) = 0`.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Expression tree node. Variables are zero based (`x1` is `Var(0)`).
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Func(Func, Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
}

impl Node {
    pub fn constant(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self, Node::Const(c) if *c == v)
    }

    pub fn neg(a: Node) -> Node {
        match a {
            Node::Const(c) => Node::Const(-c),
            Node::Neg(inner) => *inner,
            other => Node::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (Node::Const(x), Node::Const(y)) => Node::Const(x + y),
            _ if a.is_const(0.0) => b,
            _ if b.is_const(0.0) => a,
            (_, Node::Neg(inner)) => Node::Sub(Box::new(a), inner.clone()),
            _ => Node::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (Node::Const(x), Node::Const(y)) => Node::Const(x - y),
            _ if b.is_const(0.0) => a,
            _ if a.is_const(0.0) => Node::neg(b),
            _ if a == b => Node::Const(0.0),
            _ => Node::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (Node::Const(x), Node::Const(y)) => Node::Const(x * y),
            _ if a.is_const(0.0) || b.is_const(0.0) => Node::Const(0.0),
            _ if a.is_const(1.0) => b,
            _ if b.is_const(1.0) => a,
            _ if a.is_const(-1.0) => Node::neg(b),
            _ if b.is_const(-1.0) => Node::neg(a),
            _ => Node::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (Node::Const(x), Node::Const(y)) if *y != 0.0 => Node::Const(x / y),
            _ if a.is_const(0.0) => Node::Const(0.0),
            _ if b.is_const(1.0) => a,
            _ => Node::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Node, n: u32) -> Node {
        match (&a, n) {
            (_, 0) => Node::Const(1.0),
            (_, 1) => a,
            (Node::Const(c), _) => Node::Const(c.powi(n as i32)),
            _ => Node::Pow(Box::new(a), n),
        }
    }

    pub fn func(f: Func, a: Node) -> Node {
        match a {
            Node::Const(c) => Node::Const(f.apply(c)),
            other => Node::Func(f, Box::new(other)),
        }
    }

    pub fn min(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (Node::Const(x), Node::Const(y)) => Node::Const(x.min(*y)),
            _ if a == b => a,
            _ => Node::Min(Box::new(a), Box::new(b)),
        }
    }

    pub fn max(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (Node::Const(x), Node::Const(y)) => Node::Const(x.max(*y)),
            _ if a == b => a,
            _ => Node::Max(Box::new(a), Box::new(b)),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Pow(a, n) => a.eval(x).powi(*n as i32),
            Node::Func(f, a) => f.apply(a.eval(x)),
            Node::Min(a, b) => a.eval(x).min(b.eval(x)),
            Node::Max(a, b) => a.eval(x).max(b.eval(x)),
        }
    }

    pub fn derivative(&self, i: usize) -> Node {
        match self {
            Node::Const(_) => Node::Const(0.0),
            Node::Var(j) => Node::Const(if *j == i { 1.0 } else { 0.0 }),
            Node::Neg(a) => Node::neg(a.derivative(i)),
            Node::Add(a, b) => Node::add(a.derivative(i), b.derivative(i)),
            Node::Sub(a, b) => Node::sub(a.derivative(i), b.derivative(i)),
            Node::Mul(a, b) => Node::add(
                Node::mul(a.derivative(i), (**b).clone()),
                Node::mul((**a).clone(), b.derivative(i)),
            ),
            Node::Div(a, b) => {
                let da = a.derivative(i);
                let db = b.derivative(i);
                Node::sub(
                    Node::div(da, (**b).clone()),
                    Node::div(Node::mul((**a).clone(), db), Node::pow((**b).clone(), 2)),
                )
            }
            Node::Pow(a, n) => Node::mul(
                Node::mul(Node::Const(*n as f64), Node::pow((**a).clone(), n - 1)),
                a.derivative(i),
            ),
            Node::Func(f, a) => {
                let da = a.derivative(i);
                let inner = (**a).clone();
                match f {
                    Func::Abs => Node::mul(Node::func(Func::Sign, inner), da),
                    Func::Sign => Node::Const(0.0),
                    Func::Sin => Node::mul(Node::func(Func::Cos, inner), da),
                    Func::Cos => Node::neg(Node::mul(Node::func(Func::Sin, inner), da)),
                    Func::Exp => Node::mul(Node::func(Func::Exp, inner), da),
                }
            }
            Node::Min(a, b) => select_derivative(a, b, i, -1.0),
            Node::Max(a, b) => select_derivative(a, b, i, 1.0),
        }
    }

    fn substitute(&self, repl: &[Node]) -> Node {
        match self {
            Node::Const(c) => Node::Const(*c),
            Node::Var(i) => repl[*i].clone(),
            Node::Neg(a) => Node::neg(a.substitute(repl)),
            Node::Add(a, b) => Node::add(a.substitute(repl), b.substitute(repl)),
            Node::Sub(a, b) => Node::sub(a.substitute(repl), b.substitute(repl)),
            Node::Mul(a, b) => Node::mul(a.substitute(repl), b.substitute(repl)),
            Node::Div(a, b) => Node::div(a.substitute(repl), b.substitute(repl)),
            Node::Pow(a, n) => Node::pow(a.substitute(repl), *n),
            Node::Func(f, a) => Node::func(*f, a.substitute(repl)),
            Node::Min(a, b) => Node::min(a.substitute(repl), b.substitute(repl)),
            Node::Max(a, b) => Node::max(a.substitute(repl), b.substitute(repl)),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.max_var(),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Min(a, b)
            | Node::Max(a, b) => match (a.max_var(), b.max_var()) {
                (Some(u), Some(v)) => Some(u.max(v)),
                (u, v) => u.or(v),
            },
        }
    }

    fn has_kinks(&self) -> bool {
        match self {
            Node::Const(_) | Node::Var(_) => false,
            Node::Func(Func::Abs | Func::Sign, _) | Node::Min(..) | Node::Max(..) => true,
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.has_kinks(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.has_kinks() || b.has_kinks()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Const(c) if *c < 0.0 => 3,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt(f)?;
            write!(f, ")")
        } else {
            self.fmt(f)
        }
    }
}

// (a' + b' -/+ sign(a - b) (a' - b')) / 2, the a.e. derivative of min (s = -1) or max (s = 1).
fn select_derivative(a: &Node, b: &Node, i: usize, s: f64) -> Node {
    let da = a.derivative(i);
    let db = b.derivative(i);
    if da == db {
        return da;
    }
    let switch = Node::func(Func::Sign, Node::sub(a.clone(), b.clone()));
    let half = Node::mul(
        Node::Const(0.5 * s),
        Node::mul(switch, Node::sub(da.clone(), db.clone())),
    );
    Node::add(Node::mul(Node::Const(0.5), Node::add(da, db)), half)
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    let a = c.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        write!(f, "{:e}", c)
    } else {
        write!(f, "{}", c)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write_const(f, *c),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(a) => {
                write!(f, "-")?;
                a.write_child(f, 3)
            }
            Node::Add(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " + ")?;
                b.write_child(f, 2)
            }
            Node::Sub(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " - ")?;
                b.write_child(f, 2)
            }
            Node::Mul(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "*")?;
                b.write_child(f, 3)
            }
            Node::Div(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "/")?;
                b.write_child(f, 4)
            }
            Node::Pow(a, n) => {
                a.write_child(f, 5)?;
                write!(f, "^{}", n)
            }
            Node::Func(func, a) => write!(f, "{}({})", func.name(), a),
            Node::Min(a, b) => write!(f, "min({}, {})", a, b),
            Node::Max(a, b) => write!(f, "max({}, {})", a, b),
        }
    }
}

/// A parsed expression in the variables `x1..x{dim}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Node,
    dim: usize,
}

impl Expression {
    pub fn new(root: Node, dim: usize) -> Result<Self> {
        if let Some(v) = root.max_var() {
            if v >= dim {
                return Err(Error::Index(format!(
                    "variable x{} used in a {}-dimensional expression",
                    v + 1,
                    dim
                )));
            }
        }
        Ok(Expression { root, dim })
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        Expression {
            root: Node::Const(c),
            dim,
        }
    }

    pub fn variable(i: usize, dim: usize) -> Result<Self> {
        Expression::new(Node::Var(i), dim)
    }

    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        parse(text, dim)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.root.eval(x)
    }

    /// Partial derivative with respect to `x{i+1}`.
    pub fn differentiate(&self, i: usize) -> Expression {
        Expression {
            root: self.root.derivative(i),
            dim: self.dim,
        }
    }

    /// Mixed partial derivative for the multi-index `alpha` (exponent per variable).
    pub fn partial(&self, alpha: &[u8]) -> Expression {
        let mut e = self.clone();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                e = e.differentiate(i);
            }
        }
        e
    }

    /// Replaces every variable `x{j+1}` by `repl[j]`; the result lives in `dim` variables.
    pub fn substitute(&self, repl: &[Expression], dim: usize) -> Result<Expression> {
        if repl.len() != self.dim {
            return Err(Error::Invalid(format!(
                "substitution needs {} expressions, got {}",
                self.dim,
                repl.len()
            )));
        }
        let nodes: Vec<Node> = repl.iter().map(|e| e.root.clone()).collect();
        Expression::new(self.root.substitute(&nodes), dim)
    }

    pub fn is_zero(&self) -> bool {
        self.root.is_const(0.0)
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.root.constant()
    }

    /// True when the expression contains `abs`, `sign`, `min` or `max`.
    pub fn has_kinks(&self) -> bool {
        self.root.has_kinks()
    }

    pub fn add(&self, other: &Expression) -> Expression {
        Expression {
            root: Node::add(self.root.clone(), other.root.clone()),
            dim: self.dim,
        }
    }

    pub fn sub(&self, other: &Expression) -> Expression {
        Expression {
            root: Node::sub(self.root.clone(), other.root.clone()),
            dim: self.dim,
        }
    }

    pub fn mul(&self, other: &Expression) -> Expression {
        Expression {
            root: Node::mul(self.root.clone(), other.root.clone()),
            dim: self.dim,
        }
    }

    pub fn scale(&self, c: f64) -> Expression {
        Expression {
            root: Node::mul(Node::Const(c), self.root.clone()),
            dim: self.dim,
        }
    }

    /// Truncated Taylor jet of order `k` at `x0`, evaluated by jet arithmetic.
    pub fn jet(&self, x0: &[f64], k: usize) -> Jet {
        let space = JetSpace::shared(self.dim, k);
        jet::eval_jet(&self.root, &space, x0)
    }

    pub fn jet_in(&self, space: &std::sync::Arc<JetSpace>, x0: &[f64]) -> Jet {
        jet::eval_jet(&self.root, space, x0)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Declared regularity of a coefficient: `C^k` or `C^{k,1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Smoothness {
    Ck(u32),
    CkLip(u32),
}

impl Smoothness {
    /// Highest derivative order that may be evaluated; `C^{k,1}` admits one more
    /// order almost everywhere.
    pub fn max_order(self) -> usize {
        match self {
            Smoothness::Ck(k) => k as usize,
            Smoothness::CkLip(k) => k as usize + 1,
        }
    }

    pub fn check_order(self, order: usize) -> Result<()> {
        if order > self.max_order() {
            Err(Error::Smoothness(format!(
                "derivative of order {} requested for a {} coefficient",
                order, self
            )))
        } else {
            Ok(())
        }
    }

    pub fn parse(text: &str) -> Option<Smoothness> {
        let t = text.trim();
        let inner = t.strip_prefix("C{")?.strip_suffix('}')?;
        match inner.split_once(',') {
            Some((k, one)) if one.trim() == "1" => k.trim().parse().ok().map(Smoothness::CkLip),
            Some(_) => None,
            None => inner.trim().parse().ok().map(Smoothness::Ck),
        }
    }
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothness::Ck(k) => write!(f, "C{{{}}}", k),
            Smoothness::CkLip(k) => write!(f, "C{{{},1}}", k),
        }
    }
}

/// Jet of order `k` at `x0`, refused when `k` exceeds what `smoothness` allows.
pub fn jet_at(e: &Expression, smoothness: Smoothness, x0: &[f64], k: usize) -> Result<Jet> {
    smoothness.check_order(k)?;
    if x0.len() != e.dim() {
        return Err(Error::Invalid(format!(
            "point of dimension {} for a {}-dimensional expression",
            x0.len(),
            e.dim()
        )));
    }
    Ok(e.jet(x0, k))
}
