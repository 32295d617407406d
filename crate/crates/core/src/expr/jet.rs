use super::{sign, Func, Node};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial layout shared by all jets of a given dimension and order.
#[derive(Debug)]
pub struct JetSpace {
    dim: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    products: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    pub fn new(dim: usize, order: usize) -> JetSpace {
        let mut monomials = Vec::new();
        for d in 0..=order {
            let mut cur = vec![0u8; dim];
            graded(&mut monomials, &mut cur, 0, d);
        }
        let degrees: Vec<usize> = monomials
            .iter()
            .map(|m| m.iter().map(|&a| a as usize).sum())
            .collect();
        let lookup: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degrees[i] + degrees[j] <= order {
                    let s: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    products.push((i, j, lookup[&s]));
                }
            }
        }
        JetSpace {
            dim,
            order,
            monomials,
            lookup,
            products,
        }
    }

    /// Cached space for `(dim, order)`.
    pub fn shared(dim: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("jet space cache poisoned");
        map.entry((dim, order))
            .or_insert_with(|| Arc::new(JetSpace::new(dim, order)))
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

// Monomials of total degree `left` over variables `pos..`, in lexicographic order
// with higher powers of earlier variables first.
fn graded(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, left: usize) {
    if pos + 1 == cur.len() || cur.is_empty() {
        if let Some(last) = cur.last_mut() {
            *last = left as u8;
        }
        out.push(cur.clone());
        if let Some(last) = cur.last_mut() {
            *last = 0;
        }
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a as u8;
        graded(out, cur, pos + 1, left - a);
    }
    cur[pos] = 0;
}

/// Truncated Taylor polynomial `sum_alpha c_alpha (x - x0)^alpha` with `|alpha| <= order`.
#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.space.dim == other.space.dim
            && self.space.order == other.space.order
            && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, c: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = c;
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn variable(space: &Arc<JetSpace>, i: usize, value: f64) -> Jet {
        let mut j = Jet::constant(space, value);
        if space.order >= 1 {
            let mut alpha = vec![0u8; space.dim];
            alpha[i] = 1;
            let idx = space.lookup[&alpha];
            j.coeffs[idx] = 1.0;
        }
        j
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient `D^alpha f(x0) / alpha!`.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.space
            .index_of(alpha)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// Derivative `D^alpha f(x0)`.
    pub fn derivative(&self, alpha: &[u8]) -> f64 {
        let fact: f64 = alpha
            .iter()
            .map(|&a| (1..=a as u32).map(f64::from).product::<f64>())
            .product();
        self.coeff(alpha) * fact
    }

    /// Evaluates the polynomial at `x` (absolute coordinates) around `x0`.
    pub fn eval_poly(&self, x0: &[f64], x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
        self.space
            .monomials
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| {
                c * m
                    .iter()
                    .zip(&d)
                    .map(|(&a, &v)| v.powi(a as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Same polynomial truncated to a lower order.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.space.order {
            return self.clone();
        }
        let space = JetSpace::shared(self.space.dim, order);
        let coeffs = space
            .monomials
            .iter()
            .map(|m| self.coeff(m))
            .collect();
        Jet { space, coeffs }
    }

    /// Partial derivative in `x{i+1}`; the result has order one less.
    pub fn partial(&self, i: usize) -> Jet {
        let order = self.space.order.saturating_sub(1);
        let space = JetSpace::shared(self.space.dim, order);
        let coeffs = space
            .monomials
            .iter()
            .map(|m| {
                let mut up = m.clone();
                up[i] += 1;
                self.coeff(&up) * up[i] as f64
            })
            .collect();
        Jet { space, coeffs }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let (a, b) = self.aligned(other);
        Jet {
            space: a.space.clone(),
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(*x, *y)).collect(),
        }
    }

    fn aligned(&self, other: &Jet) -> (Jet, Jet) {
        let o = self.space.order.min(other.space.order);
        (self.truncate(o), other.truncate(o))
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.zip(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.zip(other, |x, y| x - y)
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|x| c * x).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let mut coeffs = vec![0.0; a.space.len()];
        for &(i, j, t) in &a.space.products {
            let (x, y) = (a.coeffs[i], b.coeffs[j]);
            if x != 0.0 && y != 0.0 {
                coeffs[t] += x * y;
            }
        }
        Jet {
            space: a.space.clone(),
            coeffs,
        }
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut result = Jet::constant(&self.space, 1.0);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `f(self)` from the Taylor coefficients `f^(m)(a0) / m!`, `m = 0..=order`.
    pub fn compose(&self, series: &[f64]) -> Jet {
        let mut shifted = self.clone();
        shifted.coeffs[0] = 0.0;
        let mut result = Jet::constant(&self.space, series[0]);
        let mut power = Jet::constant(&self.space, 1.0);
        for s in series.iter().skip(1) {
            power = power.mul(&shifted);
            if *s != 0.0 {
                for (r, p) in result.coeffs.iter_mut().zip(&power.coeffs) {
                    *r += s * p;
                }
            }
        }
        result
    }

    pub fn recip(&self) -> Jet {
        let a0 = self.value();
        let series: Vec<f64> = (0..=self.space.order)
            .map(|m| {
                let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                s / a0.powi(m as i32 + 1)
            })
            .collect();
        self.compose(&series)
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    pub fn apply(&self, f: Func) -> Jet {
        let a0 = self.value();
        let k = self.space.order;
        let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
        match f {
            Func::Abs => self.scale(sign(a0)),
            Func::Sign => Jet::constant(&self.space, sign(a0)),
            Func::Exp => {
                let e = a0.exp();
                self.compose(&(0..=k).map(|m| e / fact(m)).collect::<Vec<_>>())
            }
            Func::Sin | Func::Cos => {
                let (s, c) = a0.sin_cos();
                let cycle = if f == Func::Sin {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                self.compose(&(0..=k).map(|m| cycle[m % 4] / fact(m)).collect::<Vec<_>>())
            }
        }
    }
}

pub(super) fn eval_jet(node: &Node, space: &Arc<JetSpace>, x0: &[f64]) -> Jet {
    match node {
        Node::Const(c) => Jet::constant(space, *c),
        Node::Var(i) => Jet::variable(space, *i, x0[*i]),
        Node::Neg(a) => eval_jet(a, space, x0).neg(),
        Node::Add(a, b) => eval_jet(a, space, x0).add(&eval_jet(b, space, x0)),
        Node::Sub(a, b) => eval_jet(a, space, x0).sub(&eval_jet(b, space, x0)),
        Node::Mul(a, b) => eval_jet(a, space, x0).mul(&eval_jet(b, space, x0)),
        Node::Div(a, b) => eval_jet(a, space, x0).div(&eval_jet(b, space, x0)),
        Node::Pow(a, n) => eval_jet(a, space, x0).powi(*n),
        Node::Func(f, a) => eval_jet(a, space, x0).apply(*f),
        Node::Min(a, b) | Node::Max(a, b) => {
            let ja = eval_jet(a, space, x0);
            let jb = eval_jet(b, space, x0);
            let s = if matches!(node, Node::Min(..)) { -1.0 } else { 1.0 };
            let diff = ja.sub(&jb);
            ja.add(&jb).add(&diff.apply(Func::Abs).scale(s)).scale(0.5)
        }
    }
}
