//! Symbolic scalar expressions over jet coordinates `(t^α, x^i, x^i_α)`.
//!
//! Expressions are immutable, reference-counted DAGs. Constructors apply a
//! light simplification (constant folding plus 0/1 identities); nothing else
//! is canonicalized, so equality is always judged numerically.

mod diff;
mod eval;
mod parse;

use std::fmt;
use std::sync::Arc;

use crate::dims::Dims;

pub use diff::{diff, Differentiator};
pub use eval::{eval, EvalError, Params, Tape};
pub use parse::{parse, parse_with_params, ParseError};

/// A jet coordinate. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T(usize),
    X(usize),
    /// `x^i_α`, stored as `Y { i, a }`.
    Y { i: usize, a: usize },
}

impl Var {
    pub fn in_range(&self, dims: Dims) -> bool {
        match *self {
            Var::T(a) => a < dims.p,
            Var::X(i) => i < dims.n,
            Var::Y { i, a } => i < dims.n && a < dims.p,
        }
    }

    /// Every coordinate of J¹(T, M) in a fixed order.
    pub fn all(dims: Dims) -> Vec<Var> {
        let mut out: Vec<Var> = (0..dims.p).map(Var::T).collect();
        out.extend((0..dims.n).map(Var::X));
        for i in 0..dims.n {
            for a in 0..dims.p {
                out.push(Var::Y { i, a });
            }
        }
        out
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::T(a) => write!(f, "t{}", a + 1),
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y { i, a } => write!(f, "y_{}_{}", i + 1, a + 1),
        }
    }
}

/// A numeric point `(t^α, x^i, x^i_α)` of J¹(T, M); `y[i][α]` holds `x^i_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

impl JetPoint {
    pub fn new(t: Vec<f64>, x: Vec<f64>, y: Vec<Vec<f64>>) -> Self {
        JetPoint { t, x, y }
    }

    pub fn zeros(dims: Dims) -> Self {
        JetPoint {
            t: vec![0.0; dims.p],
            x: vec![0.0; dims.n],
            y: vec![vec![0.0; dims.p]; dims.n],
        }
    }

    pub fn matches(&self, dims: Dims) -> bool {
        self.t.len() == dims.p
            && self.x.len() == dims.n
            && self.y.len() == dims.n
            && self.y.iter().all(|row| row.len() == dims.p)
    }

    pub fn get(&self, v: Var) -> f64 {
        match v {
            Var::T(a) => self.t[a],
            Var::X(i) => self.x[i],
            Var::Y { i, a } => self.y[i][a],
        }
    }

    pub fn set(&mut self, v: Var, value: f64) {
        match v {
            Var::T(a) => self.t[a] = value,
            Var::X(i) => self.x[i] = value,
            Var::Y { i, a } => self.y[i][a] = value,
        }
    }
}

/// Rational exponent `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Rational { num: s * num / g, den: s * den / g }
    }

    pub fn int(num: i64) -> Self {
        Rational { num, den: 1 }
    }

    pub fn is_int(&self) -> bool {
        self.den == 1
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn minus_one(self) -> Self {
        Rational::new(self.num - self.den, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    /// `None` when the argument is outside the function's real domain.
    pub fn apply(&self, x: f64) -> Option<f64> {
        Some(match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => {
                if x <= 0.0 {
                    return None;
                }
                x.ln()
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return None;
                }
                x.sqrt()
            }
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
        })
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Var(Var),
    Param(Arc<str>),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Rational),
    Call(Func, Expr),
}

/// Shared handle to an immutable expression node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    /// Identity of the underlying node; stable while any handle is alive.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::wrap(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(v: Var) -> Expr {
        Expr::wrap(Node::Var(v))
    }

    pub fn t(a: usize) -> Expr {
        Expr::var(Var::T(a))
    }

    pub fn x(i: usize) -> Expr {
        Expr::var(Var::X(i))
    }

    pub fn y(i: usize, a: usize) -> Expr {
        Expr::var(Var::Y { i, a })
    }

    pub fn param(name: &str) -> Expr {
        Expr::wrap(Node::Param(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::wrap(Node::Neg(self.clone())),
        }
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => match rhs.node() {
                Node::Neg(inner) => Expr::wrap(Node::Sub(self.clone(), inner.clone())),
                _ => Expr::wrap(Node::Add(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (Some(a), _) if a == 0.0 => rhs.neg(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => match rhs.node() {
                Node::Neg(inner) => Expr::wrap(Node::Add(self.clone(), inner.clone())),
                _ => Expr::wrap(Node::Sub(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::zero(),
            (Some(a), _) if a == 1.0 => rhs.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (Some(a), _) if a == -1.0 => rhs.neg(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => Expr::wrap(Node::Mul(self.clone(), rhs.clone())),
        }
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::constant(c).mul(self)
    }

    pub fn div(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::constant(a / b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => Expr::wrap(Node::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn powr(&self, exp: Rational) -> Expr {
        if exp.num == 0 {
            return Expr::one();
        }
        if exp.num == 1 && exp.den == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            if let Some(v) = eval::pow_value(c, exp) {
                return Expr::constant(v);
            }
        }
        Expr::wrap(Node::Pow(self.clone(), exp))
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.powr(Rational::int(k))
    }

    pub fn call(f: Func, arg: &Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            if let Some(v) = f.apply(c) {
                return Expr::constant(v);
            }
        }
        Expr::wrap(Node::Call(f, arg.clone()))
    }

    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn sin(&self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    /// Balanced sum; keeps tree depth logarithmic in the number of terms.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let terms: Vec<Expr> = terms.into_iter().filter(|e| !e.is_zero()).collect();
        fn go(ts: &[Expr]) -> Expr {
            match ts.len() {
                0 => Expr::zero(),
                1 => ts[0].clone(),
                len => {
                    let (l, r) = ts.split_at(len / 2);
                    go(l).add(&go(r))
                }
            }
        }
        go(&terms)
    }

    /// Product of all factors; zero short-circuits.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut acc = Expr::one();
        for f in factors {
            if f.is_zero() {
                return Expr::zero();
            }
            acc = acc.mul(&f);
        }
        acc
    }

    /// Whether any of the given variables occurs in the expression.
    pub fn depends_on(&self, pred: &dyn Fn(Var) -> bool) -> bool {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.node() {
                Node::Var(v) => {
                    if pred(*v) {
                        return true;
                    }
                }
                Node::Const(_) | Node::Param(_) => {}
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => stack.push(a.clone()),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
        false
    }

    /// Largest variable index per family, used to validate against dims.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = std::collections::HashSet::new();
        let mut out = std::collections::BTreeSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.node() {
                Node::Var(v) => {
                    out.insert(*v);
                }
                Node::Const(_) | Node::Param(_) => {}
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => stack.push(a.clone()),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
        out.into_iter().collect()
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            if self.num < 0 {
                write!(f, "(-{})", -self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else if self.num < 0 {
            write!(f, "(-{}/{})", -self.num, self.den)
        } else {
            write!(f, "({}/{})", self.num, self.den)
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{})", -c)
    } else {
        write!(f, "{}", c)
    }
}

/// Fully parenthesized; the output re-parses to an evaluation-equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_const(f, *c),
            Node::Var(v) => write!(f, "{}", v),
            Node::Param(name) => write!(f, "{}", name),
            Node::Neg(a) => write!(f, "(-{})", a),
            Node::Add(a, b) => write!(f, "({} + {})", a, b),
            Node::Sub(a, b) => write!(f, "({} - {})", a, b),
            Node::Mul(a, b) => write!(f, "({} * {})", a, b),
            Node::Div(a, b) => write!(f, "({} / {})", a, b),
            Node::Pow(a, r) => write!(f, "({}^{})", a, r),
            Node::Call(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplification_identities() {
        let x = Expr::x(0);
        assert!(x.mul(&Expr::zero()).is_zero());
        assert_eq!(x.mul(&Expr::one()).id(), x.id());
        assert_eq!(x.add(&Expr::zero()).id(), x.id());
        assert_eq!(x.neg().neg().id(), x.id());
        assert_eq!(Expr::constant(2.0).mul(&Expr::constant(3.0)).as_const(), Some(6.0));
        assert_eq!(Expr::zero().exp().as_const(), Some(1.0));
    }

    #[test]
    fn rational_normalizes() {
        let r = Rational::new(4, -6);
        assert_eq!(r, Rational { num: -2, den: 3 });
    }

    #[test]
    fn display_of_vars_is_one_based() {
        assert_eq!(Expr::y(1, 0).to_string(), "y_2_1");
        assert_eq!(Expr::t(2).to_string(), "t3");
    }

    #[test]
    fn sum_skips_zeros() {
        let s = Expr::sum(vec![Expr::zero(), Expr::x(0), Expr::zero()]);
        assert_eq!(s.to_string(), "x1");
        assert!(Expr::sum(Vec::new()).is_zero());
    }
}
