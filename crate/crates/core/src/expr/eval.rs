use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::{Expr, Func, JetPoint, Node, Rational, Var};

/// Named constant parameters bound at evaluation time.
pub type Params = HashMap<String, f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error in {op}: {subexpr}")]
    Domain { op: &'static str, subexpr: String },
    #[error("unbound parameter `{0}`")]
    Unbound(String),
    #[error("point does not match the tape dimensions")]
    PointShape,
}

pub(crate) fn pow_value(base: f64, r: Rational) -> Option<f64> {
    if r.is_int() {
        if base == 0.0 && r.num < 0 {
            return None;
        }
        Some(base.powi(r.num as i32))
    } else {
        if base < 0.0 && r.den % 2 == 0 {
            return None;
        }
        if base < 0.0 {
            // odd root of a negative number
            let mag = (-base).powf(r.to_f64());
            return Some(if r.num % 2 == 0 { mag } else { -mag });
        }
        if base == 0.0 && r.num < 0 {
            return None;
        }
        Some(base.powf(r.to_f64()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Op {
    Const(u64),
    Var(Var),
    Param(Arc<str>),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Pow(u32, Rational),
    Call(Func, u32),
}

/// A compiled straight-line program evaluating many expressions at once.
///
/// Compilation deduplicates nodes both by identity and by structure, so every
/// distinct subexpression is computed exactly once per point.
pub struct Tape {
    ops: Vec<Op>,
    sources: Vec<Expr>,
    roots: Vec<u32>,
}

impl Tape {
    pub fn compile<'a, I: IntoIterator<Item = &'a Expr>>(roots: I) -> Tape {
        let mut ops: Vec<Op> = Vec::new();
        let mut sources: Vec<Expr> = Vec::new();
        let mut by_id: HashMap<usize, u32> = HashMap::new();
        let mut by_op: HashMap<Op, u32> = HashMap::new();
        let mut root_slots = Vec::new();

        for root in roots {
            // iterative post-order traversal
            let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
            while let Some((e, expanded)) = stack.pop() {
                if by_id.contains_key(&e.id()) {
                    continue;
                }
                let children: Vec<&Expr> = match e.node() {
                    Node::Const(_) | Node::Var(_) | Node::Param(_) => vec![],
                    Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => vec![a],
                    Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                        vec![a, b]
                    }
                };
                if !expanded {
                    let pending: Vec<Expr> = children
                        .iter()
                        .filter(|c| !by_id.contains_key(&c.id()))
                        .map(|c| (*c).clone())
                        .collect();
                    if !pending.is_empty() {
                        stack.push((e.clone(), true));
                        for c in pending {
                            stack.push((c, false));
                        }
                        continue;
                    }
                }
                let slot = |c: &Expr| by_id[&c.id()];
                let op = match e.node() {
                    Node::Const(c) => Op::Const(c.to_bits()),
                    Node::Var(v) => Op::Var(*v),
                    Node::Param(p) => Op::Param(p.clone()),
                    Node::Neg(a) => Op::Neg(slot(a)),
                    Node::Add(a, b) => Op::Add(slot(a), slot(b)),
                    Node::Sub(a, b) => Op::Sub(slot(a), slot(b)),
                    Node::Mul(a, b) => Op::Mul(slot(a), slot(b)),
                    Node::Div(a, b) => Op::Div(slot(a), slot(b)),
                    Node::Pow(a, r) => Op::Pow(slot(a), *r),
                    Node::Call(f, a) => Op::Call(*f, slot(a)),
                };
                let idx = match by_op.get(&op) {
                    Some(&i) => i,
                    None => {
                        let i = ops.len() as u32;
                        by_op.insert(op.clone(), i);
                        ops.push(op);
                        sources.push(e.clone());
                        i
                    }
                };
                by_id.insert(e.id(), idx);
            }
            root_slots.push(by_id[&root.id()]);
        }
        Tape {
            ops,
            sources,
            roots: root_slots,
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    /// Values of every root, in compile order.
    pub fn run(&self, pt: &JetPoint, params: &Params) -> Result<Vec<f64>, EvalError> {
        let mut vals = vec![0.0f64; self.ops.len()];
        for (k, op) in self.ops.iter().enumerate() {
            let v = |i: &u32| vals[*i as usize];
            let value = match op {
                Op::Const(bits) => f64::from_bits(*bits),
                Op::Var(var) => {
                    let ok = match *var {
                        Var::T(a) => a < pt.t.len(),
                        Var::X(i) => i < pt.x.len(),
                        Var::Y { i, a } => i < pt.y.len() && a < pt.y[i].len(),
                    };
                    if !ok {
                        return Err(EvalError::PointShape);
                    }
                    pt.get(*var)
                }
                Op::Param(name) => match params.get(name.as_ref()) {
                    Some(p) => *p,
                    None => return Err(EvalError::Unbound(name.to_string())),
                },
                Op::Neg(a) => -v(a),
                Op::Add(a, b) => v(a) + v(b),
                Op::Sub(a, b) => v(a) - v(b),
                Op::Mul(a, b) => v(a) * v(b),
                Op::Div(a, b) => {
                    let d = v(b);
                    if d == 0.0 {
                        return Err(self.domain(k, "division"));
                    }
                    v(a) / d
                }
                Op::Pow(a, r) => match pow_value(v(a), *r) {
                    Some(x) => x,
                    None => return Err(self.domain(k, "power")),
                },
                Op::Call(f, a) => match f.apply(v(a)) {
                    Some(x) => x,
                    None => return Err(self.domain(k, f.name())),
                },
            };
            vals[k] = value;
        }
        Ok(self.roots.iter().map(|&r| vals[r as usize]).collect())
    }

    fn domain(&self, k: usize, op: &'static str) -> EvalError {
        let mut s = self.sources[k].to_string();
        if s.len() > 240 {
            let mut cut = 240;
            while !s.is_char_boundary(cut) {
                cut -= 1;
            }
            s.truncate(cut);
            s.push_str("...");
        }
        EvalError::Domain { op, subexpr: s }
    }
}

/// Evaluates a single expression at a point.
pub fn eval(e: &Expr, pt: &JetPoint, params: &Params) -> Result<f64, EvalError> {
    Tape::compile([e]).run(pt, params).map(|v| v[0])
}
