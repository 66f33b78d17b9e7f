use std::collections::HashMap;

use super::{Expr, Func, Node, Rational, Var};

/// Symbolic differentiation with a cache keyed by `(node id, variable)`.
///
/// The cache keeps every key node alive, so node ids never get reused while
/// an entry refers to them. Shared subtrees are differentiated once, which
/// keeps derivative DAGs polynomial in size when building the curvature
/// families.
#[derive(Default)]
pub struct Differentiator {
    cache: HashMap<(usize, Var), (Expr, Expr)>,
}

impl Differentiator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    pub fn diff(&mut self, e: &Expr, v: Var) -> Expr {
        let key = (e.id(), v);
        if let Some((_, d)) = self.cache.get(&key) {
            return d.clone();
        }
        let d = self.compute(e, v);
        self.cache.insert(key, (e.clone(), d.clone()));
        d
    }

    fn compute(&mut self, e: &Expr, v: Var) -> Expr {
        match e.node() {
            Node::Const(_) | Node::Param(_) => Expr::zero(),
            Node::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => self.diff(a, v).neg(),
            Node::Add(a, b) => {
                let da = self.diff(a, v);
                let db = self.diff(b, v);
                da.add(&db)
            }
            Node::Sub(a, b) => {
                let da = self.diff(a, v);
                let db = self.diff(b, v);
                da.sub(&db)
            }
            Node::Mul(a, b) => {
                let da = self.diff(a, v);
                let db = self.diff(b, v);
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let da = self.diff(a, v);
                let db = self.diff(b, v);
                if db.is_zero() {
                    return da.div(b);
                }
                // (a/b)' = a'/b - a b' / b^2
                da.div(b).sub(&a.mul(&db).div(&b.mul(b)))
            }
            Node::Pow(a, r) => {
                let da = self.diff(a, v);
                if da.is_zero() {
                    return Expr::zero();
                }
                let r: Rational = *r;
                Expr::constant(r.to_f64())
                    .mul(&a.powr(r.minus_one()))
                    .mul(&da)
            }
            Node::Call(f, a) => {
                let da = self.diff(a, v);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => a.sin().neg(),
                    Func::Tan => Expr::one().div(&a.cos().powi(2)),
                    Func::Exp => e.clone(),
                    Func::Ln => Expr::one().div(a),
                    Func::Sqrt => Expr::constant(0.5).div(e),
                    Func::Sinh => Expr::call(Func::Cosh, a),
                    Func::Cosh => Expr::call(Func::Sinh, a),
                    Func::Tanh => Expr::one().sub(&e.powi(2)),
                };
                outer.mul(&da)
            }
        }
    }
}

/// One-off derivative with a fresh cache.
pub fn diff(e: &Expr, v: Var) -> Expr {
    Differentiator::new().diff(e, v)
}
