//! Dense d-tensors with typed index slots.
//!
//! A slot is temporal (range `p`), spatial (range `n`) or a vertical pair
//! `(i, α)` (range `p·n`, flattened Latin-major via [`Dims::pair`]). The
//! variance of a vertical pair refers to its Latin sub-index; the Greek
//! sub-index always carries the opposite variance, as in `x^i_α` (upper) or
//! `G^{(α)(β)}_{(i)(j)}` (two lower pairs).
//!
//! The same container holds numbers ([`DTensor`]) or symbolic components
//! ([`Field`]); contraction and friends are generic over [`Scalar`].

use std::fmt;

use crate::dims::Dims;
use crate::error::GeomError;
use crate::expr::{EvalError, Expr, JetPoint, Params, Tape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexKind {
    Temporal,
    Spatial,
    VerticalPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexSlot {
    pub kind: IndexKind,
    pub variance: Variance,
}

impl IndexSlot {
    pub const T_UP: IndexSlot = IndexSlot::new(IndexKind::Temporal, Variance::Upper);
    pub const T_LO: IndexSlot = IndexSlot::new(IndexKind::Temporal, Variance::Lower);
    pub const S_UP: IndexSlot = IndexSlot::new(IndexKind::Spatial, Variance::Upper);
    pub const S_LO: IndexSlot = IndexSlot::new(IndexKind::Spatial, Variance::Lower);
    pub const V_UP: IndexSlot = IndexSlot::new(IndexKind::VerticalPair, Variance::Upper);
    pub const V_LO: IndexSlot = IndexSlot::new(IndexKind::VerticalPair, Variance::Lower);

    pub const fn new(kind: IndexKind, variance: Variance) -> Self {
        IndexSlot { kind, variance }
    }

    pub fn range(&self, dims: Dims) -> usize {
        match self.kind {
            IndexKind::Temporal => dims.p,
            IndexKind::Spatial => dims.n,
            IndexKind::VerticalPair => dims.pairs(),
        }
    }

    fn contracts_with(&self, other: &IndexSlot) -> bool {
        self.kind == other.kind && self.variance != other.variance
    }
}

impl fmt::Display for IndexSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            IndexKind::Temporal => "T",
            IndexKind::Spatial => "S",
            IndexKind::VerticalPair => "V",
        };
        let v = match self.variance {
            Variance::Upper => "^",
            Variance::Lower => "_",
        };
        write!(f, "{}{}", k, v)
    }
}

/// Arithmetic needed by the generic tensor operations.
pub trait Scalar: Clone {
    fn zero() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
}

impl Scalar for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        Expr::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Expr::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Expr::mul(self, rhs)
    }
    fn scale(&self, c: f64) -> Self {
        Expr::scale(self, c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    dims: Dims,
    slots: Vec<IndexSlot>,
    data: Vec<T>,
}

/// Numeric d-tensor.
pub type DTensor = Tensor<f64>;
/// Symbolic d-tensor field; one expression per component.
pub type Field = Tensor<Expr>;

/// Calls `f` with every multi-index of `shape` in row-major order.
pub fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.iter().any(|&s| s == 0) {
        return;
    }
    let mut ix = vec![0usize; shape.len()];
    loop {
        f(&ix);
        let mut k = shape.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            ix[k] += 1;
            if ix[k] < shape[k] {
                break;
            }
            ix[k] = 0;
        }
    }
}

impl<T: Clone> Tensor<T> {
    pub fn from_fn(dims: Dims, slots: &[IndexSlot], mut f: impl FnMut(&[usize]) -> T) -> Self {
        let shape: Vec<usize> = slots.iter().map(|s| s.range(dims)).collect();
        let mut data = Vec::with_capacity(shape.iter().product());
        for_each_index(&shape, |ix| data.push(f(ix)));
        Tensor {
            dims,
            slots: slots.to_vec(),
            data,
        }
    }

    pub fn from_data(dims: Dims, slots: &[IndexSlot], data: Vec<T>) -> Result<Self, GeomError> {
        let len: usize = slots.iter().map(|s| s.range(dims)).product();
        if len != data.len() {
            return Err(GeomError::Shape(format!(
                "expected {} components, got {}",
                len,
                data.len()
            )));
        }
        Ok(Tensor {
            dims,
            slots: slots.to_vec(),
            data,
        })
    }

    pub fn scalar(dims: Dims, value: T) -> Self {
        Tensor {
            dims,
            slots: Vec::new(),
            data: vec![value],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn slots(&self) -> &[IndexSlot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.range(self.dims)).collect()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn offset(&self, ix: &[usize]) -> usize {
        debug_assert_eq!(ix.len(), self.slots.len(), "index rank mismatch");
        let mut off = 0;
        for (k, s) in self.slots.iter().enumerate() {
            let r = s.range(self.dims);
            debug_assert!(ix[k] < r, "index {} out of range {}", ix[k], r);
            off = off * r + ix[k];
        }
        off
    }

    pub fn get(&self, ix: &[usize]) -> &T {
        &self.data[self.offset(ix)]
    }

    pub fn set(&mut self, ix: &[usize], value: T) {
        let o = self.offset(ix);
        self.data[o] = value;
    }

    /// The sole component of a rank-0 tensor.
    pub fn value(&self) -> &T {
        &self.data[0]
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            dims: self.dims,
            slots: self.slots.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Reorders slots: output slot `k` is input slot `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank());
        let slots: Vec<IndexSlot> = perm.iter().map(|&k| self.slots[k]).collect();
        let mut src = vec![0usize; self.rank()];
        Tensor::from_fn(self.dims, &slots, |ix| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = ix[k];
            }
            self.get(&src).clone()
        })
    }

    /// Relabels vertical-pair slot `slot` as a spatial slot followed by a
    /// temporal slot. The data layout is unchanged because pairs are
    /// flattened Latin-major.
    pub fn split_pair(&self, slot: usize) -> Result<Self, GeomError> {
        let s = self.slots[slot];
        if s.kind != IndexKind::VerticalPair {
            return Err(GeomError::Slots(format!("slot {} is not a vertical pair", s)));
        }
        let greek = match s.variance {
            Variance::Upper => Variance::Lower,
            Variance::Lower => Variance::Upper,
        };
        let mut slots = self.slots.clone();
        slots.splice(
            slot..=slot,
            [
                IndexSlot::new(IndexKind::Spatial, s.variance),
                IndexSlot::new(IndexKind::Temporal, greek),
            ],
        );
        Ok(Tensor {
            dims: self.dims,
            slots,
            data: self.data.clone(),
        })
    }

    /// Inverse of [`Tensor::split_pair`]: fuses a spatial slot and the
    /// temporal slot right after it into one vertical pair.
    pub fn merge_pair(&self, slot: usize) -> Result<Self, GeomError> {
        let (a, b) = match (self.slots.get(slot), self.slots.get(slot + 1)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(GeomError::Slots("slot position out of range".into())),
        };
        if a.kind != IndexKind::Spatial || b.kind != IndexKind::Temporal || a.variance == b.variance
        {
            return Err(GeomError::Slots(format!("cannot fuse {} and {} into a pair", a, b)));
        }
        let mut slots = self.slots.clone();
        slots.splice(slot..=slot + 1, [IndexSlot::new(IndexKind::VerticalPair, a.variance)]);
        Ok(Tensor {
            dims: self.dims,
            slots,
            data: self.data.clone(),
        })
    }

    fn check_same_shape(&self, other: &Tensor<T>) -> Result<(), GeomError> {
        if self.slots != other.slots || self.dims != other.dims {
            return Err(GeomError::Slots(format!(
                "{} vs {}",
                slot_list(&self.slots),
                slot_list(&other.slots)
            )));
        }
        Ok(())
    }
}

pub fn slot_list(slots: &[IndexSlot]) -> String {
    let parts: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(dims: Dims, slots: &[IndexSlot]) -> Self {
        Tensor::from_fn(dims, slots, |_| T::zero())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GeomError> {
        self.check_same_shape(other)?;
        Ok(self.zip(other, |a, b| a.add(b)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, GeomError> {
        self.check_same_shape(other)?;
        Ok(self.zip(other, |a, b| a.sub(b)))
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|a| a.scale(c))
    }

    fn zip(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        Tensor {
            dims: self.dims,
            slots: self.slots.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Einstein summation over `slot_a` of `a` and `slot_b` of `b`; the
    /// remaining slots are ordered a-then-b.
    pub fn contract(a: &Self, slot_a: usize, b: &Self, slot_b: usize) -> Result<Self, GeomError> {
        let (sa, sb) = match (a.slots.get(slot_a), b.slots.get(slot_b)) {
            (Some(x), Some(y)) => (*x, *y),
            _ => return Err(GeomError::Slots("slot position out of range".into())),
        };
        if !sa.contracts_with(&sb) || a.dims != b.dims {
            return Err(GeomError::Slots(format!(
                "cannot contract {} with {}",
                sa, sb
            )));
        }
        let range = sa.range(a.dims);
        let mut slots: Vec<IndexSlot> = Vec::new();
        slots.extend(a.slots.iter().enumerate().filter(|(k, _)| *k != slot_a).map(|(_, s)| *s));
        slots.extend(b.slots.iter().enumerate().filter(|(k, _)| *k != slot_b).map(|(_, s)| *s));
        let ra = a.rank() - 1;
        let mut ia = vec![0usize; a.rank()];
        let mut ib = vec![0usize; b.rank()];
        Ok(Tensor::from_fn(a.dims, &slots, |ix| {
            let (xa, xb) = ix.split_at(ra);
            fill_skipping(&mut ia, xa, slot_a);
            fill_skipping(&mut ib, xb, slot_b);
            let mut acc = T::zero();
            for s in 0..range {
                ia[slot_a] = s;
                ib[slot_b] = s;
                acc = acc.add(&a.get(&ia).mul(b.get(&ib)));
            }
            acc
        }))
    }

    /// Trace over two slots of the same tensor.
    pub fn trace(&self, s1: usize, s2: usize) -> Result<Self, GeomError> {
        if s1 == s2 || !self.slots[s1].contracts_with(&self.slots[s2]) {
            return Err(GeomError::Slots(format!(
                "cannot trace {} with {}",
                self.slots[s1], self.slots[s2]
            )));
        }
        let range = self.slots[s1].range(self.dims);
        let keep: Vec<usize> = (0..self.rank()).filter(|k| *k != s1 && *k != s2).collect();
        let slots: Vec<IndexSlot> = keep.iter().map(|&k| self.slots[k]).collect();
        let mut full = vec![0usize; self.rank()];
        Ok(Tensor::from_fn(self.dims, &slots, |ix| {
            for (j, &k) in keep.iter().enumerate() {
                full[k] = ix[j];
            }
            let mut acc = T::zero();
            for s in 0..range {
                full[s1] = s;
                full[s2] = s;
                acc = acc.add(self.get(&full));
            }
            acc
        }))
    }

    /// `½ (T_{..a..b..} − T_{..b..a..})` over slots `s1`, `s2`.
    pub fn antisymmetrize_pair(&self, s1: usize, s2: usize) -> Result<Self, GeomError> {
        self.require_same(&[s1, s2])?;
        let mut swapped = vec![0usize; self.rank()];
        Ok(Tensor::from_fn(self.dims, &self.slots, |ix| {
            swapped.copy_from_slice(ix);
            swapped.swap(s1, s2);
            self.get(ix).sub(self.get(&swapped)).scale(0.5)
        }))
    }

    /// The three summands `T_{ijk}`, `T_{jki}`, `T_{kij}` of a cyclic sum.
    pub fn cyclic_terms(&self, s1: usize, s2: usize, s3: usize) -> Result<[Self; 3], GeomError> {
        self.require_same(&[s1, s2, s3])?;
        let shifted = |shift: usize| {
            let mut b = vec![0usize; self.rank()];
            Tensor::from_fn(self.dims, &self.slots, |ix| {
                let v = [ix[s1], ix[s2], ix[s3]];
                b.copy_from_slice(ix);
                b[s1] = v[shift % 3];
                b[s2] = v[(shift + 1) % 3];
                b[s3] = v[(shift + 2) % 3];
                self.get(&b).clone()
            })
        };
        Ok([shifted(0), shifted(1), shifted(2)])
    }

    /// `T_{ijk} + T_{jki} + T_{kij}` over the three designated slots.
    pub fn cyclic_sum(&self, s1: usize, s2: usize, s3: usize) -> Result<Self, GeomError> {
        self.require_same(&[s1, s2, s3])?;
        let mut b = vec![0usize; self.rank()];
        let mut c = vec![0usize; self.rank()];
        Ok(Tensor::from_fn(self.dims, &self.slots, |ix| {
            let (i, j, k) = (ix[s1], ix[s2], ix[s3]);
            b.copy_from_slice(ix);
            b[s1] = j;
            b[s2] = k;
            b[s3] = i;
            c.copy_from_slice(ix);
            c[s1] = k;
            c[s2] = i;
            c[s3] = j;
            self.get(ix).add(self.get(&b)).add(self.get(&c))
        }))
    }

    /// Replaces slot `slot` by `M^{a}{}_{b} T_{..b..}`, i.e. raising or
    /// lowering with a metric block `matrix` (rank 2, both slots of the
    /// same kind). The slot keeps its position and takes `new_variance`.
    pub fn transform_slot(
        &self,
        slot: usize,
        matrix: &Self,
        new_variance: Variance,
    ) -> Result<Self, GeomError> {
        let s = self.slots[slot];
        if matrix.rank() != 2
            || matrix.slots[0].kind != s.kind
            || matrix.slots[1].kind != s.kind
            || matrix.slots[1].variance == s.variance
        {
            return Err(GeomError::Slots(format!(
                "metric {} cannot act on slot {}",
                slot_list(&matrix.slots),
                s
            )));
        }
        let mut slots = self.slots.clone();
        slots[slot] = IndexSlot::new(s.kind, new_variance);
        let range = s.range(self.dims);
        let mut src = vec![0usize; self.rank()];
        Ok(Tensor::from_fn(self.dims, &slots, |ix| {
            src.copy_from_slice(ix);
            let mut acc = T::zero();
            for b in 0..range {
                src[slot] = b;
                acc = acc.add(&matrix.get(&[ix[slot], b]).mul(self.get(&src)));
            }
            acc
        }))
    }

    fn require_same(&self, which: &[usize]) -> Result<(), GeomError> {
        let first = self
            .slots
            .get(which[0])
            .ok_or_else(|| GeomError::Slots("slot position out of range".into()))?;
        for &k in &which[1..] {
            match self.slots.get(k) {
                Some(s) if s == first => {}
                Some(s) => {
                    return Err(GeomError::Slots(format!(
                        "slots {} and {} differ in kind or variance",
                        first, s
                    )))
                }
                None => return Err(GeomError::Slots("slot position out of range".into())),
            }
        }
        Ok(())
    }
}

fn fill_skipping(full: &mut [usize], part: &[usize], skip: usize) {
    let mut j = 0;
    for (k, v) in full.iter_mut().enumerate() {
        if k == skip {
            continue;
        }
        *v = part[j];
        j += 1;
    }
}

impl DTensor {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DTensor) -> Result<f64, GeomError> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Kronecker delta on a pair of slots of the given kind.
    pub fn delta(dims: Dims, kind: IndexKind) -> DTensor {
        let slots = [
            IndexSlot::new(kind, Variance::Upper),
            IndexSlot::new(kind, Variance::Lower),
        ];
        DTensor::from_fn(dims, &slots, |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
    }
}

impl Field {
    pub fn constant(dims: Dims, slots: &[IndexSlot], f: impl Fn(&[usize]) -> f64) -> Field {
        Field::from_fn(dims, slots, |ix| Expr::constant(f(ix)))
    }

    /// Whether every component simplified to the constant zero.
    pub fn is_structurally_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn eval(&self, pt: &JetPoint, params: &Params) -> Result<DTensor, EvalError> {
        let tape = Tape::compile(self.data.iter());
        let vals = tape.run(pt, params)?;
        Ok(Tensor {
            dims: self.dims,
            slots: self.slots.clone(),
            data: vals,
        })
    }
}

/// Several fields compiled into one tape, evaluated together per point.
pub struct FieldProgram {
    tape: Tape,
    layout: Vec<(Vec<IndexSlot>, usize)>,
    dims: Dims,
}

impl FieldProgram {
    pub fn new(dims: Dims, fields: &[&Field]) -> Self {
        let tape = Tape::compile(fields.iter().flat_map(|f| f.data.iter()));
        let layout = fields
            .iter()
            .map(|f| (f.slots.clone(), f.data.len()))
            .collect();
        FieldProgram { tape, layout, dims }
    }

    pub fn tape_len(&self) -> usize {
        self.tape.len()
    }

    pub fn run(&self, pt: &JetPoint, params: &Params) -> Result<Vec<DTensor>, EvalError> {
        let vals = self.tape.run(pt, params)?;
        let mut out = Vec::with_capacity(self.layout.len());
        let mut off = 0;
        for (slots, len) in &self.layout {
            out.push(Tensor {
                dims: self.dims,
                slots: slots.clone(),
                data: vals[off..off + len].to_vec(),
            });
            off += len;
        }
        Ok(out)
    }
}
