//! Nonlinear connection, adapted derivatives and d-covariant derivatives on
//! J¹(T, M).
//!
//! The nonlinear connection is fixed by the two Christoffel families:
//! `M^{(i)}_{(α)β} = −H^μ_{αβ} x^i_μ` and `N^{(i)}_{(α)j} = γ^i_{jm} x^m_α`.

use crate::basegeom::{LeviCivita, MetricField};
use crate::dims::Dims;
use crate::error::GeomError;
use crate::expr::{eval, Differentiator, Expr, JetPoint, Params, Var};
use crate::tensor::{DTensor, Field, IndexKind, IndexSlot, Variance};

/// A direction of the adapted frame `{δ/δt^α, δ/δx^i, ∂/∂x^i_α}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Temporal(usize),
    Spatial(usize),
    Vertical { i: usize, a: usize },
}

/// Kind of covariant derivative; the new index is appended as the last slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivKind {
    /// `_{/β}`, appends a lower temporal slot.
    Temporal,
    /// `_{|k}`, appends a lower spatial slot.
    Spatial,
    /// `|^{(γ)}_{(k)}`, appends a lower vertical pair `(k, γ)`.
    Vertical,
}

impl DerivKind {
    pub const ALL: [DerivKind; 3] = [DerivKind::Temporal, DerivKind::Spatial, DerivKind::Vertical];

    pub fn slot(self) -> IndexSlot {
        match self {
            DerivKind::Temporal => IndexSlot::T_LO,
            DerivKind::Spatial => IndexSlot::S_LO,
            DerivKind::Vertical => IndexSlot::V_LO,
        }
    }

    pub fn direction(self, dims: Dims, d: usize) -> Direction {
        match self {
            DerivKind::Temporal => Direction::Temporal(d),
            DerivKind::Spatial => Direction::Spatial(d),
            DerivKind::Vertical => {
                let (i, a) = dims.unpair(d);
                Direction::Vertical { i, a }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DerivKind::Temporal => "temporal",
            DerivKind::Spatial => "spatial",
            DerivKind::Vertical => "vertical",
        }
    }
}

/// `M^{(i)}_{(α)β}` with slots `[V^, T_]` and `N^{(i)}_{(α)j}` with `[V^, S_]`.
#[derive(Debug, Clone)]
pub struct NonlinearConnection {
    pub m: Field,
    pub n: Field,
}

/// Coefficients `(H^γ_{αβ}, G^k_{jγ}, L^i_{jk}, C^{i(γ)}_{j(k)})` of an
/// h-normal linear connection. Slots: `h [T^,T_,T_]`, `g [S^,S_,T_]`,
/// `l [S^,S_,S_]`, `c [S^,S_,V_]`; the derivative index is always last.
#[derive(Debug, Clone)]
pub struct LinearConnection {
    pub h: Field,
    pub g: Field,
    pub l: Field,
    pub c: Field,
}

/// Shared symbolic state: both Levi-Civita geometries, the nonlinear
/// connection and a derivative cache.
pub struct JetContext {
    pub dims: Dims,
    pub h: LeviCivita,
    pub phi: LeviCivita,
    pub nonlinear: NonlinearConnection,
    dfr: Differentiator,
    /// `δ_β = ∂_β + Σ temporal_shift[(j,μ), β] ∂/∂y_{jμ}`, i.e. `−M`.
    temporal_shift: Field,
}

impl JetContext {
    pub fn new(h: &MetricField, phi: &MetricField) -> Self {
        let mut dfr = Differentiator::new();
        let hl = LeviCivita::build(h, &mut dfr);
        let pl = LeviCivita::build(phi, &mut dfr);
        let dims = h.components().dims();
        let m = Field::from_fn(dims, &[IndexSlot::V_UP, IndexSlot::T_LO], |ix| {
            let (i, a) = dims.unpair(ix[0]);
            let b = ix[1];
            Expr::sum((0..dims.p).map(|mu| hl.christoffel.get(&[mu, a, b]).mul(&Expr::y(i, mu))))
                .neg()
        });
        let n = Field::from_fn(dims, &[IndexSlot::V_UP, IndexSlot::S_LO], |ix| {
            let (i, a) = dims.unpair(ix[0]);
            let j = ix[1];
            Expr::sum((0..dims.n).map(|mm| pl.christoffel.get(&[i, j, mm]).mul(&Expr::y(mm, a))))
        });
        let temporal_shift = m.map(|e| e.neg());
        JetContext {
            dims,
            h: hl,
            phi: pl,
            nonlinear: NonlinearConnection { m, n },
            dfr,
            temporal_shift,
        }
    }

    pub fn diff(&mut self, e: &Expr, v: Var) -> Expr {
        self.dfr.diff(e, v)
    }

    /// Adapted directional derivative of a scalar expression.
    pub fn adapted(&mut self, e: &Expr, dir: Direction) -> Expr {
        let dims = self.dims;
        match dir {
            Direction::Vertical { i, a } => self.dfr.diff(e, Var::Y { i, a }),
            Direction::Temporal(b) => {
                let mut terms = vec![self.dfr.diff(e, Var::T(b))];
                for j in 0..dims.n {
                    for mu in 0..dims.p {
                        let dy = self.dfr.diff(e, Var::Y { i: j, a: mu });
                        if dy.is_zero() {
                            continue;
                        }
                        let c = self.temporal_shift.get(&[dims.pair(j, mu), b]);
                        terms.push(c.mul(&dy));
                    }
                }
                Expr::sum(terms)
            }
            Direction::Spatial(k) => {
                let mut terms = vec![self.dfr.diff(e, Var::X(k))];
                for j in 0..dims.n {
                    for mu in 0..dims.p {
                        let dy = self.dfr.diff(e, Var::Y { i: j, a: mu });
                        if dy.is_zero() {
                            continue;
                        }
                        let c = self.nonlinear.n.get(&[dims.pair(j, mu), k]);
                        terms.push(c.mul(&dy).neg());
                    }
                }
                Expr::sum(terms)
            }
        }
    }

    /// Componentwise adapted derivative; appends the direction slot.
    pub fn adapted_field(&mut self, t: &Field, kind: DerivKind) -> Field {
        let dims = self.dims;
        let range = kind.slot().range(dims);
        let derivs: Vec<Vec<Expr>> = t
            .data()
            .iter()
            .map(|e| (0..range).map(|d| self.adapted(e, kind.direction(dims, d))).collect())
            .collect();
        let mut slots = t.slots().to_vec();
        slots.push(kind.slot());
        let rank = t.rank();
        Field::from_fn(dims, &slots, |ix| derivs[t.offset(&ix[..rank])][ix[rank]].clone())
    }

    /// The Berwald connection `(H, 0, γ, 0)`.
    pub fn berwald(&self) -> LinearConnection {
        let dims = self.dims;
        LinearConnection {
            h: self.h.christoffel.clone(),
            g: Field::zeros(dims, &[IndexSlot::S_UP, IndexSlot::S_LO, IndexSlot::T_LO]),
            l: self.phi.christoffel.clone(),
            c: Field::zeros(dims, &[IndexSlot::S_UP, IndexSlot::S_LO, IndexSlot::V_LO]),
        }
    }

    /// d-covariant derivative of a mixed d-tensor field.
    ///
    /// One correction per slot, `+` for upper and `−` for lower indices.
    /// The coefficient block depends on the slot kind and the derivative
    /// kind: temporal slots use `H` along temporal directions only; spatial
    /// slots use `G`, `L` or `C`; a vertical pair is corrected like a
    /// spatial index on its Latin part and like a temporal index of the
    /// opposite variance on its Greek part.
    pub fn covariant(&mut self, t: &Field, conn: &LinearConnection, kind: DerivKind) -> Field {
        let dims = self.dims;
        let base = self.adapted_field(t, kind);
        let rank = t.rank();
        let slots = t.slots().to_vec();
        let mut src = vec![0usize; rank];
        Field::from_fn(dims, base.slots(), |ix| {
            let d = ix[rank];
            let mut terms = vec![base.get(ix).clone()];
            for (s, slot) in slots.iter().enumerate() {
                src.copy_from_slice(&ix[..rank]);
                match slot.kind {
                    IndexKind::Temporal => {
                        let a = ix[s];
                        push_corrections(&mut terms, slot.variance, dims.p, |b| {
                            let c = temporal_coef(conn, kind, d, a, b, slot.variance)?;
                            src[s] = b;
                            Some(c.mul(t.get(&src)))
                        });
                    }
                    IndexKind::Spatial => {
                        let a = ix[s];
                        push_corrections(&mut terms, slot.variance, dims.n, |b| {
                            let c = spatial_coef(conn, kind, d, a, b, slot.variance)?;
                            src[s] = b;
                            Some(c.mul(t.get(&src)))
                        });
                    }
                    IndexKind::VerticalPair => {
                        let (i, al) = dims.unpair(ix[s]);
                        push_corrections(&mut terms, slot.variance, dims.n, |b| {
                            let c = spatial_coef(conn, kind, d, i, b, slot.variance)?;
                            src[s] = dims.pair(b, al);
                            Some(c.mul(t.get(&src)))
                        });
                        let greek = opposite(slot.variance);
                        push_corrections(&mut terms, greek, dims.p, |b| {
                            let c = temporal_coef(conn, kind, d, al, b, greek)?;
                            src[s] = dims.pair(i, b);
                            Some(c.mul(t.get(&src)))
                        });
                    }
                }
            }
            Expr::sum(terms)
        })
    }
}

pub(crate) fn opposite(v: Variance) -> Variance {
    match v {
        Variance::Upper => Variance::Lower,
        Variance::Lower => Variance::Upper,
    }
}

fn push_corrections(
    terms: &mut Vec<Expr>,
    variance: Variance,
    range: usize,
    mut term: impl FnMut(usize) -> Option<Expr>,
) {
    for b in 0..range {
        if let Some(e) = term(b) {
            if e.is_zero() {
                continue;
            }
            terms.push(match variance {
                Variance::Upper => e,
                Variance::Lower => e.neg(),
            });
        }
    }
}

/// Coefficient multiplying the component with index `b` when correcting a
/// temporal index with value `a`.
fn temporal_coef(
    conn: &LinearConnection,
    kind: DerivKind,
    d: usize,
    a: usize,
    b: usize,
    variance: Variance,
) -> Option<Expr> {
    if kind != DerivKind::Temporal {
        return None;
    }
    Some(match variance {
        Variance::Upper => conn.h.get(&[a, b, d]).clone(),
        Variance::Lower => conn.h.get(&[b, a, d]).clone(),
    })
}

fn spatial_coef(
    conn: &LinearConnection,
    kind: DerivKind,
    d: usize,
    a: usize,
    b: usize,
    variance: Variance,
) -> Option<Expr> {
    let block = match kind {
        DerivKind::Temporal => &conn.g,
        DerivKind::Spatial => &conn.l,
        DerivKind::Vertical => &conn.c,
    };
    Some(match variance {
        Variance::Upper => block.get(&[a, b, d]).clone(),
        Variance::Lower => block.get(&[b, a, d]).clone(),
    })
}

/// First-order σ families:
/// `temporal` σ_γ `[T_]`, `spatial` σ_k `[S_]`, `vertical` σ^{(γ)}_{(k)} `[V_]`,
/// `raised` σ^{kγ} `[S^, T^]`, `spatial_raised` σ^k `[S^]`,
/// `lambda` Λ^k_{ij} `[S^, S_, S_]`.
#[derive(Debug, Clone)]
pub struct SigmaDerivs {
    pub sigma: Expr,
    pub temporal: Field,
    pub spatial: Field,
    pub vertical: Field,
    pub raised: Field,
    pub spatial_raised: Field,
    pub lambda: Field,
}

impl SigmaDerivs {
    pub fn build(ctx: &mut JetContext, sigma: &Expr) -> Self {
        let dims = ctx.dims;
        let s = Field::scalar(dims, sigma.clone());
        let temporal = ctx.adapted_field(&s, DerivKind::Temporal);
        let spatial = ctx.adapted_field(&s, DerivKind::Spatial);
        let vertical = ctx.adapted_field(&s, DerivKind::Vertical);
        let phi_inv = &ctx.phi.inverse;
        let phi = ctx.phi.metric.components();
        let raised = Field::from_fn(dims, &[IndexSlot::S_UP, IndexSlot::T_UP], |ix| {
            Expr::sum((0..dims.n).map(|m| {
                phi_inv.get(&[ix[0], m]).mul(vertical.get(&[dims.pair(m, ix[1])]))
            }))
        });
        let spatial_raised = Field::from_fn(dims, &[IndexSlot::S_UP], |ix| {
            Expr::sum((0..dims.n).map(|m| phi_inv.get(&[ix[0], m]).mul(spatial.get(&[m]))))
        });
        let lambda = Field::from_fn(
            dims,
            &[IndexSlot::S_UP, IndexSlot::S_LO, IndexSlot::S_LO],
            |ix| {
                let (k, i, j) = (ix[0], ix[1], ix[2]);
                let mut terms = Vec::new();
                if k == j {
                    terms.push(spatial.get(&[i]).clone());
                }
                if k == i {
                    terms.push(spatial.get(&[j]).clone());
                }
                terms.push(phi.get(&[i, j]).mul(spatial_raised.get(&[k])).neg());
                Expr::sum(terms)
            },
        );
        SigmaDerivs {
            sigma: sigma.clone(),
            temporal,
            spatial,
            vertical,
            raised,
            spatial_raised,
            lambda,
        }
    }

    /// Whether σ involves any jet coordinate `x^i_α`.
    pub fn depends_on_directions(&self) -> bool {
        self.sigma.depends_on(&|v| matches!(v, Var::Y { .. }))
    }
}

/// Numeric adapted derivative of `e` at `pt`.
pub fn adapted_derivative(
    ctx: &mut JetContext,
    e: &Expr,
    dir: Direction,
    pt: &JetPoint,
    params: &Params,
) -> Result<f64, GeomError> {
    let d = ctx.adapted(e, dir);
    Ok(eval(&d, pt, params)?)
}

/// Numeric σ families at one point.
#[derive(Debug, Clone)]
pub struct SigmaDerivsAt {
    pub temporal: DTensor,
    pub spatial: DTensor,
    pub vertical: DTensor,
    pub raised: DTensor,
    pub lambda: DTensor,
}

pub fn sigma_derivs_at(
    ctx: &mut JetContext,
    sigma: &Expr,
    pt: &JetPoint,
    params: &Params,
    threshold: f64,
) -> Result<SigmaDerivsAt, GeomError> {
    ctx.h.metric.checked_at(pt, params, threshold)?;
    ctx.phi.metric.checked_at(pt, params, threshold)?;
    let s = SigmaDerivs::build(ctx, sigma);
    Ok(SigmaDerivsAt {
        temporal: s.temporal.eval(pt, params)?,
        spatial: s.spatial.eval(pt, params)?,
        vertical: s.vertical.eval(pt, params)?,
        raised: s.raised.eval(pt, params)?,
        lambda: s.lambda.eval(pt, params)?,
    })
}
