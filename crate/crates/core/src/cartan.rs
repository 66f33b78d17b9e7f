//! Cartan canonical connection, its torsion and curvature d-tensors, and
//! the second-order σ families.
//!
//! Curvature slot orders follow the written symbols, with the two
//! derivative indices last:
//!
//! | family | symbol | slots |
//! |---|---|---|
//! | `h` | `H^α_{ηβγ}` | `[T^, T_, T_, T_]` |
//! | `r_tt` | `R^l_{iβγ}` | `[S^, S_, T_, T_]` |
//! | `r_ts` | `R^l_{iβk}` | `[S^, S_, T_, S_]` |
//! | `r_ss` | `R^l_{ijk}` | `[S^, S_, S_, S_]` |
//! | `p_t` | `P^{l(γ)}_{iβ(k)}` | `[S^, S_, T_, V_(k,γ)]` |
//! | `p_s` | `P^{l(γ)}_{ij(k)}` | `[S^, S_, S_, V_(k,γ)]` |
//! | `s` | `S^{l(β)(γ)}_{i(j)(k)}` | `[S^, S_, V_(j,β), V_(k,γ)]` |
//!
//! A family `F` with last two indices `(B, C)` is `R(X_C, X_B)` acting on
//! the first lower index.

use crate::dims::Dims;
use crate::error::GeomError;
use crate::expr::{Expr, JetPoint, Params};
use crate::jetgeom::{DerivKind, Direction, JetContext, LinearConnection, SigmaDerivs};
use crate::tensor::{DTensor, Field, IndexSlot, Tensor};

const T_UP: IndexSlot = IndexSlot::T_UP;
const T_LO: IndexSlot = IndexSlot::T_LO;
const S_UP: IndexSlot = IndexSlot::S_UP;
const S_LO: IndexSlot = IndexSlot::S_LO;
const V_UP: IndexSlot = IndexSlot::V_UP;
const V_LO: IndexSlot = IndexSlot::V_LO;

pub(crate) fn delta(a: usize, b: usize) -> Expr {
    if a == b {
        Expr::one()
    } else {
        Expr::zero()
    }
}

/// `(H, G, L, C)` with `G^k_{jγ} = σ_γ δ^k_j`, `L = γ + Λ` and
/// `C^{i(γ)}_{j(k)} = σ^{(γ)}_{(k)} δ^i_j + σ^{(γ)}_{(j)} δ^i_k − φ_{jk} σ^{iγ}`.
pub fn cartan_connection(ctx: &JetContext, sd: &SigmaDerivs) -> LinearConnection {
    let dims = ctx.dims;
    let phi = ctx.phi.metric.components();
    let g = Field::from_fn(dims, &[S_UP, S_LO, T_LO], |ix| {
        delta(ix[0], ix[1]).mul(sd.temporal.get(&[ix[2]]))
    });
    let l = Field::from_fn(dims, &[S_UP, S_LO, S_LO], |ix| {
        ctx.phi.christoffel.get(ix).add(sd.lambda.get(ix))
    });
    let c = Field::from_fn(dims, &[S_UP, S_LO, V_LO], |ix| {
        let (i, j) = (ix[0], ix[1]);
        let (k, gm) = dims.unpair(ix[2]);
        Expr::sum([
            delta(i, j).mul(sd.vertical.get(&[dims.pair(k, gm)])),
            delta(i, k).mul(sd.vertical.get(&[dims.pair(j, gm)])),
            phi.get(&[j, k]).mul(sd.raised.get(&[i, gm])).neg(),
        ])
    });
    LinearConnection {
        h: ctx.h.christoffel.clone(),
        g,
        l,
        c,
    }
}

/// Torsion d-tensors of the Cartan connection.
///
/// Slots: `t_tj` `T^m_{αj}` `[S^,T_,S_]`; `p_c` `P^{m(β)}_{i(j)}` `[S^,S_,V_]`;
/// `p_vt` `P^{(m)(β)}_{(μ)α(j)}` `[V^,T_,V_]`; `p_vs` `P^{(m)(β)}_{(μ)i(j)}`
/// `[V^,S_,V_]`; `s_v` `S^{(m)(α)(β)}_{(μ)(i)(j)}` `[V^,V_,V_]`;
/// `r_tt` `R^{(m)}_{(μ)αβ}` `[V^,T_,T_]`; `r_ts` `R^{(m)}_{(μ)αj}` `[V^,T_,S_]`;
/// `r_ss` `R^{(m)}_{(μ)ij}` `[V^,S_,S_]`.
#[derive(Debug, Clone)]
pub struct TorsionSet<T = Field> {
    pub t_tj: T,
    pub p_c: T,
    pub p_vt: T,
    pub p_vs: T,
    pub s_v: T,
    pub r_tt: T,
    pub r_ts: T,
    pub r_ss: T,
}

impl<T> TorsionSet<T> {
    pub fn named(&self) -> [(&'static str, &T); 8] {
        [
            ("T_alpha_j", &self.t_tj),
            ("P_i_j_vertical", &self.p_c),
            ("P_vertical_alpha_j", &self.p_vt),
            ("P_vertical_i_j", &self.p_vs),
            ("S_vertical", &self.s_v),
            ("R_vertical_alpha_beta", &self.r_tt),
            ("R_vertical_alpha_j", &self.r_ts),
            ("R_vertical_i_j", &self.r_ss),
        ]
    }
}

impl TorsionSet<Field> {
    pub fn eval(&self, pt: &JetPoint, params: &Params) -> Result<TorsionSet<DTensor>, GeomError> {
        Ok(TorsionSet {
            t_tj: self.t_tj.eval(pt, params)?,
            p_c: self.p_c.eval(pt, params)?,
            p_vt: self.p_vt.eval(pt, params)?,
            p_vs: self.p_vs.eval(pt, params)?,
            s_v: self.s_v.eval(pt, params)?,
            r_tt: self.r_tt.eval(pt, params)?,
            r_ts: self.r_ts.eval(pt, params)?,
            r_ss: self.r_ss.eval(pt, params)?,
        })
    }
}

/// `R^{(m)}_{(μ)ij} = r^m_{kij} x^k_μ`, the form produced by `[δ_i, δ_j]`.
pub fn spatial_torsion(ctx: &JetContext) -> Field {
    let dims = ctx.dims;
    let r = &ctx.phi.riemann;
    Field::from_fn(dims, &[V_UP, S_LO, S_LO], |ix| {
        let (m, mu) = dims.unpair(ix[0]);
        Expr::sum((0..dims.n).map(|k| r.get(&[m, k, ix[1], ix[2]]).mul(&Expr::y(k, mu))))
    })
}

/// `r^m_{ijk} x^k_μ`, the spatial torsion with the index placement as
/// common alternative; kept for comparison only.
pub fn spatial_torsion_alt(ctx: &JetContext) -> Field {
    let dims = ctx.dims;
    let r = &ctx.phi.riemann;
    Field::from_fn(dims, &[V_UP, S_LO, S_LO], |ix| {
        let (m, mu) = dims.unpair(ix[0]);
        Expr::sum((0..dims.n).map(|k| r.get(&[m, ix[1], ix[2], k]).mul(&Expr::y(k, mu))))
    })
}

pub fn torsion(ctx: &JetContext, sd: &SigmaDerivs, conn: &LinearConnection) -> TorsionSet {
    let dims = ctx.dims;
    let t_tj = Field::from_fn(dims, &[S_UP, T_LO, S_LO], |ix| {
        delta(ix[0], ix[2]).mul(sd.temporal.get(&[ix[1]])).neg()
    });
    let p_c = conn.c.clone();
    let p_vt = Field::from_fn(dims, &[V_UP, T_LO, V_LO], |ix| {
        let (m, mu) = dims.unpair(ix[0]);
        let (j, b) = dims.unpair(ix[2]);
        delta(b, mu).mul(&delta(m, j)).mul(sd.temporal.get(&[ix[1]])).neg()
    });
    let p_vs = Field::from_fn(dims, &[V_UP, S_LO, V_LO], |ix| {
        let (m, mu) = dims.unpair(ix[0]);
        let (j, b) = dims.unpair(ix[2]);
        delta(b, mu).mul(sd.lambda.get(&[m, ix[1], j])).neg()
    });
    let s_v = Field::from_fn(dims, &[V_UP, V_LO, V_LO], |ix| {
        let (m, mu) = dims.unpair(ix[0]);
        let (i, a) = dims.unpair(ix[1]);
        let (j, b) = dims.unpair(ix[2]);
        let first = delta(a, mu).mul(conn.c.get(&[m, i, dims.pair(j, b)]));
        let second = delta(b, mu).mul(conn.c.get(&[m, i, dims.pair(j, a)]));
        first.sub(&second)
    });
    let r_tt = Field::from_fn(dims, &[V_UP, T_LO, T_LO], |ix| {
        let (m, mu) = dims.unpair(ix[0]);
        Expr::sum(
            (0..dims.p).map(|g| ctx.h.riemann.get(&[g, mu, ix[1], ix[2]]).mul(&Expr::y(m, g))),
        )
        .neg()
    });
    let r_ts = Field::zeros(dims, &[V_UP, T_LO, S_LO]);
    TorsionSet {
        t_tj,
        p_c,
        p_vt,
        p_vs,
        s_v,
        r_tt,
        r_ts,
        r_ss: spatial_torsion(ctx),
    }
}

/// Second-order σ families and their traces.
///
/// Slots: `phi4` `φ^{ij}_{kl}` `[S^,S^,S_,S_]`; `hh` `σ_{jk}` `[S_,S_]`;
/// `hv` `σ_{j(k)}^{(γ)}` `[S_,V_(k,γ)]`; `vh` `σ^{(β)}_{(j)k}`
/// `[V_(j,β),S_]`; `vv` `σ^{(β)(γ)}_{(j)(k)}` `[V_(j,β),V_(k,γ)]`, whose
/// quadratic part is `σ^{(γ)}_{(j)} σ^{(β)}_{(k)}`;
/// `dot_t` `⟨σ,σ⟩^β` `[T^]`; `dot_tt` `⟨σ,σ⟩^{βγ}` `[T^,T^]`;
/// `trace_t` `⟨σ⟩^α` `[T^]`; `trace_tt` `⟨σ⟩^{αβ}` `[T^,T^]`.
/// `spatial_t` is `σ_{i//β}` `[S_,T_]` and `vertical_t` is
/// `σ^{(γ)}_{(m)//β}` `[V_,T_]`, both Berwald derivatives.
#[derive(Debug, Clone)]
pub struct SigmaSecond {
    pub phi4: Field,
    pub hh: Field,
    pub hv: Field,
    pub vh: Field,
    pub vv: Field,
    pub dot: Expr,
    pub dot_t: Field,
    pub dot_tt: Field,
    pub trace: Expr,
    pub trace_t: Field,
    pub trace_tt: Field,
    pub trace2: Expr,
    pub spatial_t: Field,
    pub vertical_t: Field,
}

pub fn sigma_second(ctx: &mut JetContext, sd: &SigmaDerivs) -> SigmaSecond {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let bw = ctx.berwald();
    let phi = ctx.phi.metric.components().clone();
    let phi_inv = ctx.phi.inverse.clone();
    let h = ctx.h.metric.components().clone();
    let phi4 = Field::from_fn(dims, &[S_UP, S_UP, S_LO, S_LO], |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        phi_inv.get(&[i, j]).mul(phi.get(&[k, l])).sub(&delta(i, l).mul(&delta(j, k)))
    });
    let contract_phi = |f: &dyn Fn(usize, usize) -> Expr| {
        Expr::sum((0..n).flat_map(|r| (0..n).map(move |m| (r, m))).map(|(r, m)| {
            phi_inv.get(&[r, m]).mul(&f(r, m))
        }))
    };
    let dot = contract_phi(&|r, m| sd.spatial.get(&[r]).mul(sd.spatial.get(&[m])));
    let dot_t = Field::from_fn(dims, &[T_UP], |ix| {
        contract_phi(&|r, m| sd.spatial.get(&[r]).mul(sd.vertical.get(&[dims.pair(m, ix[0])])))
    });
    let dot_tt = Field::from_fn(dims, &[T_UP, T_UP], |ix| {
        contract_phi(&|r, m| {
            sd.vertical
                .get(&[dims.pair(r, ix[0])])
                .mul(sd.vertical.get(&[dims.pair(m, ix[1])]))
        })
    });

    let d_hh = ctx.covariant(&sd.spatial, &bw, DerivKind::Spatial);
    let d_hv = ctx.covariant(&sd.spatial, &bw, DerivKind::Vertical);
    let d_vh = ctx.covariant(&sd.vertical, &bw, DerivKind::Spatial);
    let d_vv = ctx.covariant(&sd.vertical, &bw, DerivKind::Vertical);
    let spatial_t = ctx.covariant(&sd.spatial, &bw, DerivKind::Temporal);
    let vertical_t = ctx.covariant(&sd.vertical, &bw, DerivKind::Temporal);

    let half = |e: &Expr| e.scale(0.5);
    let hh = Field::from_fn(dims, &[S_LO, S_LO], |ix| {
        let (j, k) = (ix[0], ix[1]);
        Expr::sum([
            d_hh.get(&[j, k]).clone(),
            sd.spatial.get(&[j]).mul(sd.spatial.get(&[k])).neg(),
            half(&phi.get(&[j, k]).mul(&dot)),
        ])
    });
    let hv = Field::from_fn(dims, &[S_LO, V_LO], |ix| {
        let j = ix[0];
        let (k, g) = dims.unpair(ix[1]);
        Expr::sum([
            d_hv.get(ix).clone(),
            sd.spatial.get(&[k]).mul(sd.vertical.get(&[dims.pair(j, g)])).neg(),
            half(&phi.get(&[j, k]).mul(dot_t.get(&[g]))),
        ])
    });
    let vh = Field::from_fn(dims, &[V_LO, S_LO], |ix| {
        let (j, b) = dims.unpair(ix[0]);
        let k = ix[1];
        Expr::sum([
            d_vh.get(ix).clone(),
            sd.spatial.get(&[j]).mul(sd.vertical.get(&[dims.pair(k, b)])).neg(),
            half(&phi.get(&[j, k]).mul(dot_t.get(&[b]))),
        ])
    });
    let vv = Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        let (j, b) = dims.unpair(ix[0]);
        let (k, g) = dims.unpair(ix[1]);
        Expr::sum([
            d_vv.get(ix).clone(),
            sd.vertical
                .get(&[dims.pair(j, g)])
                .mul(sd.vertical.get(&[dims.pair(k, b)]))
                .neg(),
            half(&phi.get(&[j, k]).mul(dot_tt.get(&[b, g]))),
        ])
    });
    let trace = contract_phi(&|r, s| hh.get(&[r, s]).clone());
    let trace_t = Field::from_fn(dims, &[T_UP], |ix| {
        contract_phi(&|r, s| hv.get(&[r, dims.pair(s, ix[0])]).clone())
    });
    let trace_tt = Field::from_fn(dims, &[T_UP, T_UP], |ix| {
        contract_phi(&|r, s| vv.get(&[dims.pair(r, ix[0]), dims.pair(s, ix[1])]).clone())
    });
    let trace2 = Expr::sum(
        (0..p)
            .flat_map(|a| (0..p).map(move |b| (a, b)))
            .map(|(a, b)| h.get(&[a, b]).mul(trace_tt.get(&[a, b]))),
    );
    SigmaSecond {
        phi4,
        hh,
        hv,
        vh,
        vv,
        dot,
        dot_t,
        dot_tt,
        trace,
        trace_t,
        trace_tt,
        trace2,
        spatial_t,
        vertical_t,
    }
}

/// `σ^{(β)(γ)}_{(j)(k)}` built with the uncrossed product
/// `σ^{(β)}_{(j)} σ^{(γ)}_{(k)}`; kept for comparison only.
pub fn vertical_second_alt(sd: &SigmaDerivs, ss: &SigmaSecond) -> Field {
    let dims = ss.vv.dims();
    Field::from_fn(dims, ss.vv.slots(), |ix| {
        let (j, b) = dims.unpair(ix[0]);
        let (k, g) = dims.unpair(ix[1]);
        let v = |a: usize, al: usize| sd.vertical.get(&[dims.pair(a, al)]);
        ss.vv.get(ix).add(&v(j, g).mul(v(k, b))).sub(&v(j, b).mul(v(k, g)))
    })
}

/// The seven curvature d-tensors; see the module docs for slot orders.
#[derive(Debug, Clone)]
pub struct CurvatureSet<T = Field> {
    pub h: T,
    pub r_tt: T,
    pub r_ts: T,
    pub r_ss: T,
    pub p_t: T,
    pub p_s: T,
    pub s: T,
}

impl<T> CurvatureSet<T> {
    pub fn named(&self) -> [(&'static str, &T); 7] {
        [
            ("H_eta_beta_gamma", &self.h),
            ("R_i_beta_gamma", &self.r_tt),
            ("R_i_beta_k", &self.r_ts),
            ("R_i_j_k", &self.r_ss),
            ("P_i_beta_k", &self.p_t),
            ("P_i_j_k", &self.p_s),
            ("S_i_j_k", &self.s),
        ]
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> CurvatureSet<U> {
        CurvatureSet {
            h: f(&self.h),
            r_tt: f(&self.r_tt),
            r_ts: f(&self.r_ts),
            r_ss: f(&self.r_ss),
            p_t: f(&self.p_t),
            p_s: f(&self.p_s),
            s: f(&self.s),
        }
    }
}

impl CurvatureSet<Field> {
    pub fn eval(&self, pt: &JetPoint, params: &Params) -> Result<CurvatureSet<DTensor>, GeomError> {
        let vals: Result<Vec<DTensor>, _> =
            self.named().iter().map(|(_, f)| f.eval(pt, params)).collect();
        let mut v = vals?.into_iter();
        let mut next = || v.next().expect("seven families");
        Ok(CurvatureSet {
            h: next(),
            r_tt: next(),
            r_ts: next(),
            r_ss: next(),
            p_t: next(),
            p_s: next(),
            s: next(),
        })
    }
}

/// Curvature from the raw formulas built on Berwald derivatives of Λ and C.
pub fn curvature_direct(
    ctx: &mut JetContext,
    sd: &SigmaDerivs,
    conn: &LinearConnection,
    tor: &TorsionSet,
) -> CurvatureSet {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let bw = ctx.berwald();
    let phi = ctx.phi.metric.components().clone();
    let phi_inv = ctx.phi.inverse.clone();
    let lam = &sd.lambda;
    let c = &conn.c;
    let hgam = ctx.h.christoffel.clone();

    let lam_s = ctx.covariant(lam, &bw, DerivKind::Spatial);
    let lam_v = ctx.covariant(lam, &bw, DerivKind::Vertical);
    let c_s = ctx.covariant(c, &bw, DerivKind::Spatial);
    let c_v = ctx.covariant(c, &bw, DerivKind::Vertical);
    let c_t = ctx.adapted_field(c, DerivKind::Temporal);
    let sig_s_t = ctx.covariant(&sd.spatial, &bw, DerivKind::Temporal);
    let sig_t_v = ctx.adapted_field(&sd.temporal, DerivKind::Vertical);

    let h = ctx.h.riemann.clone();
    let r_tt = Field::from_fn(dims, &[S_UP, S_LO, T_LO, T_LO], |ix| {
        let (l, i, b, g) = (ix[0], ix[1], ix[2], ix[3]);
        Expr::sum((0..n).flat_map(|m| (0..p).map(move |mu| (m, mu))).map(|(m, mu)| {
            let v = dims.pair(m, mu);
            let bracket = c.get(&[l, i, v]).sub(&delta(l, i).mul(sd.vertical.get(&[v])));
            bracket.mul(tor.r_tt.get(&[v, b, g]))
        }))
    });
    let r_ts = Field::from_fn(dims, &[S_UP, S_LO, T_LO, S_LO], |ix| {
        let (l, i, b, k) = (ix[0], ix[1], ix[2], ix[3]);
        Expr::sum((0..n).map(|m| {
            let coef = phi.get(&[i, k]).mul(phi_inv.get(&[l, m])).sub(&delta(l, k).mul(&delta(m, i)));
            coef.mul(sig_s_t.get(&[m, b]))
        }))
    });
    let r_ss = Field::from_fn(dims, &[S_UP, S_LO, S_LO, S_LO], |ix| {
        let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut terms = vec![
            ctx.phi.riemann.get(ix).clone(),
            lam_s.get(&[l, i, j, k]).clone(),
            lam_s.get(&[l, i, k, j]).neg(),
        ];
        for m in 0..n {
            terms.push(lam.get(&[m, i, j]).mul(lam.get(&[l, m, k])));
            terms.push(lam.get(&[m, i, k]).mul(lam.get(&[l, m, j])).neg());
            for mu in 0..p {
                let v = dims.pair(m, mu);
                terms.push(c.get(&[l, i, v]).mul(tor.r_ss.get(&[v, j, k])));
            }
        }
        Expr::sum(terms)
    });
    let p_t = Field::from_fn(dims, &[S_UP, S_LO, T_LO, V_LO], |ix| {
        let (l, i, b, v) = (ix[0], ix[1], ix[2], ix[3]);
        let (k, g) = dims.unpair(v);
        let mut terms = vec![
            delta(l, i).mul(sig_t_v.get(&[b, v])),
            c_t.get(&[l, i, v, b]).neg(),
        ];
        for mu in 0..p {
            terms.push(c.get(&[l, i, dims.pair(k, mu)]).mul(hgam.get(&[g, mu, b])).neg());
        }
        Expr::sum(terms)
    });
    let p_s = Field::from_fn(dims, &[S_UP, S_LO, S_LO, V_LO], |ix| {
        let (l, i, j, v) = (ix[0], ix[1], ix[2], ix[3]);
        let mut terms = vec![lam_v.get(&[l, i, j, v]).clone(), c_s.get(&[l, i, v, j]).neg()];
        for m in 0..n {
            terms.push(lam.get(&[l, j, m]).mul(c.get(&[m, i, v])).neg());
            terms.push(lam.get(&[m, i, j]).mul(c.get(&[l, m, v])));
        }
        Expr::sum(terms)
    });
    let s = Field::from_fn(dims, &[S_UP, S_LO, V_LO, V_LO], |ix| {
        let (l, i, vj, vk) = (ix[0], ix[1], ix[2], ix[3]);
        let mut terms = vec![c_v.get(&[l, i, vj, vk]).clone(), c_v.get(&[l, i, vk, vj]).neg()];
        for m in 0..n {
            terms.push(c.get(&[m, i, vj]).mul(c.get(&[l, m, vk])));
            terms.push(c.get(&[m, i, vk]).mul(c.get(&[l, m, vj])).neg());
        }
        Expr::sum(terms)
    });
    CurvatureSet {
        h,
        r_tt,
        r_ts,
        r_ss,
        p_t,
        p_s,
        s,
    }
}

/// Curvature in terms of the second-order σ families.
///
/// `r_tt` here is `+φ^{lm}_{ir} H^ε_{μβγ} σ^{(μ)}_{(m)} x^r_ε` and `p_t` is
/// `φ^{lm}_{ik} σ^{(γ)}_{(m)//β}`; see [`temporal_curvature_alt`] and
/// [`mixed_curvature_alt`] for the variants.
pub fn curvature_closed(ctx: &JetContext, sd: &SigmaDerivs, ss: &SigmaSecond) -> CurvatureSet {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let phi = ctx.phi.metric.components();
    let phi_inv = &ctx.phi.inverse;
    let r = &ctx.phi.riemann;
    let phi4 = &ss.phi4;
    let sv = &sd.vertical;

    let r_tt = temporal_curvature_alt(ctx, sd, ss).map(|e| e.neg());
    let r_ts = Field::from_fn(dims, &[S_UP, S_LO, T_LO, S_LO], |ix| {
        let (l, i, b, k) = (ix[0], ix[1], ix[2], ix[3]);
        Expr::sum((0..n).map(|m| phi4.get(&[l, m, i, k]).mul(ss.spatial_t.get(&[m, b]))))
    });
    let r_ss = Field::from_fn(dims, &[S_UP, S_LO, S_LO, S_LO], |ix| {
        let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut terms = vec![
            r.get(ix).clone(),
            ss.hh.get(&[i, k]).mul(&delta(l, j)),
            ss.hh.get(&[i, j]).mul(&delta(l, k)).neg(),
        ];
        for s in 0..n {
            let inner = phi.get(&[i, k]).mul(ss.hh.get(&[s, j])).sub(&phi.get(&[i, j]).mul(ss.hh.get(&[s, k])));
            terms.push(phi_inv.get(&[l, s]).mul(&inner));
        }
        for m in 0..n {
            for s in 0..n {
                let coef = phi4.get(&[m, l, s, i]);
                if coef.is_zero() {
                    continue;
                }
                let inner = Expr::sum((0..n).flat_map(|pp| (0..p).map(move |mu| (pp, mu))).map(
                    |(pp, mu)| {
                        r.get(&[s, pp, j, k])
                            .mul(sv.get(&[dims.pair(m, mu)]))
                            .mul(&Expr::y(pp, mu))
                    },
                ));
                terms.push(coef.mul(&inner).neg());
            }
        }
        Expr::sum(terms)
    });
    let p_t = Field::from_fn(dims, &[S_UP, S_LO, T_LO, V_LO], |ix| {
        let (l, i, b, v) = (ix[0], ix[1], ix[2], ix[3]);
        let (k, g) = dims.unpair(v);
        Expr::sum((0..n).map(|m| phi4.get(&[l, m, i, k]).mul(ss.vertical_t.get(&[dims.pair(m, g), b]))))
    });
    let p_s = Field::from_fn(dims, &[S_UP, S_LO, S_LO, V_LO], |ix| {
        let (l, i, j, v) = (ix[0], ix[1], ix[2], ix[3]);
        let (k, g) = dims.unpair(v);
        let mut terms = vec![
            ss.hv.get(&[i, v]).mul(&delta(l, j)),
            ss.vh.get(&[dims.pair(i, g), j]).mul(&delta(l, k)).neg(),
        ];
        for s in 0..n {
            let inner = phi.get(&[i, j]).mul(ss.hv.get(&[s, v])).sub(
                &phi.get(&[i, k]).mul(ss.vh.get(&[dims.pair(s, g), j])),
            );
            terms.push(phi_inv.get(&[l, s]).mul(&inner).neg());
        }
        let tail = sd.spatial_raised.get(&[l]).mul(sv.get(&[dims.pair(i, g)])).sub(
            &sd.spatial.get(&[i]).mul(sd.raised.get(&[l, g])),
        );
        terms.push(phi.get(&[j, k]).mul(&tail));
        Expr::sum(terms)
    });
    let s = Field::from_fn(dims, &[S_UP, S_LO, V_LO, V_LO], |ix| {
        let (l, i, vj, vk) = (ix[0], ix[1], ix[2], ix[3]);
        let (j, b) = dims.unpair(vj);
        let (k, g) = dims.unpair(vk);
        let vv = |a: usize, al: usize, c: usize, ga: usize| {
            ss.vv.get(&[dims.pair(a, al), dims.pair(c, ga)]).clone()
        };
        let mut terms = vec![
            vv(i, b, k, g).mul(&delta(l, j)),
            vv(i, g, j, b).mul(&delta(l, k)).neg(),
        ];
        for s in 0..n {
            let inner = phi.get(&[i, j]).mul(&vv(s, b, k, g)).sub(&phi.get(&[i, k]).mul(&vv(s, g, j, b)));
            terms.push(phi_inv.get(&[l, s]).mul(&inner).neg());
        }
        let tail = sd.raised.get(&[l, b]).mul(sv.get(&[dims.pair(i, g)])).sub(
            &sd.raised.get(&[l, g]).mul(sv.get(&[dims.pair(i, b)])),
        );
        terms.push(phi.get(&[j, k]).mul(&tail));
        Expr::sum(terms)
    });
    CurvatureSet {
        h: ctx.h.riemann.clone(),
        r_tt,
        r_ts,
        r_ss,
        p_t,
        p_s,
        s,
    }
}

/// `φ^{lm}_{ik} σ^{(γ)}_{(m)//β} + σ_β σ^{(γ)}_{(k)} δ^l_i`, the mixed
/// family with an extra quadratic term; kept for comparison only.
pub fn mixed_curvature_alt(sd: &SigmaDerivs, closed: &CurvatureSet) -> Field {
    Field::from_fn(closed.p_t.dims(), closed.p_t.slots(), |ix| {
        let (l, i, b, v) = (ix[0], ix[1], ix[2], ix[3]);
        closed.p_t.get(ix).add(&delta(l, i).mul(sd.temporal.get(&[b])).mul(sd.vertical.get(&[v])))
    })
}

/// `−φ^{lm}_{ir} H^ε_{μβγ} σ^{(μ)}_{(m)} x^r_ε`.
pub fn temporal_curvature_alt(ctx: &JetContext, sd: &SigmaDerivs, ss: &SigmaSecond) -> Field {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    Field::from_fn(dims, &[S_UP, S_LO, T_LO, T_LO], |ix| {
        let (l, i, b, g) = (ix[0], ix[1], ix[2], ix[3]);
        let mut terms = Vec::new();
        for m in 0..n {
            for r in 0..n {
                let coef = ss.phi4.get(&[l, m, i, r]);
                if coef.is_zero() {
                    continue;
                }
                for e in 0..p {
                    for mu in 0..p {
                        let hcurv = ctx.h.riemann.get(&[e, mu, b, g]);
                        if hcurv.is_zero() {
                            continue;
                        }
                        terms.push(
                            coef.mul(hcurv)
                                .mul(sd.vertical.get(&[dims.pair(m, mu)]))
                                .mul(&Expr::y(r, e)),
                        );
                    }
                }
            }
        }
        Expr::sum(terms).neg()
    })
}

/// Vertical components `[X, Y]^{(m,μ)}` of the bracket of two adapted frame
/// vectors. Horizontal components always vanish.
pub fn frame_bracket(ctx: &mut JetContext, x: Direction, y: Direction) -> Vec<Expr> {
    let dims = ctx.dims;
    let comps = |ctx: &JetContext, d: Direction, v: usize| -> Expr {
        match d {
            Direction::Temporal(b) => ctx.nonlinear.m.get(&[v, b]).neg(),
            Direction::Spatial(k) => ctx.nonlinear.n.get(&[v, k]).neg(),
            Direction::Vertical { .. } => Expr::zero(),
        }
    };
    (0..dims.pairs())
        .map(|v| {
            let yv = comps(ctx, y, v);
            let xv = comps(ctx, x, v);
            let a = ctx.adapted(&yv, x);
            let b = ctx.adapted(&xv, y);
            a.sub(&b)
        })
        .collect()
}

/// Connection one-form on spatial frame vectors: `∇_X δ_i = ω(X)^l_i δ_l`,
/// returned as `[l][i]`.
fn omega_spatial(conn: &LinearConnection, dims: Dims, x: Direction) -> Vec<Vec<Expr>> {
    let n = dims.n;
    (0..n)
        .map(|l| {
            (0..n)
                .map(|i| match x {
                    Direction::Temporal(b) => conn.g.get(&[l, i, b]).clone(),
                    Direction::Spatial(k) => conn.l.get(&[l, i, k]).clone(),
                    Direction::Vertical { i: k, a: g } => conn.c.get(&[l, i, dims.pair(k, g)]).clone(),
                })
                .collect()
        })
        .collect()
}

fn omega_temporal(conn: &LinearConnection, dims: Dims, x: Direction) -> Vec<Vec<Expr>> {
    let p = dims.p;
    (0..p)
        .map(|a| {
            (0..p)
                .map(|e| match x {
                    Direction::Temporal(b) => conn.h.get(&[a, e, b]).clone(),
                    _ => Expr::zero(),
                })
                .collect()
        })
        .collect()
}

/// `R(X, Y)` on spatial frame vectors, from
/// `X ω(Y) − Y ω(X) + ω(Y)ω(X) − ω(X)ω(Y) − ω([X, Y])`; returns `[l][i]`.
/// With `temporal` set, the same on temporal frame vectors.
pub fn frame_curvature(
    ctx: &mut JetContext,
    conn: &LinearConnection,
    x: Direction,
    y: Direction,
    temporal: bool,
) -> Vec<Vec<Expr>> {
    let dims = ctx.dims;
    let omega = |d: Direction| {
        if temporal {
            omega_temporal(conn, dims, d)
        } else {
            omega_spatial(conn, dims, d)
        }
    };
    let wx = omega(x);
    let wy = omega(y);
    let bracket = frame_bracket(ctx, x, y);
    let size = wx.len();
    let mut out = vec![vec![Expr::zero(); size]; size];
    for l in 0..size {
        for i in 0..size {
            let mut terms = vec![ctx.adapted(&wy[l][i], x), ctx.adapted(&wx[l][i], y).neg()];
            for m in 0..size {
                terms.push(wy[m][i].mul(&wx[l][m]));
                terms.push(wx[m][i].mul(&wy[l][m]).neg());
            }
            for (v, coef) in bracket.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let (k, g) = dims.unpair(v);
                let wv = omega(Direction::Vertical { i: k, a: g });
                terms.push(coef.mul(&wv[l][i]).neg());
            }
            out[l][i] = Expr::sum(terms);
        }
    }
    out
}

/// All seven families from the frame definition of curvature.
pub fn curvature_frame(ctx: &mut JetContext, conn: &LinearConnection) -> CurvatureSet {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let tdir = Direction::Temporal;
    let sdir = Direction::Spatial;
    let vdir = |v: usize| {
        let (i, a) = dims.unpair(v);
        Direction::Vertical { i, a }
    };
    let mut family = |slots: &[IndexSlot],
                      b_range: usize,
                      c_range: usize,
                      bd: &dyn Fn(usize) -> Direction,
                      cd: &dyn Fn(usize) -> Direction,
                      temporal: bool| {
        let mut cache = Vec::with_capacity(b_range * c_range);
        for b in 0..b_range {
            for c in 0..c_range {
                cache.push(frame_curvature(ctx, conn, cd(c), bd(b), temporal));
            }
        }
        Tensor::from_fn(dims, slots, |ix| cache[ix[2] * c_range + ix[3]][ix[0]][ix[1]].clone())
    };
    CurvatureSet {
        h: family(&[T_UP, T_LO, T_LO, T_LO], p, p, &tdir, &tdir, true),
        r_tt: family(&[S_UP, S_LO, T_LO, T_LO], p, p, &tdir, &tdir, false),
        r_ts: family(&[S_UP, S_LO, T_LO, S_LO], p, n, &tdir, &sdir, false),
        r_ss: family(&[S_UP, S_LO, S_LO, S_LO], n, n, &sdir, &sdir, false),
        p_t: family(&[S_UP, S_LO, T_LO, V_LO], p, n * p, &tdir, &vdir, false),
        p_s: family(&[S_UP, S_LO, S_LO, V_LO], n, n * p, &sdir, &vdir, false),
        s: family(&[S_UP, S_LO, V_LO, V_LO], n * p, n * p, &vdir, &vdir, false),
    }
}

/// Residual fields of the three Ricci identities:
/// `σ_{jk} − σ_{kj} + r^m_{ljk} σ^{(μ)}_{(m)} x^l_μ`,
/// `σ_{i(j)}^{(β)} − σ^{(β)}_{(j)i}` and
/// `σ^{(α)(β)}_{(i)(j)} − σ^{(β)(α)}_{(j)(i)}`.
pub fn ricci_identities(ctx: &JetContext, sd: &SigmaDerivs, ss: &SigmaSecond) -> [Field; 3] {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let r = &ctx.phi.riemann;
    let first = Field::from_fn(dims, &[S_LO, S_LO], |ix| {
        let (j, k) = (ix[0], ix[1]);
        let mut terms = vec![ss.hh.get(&[j, k]).clone(), ss.hh.get(&[k, j]).neg()];
        for m in 0..n {
            for l in 0..n {
                for mu in 0..p {
                    terms.push(
                        r.get(&[m, l, j, k])
                            .mul(sd.vertical.get(&[dims.pair(m, mu)]))
                            .mul(&Expr::y(l, mu)),
                    );
                }
            }
        }
        Expr::sum(terms)
    });
    let second = Field::from_fn(dims, &[S_LO, V_LO], |ix| {
        ss.hv.get(ix).sub(ss.vh.get(&[ix[1], ix[0]]))
    });
    let third = Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        ss.vv.get(ix).sub(ss.vv.get(&[ix[1], ix[0]]))
    });
    [first, second, third]
}

/// Cartan covariant derivatives of `h`, `g = e^{2σ} φ` and the vertical
/// metric `G^{(α)(β)}_{(i)(j)}` in all three kinds (nine fields, expected 0).
pub fn metricity(
    ctx: &mut JetContext,
    sd: &SigmaDerivs,
    conn: &LinearConnection,
) -> Vec<(String, Field)> {
    let g = spatial_metric(ctx, &sd.sigma);
    let gv = vertical_metric(ctx, &sd.sigma);
    let h = ctx.h.metric.components().clone();
    let mut out = Vec::new();
    for (name, f) in [("h", &h), ("g", &g), ("G_vertical", &gv)] {
        for kind in DerivKind::ALL {
            out.push((format!("{}/{}", name, kind.name()), ctx.covariant(f, conn, kind)));
        }
    }
    out
}

/// `e^{2σ} φ_{ij}`, slots `[S_, S_]`.
pub fn spatial_metric(ctx: &JetContext, sigma: &Expr) -> Field {
    let e2s = sigma.scale(2.0).exp();
    ctx.phi.metric.components().map(|e| e2s.mul(e))
}

/// `h^{αβ} e^{2σ} φ_{ij}`, slots `[V_(i,α), V_(j,β)]`.
pub fn vertical_metric(ctx: &JetContext, sigma: &Expr) -> Field {
    let dims = ctx.dims;
    let e2s = sigma.scale(2.0).exp();
    Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let (j, b) = dims.unpair(ix[1]);
        ctx.h.inverse.get(&[a, b]).mul(&e2s).mul(ctx.phi.metric.entry(i, j))
    })
}

/// Berwald covariant derivatives of `h`, `φ` and `g = e^{2σ} φ` in all three
/// kinds, as `(name, derivative, expected)`. The first six are expected to
/// vanish; `g` picks up `2 σ_• g`.
pub fn berwald_metricity(ctx: &mut JetContext, sd: &SigmaDerivs) -> Vec<(String, Field, Field)> {
    let dims = ctx.dims;
    let bw = ctx.berwald();
    let g = spatial_metric(ctx, &sd.sigma);
    let h = ctx.h.metric.components().clone();
    let phi = ctx.phi.metric.components().clone();
    let mut out = Vec::new();
    for (name, f) in [("h", &h), ("phi", &phi)] {
        for kind in DerivKind::ALL {
            let d = ctx.covariant(f, &bw, kind);
            let zero = Field::zeros(dims, d.slots());
            out.push((format!("{}/{}", name, kind.name()), d, zero));
        }
    }
    for kind in DerivKind::ALL {
        let d = ctx.covariant(&g, &bw, kind);
        let grad = match kind {
            DerivKind::Temporal => &sd.temporal,
            DerivKind::Spatial => &sd.spatial,
            DerivKind::Vertical => &sd.vertical,
        };
        let expected = Field::from_fn(dims, d.slots(), |ix| g.get(&ix[..2]).mul(grad.get(&ix[2..])).scale(2.0));
        out.push((format!("g/{}", kind.name()), d, expected));
    }
    out
}
