//! Gravitational h-potential, Ricci blocks, scalar curvature, Einstein
//! equations and conservation laws.

use crate::balance::{BalanceLaw, LawTerm, Side};
use crate::cartan::{frame_curvature, spatial_metric, vertical_metric, CurvatureSet, SigmaSecond};
use crate::dims::Dims;
use crate::error::GeomError;
use crate::expr::{Expr, JetPoint, Params};
use crate::jetgeom::{DerivKind, Direction, JetContext, LinearConnection, SigmaDerivs};
use crate::tensor::{DTensor, Field, IndexSlot};

const T_UP: IndexSlot = IndexSlot::T_UP;
const T_LO: IndexSlot = IndexSlot::T_LO;
const S_UP: IndexSlot = IndexSlot::S_UP;
const S_LO: IndexSlot = IndexSlot::S_LO;
const V_UP: IndexSlot = IndexSlot::V_UP;
const V_LO: IndexSlot = IndexSlot::V_LO;

/// Block-diagonal jet metric `h ⊕ e^{2σ}φ ⊕ h^{αβ}e^{2σ}φ` and its inverse
/// blocks.
#[derive(Debug, Clone)]
pub struct SasakiMetric {
    pub temporal: Field,
    pub spatial: Field,
    pub vertical: Field,
    pub temporal_inv: Field,
    pub spatial_inv: Field,
    pub vertical_inv: Field,
}

impl SasakiMetric {
    pub fn build(ctx: &JetContext, sigma: &Expr) -> Self {
        let dims = ctx.dims;
        let em2s = sigma.scale(-2.0).exp();
        let spatial_inv = ctx.phi.inverse.map(|e| em2s.mul(e));
        let vertical_inv = Field::from_fn(dims, &[V_UP, V_UP], |ix| {
            let (i, a) = dims.unpair(ix[0]);
            let (j, b) = dims.unpair(ix[1]);
            ctx.h.metric.entry(a, b).mul(&em2s).mul(ctx.phi.inverse.get(&[i, j]))
        });
        SasakiMetric {
            temporal: ctx.h.metric.components().clone(),
            spatial: spatial_metric(ctx, sigma),
            vertical: vertical_metric(ctx, sigma),
            temporal_inv: ctx.h.inverse.clone(),
            spatial_inv,
            vertical_inv,
        }
    }

    /// Largest deviation of `block · inverse` from the identity over the
    /// three blocks.
    pub fn inverse_defect(&self, pt: &JetPoint, params: &Params) -> Result<f64, GeomError> {
        let mut worst: f64 = 0.0;
        for (b, inv) in [
            (&self.temporal, &self.temporal_inv),
            (&self.spatial, &self.spatial_inv),
            (&self.vertical, &self.vertical_inv),
        ] {
            let b = b.eval(pt, params)?;
            let inv = inv.eval(pt, params)?;
            let prod = DTensor::contract(&b, 1, &inv, 0)?;
            let d = prod.shape()[0];
            for r in 0..d {
                for c in 0..d {
                    let id = if r == c { 1.0 } else { 0.0 };
                    worst = worst.max((prod.get(&[r, c]) - id).abs());
                }
            }
        }
        Ok(worst)
    }
}

/// The seven Ricci blocks.
///
/// Slots: `tt` `R_{αβ}` `[T_,T_]`; `st` `R_{iβ}` `[S_,T_]`; `ss` `R_{ij}`
/// `[S_,S_]`; `vt` `P^{(α)}_{(i)β}` `[V_,T_]`; `vs` `P^{(α)}_{(i)j}`
/// `[V_,S_]`; `sv` `P^{(α)}_{i(j)}` `[S_,V_]`; `vv` `S^{(β)(γ)}_{(j)(k)}`
/// `[V_,V_]`.
#[derive(Debug, Clone)]
pub struct RicciBlocks<T = Field> {
    pub tt: T,
    pub st: T,
    pub ss: T,
    pub vt: T,
    pub vs: T,
    pub sv: T,
    pub vv: T,
}

impl<T> RicciBlocks<T> {
    pub fn named(&self) -> [(&'static str, &T); 7] {
        [
            ("R_alpha_beta", &self.tt),
            ("R_i_beta", &self.st),
            ("R_i_j", &self.ss),
            ("P_vertical_i_beta", &self.vt),
            ("P_vertical_i_j", &self.vs),
            ("P_i_vertical_j", &self.sv),
            ("S_vertical", &self.vv),
        ]
    }
}

/// Ricci blocks from the closed expressions in the σ families.
pub fn ricci_closed(ctx: &JetContext, sd: &SigmaDerivs, ss: &SigmaSecond) -> RicciBlocks {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let one_n = 1.0 - n as f64;
    let phi = ctx.phi.metric.components();
    let r = &ctx.phi.riemann;
    let rc = &ctx.phi.ricci;
    let sv = &sd.vertical;
    let st = ss.spatial_t.map(|e| e.scale(one_n));
    let ss_block = Field::from_fn(dims, &[S_LO, S_LO], |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut terms = vec![
            rc.get(&[i, j]).clone(),
            ss.hh.get(&[i, j]).scale(2.0 - n as f64),
            phi.get(&[i, j]).mul(&ss.trace).neg(),
        ];
        for m in 0..n {
            for mu in 0..p {
                let ym = Expr::y(m, mu);
                terms.push(rc.get(&[m, j]).mul(sv.get(&[dims.pair(i, mu)])).mul(&ym));
                for s in 0..n {
                    for q in 0..n {
                        terms.push(
                            phi.get(&[i, s])
                                .mul(r.get(&[s, m, j, q]))
                                .mul(sd.raised.get(&[q, mu]))
                                .mul(&ym)
                                .neg(),
                        );
                    }
                }
            }
        }
        Expr::sum(terms)
    });
    let vt = ss.vertical_t.map(|e| e.scale(one_n));
    let vs = Field::from_fn(dims, &[V_LO, S_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let j = ix[1];
        Expr::sum([
            ss.hv.get(&[i, dims.pair(j, a)]).clone(),
            ss.vh.get(ix).scale(one_n),
            phi.get(&[i, j]).mul(ss.trace_t.get(&[a])).neg(),
            sd.spatial.get(&[j]).mul(sv.get(&[dims.pair(i, a)])),
            sd.spatial.get(&[i]).mul(sv.get(&[dims.pair(j, a)])).neg(),
        ])
    });
    let sv_block = vs.permute(&[1, 0]);
    let vv = Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        let (j, b) = dims.unpair(ix[0]);
        let (k, g) = dims.unpair(ix[1]);
        let v = |a: usize, al: usize| sv.get(&[dims.pair(a, al)]);
        Expr::sum([
            ss.vv.get(ix).scale(one_n),
            ss.vv.get(&[dims.pair(j, g), dims.pair(k, b)]).clone(),
            phi.get(&[j, k]).mul(ss.trace_tt.get(&[b, g])).neg(),
            v(j, b).mul(v(k, g)),
            v(k, b).mul(v(j, g)).neg(),
        ])
    });
    RicciBlocks {
        tt: ctx.h.ricci.clone(),
        st,
        ss: ss_block,
        vt,
        vs,
        sv: sv_block,
        vv,
    }
}

/// Ricci blocks as traces `R_{AB} = R^D_{ABD}` of a curvature set.
pub fn ricci_trace(dims: Dims, c: &CurvatureSet) -> RicciBlocks {
    let (n, p) = (dims.n, dims.p);
    let tt = Field::from_fn(dims, &[T_LO, T_LO], |ix| {
        Expr::sum((0..p).map(|g| c.h.get(&[g, ix[0], ix[1], g]).clone()))
    });
    let st = Field::from_fn(dims, &[S_LO, T_LO], |ix| {
        Expr::sum((0..n).map(|k| c.r_ts.get(&[k, ix[0], ix[1], k]).clone()))
    });
    let ss = Field::from_fn(dims, &[S_LO, S_LO], |ix| {
        Expr::sum((0..n).map(|k| c.r_ss.get(&[k, ix[0], ix[1], k]).clone()))
    });
    let vt = Field::from_fn(dims, &[V_LO, T_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        Expr::sum((0..n).map(|k| c.p_t.get(&[k, i, ix[1], dims.pair(k, a)]).clone()))
    });
    let vs = Field::from_fn(dims, &[V_LO, S_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        Expr::sum((0..n).map(|k| c.p_s.get(&[k, i, ix[1], dims.pair(k, a)]).clone()))
    });
    let sv = Field::from_fn(dims, &[S_LO, V_LO], |ix| {
        Expr::sum((0..n).map(|k| c.p_s.get(&[k, ix[0], k, ix[1]]).clone())).neg()
    });
    let vv = Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        let (j, b) = dims.unpair(ix[0]);
        Expr::sum((0..n).map(|m| c.s.get(&[m, j, ix[1], dims.pair(m, b)]).clone()))
    });
    RicciBlocks {
        tt,
        st,
        ss,
        vt,
        vs,
        sv,
        vv,
    }
}

/// Ricci components with a temporal first index and a non-temporal second
/// one, `R_{αi}` `[T_,S_]` and `R_{α(i)}^{(β)}` `[T_,V_]`, from the frame
/// definition of curvature. Both vanish for a connection that preserves the
/// temporal distribution.
pub fn ricci_mixed_temporal(ctx: &mut JetContext, conn: &LinearConnection) -> (Field, Field) {
    let dims = ctx.dims;
    let p = dims.p;
    let mut ts = Vec::new();
    for i in 0..dims.n {
        let mut acc = vec![Vec::new(); p];
        for g in 0..p {
            let r = frame_curvature(ctx, conn, Direction::Temporal(g), Direction::Spatial(i), true);
            for (a, slot) in acc.iter_mut().enumerate() {
                slot.push(r[g][a].clone());
            }
        }
        ts.push(acc.into_iter().map(Expr::sum).collect::<Vec<_>>());
    }
    let mut tv = Vec::new();
    for v in 0..dims.pairs() {
        let (i, b) = dims.unpair(v);
        let mut acc = vec![Vec::new(); p];
        for g in 0..p {
            let r = frame_curvature(ctx, conn, Direction::Temporal(g), Direction::Vertical { i, a: b }, true);
            for (a, slot) in acc.iter_mut().enumerate() {
                slot.push(r[g][a].clone());
            }
        }
        tv.push(acc.into_iter().map(Expr::sum).collect::<Vec<_>>());
    }
    (
        Field::from_fn(dims, &[T_LO, S_LO], |ix| ts[ix[1]][ix[0]].clone()),
        Field::from_fn(dims, &[T_LO, V_LO], |ix| tv[ix[1]][ix[0]].clone()),
    )
}

/// Parts of the scalar curvature `Sc = H + R + S`.
#[derive(Debug, Clone)]
pub struct ScalarParts {
    pub h: Expr,
    pub r: Expr,
    pub s: Expr,
    pub sc: Expr,
}

/// Contraction of Ricci blocks with the inverse metric blocks.
pub fn scalar_trace(sasaki: &SasakiMetric, ric: &RicciBlocks) -> ScalarParts {
    let full = |inv: &Field, block: &Field| {
        let d = block.shape()[0];
        Expr::sum(
            (0..d)
                .flat_map(|a| (0..d).map(move |b| (a, b)))
                .map(|(a, b)| inv.get(&[a, b]).mul(block.get(&[a, b]))),
        )
    };
    let h = full(&sasaki.temporal_inv, &ric.tt);
    let r = full(&sasaki.spatial_inv, &ric.ss);
    let s = full(&sasaki.vertical_inv, &ric.vv);
    let sc = Expr::sum([h.clone(), r.clone(), s.clone()]);
    ScalarParts { h, r, s, sc }
}

/// `R = e^{−2σ}[r + 2(1−n)⟨σ⟩ + 2 r_{ms} σ^{sμ} x^m_μ]`,
/// `S = 2(1−n) e^{−2σ} ⟨⟨σ⟩⟩`.
pub fn scalar_closed(ctx: &JetContext, sd: &SigmaDerivs, ss: &SigmaSecond) -> ScalarParts {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let one_n = 1.0 - n as f64;
    let em2s = sd.sigma.scale(-2.0).exp();
    let mut inner = vec![ctx.phi.scalar.clone(), ss.trace.scale(2.0 * one_n)];
    for m in 0..n {
        for s in 0..n {
            for mu in 0..p {
                inner.push(
                    ctx.phi
                        .ricci
                        .get(&[m, s])
                        .mul(sd.raised.get(&[s, mu]))
                        .mul(&Expr::y(m, mu))
                        .scale(2.0),
                );
            }
        }
    }
    let h = ctx.h.scalar.clone();
    let r = em2s.mul(&Expr::sum(inner));
    let s = em2s.mul(&ss.trace2).scale(2.0 * one_n);
    let sc = Expr::sum([h.clone(), r.clone(), s.clone()]);
    ScalarParts { h, r, s, sc }
}

/// `ρ_{ij}` as it follows from the Ricci and scalar closed forms:
/// `(2−n)σ_{ij} − (2−n)⟨σ⟩φ_{ij} + [r_{mj}φ_{ip} − φ_{is}r^s_{mjp} − r_{mp}φ_{ij}]σ^{pμ}x^m_μ`.
pub fn rho(ctx: &JetContext, sd: &SigmaDerivs, ss: &SigmaSecond) -> Field {
    rho_with(ctx, sd, ss, 2.0 - ctx.dims.n as f64, [1.0, -1.0, -1.0])
}

/// `(2−n)σ_{ij} − (3−2n)⟨σ⟩φ_{ij} − [φ_{is}r^s_{mjp} + 2r_{mp}φ_{ij} − r_{mj}φ_{ip}]σ^{pμ}x^m_μ`,
/// kept for comparison only.
pub fn rho_alt(ctx: &JetContext, sd: &SigmaDerivs, ss: &SigmaSecond) -> Field {
    rho_with(ctx, sd, ss, 3.0 - 2.0 * ctx.dims.n as f64, [1.0, -1.0, -2.0])
}

fn rho_with(ctx: &JetContext, sd: &SigmaDerivs, ss: &SigmaSecond, trace_coef: f64, c: [f64; 3]) -> Field {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let phi = ctx.phi.metric.components();
    let r = &ctx.phi.riemann;
    let rc = &ctx.phi.ricci;
    Field::from_fn(dims, &[S_LO, S_LO], |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut terms = vec![
            ss.hh.get(&[i, j]).scale(2.0 - n as f64),
            ss.trace.mul(phi.get(&[i, j])).scale(-trace_coef),
        ];
        for m in 0..n {
            for q in 0..n {
                let mut bracket = vec![
                    rc.get(&[m, j]).mul(phi.get(&[i, q])).scale(c[0]),
                    rc.get(&[m, q]).mul(phi.get(&[i, j])).scale(c[2]),
                ];
                for s in 0..n {
                    bracket.push(phi.get(&[i, s]).mul(r.get(&[s, m, j, q])).scale(c[1]));
                }
                let bracket = Expr::sum(bracket);
                if bracket.is_zero() {
                    continue;
                }
                for mu in 0..p {
                    terms.push(bracket.mul(sd.raised.get(&[q, mu])).mul(&Expr::y(m, mu)));
                }
            }
        }
        Expr::sum(terms)
    })
}

/// Left sides of the Einstein equations, the stress-energy blocks they
/// determine and the consistency comparisons with the Ricci tensor.
///
/// `tilde_*` are the modified stress blocks `T̃`, `stress_*` the original
/// ones, related by `T̃_{αβ} = T_{αβ} + (R+S)/(2K) h_{αβ}` and analogues.
#[derive(Debug, Clone)]
pub struct Einstein {
    pub k: f64,
    pub lhs_tt: Field,
    pub lhs_ss: Field,
    pub lhs_ss_alt: Field,
    pub lhs_vv: Field,
    pub tilde_tt: Field,
    pub tilde_ss: Field,
    pub tilde_vv: Field,
    pub stress_tt: Field,
    pub stress_ss: Field,
    pub stress_vv: Field,
    /// `R_{AB} − (Sc/2) G_{AB} + K(T̃_{AB} − T_{AB})` for the three diagonal
    /// blocks, that is `R_{αβ} − (H/2)h_{αβ}`, `R_{ij} − (R/2)g_{ij}` and
    /// `S − (S/2)G`.
    pub geometric_tt: Field,
    pub geometric_ss: Field,
    pub geometric_vv: Field,
    /// Mixed stress blocks `T_{iβ}`, `T^{(α)}_{(i)β}`, `T^{(α)}_{i(j)}`,
    /// `T^{(α)}_{(i)j}`, each the Ricci block over `K`.
    pub stress_st: Field,
    pub stress_vt: Field,
    pub stress_sv: Field,
    pub stress_vs: Field,
    /// `T_{αi}` and `T^{(β)}_{α(i)}`, which the equations force to vanish.
    pub stress_ts: Field,
    pub stress_tv: Field,
    pub outside_hypothesis: bool,
}

pub struct EinsteinInputs<'a> {
    pub ctx: &'a JetContext,
    pub sd: &'a SigmaDerivs,
    pub ss: &'a SigmaSecond,
    pub sasaki: &'a SasakiMetric,
    pub ricci: &'a RicciBlocks,
    pub scalar: &'a ScalarParts,
    pub mixed: (&'a Field, &'a Field),
}

/// Solve mode: stress blocks defined as the geometric left sides over `K`.
pub fn einstein_solve(inp: &EinsteinInputs, k: f64) -> Result<Einstein, GeomError> {
    if k == 0.0 {
        return Err(GeomError::ZeroEinsteinConstant);
    }
    let ctx = inp.ctx;
    let dims = ctx.dims;
    let n = dims.n as f64;
    let inv_k = 1.0 / k;
    let sc = inp.scalar;
    let h = &inp.sasaki.temporal;
    let phi = ctx.phi.metric.components();
    let hh = ctx.h.scalar.scale(0.5);
    let lhs_tt = Field::from_fn(dims, &[T_LO, T_LO], |ix| {
        ctx.h.ricci.get(ix).sub(&hh.mul(h.get(ix)))
    });
    let base_ss = Field::from_fn(dims, &[S_LO, S_LO], |ix| {
        ctx.phi.ricci.get(ix).sub(&ctx.phi.scalar.scale(0.5).mul(phi.get(ix)))
    });
    let add = |a: &Field, b: &Field| Field::from_fn(dims, a.slots(), |ix| a.get(ix).add(b.get(ix)));
    let lhs_ss = add(&base_ss, &rho(ctx, inp.sd, inp.ss));
    let lhs_ss_alt = add(&base_ss, &rho_alt(ctx, inp.sd, inp.ss));
    let lhs_vv = Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let (j, b) = dims.unpair(ix[1]);
        let shift = inp.ss.trace2.scale(n - 1.0).mul(ctx.h.inverse.get(&[a, b])).mul(phi.get(&[i, j]));
        inp.ricci.vv.get(ix).add(&shift)
    });
    let over_k = |f: &Field| f.map(|e| e.scale(inv_k));
    let tilde_tt = over_k(&lhs_tt);
    let tilde_ss = over_k(&lhs_ss);
    let tilde_vv = over_k(&lhs_vv);
    let shifted = |t: &Field, c: Expr, g: &Field| {
        let c = c.scale(0.5 * inv_k);
        Field::from_fn(dims, t.slots(), |ix| t.get(ix).sub(&c.mul(g.get(ix))))
    };
    let stress_tt = shifted(&tilde_tt, sc.r.add(&sc.s), h);
    let stress_ss = shifted(&tilde_ss, sc.h.add(&sc.s), &inp.sasaki.spatial);
    let stress_vv = shifted(&tilde_vv, sc.h.add(&sc.r), &inp.sasaki.vertical);
    let geometric = |ric: &Field, part: &Expr, g: &Field| {
        let half = part.scale(0.5);
        Field::from_fn(dims, ric.slots(), |ix| ric.get(ix).sub(&half.mul(g.get(ix))))
    };
    Ok(Einstein {
        k,
        geometric_tt: geometric(&inp.ricci.tt, &sc.h, h),
        geometric_ss: geometric(&inp.ricci.ss, &sc.r, &inp.sasaki.spatial),
        geometric_vv: geometric(&inp.ricci.vv, &sc.s, &inp.sasaki.vertical),
        lhs_tt,
        lhs_ss,
        lhs_ss_alt,
        lhs_vv,
        tilde_tt,
        tilde_ss,
        tilde_vv,
        stress_tt,
        stress_ss,
        stress_vv,
        stress_st: over_k(&inp.ricci.st),
        stress_vt: over_k(&inp.ricci.vt),
        stress_sv: over_k(&inp.ricci.sv),
        stress_vs: over_k(&inp.ricci.vs),
        stress_ts: over_k(inp.mixed.0),
        stress_tv: over_k(inp.mixed.1),
        outside_hypothesis: dims.p <= 2 || dims.n <= 2,
    })
}

fn inverse_gap(d: usize) -> Option<f64> {
    if d == 2 {
        None
    } else {
        Some(1.0 / (2.0 - d as f64))
    }
}

/// Raised stress and Ricci blocks used by the conservation laws.
#[derive(Debug, Clone)]
pub struct RaisedBlocks {
    /// `T̃^α_β` `[T^,T_]`.
    pub tilde_tt: Field,
    /// `T̃^i_j` `[S^,S_]`.
    pub tilde_ss: Field,
    /// `T̃^{(i)(β)}_{(α)(j)}` `[V^(i,α),V_(j,β)]`.
    pub tilde_vv: Field,
    pub trace_t: Expr,
    pub trace_m: Expr,
    pub trace_v: Expr,
    /// `R^m_β / K` `[S^,T_]`.
    pub st: Field,
    /// `P^{(m)}_{(μ)β} / K` `[V^,T_]`.
    pub vt: Field,
    /// `P^{(m)}_{(μ)j} / K` `[V^,S_]`.
    pub vs: Field,
    /// `P^{m(β)}_{(j)} / K` `[S^,V_]`.
    pub sv: Field,
}

pub fn raised_blocks(ctx: &JetContext, sasaki: &SasakiMetric, e: &Einstein) -> RaisedBlocks {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let ginv = &sasaki.spatial_inv;
    let hinv = &sasaki.temporal_inv;
    let h = &sasaki.temporal;
    let tilde_tt = Field::from_fn(dims, &[T_UP, T_LO], |ix| {
        Expr::sum((0..p).map(|m| hinv.get(&[ix[0], m]).mul(e.tilde_tt.get(&[m, ix[1]]))))
    });
    let tilde_ss = Field::from_fn(dims, &[S_UP, S_LO], |ix| {
        Expr::sum((0..n).map(|m| ginv.get(&[ix[0], m]).mul(e.tilde_ss.get(&[m, ix[1]]))))
    });
    // T̃^{(i)(β)}_{(α)(j)} = h_{αμ} e^{−2σ} φ^{mi} T̃^{(μ)(β)}_{(m)(j)}
    let raise_vertical = |block: &Field, rest: IndexSlot| {
        Field::from_fn(dims, &[V_UP, rest], |ix| {
            let (i, a) = dims.unpair(ix[0]);
            let mut terms = Vec::new();
            for m in 0..n {
                for mu in 0..p {
                    terms.push(
                        h.get(&[a, mu])
                            .mul(ginv.get(&[m, i]))
                            .mul(block.get(&[dims.pair(m, mu), ix[1]])),
                    );
                }
            }
            Expr::sum(terms)
        })
    };
    let tilde_vv = raise_vertical(&e.tilde_vv, V_LO);
    let vt = raise_vertical(&e.stress_vt, T_LO);
    let vs = raise_vertical(&e.stress_vs, S_LO);
    let st = Field::from_fn(dims, &[S_UP, T_LO], |ix| {
        Expr::sum((0..n).map(|m| ginv.get(&[ix[0], m]).mul(e.stress_st.get(&[m, ix[1]]))))
    });
    let sv = Field::from_fn(dims, &[S_UP, V_LO], |ix| {
        Expr::sum((0..n).map(|m| ginv.get(&[ix[0], m]).mul(e.stress_sv.get(&[m, ix[1]]))))
    });
    let full = |inv: &Field, block: &Field| {
        let d = block.shape()[0];
        Expr::sum(
            (0..d)
                .flat_map(|a| (0..d).map(move |b| (a, b)))
                .map(|(a, b)| inv.get(&[a, b]).mul(block.get(&[a, b]))),
        )
    };
    RaisedBlocks {
        trace_t: full(hinv, &e.tilde_tt),
        trace_m: full(ginv, &e.tilde_ss),
        trace_v: full(&sasaki.vertical_inv, &e.tilde_vv),
        tilde_tt,
        tilde_ss,
        tilde_vv,
        st,
        vt,
        vs,
        sv,
    }
}

fn divergence(ctx: &mut JetContext, t: &Field, conn: &LinearConnection, kind: DerivKind) -> Field {
    let d = ctx.covariant(t, conn, kind);
    d.trace(0, d.rank() - 1).expect("divergence slots pair up")
}

fn scalar_gradient(ctx: &mut JetContext, s: &Expr, conn: &LinearConnection, kind: DerivKind) -> Field {
    let f = Field::scalar(ctx.dims, s.clone());
    ctx.covariant(&f, conn, kind)
}

fn scaled(f: Field, c: Option<f64>) -> Option<Field> {
    c.map(|c| f.map(|e| e.scale(c)))
}

/// The three conservation laws, with every term kept separately.
pub fn conservation(ctx: &mut JetContext, conn: &LinearConnection, rb: &RaisedBlocks) -> [BalanceLaw; 3] {
    let dims = ctx.dims;
    let (p, n) = (dims.p, dims.n);
    let c_p = inverse_gap(p);
    let c_n = inverse_gap(n);
    let c_pn = inverse_gap(p * n);
    let outside = p <= 2 || n <= 2;
    let neg = |f: Field| f.map(|e| e.neg());
    use DerivKind::{Spatial, Temporal, Vertical};

    let temporal = BalanceLaw {
        name: "temporal",
        outside_hypothesis: outside,
        terms: vec![
            LawTerm { name: "div_T_tt", side: Side::Lhs, field: Some(divergence(ctx, &rb.tilde_tt, conn, Temporal)) },
            LawTerm { name: "grad_T_M", side: Side::Lhs, field: scaled(scalar_gradient(ctx, &rb.trace_m, conn, Temporal), c_n) },
            LawTerm { name: "grad_T_v", side: Side::Lhs, field: scaled(scalar_gradient(ctx, &rb.trace_v, conn, Temporal), c_pn) },
            LawTerm { name: "div_R_st", side: Side::Rhs, field: Some(neg(divergence(ctx, &rb.st, conn, Spatial))) },
            LawTerm { name: "div_P_vt", side: Side::Rhs, field: Some(neg(divergence(ctx, &rb.vt, conn, Vertical))) },
        ],
    };
    let spatial = BalanceLaw {
        name: "spatial",
        outside_hypothesis: outside,
        terms: vec![
            LawTerm { name: "grad_T_T", side: Side::Lhs, field: scaled(scalar_gradient(ctx, &rb.trace_t, conn, Spatial), c_p) },
            LawTerm { name: "div_T_ss", side: Side::Lhs, field: Some(divergence(ctx, &rb.tilde_ss, conn, Spatial)) },
            LawTerm { name: "grad_T_v", side: Side::Lhs, field: scaled(scalar_gradient(ctx, &rb.trace_v, conn, Spatial), c_pn) },
            LawTerm { name: "div_P_vs", side: Side::Rhs, field: Some(neg(divergence(ctx, &rb.vs, conn, Vertical))) },
        ],
    };
    let vertical = BalanceLaw {
        name: "vertical",
        outside_hypothesis: outside,
        terms: vec![
            LawTerm { name: "grad_T_T", side: Side::Lhs, field: scaled(scalar_gradient(ctx, &rb.trace_t, conn, Vertical), c_p) },
            LawTerm { name: "grad_T_M", side: Side::Lhs, field: scaled(scalar_gradient(ctx, &rb.trace_m, conn, Vertical), c_n) },
            LawTerm { name: "div_T_vv", side: Side::Lhs, field: Some(divergence(ctx, &rb.tilde_vv, conn, Vertical)) },
            LawTerm { name: "div_P_sv", side: Side::Rhs, field: Some(neg(divergence(ctx, &rb.sv, conn, Spatial))) },
        ],
    };
    [temporal, spatial, vertical]
}

/// Divergences `T̃^μ_{β/μ}`, `T̃^m_{i|m}` and `T̃^{(m)(α)}_{(μ)(i)}|^{(μ)}_{(m)}`,
/// which vanish when σ does not depend on the partial directions.
pub fn conservation_simple(ctx: &mut JetContext, conn: &LinearConnection, rb: &RaisedBlocks) -> [Field; 3] {
    [
        divergence(ctx, &rb.tilde_tt, conn, DerivKind::Temporal),
        divergence(ctx, &rb.tilde_ss, conn, DerivKind::Spatial),
        divergence(ctx, &rb.tilde_vv, conn, DerivKind::Vertical),
    ]
}
