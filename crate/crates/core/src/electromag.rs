//! Liouville d-tensor, metrical deflection d-tensors, the electromagnetic
//! 2-form and the Maxwell equations.
//!
//! Slots: `x^{(α)}_{(i)}` `[V_(i,α)]`; `D̄^{(α)}_{(i)β}` `[V_,T_]`;
//! `D^{(α)}_{(i)j}` `[V_,S_]`; `d^{(α)(β)}_{(i)(j)}` `[V_,V_]`;
//! `F^{(α)}_{(i)j}` `[V_,S_]`; `f^{(α)(β)}_{(i)(j)}` `[V_,V_]`.

use crate::balance::{BalanceLaw, LawTerm, Side};
use crate::error::GeomError;
use crate::cartan::vertical_metric;
use crate::expr::Expr;
use crate::jetgeom::{DerivKind, JetContext, LinearConnection, SigmaDerivs};
use crate::tensor::{Field, IndexSlot};

const T_LO: IndexSlot = IndexSlot::T_LO;
const S_LO: IndexSlot = IndexSlot::S_LO;
const V_LO: IndexSlot = IndexSlot::V_LO;

/// `x^{(α)}_{(i)} = e^{2σ} h^{αμ} φ_{im} x^m_μ`.
pub fn liouville_lowered(ctx: &JetContext, sigma: &Expr) -> Field {
    let dims = ctx.dims;
    let e2s = sigma.scale(2.0).exp();
    Field::from_fn(dims, &[V_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let mut terms = Vec::new();
        for mu in 0..dims.p {
            for m in 0..dims.n {
                terms.push(ctx.h.inverse.get(&[a, mu]).mul(ctx.phi.metric.entry(i, m)).mul(&Expr::y(m, mu)));
            }
        }
        e2s.mul(&Expr::sum(terms))
    })
}

/// `G^{(α)(μ)}_{(i)(m)} x^m_μ` contracted from the vertical metric block.
pub fn liouville_from_metric(ctx: &JetContext, sigma: &Expr) -> Field {
    let dims = ctx.dims;
    let g = vertical_metric(ctx, sigma);
    Field::from_fn(dims, &[V_LO], |ix| {
        Expr::sum((0..dims.pairs()).map(|v| {
            let (m, mu) = dims.unpair(v);
            g.get(&[ix[0], v]).mul(&Expr::y(m, mu))
        }))
    })
}

#[derive(Debug, Clone)]
pub struct Deflection {
    pub temporal: Field,
    pub spatial: Field,
    pub vertical: Field,
}

/// Cartan covariant derivatives of the lowered Liouville d-tensor.
pub fn deflection_covariant(ctx: &mut JetContext, conn: &LinearConnection, x: &Field) -> Deflection {
    Deflection {
        temporal: ctx.covariant(x, conn, DerivKind::Temporal),
        spatial: ctx.covariant(x, conn, DerivKind::Spatial),
        vertical: ctx.covariant(x, conn, DerivKind::Vertical),
    }
}

/// Closed forms `D̄ = x_{(i)} σ_β`, `D = σ_j x_{(i)} − σ_i x_{(j)} + φ_{ij} σ^m x_{(m)}`
/// and `d = e^{2σ}[h^{αβ}φ_{ij} + h^{αμ}(σ^{(β)}_{(j)}φ_{im} − σ^{(β)}_{(i)}φ_{jm} + σ^{(β)}_{(m)}φ_{ij})x^m_μ]`.
pub fn deflection_closed(ctx: &JetContext, sd: &SigmaDerivs, x: &Field) -> Deflection {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    let phi = ctx.phi.metric.components();
    let xv = |i: usize, a: usize| x.get(&[dims.pair(i, a)]).clone();
    let sigma_dot_x = |a: usize| {
        Expr::sum((0..n).map(|m| sd.spatial_raised.get(&[m]).mul(&xv(m, a))))
    };
    let temporal = Field::from_fn(dims, &[V_LO, T_LO], |ix| x.get(&[ix[0]]).mul(sd.temporal.get(&[ix[1]])));
    let spatial = Field::from_fn(dims, &[V_LO, S_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let j = ix[1];
        Expr::sum([
            sd.spatial.get(&[j]).mul(&xv(i, a)),
            sd.spatial.get(&[i]).mul(&xv(j, a)).neg(),
            phi.get(&[i, j]).mul(&sigma_dot_x(a)),
        ])
    });
    let e2s = sd.sigma.scale(2.0).exp();
    let vertical = Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let (j, b) = dims.unpair(ix[1]);
        let sv = |k: usize| sd.vertical.get(&[dims.pair(k, b)]);
        let mut terms = vec![ctx.h.inverse.get(&[a, b]).mul(phi.get(&[i, j]))];
        for mu in 0..p {
            for m in 0..n {
                let bracket = Expr::sum([
                    sv(j).mul(phi.get(&[i, m])),
                    sv(i).mul(phi.get(&[j, m])).neg(),
                    sv(m).mul(phi.get(&[i, j])),
                ]);
                terms.push(ctx.h.inverse.get(&[a, mu]).mul(&bracket).mul(&Expr::y(m, mu)));
            }
        }
        e2s.mul(&Expr::sum(terms))
    });
    Deflection {
        temporal,
        spatial,
        vertical,
    }
}

/// `−e^{2σ} h^{αμ}[σ_j φ_{im} − σ_i φ_{jm} + σ_m φ_{ij}] x^m_μ`, the spatial
/// deflection with the opposite overall sign; kept for comparison only.
pub fn spatial_deflection_alt(closed: &Deflection) -> Field {
    closed.spatial.map(|e| e.neg())
}

/// Residuals of `D̄ − x_{(m)} T^m_{βi} − 2 x_{(i)} σ_β` and
/// `d + x_{(m)} C^{m(β)}_{i(j)} − e^{2σ}h^{αβ}φ_{ij} − 2 x_{(i)} σ^{(β)}_{(j)}`.
pub fn deflection_identities(
    ctx: &JetContext,
    sd: &SigmaDerivs,
    conn: &LinearConnection,
    torsion_tj: &Field,
    x: &Field,
    def: &Deflection,
) -> [Field; 2] {
    let dims = ctx.dims;
    let n = dims.n;
    let g = vertical_metric(ctx, &sd.sigma);
    let first = Field::from_fn(dims, &[V_LO, T_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let b = ix[1];
        let mut terms = vec![def.temporal.get(ix).clone()];
        for m in 0..n {
            terms.push(x.get(&[dims.pair(m, a)]).mul(torsion_tj.get(&[m, b, i])).neg());
        }
        terms.push(x.get(&[ix[0]]).mul(sd.temporal.get(&[b])).scale(-2.0));
        Expr::sum(terms)
    });
    let second = Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let mut terms = vec![def.vertical.get(ix).clone()];
        for m in 0..n {
            terms.push(x.get(&[dims.pair(m, a)]).mul(conn.c.get(&[m, i, ix[1]])));
        }
        // g already carries h^{αβ} e^{2σ} φ_{ij} with the same slot layout
        terms.push(g.get(ix).neg());
        terms.push(x.get(&[ix[0]]).mul(sd.vertical.get(&[ix[1]])).scale(-2.0));
        Expr::sum(terms)
    });
    [first, second]
}

/// `F = ½[D_{(i)j} − D_{(j)i}]` and `f = ½[d_{(i)(j)} − d_{(j)(i)}]`, the swap
/// acting on Latin indices only.
pub fn em_from_deflection(def: &Deflection) -> (Field, Field) {
    let big_f = def
        .spatial
        .split_pair(0)
        .and_then(|t| t.antisymmetrize_pair(0, 2))
        .and_then(|t| t.merge_pair(0))
        .expect("spatial deflection has a leading pair");
    let small_f = def
        .vertical
        .split_pair(0)
        .and_then(|t| t.split_pair(2))
        .and_then(|t| t.antisymmetrize_pair(0, 2))
        .and_then(|t| t.merge_pair(2))
        .and_then(|t| t.merge_pair(0))
        .expect("vertical deflection has two pairs");
    (big_f, small_f)
}

/// `F = σ_j x_{(i)} − σ_i x_{(j)}` and `f = σ^{(β)}_{(j)} x_{(i)} − σ^{(β)}_{(i)} x_{(j)}`.
pub fn em_closed(ctx: &JetContext, sd: &SigmaDerivs, x: &Field) -> (Field, Field) {
    let dims = ctx.dims;
    let xv = |i: usize, a: usize| x.get(&[dims.pair(i, a)]).clone();
    let big_f = Field::from_fn(dims, &[V_LO, S_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let j = ix[1];
        sd.spatial.get(&[j]).mul(&xv(i, a)).sub(&sd.spatial.get(&[i]).mul(&xv(j, a)))
    });
    let small_f = Field::from_fn(dims, &[V_LO, V_LO], |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let (j, b) = dims.unpair(ix[1]);
        let sv = |k: usize| sd.vertical.get(&[dims.pair(k, b)]);
        sv(j).mul(&xv(i, a)).sub(&sv(i).mul(&xv(j, a)))
    });
    (big_f, small_f)
}

/// `e^{2σ} h^{αμ}[φ_{jm}σ_i − φ_{im}σ_j] x^m_μ`, the opposite sign of `F`;
/// kept for comparison only.
pub fn em_spatial_alt(big_f: &Field) -> Field {
    big_f.map(|e| e.neg())
}

/// Components of the five Maxwell equations, each kept term by term.
///
/// Cyclic sums run over the Latin indices with Greek indices attached to
/// their slots held fixed. `eq5_pairs` is the variant of the last equation
/// that cycles whole vertical pairs.
#[derive(Debug, Clone)]
pub struct Maxwell {
    pub eq1: BalanceLaw,
    pub eq1_amended: BalanceLaw,
    pub eq2: BalanceLaw,
    pub eq2_amended: BalanceLaw,
    pub eq3: BalanceLaw,
    pub eq4: BalanceLaw,
    pub eq5: BalanceLaw,
    pub eq5_pairs: BalanceLaw,
}

/// The three cyclic placements of `t` over slots `s`, each passed through
/// `tidy`, as separate terms named `names`.
fn cyclic_parts(
    t: &Field,
    s: [usize; 3],
    tidy: impl Fn(Field) -> Result<Field, GeomError>,
    names: [&'static str; 3],
    side: Side,
) -> Vec<LawTerm> {
    let parts = t.cyclic_terms(s[0], s[1], s[2]).expect("cyclic slots share a kind");
    parts
        .into_iter()
        .zip(names)
        .map(|(f, name)| {
            let field = Some(tidy(f).expect("layout restores"));
            LawTerm { name, side, field }
        })
        .collect()
}

pub fn maxwell(
    ctx: &mut JetContext,
    sd: &SigmaDerivs,
    conn: &LinearConnection,
    x: &Field,
    big_f: &Field,
    small_f: &Field,
) -> Maxwell {
    let dims = ctx.dims;
    let (n, p) = (dims.n, dims.p);
    use DerivKind::{Spatial, Temporal, Vertical};
    let law = |name, terms| BalanceLaw { name, terms, outside_hypothesis: false };

    // eq1: F_{(i)k/β} = F_{(i)k} σ_β + x_{(i)} σ_{β|k} − x_{(k)} σ_{β|i}
    let df_t = ctx.covariant(big_f, conn, Temporal);
    let dsig_t = ctx.covariant(&sd.temporal, conn, Spatial);
    let slots1 = [V_LO, S_LO, T_LO];
    let f_sigma = Field::from_fn(dims, &slots1, |ix| big_f.get(&[ix[0], ix[1]]).mul(sd.temporal.get(&[ix[2]])));
    let x_dsig_k = Field::from_fn(dims, &slots1, |ix| x.get(&[ix[0]]).mul(dsig_t.get(&[ix[2], ix[1]])));
    let x_dsig_i = Field::from_fn(dims, &slots1, |ix| {
        let (i, a) = dims.unpair(ix[0]);
        x.get(&[dims.pair(ix[1], a)]).mul(dsig_t.get(&[ix[2], i])).neg()
    });
    let eq1 = law(
        "maxwell_1",
        vec![
            LawTerm::lhs("F_temporal_derivative", df_t.clone()),
            LawTerm::rhs("F_sigma_beta", f_sigma),
            LawTerm::rhs("x_i_sigma_beta_k", x_dsig_k.clone()),
            LawTerm::rhs("x_k_sigma_beta_i", x_dsig_i.clone()),
        ],
    );
    let eq1_amended = law(
        "maxwell_1_amended",
        vec![
            LawTerm::lhs("F_temporal_derivative", df_t),
            LawTerm::rhs("x_i_sigma_beta_k", x_dsig_k),
            LawTerm::rhs("x_k_sigma_beta_i", x_dsig_i),
        ],
    );

    // eq2: f_{(i)(k)/β} = 2 f σ_β + x_{(i)} σ^{(γ)}_{(k)/β} − x_{(k)} σ^{(γ)}_{(i)/β}
    let dsf_t = ctx.covariant(small_f, conn, Temporal);
    let dsv_t = ctx.covariant(&sd.vertical, conn, Temporal);
    let slots2 = [V_LO, V_LO, T_LO];
    let two_f_sigma = Field::from_fn(dims, &slots2, |ix| {
        small_f.get(&[ix[0], ix[1]]).mul(sd.temporal.get(&[ix[2]])).scale(2.0)
    });
    let x_dsv_k = Field::from_fn(dims, &slots2, |ix| x.get(&[ix[0]]).mul(dsv_t.get(&[ix[1], ix[2]])));
    let x_dsv_i = Field::from_fn(dims, &slots2, |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let (k, g) = dims.unpair(ix[1]);
        x.get(&[dims.pair(k, a)]).mul(dsv_t.get(&[dims.pair(i, g), ix[2]])).neg()
    });
    let eq2 = law(
        "maxwell_2",
        vec![
            LawTerm::lhs("f_temporal_derivative", dsf_t.clone()),
            LawTerm::rhs("two_f_sigma_beta", two_f_sigma.clone()),
            LawTerm::rhs("x_i_sigma_k_beta", x_dsv_k.clone()),
            LawTerm::rhs("x_k_sigma_i_beta", x_dsv_i.clone()),
        ],
    );
    let eq2_amended = law(
        "maxwell_2_amended",
        vec![
            LawTerm::lhs("f_temporal_derivative", dsf_t),
            LawTerm::rhs("f_sigma_beta", two_f_sigma.scaled(0.5)),
            LawTerm::rhs("x_i_sigma_k_beta", x_dsv_k),
            LawTerm::rhs("x_k_sigma_i_beta", x_dsv_i),
        ],
    );

    // eq3: Σ F_{(i)j|k} = −Σ x_{(i)} r^s_{mjk} σ^{(μ)}_{(s)} x^m_μ
    let df_s = ctx.covariant(big_f, conn, Spatial);
    let unsplit = |t: Field| t.merge_pair(0);
    let lhs3 = cyclic_parts(
        &df_s.split_pair(0).expect("F has a leading pair"),
        [0, 2, 3],
        unsplit,
        ["F_spatial_derivative_ijk", "F_spatial_derivative_jki", "F_spatial_derivative_kij"],
        Side::Lhs,
    );
    let r = &ctx.phi.riemann;
    let torsion_sigma = Field::from_fn(dims, &[S_LO, S_LO], |ix| {
        let mut terms = Vec::new();
        for s in 0..n {
            for m in 0..n {
                for mu in 0..p {
                    terms.push(
                        r.get(&[s, m, ix[0], ix[1]])
                            .mul(sd.vertical.get(&[dims.pair(s, mu)]))
                            .mul(&Expr::y(m, mu)),
                    );
                }
            }
        }
        Expr::sum(terms)
    });
    let rhs3 = Field::from_fn(dims, &[V_LO, S_LO, S_LO], |ix| {
        x.get(&[ix[0]]).mul(torsion_sigma.get(&[ix[1], ix[2]])).neg()
    })
    .split_pair(0)
    .expect("leading pair");
    let rhs3 = cyclic_parts(
        &rhs3,
        [0, 2, 3],
        unsplit,
        ["x_curvature_sigma_ijk", "x_curvature_sigma_jki", "x_curvature_sigma_kij"],
        Side::Rhs,
    );
    let eq3 = law("maxwell_3", lhs3.into_iter().chain(rhs3).collect());

    // eq4: Σ {F_{(i)j}|^{(γ)}_{(k)} + f_{(i)(j)|k}} = 0
    let df_v = ctx
        .covariant(big_f, conn, Vertical)
        .split_pair(2)
        .and_then(|t| t.split_pair(0))
        .expect("F has a leading pair");
    // [i, α, j, k, γ]
    let dsf_s = ctx
        .covariant(small_f, conn, Spatial)
        .split_pair(1)
        .and_then(|t| t.split_pair(0))
        .expect("f has two pairs")
        .permute(&[0, 1, 2, 4, 3]);
    let unsplit4 = |t: Field| t.merge_pair(3).and_then(|t| t.merge_pair(0));
    let mut terms4 = cyclic_parts(
        &df_v,
        [0, 2, 3],
        unsplit4,
        ["F_vertical_derivative_ijk", "F_vertical_derivative_jki", "F_vertical_derivative_kij"],
        Side::Lhs,
    );
    terms4.extend(cyclic_parts(
        &dsf_s,
        [0, 2, 3],
        unsplit4,
        ["f_spatial_derivative_ijk", "f_spatial_derivative_jki", "f_spatial_derivative_kij"],
        Side::Lhs,
    ));
    let eq4 = law("maxwell_4", terms4);

    // eq5: Σ f_{(i)(j)}|^{(γ)}_{(k)} = 0
    let dsf_v = ctx.covariant(small_f, conn, Vertical);
    let split5 = dsf_v
        .split_pair(2)
        .and_then(|t| t.split_pair(1))
        .and_then(|t| t.split_pair(0))
        .expect("three pairs");
    let names5 = ["f_vertical_derivative_ijk", "f_vertical_derivative_jki", "f_vertical_derivative_kij"];
    let lhs5 = cyclic_parts(
        &split5,
        [0, 2, 4],
        |t| t.merge_pair(4).and_then(|t| t.merge_pair(2)).and_then(|t| t.merge_pair(0)),
        names5,
        Side::Lhs,
    );
    let eq5 = law("maxwell_5", lhs5);
    let eq5_pairs = law("maxwell_5_pair_cycle", cyclic_parts(&dsf_v, [0, 1, 2], Ok, names5, Side::Lhs));
    Maxwell {
        eq1,
        eq1_amended,
        eq2,
        eq2_amended,
        eq3,
        eq4,
        eq5,
        eq5_pairs,
    }
}

/// The reduced system for σ = σ(x): the first equation, `Σ F_{(i)j|k} = 0`
/// and `Σ F_{(i)j}|^{(γ)}_{(k)} = 0`.
pub fn maxwell_reduced(m: &Maxwell, ctx: &mut JetContext, conn: &LinearConnection, big_f: &Field) -> [BalanceLaw; 3] {
    let law = |name, terms| BalanceLaw { name, terms, outside_hypothesis: false };
    let eq3 = law(
        "maxwell_reduced_2",
        m.eq3.terms.iter().filter(|t| t.side == Side::Lhs).cloned().collect(),
    );
    let df_v = ctx
        .covariant(big_f, conn, DerivKind::Vertical)
        .split_pair(2)
        .and_then(|t| t.split_pair(0))
        .expect("F has a leading pair");
    let eq4 = law(
        "maxwell_reduced_3",
        cyclic_parts(
            &df_v,
            [0, 2, 3],
            |t| t.merge_pair(3).and_then(|t| t.merge_pair(0)),
            ["F_vertical_derivative_ijk", "F_vertical_derivative_jki", "F_vertical_derivative_kij"],
            Side::Lhs,
        ),
    );
    let mut eq1 = m.eq1.clone();
    eq1.name = "maxwell_reduced_1";
    [eq1, eq3, eq4]
}
