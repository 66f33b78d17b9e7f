//! A configured space and every geometric object built from it.

use crate::balance::BalanceLaw;
use crate::basegeom::{MetricFamily, MetricField};
use crate::cartan::{
    berwald_metricity, cartan_connection, curvature_closed, curvature_direct, curvature_frame, metricity,
    ricci_identities, sigma_second, torsion, CurvatureSet, SigmaSecond, TorsionSet,
};
use crate::dims::Dims;
use crate::electromag::{
    deflection_closed, deflection_covariant, deflection_identities, em_closed, em_from_deflection,
    liouville_from_metric, liouville_lowered, maxwell, maxwell_reduced, Deflection, Maxwell,
};
use crate::error::GeomError;
use crate::expr::{parse, Expr, Var};
use crate::gravity::{
    conservation, conservation_simple, einstein_solve, raised_blocks, ricci_closed, ricci_mixed_temporal,
    ricci_trace, scalar_closed, scalar_trace, Einstein, EinsteinInputs, RaisedBlocks, RicciBlocks, SasakiMetric,
    ScalarParts,
};
use crate::jetgeom::{JetContext, LinearConnection, SigmaDerivs};
use crate::tensor::Field;

/// The conformal function, given directly or as one of the special forms
/// `U^{(α)}_{(i)} x^i_α`, `h^{αβ} A_i A_j x^i_α x^j_β` or
/// `φ_{ij} X^α X^β x^i_α x^j_β`.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSpec {
    Zero,
    Expr(String),
    /// `u[i][α]`, functions of `t` and `x`.
    LinearU { u: Vec<Vec<String>> },
    /// `a[i]`, functions of `x`.
    QuadraticA { a: Vec<String> },
    /// `x[α]`, functions of `t`.
    QuadraticX { x: Vec<String> },
}

impl SigmaSpec {
    pub const PRESETS: [(&'static str, &'static str); 4] = [
        ("zero", "sigma = 0"),
        ("linear-U", "sigma = U^(a)_(i)(t,x) y^i_a"),
        ("quadratic-A", "sigma = h^(ab)(t) A_i(x) A_j(x) y^i_a y^j_b"),
        ("quadratic-X", "sigma = phi_ij(x) X^a(t) X^b(t) y^i_a y^j_b"),
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            SigmaSpec::Zero => "zero",
            SigmaSpec::Expr(_) => "expr",
            SigmaSpec::LinearU { .. } => "linear-U",
            SigmaSpec::QuadraticA { .. } => "quadratic-A",
            SigmaSpec::QuadraticX { .. } => "quadratic-X",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    pub p: usize,
    pub n: usize,
    pub h: Vec<Vec<String>>,
    pub phi: Vec<Vec<String>>,
    pub sigma: SigmaSpec,
    /// Einstein constant.
    pub k: f64,
}

fn parse_in(src: &str, dims: Dims, what: &str, allowed: &dyn Fn(Var) -> bool) -> Result<Expr, GeomError> {
    let e = parse(src, dims)?;
    if let Some(v) = e.vars().into_iter().find(|v| !allowed(*v)) {
        return Err(GeomError::Family {
            what: what.to_string(),
            var: v.to_string(),
        });
    }
    Ok(e)
}

fn expect_len<T>(v: &[T], len: usize, what: &str) -> Result<(), GeomError> {
    if v.len() == len {
        Ok(())
    } else {
        Err(GeomError::Shape(format!("{what} needs {len} entries, got {}", v.len())))
    }
}

fn is_t(v: Var) -> bool {
    matches!(v, Var::T(_))
}

fn is_x(v: Var) -> bool {
    matches!(v, Var::X(_))
}

impl SpaceSpec {
    pub fn dims(&self) -> Dims {
        Dims::new(self.p, self.n)
    }

    pub fn metrics(&self) -> Result<(MetricField, MetricField), GeomError> {
        let dims = self.dims();
        let build = |rows: &[Vec<String>], family: MetricFamily| -> Result<MetricField, GeomError> {
            let rows = rows
                .iter()
                .map(|r| r.iter().map(|s| parse(s, dims)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            MetricField::new(dims, family, rows)
        };
        Ok((build(&self.h, MetricFamily::Temporal)?, build(&self.phi, MetricFamily::Spatial)?))
    }

    /// σ as an expression; the special forms contract with the given metrics.
    pub fn sigma_expr(&self, h: &MetricField, phi: &MetricField) -> Result<Expr, GeomError> {
        let dims = self.dims();
        let (n, p) = (self.n, self.p);
        match &self.sigma {
            SigmaSpec::Zero => Ok(Expr::zero()),
            SigmaSpec::Expr(s) => Ok(parse(s, dims)?),
            SigmaSpec::LinearU { u } => {
                expect_len(u, n, "U")?;
                let mut terms = Vec::new();
                for (i, row) in u.iter().enumerate() {
                    expect_len(row, p, "U row")?;
                    for (a, src) in row.iter().enumerate() {
                        let e = parse_in(src, dims, "sigma U", &|v| is_t(v) || is_x(v))?;
                        terms.push(e.mul(&Expr::y(i, a)));
                    }
                }
                Ok(Expr::sum(terms))
            }
            SigmaSpec::QuadraticA { a } => {
                expect_len(a, n, "A")?;
                let a: Vec<Expr> = a.iter().map(|s| parse_in(s, dims, "sigma A", &is_x)).collect::<Result<_, _>>()?;
                let hinv = h.inverse();
                let mut terms = Vec::new();
                for al in 0..p {
                    for be in 0..p {
                        let ay = |b: usize| Expr::sum((0..n).map(|i| a[i].mul(&Expr::y(i, b))));
                        terms.push(hinv.get(&[al, be]).mul(&ay(al)).mul(&ay(be)));
                    }
                }
                Ok(Expr::sum(terms))
            }
            SigmaSpec::QuadraticX { x } => {
                expect_len(x, p, "X")?;
                let x: Vec<Expr> = x.iter().map(|s| parse_in(s, dims, "sigma X", &is_t)).collect::<Result<_, _>>()?;
                let xy = |i: usize| Expr::sum((0..p).map(|a| x[a].mul(&Expr::y(i, a))));
                let mut terms = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        terms.push(phi.entry(i, j).mul(&xy(i)).mul(&xy(j)));
                    }
                }
                Ok(Expr::sum(terms))
            }
        }
    }
}

/// Electromagnetic objects.
#[derive(Debug, Clone)]
pub struct Electromagnetic {
    pub liouville: Field,
    pub liouville_metric: Field,
    pub deflection: Deflection,
    pub deflection_closed: Deflection,
    pub identities: [Field; 2],
    pub big_f: Field,
    pub small_f: Field,
    pub big_f_closed: Field,
    pub small_f_closed: Field,
    pub maxwell: Maxwell,
    /// Present when σ does not depend on `x^i_α`.
    pub reduced: Option<[BalanceLaw; 3]>,
}

/// Every object of the space, built symbolically once.
pub struct Geometry {
    pub spec: SpaceSpec,
    pub dims: Dims,
    pub h: MetricField,
    pub phi: MetricField,
    pub ctx: JetContext,
    pub sigma: SigmaDerivs,
    pub second: SigmaSecond,
    pub berwald: LinearConnection,
    pub cartan: LinearConnection,
    pub torsion: TorsionSet,
    pub curvature: CurvatureSet,
    pub curvature_closed: CurvatureSet,
    pub curvature_frame: CurvatureSet,
    pub berwald_metricity: Vec<(String, Field, Field)>,
    pub cartan_metricity: Vec<(String, Field)>,
    pub ricci_identities: [Field; 3],
    pub sasaki: SasakiMetric,
    pub ricci: RicciBlocks,
    pub ricci_closed: RicciBlocks,
    pub ricci_mixed: (Field, Field),
    pub scalar: ScalarParts,
    pub scalar_closed: ScalarParts,
    pub einstein: Einstein,
    pub raised: RaisedBlocks,
    pub conservation: [BalanceLaw; 3],
    pub conservation_simple: [Field; 3],
    pub em: Electromagnetic,
}

impl Geometry {
    pub fn build(spec: &SpaceSpec) -> Result<Self, GeomError> {
        if spec.p == 0 || spec.n == 0 {
            return Err(GeomError::Shape("p and n must be positive".into()));
        }
        let dims = spec.dims();
        let (h, phi) = spec.metrics()?;
        let sigma_expr = spec.sigma_expr(&h, &phi)?;
        let mut ctx = JetContext::new(&h, &phi);
        let sd = SigmaDerivs::build(&mut ctx, &sigma_expr);
        let berwald = ctx.berwald();
        let conn = cartan_connection(&ctx, &sd);
        let tor = torsion(&ctx, &sd, &conn);
        let ss = sigma_second(&mut ctx, &sd);
        let curvature = curvature_direct(&mut ctx, &sd, &conn, &tor);
        let closed = curvature_closed(&ctx, &sd, &ss);
        let frame = curvature_frame(&mut ctx, &conn);
        let bm = berwald_metricity(&mut ctx, &sd);
        let cm = metricity(&mut ctx, &sd, &conn);
        let ri = ricci_identities(&ctx, &sd, &ss);
        let sasaki = SasakiMetric::build(&ctx, &sigma_expr);
        let ricci = ricci_trace(dims, &curvature);
        let ric_closed = ricci_closed(&ctx, &sd, &ss);
        let mixed = ricci_mixed_temporal(&mut ctx, &conn);
        let scalar = scalar_trace(&sasaki, &ricci);
        let sc_closed = scalar_closed(&ctx, &sd, &ss);
        let einstein = einstein_solve(
            &EinsteinInputs {
                ctx: &ctx,
                sd: &sd,
                ss: &ss,
                sasaki: &sasaki,
                ricci: &ricci,
                scalar: &scalar,
                mixed: (&mixed.0, &mixed.1),
            },
            spec.k,
        )?;
        let raised = raised_blocks(&ctx, &sasaki, &einstein);
        let laws = conservation(&mut ctx, &conn, &raised);
        let simple = conservation_simple(&mut ctx, &conn, &raised);

        let x = liouville_lowered(&ctx, &sigma_expr);
        let x_metric = liouville_from_metric(&ctx, &sigma_expr);
        let deflection = deflection_covariant(&mut ctx, &conn, &x);
        let def_closed = deflection_closed(&ctx, &sd, &x);
        let identities = deflection_identities(&ctx, &sd, &conn, &tor.t_tj, &x, &deflection);
        let (big_f, small_f) = em_from_deflection(&deflection);
        let (big_f_closed, small_f_closed) = em_closed(&ctx, &sd, &x);
        let mx = maxwell(&mut ctx, &sd, &conn, &x, &big_f_closed, &small_f_closed);
        let reduced = if sd.depends_on_directions() {
            None
        } else {
            Some(maxwell_reduced(&mx, &mut ctx, &conn, &big_f_closed))
        };
        let em = Electromagnetic {
            liouville: x,
            liouville_metric: x_metric,
            deflection,
            deflection_closed: def_closed,
            identities,
            big_f,
            small_f,
            big_f_closed,
            small_f_closed,
            maxwell: mx,
            reduced,
        };
        Ok(Geometry {
            spec: spec.clone(),
            dims,
            h,
            phi,
            ctx,
            sigma: sd,
            second: ss,
            berwald,
            cartan: conn,
            torsion: tor,
            curvature,
            curvature_closed: closed,
            curvature_frame: frame,
            berwald_metricity: bm,
            cartan_metricity: cm,
            ricci_identities: ri,
            sasaki,
            ricci,
            ricci_closed: ric_closed,
            ricci_mixed: mixed,
            scalar,
            scalar_closed: sc_closed,
            einstein,
            raised,
            conservation: laws,
            conservation_simple: simple,
            em,
        })
    }

    /// Every named tensor, in a fixed order.
    pub fn named_fields(&self) -> Vec<(String, &Field)> {
        let mut out: Vec<(String, &Field)> = vec![
            ("h".into(), self.h.components()),
            ("phi".into(), self.phi.components()),
            ("sigma_temporal".into(), &self.sigma.temporal),
            ("sigma_spatial".into(), &self.sigma.spatial),
            ("sigma_vertical".into(), &self.sigma.vertical),
            ("nonlinear_M".into(), &self.ctx.nonlinear.m),
            ("nonlinear_N".into(), &self.ctx.nonlinear.n),
            ("cartan_H".into(), &self.cartan.h),
            ("cartan_G".into(), &self.cartan.g),
            ("cartan_L".into(), &self.cartan.l),
            ("cartan_C".into(), &self.cartan.c),
        ];
        for (name, f) in self.torsion.named() {
            out.push((format!("torsion_{name}"), f));
        }
        for (name, f) in self.curvature.named() {
            out.push((format!("curvature_{name}"), f));
        }
        for (name, f) in self.ricci.named() {
            out.push((format!("ricci_{name}"), f));
        }
        out.push(("ricci_mixed_t_s".into(), &self.ricci_mixed.0));
        out.push(("ricci_mixed_t_v".into(), &self.ricci_mixed.1));
        let e = &self.einstein;
        for (name, f) in [
            ("einstein_stress_tt", &e.stress_tt),
            ("einstein_stress_ss", &e.stress_ss),
            ("einstein_stress_vv", &e.stress_vv),
            ("einstein_stress_st", &e.stress_st),
            ("einstein_stress_vt", &e.stress_vt),
            ("einstein_stress_sv", &e.stress_sv),
            ("einstein_stress_vs", &e.stress_vs),
            ("einstein_stress_ts", &e.stress_ts),
            ("einstein_stress_tv", &e.stress_tv),
            ("liouville", &self.em.liouville),
            ("deflection_temporal", &self.em.deflection_closed.temporal),
            ("deflection_spatial", &self.em.deflection_closed.spatial),
            ("deflection_vertical", &self.em.deflection_closed.vertical),
            ("em_F", &self.em.big_f_closed),
            ("em_f", &self.em.small_f_closed),
        ] {
            out.push((name.into(), f));
        }
        out
    }

    /// Scalar invariants, in a fixed order.
    pub fn named_scalars(&self) -> Vec<(&'static str, &Expr)> {
        vec![
            ("sigma", &self.sigma.sigma),
            ("scalar_H", &self.scalar.h),
            ("scalar_R", &self.scalar.r),
            ("scalar_S", &self.scalar.s),
            ("scalar_curvature", &self.scalar.sc),
        ]
    }
}
