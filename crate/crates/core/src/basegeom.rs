//! Semi-Riemannian geometry of the factors `(T, h)` and `(M, φ)`.

use crate::dims::Dims;
use crate::error::GeomError;
use crate::expr::{Differentiator, Expr, JetPoint, Params, Var};
use crate::tensor::{DTensor, Field, IndexKind, IndexSlot, Variance};

/// Default lower bound on `|det|` below which a metric counts as degenerate.
pub const DEFAULT_DEGENERACY: f64 = 1e-8;

/// Which factor manifold a metric lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricFamily {
    /// `h_{αβ}(t)` on T.
    Temporal,
    /// `φ_{ij}(x)` on M.
    Spatial,
}

impl MetricFamily {
    pub fn kind(self) -> IndexKind {
        match self {
            MetricFamily::Temporal => IndexKind::Temporal,
            MetricFamily::Spatial => IndexKind::Spatial,
        }
    }

    pub fn coord(self, a: usize) -> Var {
        match self {
            MetricFamily::Temporal => Var::T(a),
            MetricFamily::Spatial => Var::X(a),
        }
    }

    pub fn allows(self, v: Var) -> bool {
        matches!(
            (self, v),
            (MetricFamily::Temporal, Var::T(_)) | (MetricFamily::Spatial, Var::X(_))
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricFamily::Temporal => "h",
            MetricFamily::Spatial => "phi",
        }
    }

    fn dim(self, dims: Dims) -> usize {
        match self {
            MetricFamily::Temporal => dims.p,
            MetricFamily::Spatial => dims.n,
        }
    }

    fn slot(self, variance: Variance) -> IndexSlot {
        IndexSlot::new(self.kind(), variance)
    }
}

/// Components `g_{ab}` of a metric on one factor, as expressions.
#[derive(Debug, Clone)]
pub struct MetricField {
    family: MetricFamily,
    comps: Field,
}

impl MetricField {
    pub fn new(dims: Dims, family: MetricFamily, rows: Vec<Vec<Expr>>) -> Result<Self, GeomError> {
        let d = family.dim(dims);
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(GeomError::Shape(format!(
                "{} must be a {}x{} matrix",
                family.name(),
                d,
                d
            )));
        }
        for row in &rows {
            for e in row {
                if let Some(v) = e.vars().into_iter().find(|v| !family.allows(*v)) {
                    return Err(GeomError::Family {
                        what: format!("metric {}", family.name()),
                        var: v.to_string(),
                    });
                }
            }
        }
        let lo = family.slot(Variance::Lower);
        let comps = Field::from_fn(dims, &[lo, lo], |ix| rows[ix[0]][ix[1]].clone());
        Ok(MetricField { family, comps })
    }

    pub fn identity(dims: Dims, family: MetricFamily) -> Self {
        let lo = family.slot(Variance::Lower);
        let comps = Field::constant(dims, &[lo, lo], |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 });
        MetricField { family, comps }
    }

    pub fn family(&self) -> MetricFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim(self.comps.dims())
    }

    pub fn components(&self) -> &Field {
        &self.comps
    }

    pub fn entry(&self, a: usize, b: usize) -> &Expr {
        self.comps.get(&[a, b])
    }

    pub fn det(&self) -> Expr {
        let d = self.dim();
        let rows: Vec<usize> = (0..d).collect();
        det_minor(&self.comps, &rows, &rows)
    }

    /// `g^{ab}` as adjugate over determinant.
    pub fn inverse(&self) -> Field {
        let d = self.dim();
        let det = self.det();
        let up = self.family.slot(Variance::Upper);
        Field::from_fn(self.comps.dims(), &[up, up], |ix| {
            let (a, b) = (ix[0], ix[1]);
            // inverse[a][b] = cofactor(b, a) / det
            let rows: Vec<usize> = (0..d).filter(|&r| r != b).collect();
            let cols: Vec<usize> = (0..d).filter(|&c| c != a).collect();
            let minor = det_minor(&self.comps, &rows, &cols);
            let signed = if (a + b) % 2 == 0 { minor } else { minor.neg() };
            signed.div(&det)
        })
    }

    /// Evaluated components, checked for symmetry and nondegeneracy.
    pub fn checked_at(
        &self,
        pt: &JetPoint,
        params: &Params,
        threshold: f64,
    ) -> Result<DTensor, GeomError> {
        let g = self.comps.eval(pt, params)?;
        let d = self.dim();
        let mut asym: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                asym = asym.max((g.get(&[a, b]) - g.get(&[b, a])).abs());
            }
        }
        if asym > 1e-12 * (1.0 + g.max_abs()) {
            return Err(GeomError::Asymmetric {
                metric: self.family.name(),
                residual: asym,
            });
        }
        let det = crate::expr::eval(&self.det(), pt, params)?;
        if !(det.abs() >= threshold) {
            return Err(GeomError::Degenerate {
                metric: self.family.name(),
                det,
                threshold,
            });
        }
        Ok(g)
    }
}

fn det_minor(m: &Field, rows: &[usize], cols: &[usize]) -> Expr {
    match rows.len() {
        0 => Expr::one(),
        1 => m.get(&[rows[0], cols[0]]).clone(),
        2 => {
            let a = m.get(&[rows[0], cols[0]]).mul(m.get(&[rows[1], cols[1]]));
            let b = m.get(&[rows[0], cols[1]]).mul(m.get(&[rows[1], cols[0]]));
            a.sub(&b)
        }
        _ => {
            let r0 = rows[0];
            let rest: Vec<usize> = rows[1..].to_vec();
            let terms = cols.iter().enumerate().map(|(k, &c)| {
                let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = m.get(&[r0, c]).mul(&det_minor(m, &rest, &sub_cols));
                if k % 2 == 0 {
                    term
                } else {
                    term.neg()
                }
            });
            Expr::sum(terms)
        }
    }
}

/// Levi-Civita data of a metric, all as expression fields.
///
/// Slot orders: `christoffel` is `Γ^a_{bc}`; `riemann` is `R^a_{bcd}` with
/// `R^a_{bcd} = ∂_d Γ^a_{bc} − ∂_c Γ^a_{bd} + Γ^m_{bc} Γ^a_{md} − Γ^m_{bd} Γ^a_{mc}`;
/// `ricci` is `R_{bc} = R^a_{bca}`.
#[derive(Debug, Clone)]
pub struct LeviCivita {
    pub metric: MetricField,
    pub det: Expr,
    pub inverse: Field,
    pub christoffel: Field,
    pub riemann: Field,
    pub ricci: Field,
    pub scalar: Expr,
}

impl LeviCivita {
    pub fn build(metric: &MetricField, dfr: &mut Differentiator) -> Self {
        let fam = metric.family;
        let dims = metric.comps.dims();
        let d = metric.dim();
        let up = fam.slot(Variance::Upper);
        let lo = fam.slot(Variance::Lower);
        let g = &metric.comps;
        let inverse = metric.inverse();

        // dg[c][a][b] = ∂_c g_{ab}
        let mut dg = vec![vec![vec![Expr::zero(); d]; d]; d];
        for (c, plane) in dg.iter_mut().enumerate() {
            for (a, row) in plane.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    *v = dfr.diff(g.get(&[a, b]), fam.coord(c));
                }
            }
        }
        let christoffel = Field::from_fn(dims, &[up, lo, lo], |ix| {
            let (a, b, c) = (ix[0], ix[1], ix[2]);
            let terms = (0..d).map(|m| {
                let bracket = dg[b][m][c].add(&dg[c][m][b]).sub(&dg[m][b][c]);
                inverse.get(&[a, m]).mul(&bracket)
            });
            Expr::sum(terms).scale(0.5)
        });

        let mut dgam = vec![vec![vec![vec![Expr::zero(); d]; d]; d]; d];
        for (e, cube) in dgam.iter_mut().enumerate() {
            for (a, plane) in cube.iter_mut().enumerate() {
                for (b, row) in plane.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = dfr.diff(christoffel.get(&[a, b, c]), fam.coord(e));
                    }
                }
            }
        }
        let riemann = Field::from_fn(dims, &[up, lo, lo, lo], |ix| {
            let (a, b, c, e) = (ix[0], ix[1], ix[2], ix[3]);
            let lin = dgam[e][a][b][c].sub(&dgam[c][a][b][e]);
            let quad = Expr::sum((0..d).map(|m| {
                christoffel
                    .get(&[m, b, c])
                    .mul(christoffel.get(&[a, m, e]))
                    .sub(&christoffel.get(&[m, b, e]).mul(christoffel.get(&[a, m, c])))
            }));
            lin.add(&quad)
        });
        let ricci = Field::from_fn(dims, &[lo, lo], |ix| {
            Expr::sum((0..d).map(|a| riemann.get(&[a, ix[0], ix[1], a]).clone()))
        });
        let scalar = Expr::sum(
            (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).map(|(a, b)| {
                inverse.get(&[a, b]).mul(ricci.get(&[a, b]))
            }),
        );
        LeviCivita {
            metric: metric.clone(),
            det: metric.det(),
            inverse,
            christoffel,
            riemann,
            ricci,
            scalar,
        }
    }

    /// Every member evaluated at `pt` after the symmetry and degeneracy checks.
    pub fn at(&self, pt: &JetPoint, params: &Params, threshold: f64) -> Result<LeviCivitaAt, GeomError> {
        let metric = self.metric.checked_at(pt, params, threshold)?;
        Ok(LeviCivitaAt {
            metric,
            inverse: self.inverse.eval(pt, params)?,
            christoffel: self.christoffel.eval(pt, params)?,
            riemann: self.riemann.eval(pt, params)?,
            ricci: self.ricci.eval(pt, params)?,
            scalar: crate::expr::eval(&self.scalar, pt, params)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LeviCivitaAt {
    pub metric: DTensor,
    pub inverse: DTensor,
    pub christoffel: DTensor,
    pub riemann: DTensor,
    pub ricci: DTensor,
    pub scalar: f64,
}

fn levi_civita_at(m: &MetricField, pt: &JetPoint, params: &Params) -> Result<LeviCivitaAt, GeomError> {
    let lc = LeviCivita::build(m, &mut Differentiator::new());
    lc.at(pt, params, DEFAULT_DEGENERACY)
}

pub fn inverse_at(m: &MetricField, pt: &JetPoint, params: &Params) -> Result<DTensor, GeomError> {
    m.checked_at(pt, params, DEFAULT_DEGENERACY)?;
    Ok(m.inverse().eval(pt, params)?)
}

pub fn christoffel_at(m: &MetricField, pt: &JetPoint, params: &Params) -> Result<DTensor, GeomError> {
    Ok(levi_civita_at(m, pt, params)?.christoffel)
}

pub fn riemann_at(m: &MetricField, pt: &JetPoint, params: &Params) -> Result<DTensor, GeomError> {
    Ok(levi_civita_at(m, pt, params)?.riemann)
}

pub fn ricci_at(m: &MetricField, pt: &JetPoint, params: &Params) -> Result<DTensor, GeomError> {
    Ok(levi_civita_at(m, pt, params)?.ricci)
}

pub fn scalar_at(m: &MetricField, pt: &JetPoint, params: &Params) -> Result<f64, GeomError> {
    Ok(levi_civita_at(m, pt, params)?.scalar)
}
