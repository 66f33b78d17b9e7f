//! The registry of numeric checks run by `verify`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use jetfield_core::balance::{BalanceLaw, Side};
use jetfield_core::{Field, Geometry};

/// One named summand of a check, reported by its largest magnitude.
#[derive(Debug, Clone)]
pub struct Term {
    pub name: String,
    pub side: Side,
    /// `None` when the coefficient is singular for the current dimensions.
    pub field: Option<Field>,
}

/// `lhs == rhs` componentwise at every sample point.
#[derive(Debug, Clone)]
pub struct Check {
    pub id: String,
    pub group: &'static str,
    /// Diagnostic checks are reported but never fail a run.
    pub diagnostic: bool,
    /// For a diagnostic equation, the term whose removal or rescaling makes
    /// it hold.
    pub offending_term: Option<&'static str>,
    pub lhs: Field,
    pub rhs: Field,
    pub terms: Vec<Term>,
}

impl Check {
    fn equal(group: &'static str, name: &str, lhs: &Field, rhs: &Field) -> Self {
        Check {
            id: format!("{group}.{name}"),
            group,
            diagnostic: false,
            offending_term: None,
            lhs: lhs.clone(),
            rhs: rhs.clone(),
            terms: Vec::new(),
        }
    }

    fn zero(group: &'static str, name: &str, f: &Field) -> Self {
        Check::equal(group, name, f, &Field::zeros(f.dims(), f.slots()))
    }

    fn law(group: &'static str, name: &str, law: &BalanceLaw) -> Self {
        let mut c = Check::equal(group, name, &law.lhs(), &law.rhs());
        c.terms = law
            .terms
            .iter()
            .map(|t| Term {
                name: t.name.to_string(),
                side: t.side,
                field: t.field.clone(),
            })
            .collect();
        c
    }

    fn diagnostic(mut self, offending: Option<&'static str>) -> Self {
        self.diagnostic = true;
        self.offending_term = offending;
        self
    }

    pub fn anchor(&self) -> &'static str {
        anchor(self.group)
    }
}

fn anchors() -> &'static BTreeMap<String, String> {
    static ANCHORS: OnceLock<BTreeMap<String, String>> = OnceLock::new();
    ANCHORS.get_or_init(|| toml::from_str(include_str!("../anchors.toml")).expect("anchors.toml is valid"))
}

pub fn anchor(group: &str) -> &'static str {
    anchors().get(group).map(String::as_str).unwrap_or("")
}

fn scalar(geo: &Geometry, e: &jetfield_core::Expr) -> Field {
    Field::scalar(geo.dims, e.clone())
}

fn identity_like(f: &Field) -> Field {
    Field::constant(f.dims(), f.slots(), |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
}

/// Every check for a geometry, in a fixed order.
pub fn registry(geo: &Geometry) -> Vec<Check> {
    let mut out = Vec::new();
    let s = &geo.sasaki;
    for (name, a, b) in [
        ("temporal", &s.temporal, &s.temporal_inv),
        ("spatial", &s.spatial, &s.spatial_inv),
        ("vertical", &s.vertical, &s.vertical_inv),
    ] {
        let prod = Field::contract(a, 1, b, 0).expect("inverse blocks contract");
        out.push(Check::equal("sasaki_inverse", name, &prod, &identity_like(&prod)));
    }
    for (name, d, e) in &geo.berwald_metricity {
        out.push(Check::equal("berwald_metricity", name, d, e));
    }
    for (name, d) in &geo.cartan_metricity {
        out.push(Check::zero("cartan_metricity", name, d));
    }
    for ((name, direct), (_, closed)) in geo.curvature.named().iter().zip(geo.curvature_closed.named()) {
        out.push(Check::equal("curvature_two_path", name, direct, closed));
    }
    for ((name, direct), (_, frame)) in geo.curvature.named().iter().zip(geo.curvature_frame.named()) {
        out.push(Check::equal("curvature_frame", name, direct, frame));
    }
    for (k, f) in geo.ricci_identities.iter().enumerate() {
        out.push(Check::zero("ricci_identity", &(k + 1).to_string(), f));
    }
    for ((name, trace), (_, closed)) in geo.ricci.named().iter().zip(geo.ricci_closed.named()) {
        out.push(Check::equal("ricci_two_path", name, trace, closed));
    }
    out.push(Check::zero("ricci_mixed", "t_s", &geo.ricci_mixed.0));
    out.push(Check::zero("ricci_mixed", "t_v", &geo.ricci_mixed.1));
    let (st, sc) = (&geo.scalar, &geo.scalar_closed);
    for (name, a, b) in [("H", &st.h, &sc.h), ("R", &st.r, &sc.r), ("S", &st.s, &sc.s), ("Sc", &st.sc, &sc.sc)] {
        out.push(Check::equal("scalar_two_path", name, &scalar(geo, a), &scalar(geo, b)));
    }
    let e = &geo.einstein;
    for (name, l, g) in [
        ("temporal", &e.lhs_tt, &e.geometric_tt),
        ("spatial", &e.lhs_ss, &e.geometric_ss),
        ("vertical", &e.lhs_vv, &e.geometric_vv),
    ] {
        out.push(Check::equal("einstein", name, l, g));
    }
    for law in &geo.conservation {
        out.push(Check::law("conservation", law.name, law).diagnostic(None));
    }
    let y_free = !geo.sigma.depends_on_directions();
    for (name, f) in ["temporal", "spatial", "vertical"].iter().zip(&geo.conservation_simple) {
        let c = Check::zero("conservation_simple", name, f);
        out.push(if y_free { c } else { c.diagnostic(None) });
    }

    let em = &geo.em;
    out.push(Check::equal("liouville", "metric_lowered", &em.liouville, &em.liouville_metric));
    let (d, dc) = (&em.deflection, &em.deflection_closed);
    for (name, a, b) in [
        ("temporal", &d.temporal, &dc.temporal),
        ("spatial", &d.spatial, &dc.spatial),
        ("vertical", &d.vertical, &dc.vertical),
    ] {
        out.push(Check::equal("deflection_two_path", name, a, b));
    }
    out.push(Check::zero("deflection_identity", "temporal", &em.identities[0]));
    out.push(Check::zero("deflection_identity", "vertical", &em.identities[1]));
    out.push(Check::equal("em_two_path", "F", &em.big_f, &em.big_f_closed));
    out.push(Check::equal("em_two_path", "f", &em.small_f, &em.small_f_closed));
    let dims = geo.dims;
    let f_swap = Field::from_fn(dims, em.big_f.slots(), |ix| {
        let (i, a) = dims.unpair(ix[0]);
        em.big_f.get(&[dims.pair(ix[1], a), i]).neg()
    });
    let sf_swap = Field::from_fn(dims, em.small_f.slots(), |ix| {
        let (i, a) = dims.unpair(ix[0]);
        let (j, b) = dims.unpair(ix[1]);
        em.small_f.get(&[dims.pair(j, a), dims.pair(i, b)]).neg()
    });
    out.push(Check::equal("em_antisymmetry", "F", &em.big_f, &f_swap));
    out.push(Check::equal("em_antisymmetry", "f", &em.small_f, &sf_swap));
    if y_free {
        out.push(Check::zero("em_vertical_vanishes", "f", &em.small_f));
        out.push(Check::zero("em_vertical_vanishes", "f_closed", &em.small_f_closed));
    }
    let m = &em.maxwell;
    out.push(Check::law("maxwell", "1", &m.eq1).diagnostic(Some("F_sigma_beta")));
    out.push(Check::law("maxwell", "1_amended", &m.eq1_amended));
    out.push(Check::law("maxwell", "2", &m.eq2).diagnostic(Some("two_f_sigma_beta")));
    out.push(Check::law("maxwell", "2_amended", &m.eq2_amended));
    out.push(Check::law("maxwell", "3", &m.eq3));
    out.push(Check::law("maxwell", "4", &m.eq4));
    out.push(Check::law("maxwell", "5", &m.eq5));
    out.push(Check::law("maxwell", "5_pair_cycle", &m.eq5_pairs).diagnostic(None));
    if let Some(reduced) = &em.reduced {
        out.push(Check::law("maxwell_reduced", "1", &reduced[0]).diagnostic(Some("F_sigma_beta")));
        out.push(Check::law("maxwell_reduced", "2", &reduced[1]));
        out.push(Check::law("maxwell_reduced", "3", &reduced[2]));
    }
    out
}
