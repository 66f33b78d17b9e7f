//! Equations kept as named terms on two sides, so residuals can be broken
//! down term by term.

use crate::tensor::Field;

/// Which side of a balance law a term sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lhs,
    Rhs,
}

/// One term of a balance law; `field` is `None` when its coefficient is
/// singular in the current dimensions.
#[derive(Debug, Clone)]
pub struct LawTerm {
    pub name: &'static str,
    pub side: Side,
    pub field: Option<Field>,
}

impl LawTerm {
    pub fn lhs(name: &'static str, field: Field) -> Self {
        LawTerm { name, side: Side::Lhs, field: Some(field) }
    }

    pub fn rhs(name: &'static str, field: Field) -> Self {
        LawTerm { name, side: Side::Rhs, field: Some(field) }
    }
}

#[derive(Debug, Clone)]
pub struct BalanceLaw {
    pub name: &'static str,
    pub terms: Vec<LawTerm>,
    pub outside_hypothesis: bool,
}

impl BalanceLaw {
    pub fn side_sum(&self, side: Side) -> Option<Field> {
        let mut acc: Option<Field> = None;
        for t in self.terms.iter().filter(|t| t.side == side) {
            if let Some(f) = &t.field {
                acc = Some(match acc {
                    None => f.clone(),
                    Some(a) => Field::from_fn(a.dims(), a.slots(), |ix| a.get(ix).add(f.get(ix))),
                });
            }
        }
        acc
    }

    /// Sum of the defined left-hand terms.
    pub fn lhs(&self) -> Field {
        self.side_sum(Side::Lhs).expect("every law has a left side")
    }

    /// Sum of the defined right-hand terms, or zeros with the left side's
    /// slots.
    pub fn rhs(&self) -> Field {
        self.side_sum(Side::Rhs).unwrap_or_else(|| {
            let l = self.lhs();
            Field::zeros(l.dims(), l.slots())
        })
    }

    pub fn has_undefined_terms(&self) -> bool {
        self.terms.iter().any(|t| t.field.is_none())
    }

    /// `lhs − rhs`.
    pub fn residual(&self) -> Field {
        let (l, r) = (self.lhs(), self.rhs());
        Field::from_fn(l.dims(), l.slots(), |ix| l.get(ix).sub(r.get(ix)))
    }
}
