use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate {metric} metric: |det| = {det:e} below threshold {threshold:e}")]
    Degenerate {
        metric: &'static str,
        det: f64,
        threshold: f64,
    },
    #[error("{metric} metric is not symmetric: residual {residual:e}")]
    Asymmetric { metric: &'static str, residual: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("point dimensions do not match (p, n) = ({p}, {n})")]
    PointShape { p: usize, n: usize },
    #[error("{what} references {var}, outside its variable family")]
    Family { what: String, var: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("Einstein constant must be nonzero")]
    ZeroEinsteinConstant,
    #[error("incompatible index slots: {0}")]
    Slots(String),
}
