//! Differential geometry of the generalized metrical multi-time Lagrange
//! space on the 1-jet bundle J¹(T, M), with vertical metric
//! `G = h^{αβ}(t) e^{2σ(t,x,y)} φ_ij(x)`.
//!
//! Everything is built symbolically once per configuration (see
//! [`space::Geometry`]) and then evaluated numerically at jet points.

pub mod balance;
pub mod basegeom;
pub mod cartan;
pub mod dims;
pub mod electromag;
pub mod error;
pub mod expr;
pub mod gravity;
pub mod jetgeom;
pub mod space;
pub mod tensor;

pub use dims::Dims;
pub use error::GeomError;
pub use expr::{Expr, JetPoint, Var};
pub use space::{Geometry, SigmaSpec, SpaceSpec};
pub use tensor::{DTensor, Field, IndexKind, IndexSlot, Variance};
