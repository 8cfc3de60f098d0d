//! Special functions, quadrature rules and interpolation shared by every
//! solver stage.

mod expint;
mod interp;
mod quadrature;

pub use expint::expint;
pub(crate) use expint::{e1_positive, e2};
pub use interp::{InterpScheme, Interpolant1D};
pub use quadrature::{gauss_legendre, QuadratureRule};
