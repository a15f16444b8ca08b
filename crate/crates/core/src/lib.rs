//! Contact geometry of 4th-order ODEs `y'''' = F(x, y, y', y'', y''')`.
//!
//! The crate decides whether a right-hand side `F` satisfies Bryant's two
//! contact-invariant conditions, builds the associated GL(2,R)-invariant
//! coframe and gl(2,R)-valued connection on the bundle over the solution
//! space, computes curvature coefficients, the Ricci tensor and the
//! invariant polynomials, and verifies the structure equations numerically.
//! A `family` module generates the inhomogeneous examples built from the
//! ansatz `F = y2^2 q(y3^2 / y2^3)`.

pub mod bryant;
pub mod curvature;
pub mod fderiv;
pub mod family;
pub mod forms;
pub mod gl2coframe;
pub mod report;
pub mod sample;
pub mod symexpr;
pub mod verify;

pub use symexpr::{Binding, Expr, Sym};
