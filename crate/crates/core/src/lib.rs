//! Numerical laboratory for harmonic analysis on Riemann domains presented
//! as branched polynomial coverings of balls in C^m (m = 1, 2): integral
//! means, Dirichlet products, harmonic residues, Euler/Neumann derivative
//! fields, exact harmonic decomposition of homogeneous polynomials, and a
//! mean-value-based semi-harmonicity classifier.

pub mod catalog;
pub mod classify;
pub mod covering;
pub mod error;
pub mod expr;
pub mod fields;
pub mod harmpoly;
pub mod means;
pub mod quadrature;
pub mod residue;
pub mod verify;

pub use covering::{BasePt, CoverPoint, CoveringMap, CoveringSpec};
pub use error::{Error, Result};
pub use expr::{Expr, ParseContext};
pub use fields::{DefiningFunction, ScalarField};
pub use means::{MeanReport, Resolution};
pub use quadrature::QuadratureRule;

pub use num_complex::Complex64;
