//! Numerical laboratory for two-point modulus-of-continuity estimates of
//! degenerate elliptic equations.
//!
//! The crate solves catalog equations `F(x, u, grad u, D^2 u) = 0` with a
//! monotone finite-difference scheme, computes the two-point modulus of
//! continuity of the discrete solution, samples the Crandall–Ishii–Lions
//! block matrix inequality to check the matrix lemmas and the structure
//! condition pairing an n-dimensional operator with a one-dimensional one,
//! builds closed-form one-dimensional supersolutions, and converts verified
//! comparisons into oscillation, Lipschitz, and Hölder bounds.

pub mod bounds;
pub mod error;
pub mod expr;
pub mod grid;
pub mod moc;
pub mod oned;
pub mod operators;
pub mod seed;
pub mod solver;
pub mod structure;

pub use error::{Error, Result};
