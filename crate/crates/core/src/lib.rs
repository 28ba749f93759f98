//! Numerical laboratory for the epsilon-regularized, inhomogeneous normalized
//! p(x)-Laplace equation on the unit ball.
//!
//! The crate discretizes -trace(A(x, Du+q) D^2 u) = f + c (anchor - u) on a
//! uniform grid over [-1,1]^N with the disc realized as an interior mask,
//! solves the Dirichlet problem by damped Newton with a Picard fallback and
//! sparse direct linear algebra, and measures the regularity of the discrete
//! solutions: Hölder fits, dyadic oscillation decay, weak Harnack ratios, and
//! the explicit constants that drive those estimates. A small inequality
//! toolkit checks the pointwise bounds the estimates rest on.

pub mod error;
pub mod field;
pub mod grid;
pub mod manufactured;
pub mod operator;
pub mod proofkit;
pub mod regularity;
pub mod solver;
pub mod util;

pub use error::{Error, Result};
