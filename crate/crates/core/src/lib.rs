//! Numerical toolkit for real analytic Eisenstein series on `Gamma_0(q)`:
//! geometry of the upper half-plane, special functions, Fourier expansions,
//! synthetic Hecke sequences with their Dirichlet series identities, and
//! hyperbolic quadrature.

pub mod arith;
pub mod eisenstein;
pub mod error;
pub mod halfplane;
pub mod heckeseries;
pub mod quadrature;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use halfplane::Cusp;

pub type Point = halfplane::HalfPlanePoint<f64>;
pub type EulerFactor = heckeseries::FormalEulerFactor<num_complex::Complex64>;
pub type ExactEulerFactor = heckeseries::FormalEulerFactor<num_rational::BigRational>;
