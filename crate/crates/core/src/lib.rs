//! Length spectrum of the modular group and the smoothed logarithmic
//! derivative of its Selberg zeta function.
//!
//! Multiplicities `m(n)` of hyperbolic traces come from narrow class numbers
//! of indefinite binary quadratic forms and fundamental Pell units
//! ([`arith`], [`qforms`], [`spectrum`]). The [`zeta`] module evaluates the
//! truncated series `phi_s(x)` over a [`SpectrumTable`], its exact mean
//! square over `[1, T]`, and related constants. [`oracle`] holds slow
//! independent references used by tests and verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod cache;
pub mod error;
pub mod oracle;
pub mod qforms;
pub mod spectrum;
pub mod zeta;

pub use arith::{Discriminant, PellSolution};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use num_rational::BigRational;
pub use qforms::{Matrix2, QuadForm};
pub use spectrum::{Component, SpectrumEntry, SpectrumTable, WeightMode};
pub use zeta::{CConstant, EvalPoint, LogDerivSeries, SquareIntegralResult};
