//! Laplace cascade, contact transformation and closed-form general
//! solutions for the Euler-Poisson equation
//!
//! ```text
//! u_tx = u_t/(κ(t+x)) + 2(1-κ)u_x/(κ(t+x)) - 2(1-κ)u/(κ(t+x))²
//! ```
//!
//! and the generalized Hunter-Saxton equation `u_tx = u u_xx + κ u_x²`,
//! together with a finite-difference harness that checks every formula
//! against the differential equations it is supposed to satisfy.
//!
//! Module map:
//! - [`exprlang`]: expressions for `S(t)`, `R(x)` and test fields, with
//!   symbolic differentiation.
//! - [`fields`]: scalar fields, jets, residual operators, grid verification.
//! - [`laplace`]: coefficients, Laplace and Ovsiannikov invariants, the
//!   cascade `u → v → w`, and general-solution builders.
//! - [`contact`]: the contact map between the two equations, its inverse,
//!   and explicit Hunter-Saxton solutions by inversion of the parametric form.
//! - [`cli`]: configuration and the command-line workflows.

// `!(a < b)` is used on purpose to reject NaN along with the ordered case
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod cli;
pub mod contact;
mod error;
pub mod exprlang;
pub mod fields;
pub mod laplace;
pub mod quad;
pub mod roots;

pub use error::{Error, Result};
