//! Two-sided bounds `B <= A <= k_{q,p} B` for the optimal constant `A` of the Hardy
//! inequality with a pair of Borel measures on the line.
//!
//! [`measure`] and [`cantor`] evaluate masses and integrals, [`constants`] computes `B`
//! and the factors, [`variational`] gives lower bounds from trial functions.

// `!(x > 0.0)` is the NaN-rejecting form used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cantor;
pub mod checks;
pub mod cli;
pub mod constants;
pub mod error;
mod extended;
pub mod measure;
pub mod quadrature;
pub mod report;
pub mod reproduce;
pub mod spec;
pub mod special;
pub mod variational;

pub use error::{Error, Result};
