//! Probe susceptibility of a cold alkali ensemble whose D1 excited hyperfine doublet is
//! dressed by a strong control field, and slow-light propagation of probe pulses
//! through the resulting medium.
//!
//! Units throughout: the natural linewidth `gamma = 1`, `hbar = 1`, times in `1/gamma`.
//! Susceptibilities are dimensionless, in units of `n0 (lambda / 2 pi)^3`.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod cli;
pub mod dressed;
pub mod error;
pub mod kramers_kronig;
pub mod propagation;
pub mod quadrature;
pub mod scheme;
pub mod susceptibility;

pub use error::{Error, Result};
