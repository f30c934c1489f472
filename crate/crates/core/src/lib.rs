//! Numerical laboratory for information locking.
//!
//! The locking ensemble pairs a bit `x` and a Pauli string `y ∈ {1,2,3}^m`
//! with the `m`-qubit state `2^{−m}(id + (−1)^x σ_y)`. Its accessible
//! information is at most `(2/3)^{m/2}`, yet anyone who learns `y` can read
//! `x` with certainty. The modules here build the ensemble, search for good
//! measurements, check the analytic bounds and simulate what happens when
//! such a key is used as a one-time pad.

// `!(x >= 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accinfo;
pub mod attack;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod pauli;
pub mod security;
pub mod states;

pub use error::{Error, Result};
