//! Simulation and numerical verification toolkit for decoupled renewal
//! processes.
//!
//! A decoupled standard random walk is a sequence `(Ŝ_n)` of independent
//! random variables where `Ŝ_n` has the law of the `n`-th partial sum of
//! i.i.d. nonnegative jumps. The decoupled renewal process counts the
//! elements at or below a level: `N̂(t) = Σ_n 1{Ŝ_n ≤ t}`.
//!
//! The crate is split by concern:
//!
//! - [`distributions`]: jump laws, limit laws `Z_α`, special functions.
//! - [`renewal`]: path simulation, counts, the renewal function `V` and its
//!   exponential smoothing `W`.
//! - [`limits`]: normalizers, asymptotic variances, Gaussian covariance,
//!   LIL/LSL constants.
//! - [`dpp`]: disc counts of the determinantal point process with
//!   Mittag-Leffler kernel.
//! - [`verify`]: statistical checks producing [`verify::VerifyReport`]s.
//! - [`cli`]: the `drp` command-line front end.

// negated float comparisons are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod dpp;
pub mod error;
pub mod limits;
pub mod quadrature;
pub mod renewal;
pub mod rng;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
