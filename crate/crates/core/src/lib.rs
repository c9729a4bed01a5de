//! Commuting ordinary differential operators built from modular principal
//! parts.
//!
//! Given a normalized operator `P = d^N + a_2 d^(N-2) + ... + a_N` whose
//! coefficients are elliptic in `z` and modular in the lattice parameter, the
//! crate computes the Baker-Akhiezer series, constructs a commuting operator
//! `Q` from a prescribed principal part, derives the spectral curve
//! `F(P, Q) = 0`, and checks single-valuedness by numerical monodromy.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod scalar;
pub mod series;
pub mod qseries;
pub mod elliptic;
pub mod modular;
pub mod operator;
pub mod baker_akhiezer;
pub mod commutant;
pub mod lame;
pub mod spectral_curve;
pub mod monodromy;
pub mod verify;
pub mod io;

pub use error::{Error, Result};
pub use scalar::{Ring, Scalar};
pub use series::TruncatedSeries;
