//! Autocorrelation and diffraction of weighted Dirac combs supported on
//! Euclidean lattices.
//!
//! A comb `omega = sum_t w(t) delta_t` over a lattice `Gamma` is tabulated
//! inside a ball ([`comb::WeightedComb`]). From it the crate computes the
//! finite-radius autocorrelation coefficients ([`autocorr`]), exponential
//! sums and diffraction intensities on the dual side ([`diffraction`]), and
//! numerical checks of the structural relations between them ([`verify`]).
//! The `difflat` binary wraps all of it ([`cli`]).

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod autocorr;
pub mod cli;
pub mod comb;
pub mod diffraction;
pub mod error;
pub mod lattice;
pub mod verify;

pub use num_complex::Complex64;

pub use autocorr::{AutocorrTable, BumpConfig, Variant};
pub use comb::{WeightRule, WeightedComb};
pub use diffraction::{BraggEntry, BraggTable, DiffractionGrid};
pub use error::{Error, Result};
pub use lattice::{DomainMode, FundamentalDomain, Lattice, LatticeVector};

/// Formats a float with 17 significant digits, enough to round-trip any f64.
/// Negative zero prints as zero.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fmt_f64_round_trips() {
        for x in [0.1, -2.5e-300, 1.0 / 3.0, f64::MAX] {
            assert_eq!(super::fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(super::fmt_f64(-0.0), "0.0000000000000000e0");
    }
}
