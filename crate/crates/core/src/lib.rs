//! Radix representations of Z^n by expanding integer matrices, the self-affine
//! tiles they generate, and the Haar-like scaling functions built on them.
//!
//! All lattice arithmetic is exact. Floating point only enters where a quantity
//! is genuinely real valued (norms, measures, the low-pass symbol).

pub mod cli;
pub mod digits;
pub mod error;
pub mod lattice;
pub mod radix;
pub mod sampling;
pub mod spectral;
pub mod tile;
pub mod wavelet;

pub use digits::{canonical_digits, validate_digit_set, DigitSet};
pub use error::{Error, Result};
pub use lattice::{IntMatrix, IntVector};
pub use radix::{decide_radix, expand, DecideOptions, DecisionReport, RadixExpansion};
pub use spectral::{find_beta, is_dilation_matrix, mu_exceeds_two};
pub use tile::{membership, TileOracle, Verdict};
pub use wavelet::{haar_mra, lowpass_symbol, MRAReport};
