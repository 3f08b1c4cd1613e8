//! Desk-scale simulation of quantum statistical query learning.
//!
//! States are dense vectors or matrices over `C^(2^m)`. Bit 0 of a bit string
//! is the most significant bit of an amplitude index, and in a tensor product
//! the right-hand factor occupies the least significant bits.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod dimension;
pub mod error;
pub mod learners;
pub mod oracle;
pub mod qcore;
pub mod rng;

pub use error::{Error, Result};
