//! Simulation core for local (cellular-automaton) decoders of the 1D quantum
//! repetition code: the asymmetric and symmetric signal rules, the shearing
//! rule on two rows of qubits, and a Toom's-rule variant on a square grid,
//! together with noise sampling, Monte-Carlo estimation, curve fitting and
//! proof-derived verification oracles.
//!
//! The crate is `no_std` (with `alloc`); everything IO-related lives in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod cellular;
mod error;
pub mod lattice;
pub mod montecarlo;
pub mod noise;
pub mod oracles;
pub mod signal;

pub use error::RuleError;
