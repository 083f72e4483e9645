//! Query-model laboratory for Boolean functions with a fixed on-set size.
//!
//! The crate provides truth-table Boolean functions ([`boolfn`]), exact
//! combinatorial measures and bound formulas ([`measures`]), relational
//! adversary evaluators ([`adversary`]), a state-vector simulator of the
//! quantum query model with Grover-family subroutines ([`qsim`]), three
//! end-to-end evaluation algorithms with exact query accounting
//! ([`algorithms`]) and Monte-Carlo verifiers ([`verify`]).

pub mod adversary;
pub mod algorithms;
pub mod bits;
pub mod boolfn;
pub mod constants;
pub mod error;
pub mod measures;
pub mod qsim;
pub mod rng;
pub mod verify;

pub use bits::{hamming, BitString};
pub use boolfn::BooleanFunction;
pub use error::{Error, Result};
pub use measures::BoundParams;
