//! Hybrid analog/digital joint source–channel coding workbench.
//!
//! Finite-alphabet information measures and typicality ([`infotheory`]),
//! exact evaluators for the hybrid coding achievability conditions on
//! point-to-point, multiple access, two-way relay and diamond networks
//! ([`bounds`]), closed-form Gaussian two-way relay rates ([`gaussian`]), a
//! Monte Carlo simulator of the random-codebook scheme ([`sim`]), and the
//! deterministic grid/refinement utilities they share ([`search`]).

pub mod bounds;
pub mod error;
pub mod gaussian;
pub mod infotheory;
pub mod search;
pub mod sim;

pub use error::{Error, Result};
