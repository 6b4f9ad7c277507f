//! Batched controlled quantum state exponentiation: Clifford+T compilation,
//! channel-level protocol simulation, error and resource models, and the
//! quantum Hebbian learning pipeline with phase estimation.

pub mod batchfile;
pub mod bcqse;
pub mod circuit;
pub mod cpswap;
pub mod error;
pub mod gateset;
pub mod hebbian;
pub mod phasest;
pub mod qcore;
pub mod rzsynth;

#[cfg(test)]
mod proptests;

pub use error::{Error, Result};
