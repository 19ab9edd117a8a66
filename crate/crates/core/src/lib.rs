//! Pair-restricted (seniority-zero) VQE with orbital optimization on a
//! state-vector simulator, plus exact oracles for checking it.

pub mod ansatz;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod integrals;
pub mod noise;
pub mod oracle;
pub mod orbital_opt;
pub mod pair_sector;
pub mod rng;
pub mod simulator;
pub mod tensor;
pub mod vqe_driver;

pub use error::{Error, Result};
