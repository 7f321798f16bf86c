//! Simulation of cavity-enhanced pulsed parametric down-conversion with
//! click-detector heralding, synthetic homodyne data, and
//! maximum-likelihood reconstruction of the heralded Fock states.

pub mod cavity;
pub mod cli;
pub mod config;
pub mod error;
pub mod fock;
pub mod format;
pub mod herald;
pub mod hermite;
pub mod homodyne;
pub mod loss;
pub mod quadrature;
pub mod tomo;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{fock_state, squeezed_marginal, DensityMatrix, PhotonDistribution};
