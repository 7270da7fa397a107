//! Multicomponent variational quantum eigensolver toolkit.
//!
//! The pipeline treats electrons together with one species of light quantum
//! particle (a proton or a positron) on equal footing:
//!
//! - [`basis`]: particle species, classical nuclei and contracted s-type Gaussians
//! - [`integrals`]: closed-form s-type integrals assembled into an [`integrals::IntegralSet`]
//! - [`fcidump`]: extended FCIDUMP import/export of integral sets
//! - [`scf`]: coupled mean-field (NEO-HF) solver and MO transformation
//! - [`qubitops`]: fermionic operators, Pauli sums, Jordan-Wigner and Bravyi-Kitaev maps
//! - [`sim`]: statevector / density-matrix simulator with depolarizing noise
//! - [`ansatz`]: excitation pools, Trotterized UCC, LUCJ layers and ADAPT selection
//! - [`vqe`]: Nelder-Mead / SPSA outer loops and ADAPT-VQE driver
//! - [`exact`]: sector-restricted full configuration interaction
//! - [`mitigation`]: circuit folding and log-linear zero-noise extrapolation
//! - [`resources`]: basis transpilation, gate counts, depth and feasibility heuristic
//! - [`pipeline`]: end-to-end drivers shared by the command line front-end

pub mod ansatz;
pub mod basis;
pub mod error;
pub mod exact;
pub mod fcidump;
pub mod integrals;
pub mod linalg;
pub mod mitigation;
pub mod pipeline;
pub mod qubitops;
pub mod resources;
pub mod scf;
pub mod sim;
pub mod vqe;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
