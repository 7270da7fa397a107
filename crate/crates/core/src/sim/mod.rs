//! Statevector and density-matrix simulation of parameterized circuits.
//!
//! Qubit `q` is bit `q` of a basis index; bitstrings are written with qubit 0
//! first. Noisy runs evolve the full density matrix with a depolarizing channel
//! after every gate and sample shots from the resulting outcome distributions.

mod circuit;
mod density;
mod noise;
mod sampling;
mod statevector;

pub use circuit::{Angle, Circuit, Gate, GateKind};
pub use density::{apply_noise_scaled, apply_readout_error, DensityMatrix, MAX_DENSITY_QUBITS};
pub use noise::NoiseSpec;
pub use sampling::{group_qubitwise, measurement_distributions, sample_counts, GroupDistributions, MeasurementGroup, SampleResult};
pub use statevector::{
    basis_state, bitstring, evolve_state, expectation, fidelity, parse_bitstring, run_statevector, run_with_params,
};
