//! Second quantization of the multicomponent Hamiltonian and fermion-to-qubit maps.
//!
//! All species share one fermionic mode register. Electrons come first with
//! spin interleaved (`2s + sigma`), followed by each single-spin species, so the
//! minimal layout is `0 = 0a, 1 = 0b, 2 = 1a, 3 = 1b, 4 = 0p, 5 = 1p`.

mod fermion;
mod hamiltonian;
mod mapping;
mod pauli;

pub use fermion::{FermionOp, Ladder};
pub use hamiltonian::{second_quantize, ModeLayout, SpeciesModes};
pub use mapping::{bravyi_kitaev, jordan_wigner, Mapping};
pub use pauli::{pauli_matrix, PauliString, PauliSum, MAX_DENSE_QUBITS, PRUNE_TOL};
