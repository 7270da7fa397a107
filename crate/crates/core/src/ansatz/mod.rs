//! Variational circuits: Trotterized multicomponent UCC pools, LUCJ layers and
//! ADAPT operator selection.
//!
//! Every ansatz starts from the mean-field reference, prepared with X gates on
//! the encoded occupation, and is evaluated by preparing `|0…0⟩` and running
//! the circuit.

mod adapt;
mod emit;
mod lucj;
mod pool;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::{run_with_params, Circuit};

pub(crate) use emit::emit_exponential;

pub use adapt::{adapt_step, pool_gradients, AdaptChoice};
pub use lucj::{build_lucj_circuit, jastrow_groups, lucj_adjacency, LucjAnsatz, LucjLayer, LucjParams, OrbitalScope};
pub use pool::{
    build_label_pool, build_pool, reference_circuit, trotter_circuit, ExcitationLabel, ExcitationPool, Generator,
};

/// A family of circuits indexed by a real parameter vector.
pub trait Ansatz {
    fn n_qubits(&self) -> usize;
    fn n_params(&self) -> usize;
    /// Fully bound circuit, reference preparation included.
    fn circuit(&self, params: &[f64]) -> Result<Circuit>;

    fn state(&self, params: &[f64]) -> Result<Vec<Complex64>> {
        run_with_params(&self.circuit(params)?, &[], 0)
    }
}

/// A circuit with parameter slots is its own family.
impl Ansatz for Circuit {
    fn n_qubits(&self) -> usize {
        Circuit::n_qubits(self)
    }

    fn n_params(&self) -> usize {
        Circuit::n_params(self)
    }

    fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        self.bind(params)
    }

    fn state(&self, params: &[f64]) -> Result<Vec<Complex64>> {
        if params.len() != Circuit::n_params(self) {
            return Err(Error::DimensionMismatch(format!(
                "{} parameter values for {} slots",
                params.len(),
                Circuit::n_params(self)
            )));
        }
        run_with_params(self, params, 0)
    }
}

impl Ansatz for LucjAnsatz {
    fn n_qubits(&self) -> usize {
        self.layout().n_modes()
    }

    fn n_params(&self) -> usize {
        LucjAnsatz::n_params(self)
    }

    fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        LucjAnsatz::circuit(self, params)
    }
}

/// One value per line, full precision.
pub fn format_params(params: &[f64]) -> String {
    params.iter().map(|x| format!("{x:.17e}\n")).collect()
}

/// Inverse of [`format_params`]; blank lines and `#` comments are ignored.
pub fn parse_params(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| {
            l.parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("bad parameter value {l:?}: {e}"),
            })
        })
        .collect()
}
