//! ADAPT-VQE: grow the circuit one generator at a time, re-optimizing all
//! amplitudes after each addition.

use serde::{Deserialize, Serialize};

use super::{minimize, EvalMode, TracePoint, VqeOptions, VqeResult};
use crate::ansatz::{adapt_step, emit_exponential, reference_circuit, Ansatz, ExcitationPool};
use crate::error::{Error, Result};
use crate::qubitops::{Mapping, PauliSum};
use crate::sim::{expectation, Angle, Circuit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptOptions {
    /// Stop when every pool gradient is below this magnitude.
    pub threshold: f64,
    pub max_steps: usize,
    pub vqe: VqeOptions,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            threshold: 1e-4,
            max_steps: 20,
            vqe: VqeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptStep {
    pub pool_index: usize,
    pub generator: String,
    pub label: String,
    pub gradient: f64,
    /// Optimized energy after adding this generator.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptResult {
    pub result: VqeResult,
    pub history: Vec<AdaptStep>,
    /// Final circuit, with one slot per selected generator.
    pub circuit: Circuit,
    /// Gradient magnitude that ended the loop (zero if `max_steps` did).
    pub final_gradient: f64,
}

pub fn run_adapt(pool: &ExcitationPool, mapping: Mapping, h: &PauliSum, opts: &AdaptOptions) -> Result<AdaptResult> {
    if !(opts.threshold > 0.0) {
        return Err(Error::InvalidOptimizer(format!("ADAPT threshold must be positive, got {}", opts.threshold)));
    }
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mapped = pool.mapped(mapping);
    let mut circuit = reference_circuit(pool.n_modes, pool.reference, mapping, 0)?;
    let mut params: Vec<f64> = Vec::new();
    let mut history = Vec::new();
    let e0 = expectation(&circuit.state(&[])?, h)?;
    let mut result = VqeResult {
        params: Vec::new(),
        energy: e0,
        stderr: 0.0,
        trace: vec![TracePoint {
            iteration: 0,
            energy: e0,
            param_norm: 0.0,
        }],
        evaluations: 1,
        optimizer: opts.vqe.optimizer,
        mode: EvalMode::Analytic,
        converged: true,
        start_energies: vec![e0],
    };
    let mut final_gradient = 0.0;
    for _ in 0..opts.max_steps {
        let choice = adapt_step(&circuit.state(&params)?, &mapped, h)?;
        if choice.gradient.abs() < opts.threshold {
            final_gradient = choice.gradient.abs();
            break;
        }
        let slot = params.len();
        circuit.set_n_params(slot + 1);
        emit_exponential(&mut circuit, &mapped[choice.index], Angle::param(slot, 1.0))?;
        params.push(0.0);
        let evaluations = result.evaluations;
        result = minimize(&circuit, h, &params, &opts.vqe, &EvalMode::Analytic)?;
        result.evaluations += evaluations;
        params.clone_from(&result.params);
        let g = &pool.generators[choice.index];
        history.push(AdaptStep {
            pool_index: choice.index,
            generator: g.name.clone(),
            label: g.label.to_string(),
            gradient: choice.gradient,
            energy: result.energy,
        });
    }
    Ok(AdaptResult {
        result,
        history,
        circuit,
        final_gradient,
    })
}
