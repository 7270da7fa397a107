//! Variational outer loops: `min_θ ⟨ψ(θ)|H|ψ(θ)⟩` with Nelder–Mead or SPSA,
//! and the ADAPT growth driver.

mod adapt;
mod optim;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::qubitops::PauliSum;
use crate::resources::transpile_basis;
use crate::sim::{expectation, sample_counts, NoiseSpec};

pub use adapt::{run_adapt, AdaptOptions, AdaptResult, AdaptStep};
pub use optim::{NelderMeadSettings, SpsaSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    NelderMead,
    Spsa,
}

impl Optimizer {
    pub fn name(self) -> &'static str {
        match self {
            Optimizer::NelderMead => "nelder_mead",
            Optimizer::Spsa => "spsa",
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nelder_mead" | "nm" => Ok(Optimizer::NelderMead),
            "spsa" => Ok(Optimizer::Spsa),
            _ => Err(Error::InvalidOptimizer(format!("unknown optimizer {s:?}"))),
        }
    }
}

/// How an energy is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Exact statevector expectation.
    Analytic,
    /// Shot-sampled, optionally under noise. Evaluation `k` uses seed `seed + k`.
    Shots { shots: usize, noise: Option<NoiseSpec>, seed: u64 },
}

impl EvalMode {
    pub fn is_analytic(&self) -> bool {
        matches!(self, EvalMode::Analytic)
    }
}

/// Energy and (for sampled modes) its standard error.
pub fn evaluate_energy<A: Ansatz + ?Sized>(ansatz: &A, h: &PauliSum, x: &[f64], mode: &EvalMode, k: u64) -> Result<(f64, f64)> {
    let (e, err) = match mode {
        EvalMode::Analytic => (expectation(&ansatz.state(x)?, h)?, 0.0),
        EvalMode::Shots { shots, noise, seed } => {
            let mut c = ansatz.circuit(x)?;
            if noise.is_some() {
                c = transpile_basis(&c)?;
            }
            let r = sample_counts(&c, &[], 0, h, *shots, noise.as_ref(), seed.wrapping_add(k))?;
            (r.energy, r.stderr)
        }
    };
    if e.is_nan() {
        return Err(Error::NanEnergy(x.to_vec()));
    }
    Ok((e, err))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VqeOptions {
    pub optimizer: Optimizer,
    /// Energy evaluations per start.
    pub budget: usize,
    /// Extra seeded starts around the initial point.
    pub restarts: usize,
    /// Half-width of the uniform perturbation for extra starts.
    pub restart_scale: f64,
    pub seed: u64,
    pub nelder_mead: NelderMeadSettings,
    pub spsa: SpsaSettings,
}

impl Default for VqeOptions {
    fn default() -> Self {
        VqeOptions {
            optimizer: Optimizer::NelderMead,
            budget: 20_000,
            restarts: 5,
            restart_scale: 0.05,
            seed: 7,
            nelder_mead: NelderMeadSettings::default(),
            spsa: SpsaSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub energy: f64,
    pub param_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub params: Vec<f64>,
    pub energy: f64,
    /// Standard error of `energy`; zero in analytic mode.
    pub stderr: f64,
    /// Iterations of the winning start.
    pub trace: Vec<TracePoint>,
    /// Evaluations across all starts.
    pub evaluations: usize,
    pub optimizer: Optimizer,
    pub mode: EvalMode,
    pub converged: bool,
    /// Final energy of every start, in start order.
    pub start_energies: Vec<f64>,
}

impl VqeResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,energy,param_norm\n");
        for t in &self.trace {
            s.push_str(&format!("{},{:.12},{:.12e}\n", t.iteration, t.energy, t.param_norm));
        }
        s
    }
}

struct StartOutcome {
    out: optim::Outcome,
    stderr: f64,
}

fn run_start<A: Ansatz + ?Sized>(ansatz: &A, h: &PauliSum, x0: &[f64], opts: &VqeOptions, mode: &EvalMode, stream: u64) -> Result<StartOutcome> {
    let mut k: u64 = stream << 32;
    let mut last_err = std::collections::HashMap::<Vec<u64>, f64>::new();
    let objective = |x: &[f64]| -> Result<f64> {
        let (e, err) = evaluate_energy(ansatz, h, x, mode, k)?;
        k += 1;
        if !mode.is_analytic() {
            last_err.insert(x.iter().map(|v| v.to_bits()).collect(), err);
        }
        Ok(e)
    };
    let out = match opts.optimizer {
        Optimizer::NelderMead => optim::nelder_mead(objective, x0, opts.budget, &opts.nelder_mead)?,
        Optimizer::Spsa => optim::spsa(objective, x0, opts.budget, &opts.spsa, opts.seed ^ stream.wrapping_mul(0x9E37_79B9))?,
    };
    let stderr = last_err.get(&out.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>()).copied().unwrap_or(0.0);
    Ok(StartOutcome { out, stderr })
}

/// Minimizes the energy from `init` plus `opts.restarts` perturbed starts and
/// reports the best start. Starts run on separate threads.
pub fn minimize<A: Ansatz + Sync + ?Sized>(
    ansatz: &A,
    h: &PauliSum,
    init: &[f64],
    opts: &VqeOptions,
    mode: &EvalMode,
) -> Result<VqeResult> {
    if init.len() != ansatz.n_params() {
        return Err(Error::DimensionMismatch(format!(
            "initial point has {} entries, ansatz has {} parameters",
            init.len(),
            ansatz.n_params()
        )));
    }
    if opts.budget == 0 {
        return Err(Error::InvalidOptimizer("budget must be at least 1".into()));
    }
    if h.n_qubits() != ansatz.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit Hamiltonian for a {}-qubit ansatz",
            h.n_qubits(),
            ansatz.n_qubits()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n_starts = if init.is_empty() { 1 } else { 1 + opts.restarts };
    let starts: Vec<Vec<f64>> = (0..n_starts)
        .map(|s| {
            if s == 0 {
                init.to_vec()
            } else {
                init.iter().map(|v| v + opts.restart_scale * rng.gen_range(-1.0..=1.0)).collect()
            }
        })
        .collect();
    let outcomes: Vec<Result<StartOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .iter()
            .enumerate()
            .map(|(i, x0)| scope.spawn(move || run_start(ansatz, h, x0, opts, mode, i as u64)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("optimizer thread panicked")).collect()
    });
    let outcomes: Vec<StartOutcome> = outcomes.into_iter().collect::<Result<_>>()?;
    let best = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.out.f.total_cmp(&b.1.out.f).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let evaluations = outcomes.iter().map(|o| o.out.evaluations).sum();
    let start_energies = outcomes.iter().map(|o| o.out.f).collect();
    let win = &outcomes[best];
    let trace = win
        .out
        .trace
        .iter()
        .enumerate()
        .map(|(iteration, (energy, x))| TracePoint {
            iteration,
            energy: *energy,
            param_norm: x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        })
        .collect();
    Ok(VqeResult {
        params: win.out.x.clone(),
        energy: win.out.f,
        stderr: win.stderr,
        trace,
        evaluations,
        optimizer: opts.optimizer,
        mode: mode.clone(),
        converged: win.out.converged,
        start_energies,
    })
}
