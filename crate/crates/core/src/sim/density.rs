use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::circuit::Circuit;
use super::noise::NoiseSpec;
use super::statevector::Op;
use crate::error::{Error, Result};
use crate::qubitops::PauliSum;

/// Largest register simulated as a density matrix.
pub const MAX_DENSITY_QUBITS: usize = 8;

/// `ρ` stored as a `4^n` vector, entry `ρ_ij` at index `i + (j << n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn basis(index: usize, n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_DENSITY_QUBITS {
            return Err(Error::TooManyQubits(n_qubits, MAX_DENSITY_QUBITS));
        }
        let mut data = vec![Complex64::default(); 1 << (2 * n_qubits)];
        data[index + (index << n_qubits)] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, data })
    }

    pub fn from_state(psi: &[Complex64]) -> Result<Self> {
        let n_qubits = psi.len().trailing_zeros() as usize;
        if n_qubits > MAX_DENSITY_QUBITS {
            return Err(Error::TooManyQubits(n_qubits, MAX_DENSITY_QUBITS));
        }
        let dim = psi.len();
        let mut data = vec![Complex64::default(); dim * dim];
        for j in 0..dim {
            for i in 0..dim {
                data[i + (j << n_qubits)] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + (j << self.n_qubits)]
    }

    pub(crate) fn apply_op(&mut self, op: Op) {
        op.apply(&mut self.data);
        op.conjugate_shifted(self.n_qubits).apply(&mut self.data);
    }

    /// `ρ → (1 − p) ρ + p · I/2^k ⊗ Tr_Q ρ` on the qubit set `qubits`.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p == 0.0 || qubits.is_empty() {
            return;
        }
        let n = self.n_qubits;
        let q_mask: usize = qubits.iter().fold(0, |m, q| m | 1 << q);
        let dim = 1usize << n;
        let row_mask = dim - 1;
        let keep = row_mask & !q_mask;
        let mut reduced = vec![Complex64::default(); self.data.len()];
        for (idx, v) in self.data.iter().enumerate() {
            let (i, j) = (idx & row_mask, idx >> n);
            if i & q_mask == j & q_mask {
                reduced[(i & keep) + ((j & keep) << n)] += v;
            }
        }
        let weight = p / (1u64 << qubits.len()) as f64;
        for (idx, v) in self.data.iter_mut().enumerate() {
            let (i, j) = (idx & row_mask, idx >> n);
            *v *= 1.0 - p;
            if i & q_mask == j & q_mask {
                *v += reduced[(i & keep) + ((j & keep) << n)] * weight;
            }
        }
    }

    pub fn trace(&self) -> Complex64 {
        let dim = 1usize << self.n_qubits;
        (0..dim).map(|i| self.get(i, i)).sum()
    }

    /// Computational-basis outcome probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..1usize << self.n_qubits).map(|i| self.get(i, i).re.max(0.0)).collect()
    }

    /// `Tr(ρH)`.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        if h.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit operator on a {}-qubit density matrix",
                h.n_qubits(),
                self.n_qubits
            )));
        }
        let mut total = Complex64::default();
        for (p, c) in h.terms() {
            let mut acc = Complex64::default();
            for col in 0..1usize << self.n_qubits {
                let (phase, row) = p.apply_basis(col);
                acc += phase * self.get(col, row);
            }
            total += c * acc;
        }
        Ok(total.re)
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        DMatrix::from_fn(dim, dim, |i, j| self.get(i, j))
    }

    /// Smallest eigenvalue, via the real symmetric embedding of `ρ`.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = 1usize << self.n_qubits;
        let mut big = DMatrix::<f64>::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                let z = self.get(i, j);
                big[(i, j)] = z.re;
                big[(i + d, j + d)] = z.re;
                big[(i, j + d)] = -z.im;
                big[(i + d, j)] = z.im;
            }
        }
        SymmetricEigen::new(big).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Runs `c` from basis state `initial` as a density matrix, applying a
/// depolarizing channel with probability `min(1, λ·p_k)` after every gate.
pub fn apply_noise_scaled(c: &Circuit, params: &[f64], initial: usize, noise: &NoiseSpec) -> Result<DensityMatrix> {
    noise.validate()?;
    let mut rho = DensityMatrix::basis(initial, c.n_qubits())?;
    for g in c.gates() {
        rho.apply_op(Op::resolve(g, Some(params))?);
        rho.depolarize(&g.qubits, noise.gate_probability(g.arity()));
    }
    Ok(rho)
}

/// Flips every bit of each outcome independently with probability `p`.
pub fn apply_readout_error(probs: &mut [f64], n_qubits: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    for q in 0..n_qubits {
        let bit = 1 << q;
        for b in 0..probs.len() {
            if b & bit == 0 {
                let (p0, p1) = (probs[b], probs[b | bit]);
                probs[b] = (1.0 - p) * p0 + p * p1;
                probs[b | bit] = p * p0 + (1.0 - p) * p1;
            }
        }
    }
}
