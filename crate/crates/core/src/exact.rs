//! Full configuration interaction within a fixed particle-number sector.
//!
//! The Hamiltonian is densified on the sector's basis states only and handed
//! to a dense symmetric eigensolver. Complex Hermitian blocks are solved through
//! the real embedding `[[A, -B], [B, A]]`, whose spectrum is that of `A + iB`
//! with every eigenvalue doubled.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::real_embedding;
use crate::qubitops::{FermionOp, Mapping, ModeLayout, PauliSum, MAX_DENSE_QUBITS};

#[derive(Debug, Clone)]
pub struct FciResult {
    pub energy: f64,
    /// Ground vector, one amplitude per entry of `basis`.
    pub vector: Vec<Complex64>,
    /// Basis states of the sector (occupations or encoded qubit states).
    pub basis: Vec<u64>,
    pub sector_dim: usize,
    pub full_dim: usize,
    /// `‖Hv − Ev‖` of the returned pair.
    pub residual: f64,
}

impl FciResult {
    /// Ground vector scattered into the full `2^n` register.
    pub fn full_state(&self) -> Vec<Complex64> {
        let mut psi = vec![Complex64::default(); self.full_dim];
        for (b, a) in self.basis.iter().zip(&self.vector) {
            psi[*b as usize] = *a;
        }
        psi
    }
}

/// Occupation bitstrings with exactly `counts[k]` particles in species `k`.
pub fn sector_occupations(layout: &ModeLayout, counts: &[usize]) -> Result<Vec<u64>> {
    if counts.len() != layout.species.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} particle counts for {} species",
            counts.len(),
            layout.species.len()
        )));
    }
    let n = layout.n_modes();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits(n, MAX_DENSE_QUBITS));
    }
    let states: Vec<u64> = (0..1u64 << n).filter(|&b| layout.counts(b) == counts).collect();
    if states.is_empty() {
        return Err(Error::EmptySector(format!("counts {counts:?}")));
    }
    Ok(states)
}

/// Lowest eigenpair of a fermionic Hamiltonian on the given occupation states.
pub fn fci_fermion(h: &FermionOp, occupations: &[u64]) -> Result<FciResult> {
    if h.n_modes() > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits(h.n_modes(), MAX_DENSE_QUBITS));
    }
    let index = index_map(occupations, h.n_modes())?;
    let d = occupations.len();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for (col, &b) in occupations.iter().enumerate() {
        for (amp, row) in h.apply_to_occupation(b) {
            if let Some(r) = index[row as usize] {
                m[(r, col)] += amp;
            }
        }
    }
    ground(&m, occupations.to_vec(), 1 << h.n_modes())
}

/// Lowest eigenpair of a qubit Hamiltonian on the given computational states.
pub fn fci_pauli(h: &PauliSum, states: &[u64]) -> Result<FciResult> {
    let n = h.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits(n, MAX_DENSE_QUBITS));
    }
    let index = index_map(states, n)?;
    let d = states.len();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for (p, c) in h.terms() {
        for (col, &b) in states.iter().enumerate() {
            let (phase, row) = p.apply_basis(b as usize);
            if let Some(r) = index[row] {
                m[(r, col)] += c * phase;
            }
        }
    }
    ground(&m, states.to_vec(), 1 << n)
}

/// FCI of a mapped Hamiltonian in the species-number sector `counts`.
pub fn fci_ground_state(h: &PauliSum, layout: &ModeLayout, mapping: Mapping, counts: &[usize]) -> Result<FciResult> {
    if h.n_qubits() != layout.n_modes() {
        return Err(Error::LayoutMismatch(format!(
            "{}-qubit operator for a {}-mode layout",
            h.n_qubits(),
            layout.n_modes()
        )));
    }
    let n = layout.n_modes();
    let states: Vec<u64> = sector_occupations(layout, counts)?
        .into_iter()
        .map(|b| mapping.encode_occupation(b, n))
        .collect();
    fci_pauli(h, &states)
}

/// FCI over every computational basis state.
pub fn fci_all(h: &PauliSum) -> Result<FciResult> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits(h.n_qubits(), MAX_DENSE_QUBITS));
    }
    let states: Vec<u64> = (0..1u64 << h.n_qubits()).collect();
    fci_pauli(h, &states)
}

fn index_map(states: &[u64], n: usize) -> Result<Vec<Option<usize>>> {
    if states.is_empty() {
        return Err(Error::EmptySector("no basis states".into()));
    }
    let mut index = vec![None; 1 << n];
    for (k, &b) in states.iter().enumerate() {
        let slot = index
            .get_mut(b as usize)
            .ok_or_else(|| Error::DimensionMismatch(format!("state {b:#b} outside a {n}-qubit register")))?;
        *slot = Some(k);
    }
    Ok(index)
}

fn ground(m: &DMatrix<Complex64>, basis: Vec<u64>, full_dim: usize) -> Result<FciResult> {
    let d = m.nrows();
    let real = m.iter().all(|z| z.im == 0.0);
    let (energy, vector) = if real {
        let eig = SymmetricEigen::new(m.map(|z| z.re));
        let k = argmin(eig.eigenvalues.as_slice());
        let v = eig.eigenvectors.column(k).iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        (eig.eigenvalues[k], v)
    } else {
        let eig = SymmetricEigen::new(real_embedding(m));
        let k = argmin(eig.eigenvalues.as_slice());
        let col = eig.eigenvectors.column(k);
        let mut v: Vec<Complex64> = (0..d).map(|i| Complex64::new(col[i], col[i + d])).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        (eig.eigenvalues[k], v)
    };
    let mut residual = 0.0;
    for i in 0..d {
        let hv: Complex64 = (0..d).map(|j| m[(i, j)] * vector[j]).sum();
        residual += (hv - vector[i] * energy).norm_sqr();
    }
    Ok(FciResult {
        energy,
        vector,
        basis,
        sector_dim: d,
        full_dim,
        residual: residual.sqrt(),
    })
}

fn argmin(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubitops::PauliString;

    #[test]
    fn single_z_ground_is_minus_one() {
        let z = PauliSum::from_terms(1, [(Complex64::new(1.0, 0.0), PauliString::from_label("Z").unwrap())]);
        let r = fci_all(&z).unwrap();
        assert_eq!(r.energy, -1.0);
        assert_eq!(r.basis[r.vector.iter().position(|a| a.norm() > 0.5).unwrap()], 1);
    }

    #[test]
    fn complex_hermitian_uses_embedding() {
        // 0.3 X + 0.4 Y + 0.5 Z has eigenvalues ±sqrt(0.5).
        let h = PauliSum::from_text("+0.3 X\n+0.4 Y\n+0.5 Z").unwrap();
        let r = fci_all(&h).unwrap();
        assert!((r.energy + 0.5f64.sqrt()).abs() < 1e-14);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn empty_sector_is_an_error() {
        let h = PauliSum::from_text("+1.0 ZZ").unwrap();
        assert!(matches!(fci_pauli(&h, &[]), Err(Error::EmptySector(_))));
    }
}
