use num_complex::Complex64;

use super::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::qubitops::{PauliString, PauliSum};

/// A gate with its angle resolved, ready to act on amplitudes.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Op {
    X(usize),
    Sx(usize),
    SxDg(usize),
    Cnot(usize, usize),
    /// `exp(-iθP/2)`.
    Evolve(PauliString, f64),
}

impl Op {
    pub(crate) fn resolve(gate: &Gate, params: Option<&[f64]>) -> Result<Op> {
        let q = &gate.qubits;
        Ok(match &gate.kind {
            GateKind::X => Op::X(q[0]),
            GateKind::Sx => Op::Sx(q[0]),
            GateKind::SxDg => Op::SxDg(q[0]),
            GateKind::Cnot => Op::Cnot(q[0], q[1]),
            kind => {
                let theta = kind.angle().expect("rotation gate").value(params)?;
                Op::Evolve(gate.generator().expect("rotation gate"), theta)
            }
        })
    }

    /// The complex conjugate gate, shifted up by `shift` qubits.
    pub(crate) fn conjugate_shifted(self, shift: usize) -> Op {
        match self {
            Op::X(q) => Op::X(q + shift),
            Op::Sx(q) => Op::SxDg(q + shift),
            Op::SxDg(q) => Op::Sx(q + shift),
            Op::Cnot(c, t) => Op::Cnot(c + shift, t + shift),
            Op::Evolve(p, theta) => {
                // conj(exp(-iθP/2)) = exp(iθP*/2) with P* = (-1)^{#Y} P
                let sign = if p.n_y() % 2 == 1 { 1.0 } else { -1.0 };
                let shifted = PauliString {
                    x: p.x << shift,
                    z: p.z << shift,
                };
                Op::Evolve(shifted, sign * theta)
            }
        }
    }

    pub(crate) fn apply(self, psi: &mut [Complex64]) {
        match self {
            Op::X(q) => {
                let bit = 1 << q;
                for b in 0..psi.len() {
                    if b & bit == 0 {
                        psi.swap(b, b | bit);
                    }
                }
            }
            Op::Sx(q) | Op::SxDg(q) => {
                let (p, m) = (Complex64::new(0.5, 0.5), Complex64::new(0.5, -0.5));
                let (d, o) = if matches!(self, Op::Sx(_)) { (p, m) } else { (m, p) };
                let bit = 1 << q;
                for b in 0..psi.len() {
                    if b & bit == 0 {
                        let (a0, a1) = (psi[b], psi[b | bit]);
                        psi[b] = d * a0 + o * a1;
                        psi[b | bit] = o * a0 + d * a1;
                    }
                }
            }
            Op::Cnot(c, t) => {
                let (cb, tb) = (1 << c, 1 << t);
                for b in 0..psi.len() {
                    if b & cb != 0 && b & tb == 0 {
                        psi.swap(b, b | tb);
                    }
                }
            }
            Op::Evolve(p, theta) => evolve(psi, &p, theta),
        }
    }
}

/// `ψ ← exp(-iθP/2) ψ`.
fn evolve(psi: &mut [Complex64], p: &PauliString, theta: f64) {
    let (s, c) = (0.5 * theta).sin_cos();
    let minus_i_sin = Complex64::new(0.0, -s);
    if p.x == 0 {
        let plus = Complex64::new(c, -s);
        let minus = Complex64::new(c, s);
        for (b, amp) in psi.iter_mut().enumerate() {
            *amp *= if (b as u64 & p.z).count_ones() % 2 == 0 { plus } else { minus };
        }
        return;
    }
    for b in 0..psi.len() {
        let (ph_b, b2) = p.apply_basis(b);
        if b < b2 {
            let (ph_b2, _) = p.apply_basis(b2);
            let (a, a2) = (psi[b], psi[b2]);
            psi[b] = a * c + minus_i_sin * ph_b2 * a2;
            psi[b2] = a2 * c + minus_i_sin * ph_b * a;
        }
    }
}

/// Parses a bitstring with qubit 0 first.
pub fn parse_bitstring(bits: &str, n_qubits: usize) -> Result<usize> {
    if bits.len() != n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "initial bitstring `{bits}` has length {}, circuit has {n_qubits} qubits",
            bits.len()
        )));
    }
    bits.chars().enumerate().try_fold(0usize, |acc, (q, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << q),
        other => Err(Error::DimensionMismatch(format!("bad bit `{other}` in `{bits}`"))),
    })
}

/// Formats a basis index as a bitstring with qubit 0 first.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).map(|q| if index >> q & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn basis_state(index: usize, n_qubits: usize) -> Vec<Complex64> {
    let mut psi = vec![Complex64::default(); 1 << n_qubits];
    psi[index] = Complex64::new(1.0, 0.0);
    psi
}

/// Runs a bound circuit on the bitstring `initial` (qubit 0 first).
pub fn run_statevector(c: &Circuit, initial: &str) -> Result<Vec<Complex64>> {
    if let Some(k) = c.unbound_slot() {
        return Err(Error::UnboundParameter(k));
    }
    let index = parse_bitstring(initial, c.n_qubits())?;
    run_with_params(c, &[], index)
}

/// Runs a circuit from basis state `initial`, reading free angles from `params`.
pub fn run_with_params(c: &Circuit, params: &[f64], initial: usize) -> Result<Vec<Complex64>> {
    let mut psi = basis_state(initial, c.n_qubits());
    evolve_state(c, params, &mut psi)?;
    Ok(psi)
}

/// Applies a circuit in place.
pub fn evolve_state(c: &Circuit, params: &[f64], psi: &mut [Complex64]) -> Result<()> {
    if psi.len() != 1 << c.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} for {} qubits",
            psi.len(),
            c.n_qubits()
        )));
    }
    for g in c.gates() {
        Op::resolve(g, Some(params))?.apply(psi);
    }
    Ok(())
}

/// `⟨ψ|H|ψ⟩` for Hermitian `H`.
pub fn expectation(state: &[Complex64], h: &PauliSum) -> Result<f64> {
    Ok(h.expectation_complex(state)?.re)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubitops::pauli_matrix;
    use crate::sim::Angle;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn empty_circuit_keeps_state() {
        let circ = Circuit::new(6, 0);
        let psi = run_statevector(&circ, "000000").unwrap();
        assert_eq!(psi[0], c(1.0));
        assert!(run_statevector(&circ, "0000").is_err());
    }

    #[test]
    fn x_on_qubit_zero() {
        let mut circ = Circuit::new(6, 0);
        circ.push(Gate::x(0)).unwrap();
        let psi = run_statevector(&circ, "000000").unwrap();
        let k = psi.iter().position(|a| a.norm() > 0.5).unwrap();
        assert_eq!(bitstring(k, 6), "100000");
    }

    #[test]
    fn rz_inverse_pair_is_identity() {
        let mut circ = Circuit::new(2, 0);
        circ.push(Gate::sx(0)).unwrap();
        circ.push(Gate::rz(0, Angle::fixed(0.7))).unwrap();
        circ.push(Gate::rz(0, Angle::fixed(-0.7))).unwrap();
        let mut reference = Circuit::new(2, 0);
        reference.push(Gate::sx(0)).unwrap();
        let a = run_statevector(&circ, "01").unwrap();
        let b = run_statevector(&reference, "01").unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let mut circ = Circuit::new(1, 1);
        circ.push(Gate::rz(0, Angle::param(0, 1.0))).unwrap();
        assert!(matches!(run_statevector(&circ, "0"), Err(Error::UnboundParameter(0))));
        assert!(run_statevector(&circ.bind(&[0.3]).unwrap(), "0").is_ok());
    }

    #[test]
    fn z_expectation_on_zero() {
        let z = PauliSum::from_text("+1 Z").unwrap();
        assert_eq!(expectation(&basis_state(0, 1), &z).unwrap(), 1.0);
    }

    #[test]
    fn sx_squares_to_x() {
        let mut circ = Circuit::new(1, 0);
        circ.extend([Gate::sx(0), Gate::sx(0)]).unwrap();
        let psi = run_statevector(&circ, "0").unwrap();
        assert!((psi[1] - c(1.0)).norm() < 1e-15);
    }

    /// Dense `exp(-iθP/2) = cos(θ/2) I - i sin(θ/2) P`.
    fn dense_rotation(label: &str, theta: f64) -> DMatrix<Complex64> {
        let n = label.len();
        let p = PauliSum::from_terms(n, [(c(1.0), PauliString::from_label(label).unwrap())]);
        let m = pauli_matrix(&p).unwrap();
        DMatrix::identity(1 << n, 1 << n) * c((theta / 2.0).cos()) - m * Complex64::new(0.0, (theta / 2.0).sin())
    }

    fn arb_state(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_map(|v| {
            let mut psi: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
            psi.iter_mut().for_each(|z| *z /= norm);
            psi
        })
    }

    fn arb_label(n: usize) -> impl Strategy<Value = String> {
        proptest::collection::vec(prop::sample::select(vec!['I', 'X', 'Y', 'Z']), n).prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn evolution_matches_dense_exponential(label in arb_label(3), theta in -3.0f64..3.0, psi in arb_state(3)) {
            let mut circ = Circuit::new(3, 0);
            circ.push(Gate::pauli_evolution(PauliString::from_label(&label).unwrap(), Angle::fixed(theta))).unwrap();
            let mut out = psi.clone();
            evolve_state(&circ, &[], &mut out).unwrap();
            let expect = dense_rotation(&label, theta) * DVector::from_vec(psi);
            for (a, b) in out.iter().zip(expect.iter()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn expectation_matches_dense_oracle(psi in arb_state(3), l1 in arb_label(3), l2 in arb_label(3), a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let h = PauliSum::from_terms(3, [(c(a), PauliString::from_label(&l1).unwrap()), (c(b), PauliString::from_label(&l2).unwrap())]);
            let m = pauli_matrix(&h).unwrap();
            let v = DVector::from_vec(psi.clone());
            let dense = (v.adjoint() * &m * &v)[(0, 0)].re;
            prop_assert!((expectation(&psi, &h).unwrap() - dense).abs() < 1e-10);
        }

        #[test]
        fn gates_preserve_norm(psi in arb_state(3), theta in -3.0f64..3.0) {
            let mut circ = Circuit::new(3, 0);
            circ.extend([
                Gate::sx(0), Gate::cnot(0, 2), Gate::rxx(1, 2, Angle::fixed(theta)),
                Gate::ryy(0, 1, Angle::fixed(-theta)), Gate::rzz(0, 2, Angle::fixed(0.3)), Gate::x(1), Gate::sxdg(2),
            ]).unwrap();
            let mut out = psi.clone();
            evolve_state(&circ, &[], &mut out).unwrap();
            let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            evolve_state(&circ.inverse(), &[], &mut out).unwrap();
            prop_assert!((fidelity(&out, &psi) - 1.0).abs() < 1e-12);
        }
    }
}
