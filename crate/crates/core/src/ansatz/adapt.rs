//! ADAPT operator selection.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qubitops::PauliSum;

/// Generator chosen by one ADAPT step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptChoice {
    pub index: usize,
    /// `dE/dθ` at `θ = 0` for appending `exp(θ G)`.
    pub gradient: f64,
}

/// `⟨ψ|[H, G]|ψ⟩ = 2 Re⟨Hψ|Gψ⟩` for every mapped generator.
pub fn pool_gradients(state: &[Complex64], pool: &[PauliSum], h: &PauliSum) -> Result<Vec<f64>> {
    let hpsi = h.apply(state)?;
    pool.iter()
        .map(|g| {
            let gpsi = g.apply(state)?;
            let overlap: Complex64 = hpsi.iter().zip(&gpsi).map(|(a, b)| a.conj() * b).sum();
            Ok(2.0 * overlap.re)
        })
        .collect()
}

/// Largest-magnitude gradient; ties go to the lowest pool index.
pub fn adapt_step(state: &[Complex64], pool: &[PauliSum], h: &PauliSum) -> Result<AdaptChoice> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let grads = pool_gradients(state, pool, h)?;
    let mut best = AdaptChoice { index: 0, gradient: grads[0] };
    for (index, &gradient) in grads.iter().enumerate().skip(1) {
        if gradient.abs() > best.gradient.abs() {
            best = AdaptChoice { index, gradient };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_label_pool, build_pool, trotter_circuit, Ansatz, ExcitationLabel};
    use crate::basis::BuiltinSystem;
    use crate::qubitops::Mapping;
    use crate::sim::{basis_state, expectation, Circuit, Gate};
    use crate::testutil::mo_system;

    fn hf_state(mapping: Mapping) -> Vec<Complex64> {
        let sys = mo_system(BuiltinSystem::HHq);
        let bits = mapping.encode_occupation(sys.layout.reference_occupation(), 6);
        basis_state(bits as usize, 6)
    }

    #[test]
    fn gradients_equal_commutator_expectations() {
        let sys = mo_system(BuiltinSystem::HHq);
        for mapping in [Mapping::JordanWigner, Mapping::BravyiKitaev] {
            let h = sys.hamiltonian(mapping);
            let pool = build_pool(&ExcitationLabel::ALL, &sys.layout).unwrap().mapped(mapping);
            // a correlated state, so that no gradient is trivially zero
            let mut c = Circuit::new(6, 0);
            for q in 0..6 {
                c.push(Gate::rz(q, crate::sim::Angle::fixed(0.3 + 0.1 * q as f64))).unwrap();
                c.push(Gate::sx(q)).unwrap();
            }
            let psi = c.state(&[]).unwrap();
            let grads = pool_gradients(&psi, &pool, &h).unwrap();
            for (g, grad) in pool.iter().zip(grads) {
                let comm = h.commutator(g).expectation_complex(&psi).unwrap();
                assert!(comm.im.abs() < 1e-12);
                assert!((comm.re - grad).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singles_vanish_at_the_reference() {
        let sys = mo_system(BuiltinSystem::HHq);
        let pool = build_label_pool(&ExcitationLabel::ALL, &sys.layout).unwrap();
        let mapped = pool.mapped(Mapping::JordanWigner);
        let grads = pool_gradients(&hf_state(Mapping::JordanWigner), &mapped, &sys.hamiltonian(Mapping::JordanWigner)).unwrap();
        for (g, grad) in pool.generators.iter().zip(&grads) {
            if matches!(g.label, ExcitationLabel::T1e | ExcitationLabel::T1p) {
                assert!(grad.abs() < 1e-8, "{}: {grad}", g.label);
            }
        }
        let choice = adapt_step(&hf_state(Mapping::JordanWigner), &mapped, &sys.hamiltonian(Mapping::JordanWigner)).unwrap();
        assert_eq!(pool.generators[choice.index].label, ExcitationLabel::T2ee);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let sys = mo_system(BuiltinSystem::HHq);
        let h = sys.hamiltonian(Mapping::JordanWigner);
        let pool = build_pool(&ExcitationLabel::ALL, &sys.layout).unwrap();
        let grads = pool_gradients(&hf_state(Mapping::JordanWigner), &pool.mapped(Mapping::JordanWigner), &h).unwrap();
        let c = trotter_circuit(&pool, Mapping::JordanWigner).unwrap();
        let step = 1e-4;
        for (k, grad) in grads.iter().enumerate() {
            let e = |t: f64| {
                let mut x = vec![0.0; pool.n_params];
                x[k] = t;
                expectation(&c.state(&x).unwrap(), &h).unwrap()
            };
            let fd = (8.0 * (e(step) - e(-step)) - (e(2.0 * step) - e(-2.0 * step))) / (12.0 * step);
            assert!((fd - grad).abs() < 1e-6, "generator {k}: {fd} vs {grad}");
        }
    }

    #[test]
    fn single_generator_and_empty_pools() {
        let sys = mo_system(BuiltinSystem::HHq);
        let h = sys.hamiltonian(Mapping::JordanWigner);
        let pool = build_pool(&[ExcitationLabel::T1p], &sys.layout).unwrap().mapped(Mapping::JordanWigner);
        assert_eq!(adapt_step(&hf_state(Mapping::JordanWigner), &pool, &h).unwrap().index, 0);
        assert!(matches!(adapt_step(&hf_state(Mapping::JordanWigner), &[], &h), Err(Error::EmptyPool)));
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let sys = mo_system(BuiltinSystem::HHq);
        let h = sys.hamiltonian(Mapping::JordanWigner);
        let g = build_pool(&[ExcitationLabel::T2ee], &sys.layout).unwrap().mapped(Mapping::JordanWigner);
        let pool = vec![g[0].clone(), g[0].clone(), g[0].clone()];
        assert_eq!(adapt_step(&hf_state(Mapping::JordanWigner), &pool, &h).unwrap().index, 0);
    }
}
