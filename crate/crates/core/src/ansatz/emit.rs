//! Lowering of `exp(θ·G)` for a mapped anti-Hermitian generator `G = Σ i·r_k P_k`
//! with mutually commuting terms.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::qubitops::{PauliString, PauliSum};
use crate::sim::{Angle, Circuit, Gate};

fn scaled(base: Angle, factor: f64) -> Angle {
    Angle {
        slot: base.slot,
        scale: base.scale * factor,
        offset: base.offset * factor,
    }
}

/// Gate for `exp(-i·angle·P/2)`, using a native rotation where one exists.
pub(crate) fn lowered(p: PauliString, angle: Angle) -> Gate {
    let qubits: Vec<usize> = (0..64).filter(|q| p.support() >> q & 1 == 1).collect();
    match qubits.as_slice() {
        [q] if p.op(*q) == 'Z' => Gate::rz(*q, angle),
        [a, b] if b - a == 1 && p.op(*a) == p.op(*b) => match p.op(*a) {
            'X' => Gate::rxx(*a, *b, angle),
            'Y' => Gate::ryy(*a, *b, angle),
            _ => Gate::rzz(*a, *b, angle),
        },
        _ => Gate::pauli_evolution(p, angle),
    }
}

/// Splits `G` into `(r_k, P_k)`; fails if a coefficient has a real part.
fn imaginary_terms(g: &PauliSum) -> Result<Vec<(f64, PauliString)>> {
    g.terms()
        .filter(|(p, _)| **p != PauliString::IDENTITY)
        .map(|(p, c)| {
            if c.re.abs() > 1e-12 {
                Err(Error::InvalidCircuit(format!(
                    "generator term {} has real coefficient {}",
                    p.label(g.n_qubits()),
                    c.re
                )))
            } else {
                Ok((c.im, *p))
            }
        })
        .collect()
}

/// If every term is `X_a Y_b` or `Y_a X_b` on one adjacent pair, returns the pair.
fn hopping_pair(terms: &[(f64, PauliString)]) -> Option<(usize, usize)> {
    let (_, first) = terms.first()?;
    let qs: Vec<usize> = (0..64).filter(|q| first.support() >> q & 1 == 1).collect();
    let &[a, b] = qs.as_slice() else { return None };
    if b != a + 1 {
        return None;
    }
    terms
        .iter()
        .all(|(_, p)| {
            p.support() == first.support() && matches!((p.op(a), p.op(b)), ('X', 'Y') | ('Y', 'X'))
        })
        .then_some((a, b))
}

/// Appends `exp(θ·G)` where `θ` is `base`. Identity terms only contribute a
/// global phase and are skipped.
pub(crate) fn emit_exponential(c: &mut Circuit, g: &PauliSum, base: Angle) -> Result<()> {
    let terms = imaginary_terms(g)?;
    // exp(θ·i·r·P) = exp(-i(-2rθ)P/2)
    if let Some((a, b)) = hopping_pair(&terms) {
        // S_b X_a Y_b S_b† = -X_a X_b and S_b Y_a X_b S_b† = Y_a Y_b, with S = rz(π/2) up to phase.
        c.push(Gate::rz(b, Angle::fixed(FRAC_PI_2)))?;
        for (r, p) in &terms {
            if p.op(a) == 'X' {
                c.push(Gate::rxx(a, b, scaled(base, 2.0 * r)))?;
            } else {
                c.push(Gate::ryy(a, b, scaled(base, -2.0 * r)))?;
            }
        }
        c.push(Gate::rz(b, Angle::fixed(-FRAC_PI_2)))?;
        return Ok(());
    }
    for (r, p) in terms {
        c.push(lowered(p, scaled(base, -2.0 * r)))?;
    }
    Ok(())
}
