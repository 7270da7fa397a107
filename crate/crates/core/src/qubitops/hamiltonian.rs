use num_complex::Complex64;

use super::fermion::{FermionOp, Ladder};
use crate::basis::SpeciesKind;
use crate::error::{Error, Result};
use crate::integrals::{IntegralSet, Representation};

/// Contiguous block of modes belonging to one species.
///
/// Within a block the spin index runs fastest: mode
/// `offset + spatial * spin_orbitals_per_spatial + spin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpeciesModes {
    pub kind: SpeciesKind,
    pub offset: usize,
    pub n_spatial: usize,
    pub spin_orbitals_per_spatial: usize,
    pub count: usize,
}

impl SpeciesModes {
    pub fn n_modes(&self) -> usize {
        self.n_spatial * self.spin_orbitals_per_spatial
    }

    pub fn mode(&self, spatial: usize, spin: usize) -> usize {
        debug_assert!(spatial < self.n_spatial && spin < self.spin_orbitals_per_spatial);
        self.offset + spatial * self.spin_orbitals_per_spatial + spin
    }

    pub fn modes(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.n_modes()
    }

    /// Aufbau filling of the lowest spin orbitals (alpha before beta).
    pub fn reference_bits(&self) -> u64 {
        (0..self.count.min(self.n_modes())).fold(0u64, |acc, k| acc | 1 << (self.offset + k))
    }

    pub fn mask(&self) -> u64 {
        self.modes().fold(0u64, |acc, m| acc | 1 << m)
    }
}

/// Mode ordering of a multicomponent system; species appear in integral-set order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeLayout {
    pub species: Vec<SpeciesModes>,
}

impl ModeLayout {
    pub fn for_integrals(ints: &IntegralSet) -> Self {
        let mut offset = 0;
        let species = ints
            .species
            .iter()
            .map(|block| {
                let s = SpeciesModes {
                    kind: block.species.kind,
                    offset,
                    n_spatial: block.dim(),
                    spin_orbitals_per_spatial: block.species.spin_orbitals_per_spatial,
                    count: block.species.count,
                };
                offset += s.n_modes();
                s
            })
            .collect();
        Self { species }
    }

    pub fn n_modes(&self) -> usize {
        self.species.iter().map(SpeciesModes::n_modes).sum()
    }

    pub fn get(&self, kind: SpeciesKind) -> Option<&SpeciesModes> {
        self.species.iter().find(|s| s.kind == kind)
    }

    /// Hartree-Fock occupation bitstring in the MO basis.
    pub fn reference_occupation(&self) -> u64 {
        self.species.iter().fold(0, |acc, s| acc | s.reference_bits())
    }

    pub fn species_of_mode(&self, mode: usize) -> Option<usize> {
        self.species.iter().position(|s| s.modes().contains(&mode))
    }

    /// Particle-number operator of species `k`.
    pub fn number_operator(&self, k: usize) -> FermionOp {
        let mut op = FermionOp::zero(self.n_modes());
        for m in self.species[k].modes() {
            op.add_product(Complex64::new(1.0, 0.0), &[Ladder::create(m), Ladder::annihilate(m)]);
        }
        op
    }

    /// Per-species particle counts of an occupation bitstring.
    pub fn counts(&self, bits: u64) -> Vec<usize> {
        self.species.iter().map(|s| (bits & s.mask()).count_ones() as usize).collect()
    }

    fn check(&self, ints: &IntegralSet) -> Result<()> {
        if ints.representation != Representation::Mo {
            return Err(Error::LayoutMismatch("second quantization expects MO-basis integrals".into()));
        }
        if self.species.len() != ints.species.len() {
            return Err(Error::LayoutMismatch(format!(
                "layout has {} species, integrals have {}",
                self.species.len(),
                ints.species.len()
            )));
        }
        for (s, block) in self.species.iter().zip(&ints.species) {
            if s.kind != block.species.kind
                || s.n_spatial != block.dim()
                || s.spin_orbitals_per_spatial != block.species.spin_orbitals_per_spatial
            {
                return Err(Error::LayoutMismatch(format!(
                    "{} block: layout {}x{} modes, integrals {}x{}",
                    block.species.kind.name(),
                    s.n_spatial,
                    s.spin_orbitals_per_spatial,
                    block.dim(),
                    block.species.spin_orbitals_per_spatial
                )));
            }
        }
        let mut expected = 0;
        for s in &self.species {
            if s.offset != expected {
                return Err(Error::LayoutMismatch(format!("{} block starts at mode {}", s.kind.name(), s.offset)));
            }
            expected += s.n_modes();
        }
        if expected > 64 {
            return Err(Error::TooManyQubits(expected, 64));
        }
        Ok(())
    }
}

/// Builds the second-quantized Hamiltonian from MO integrals.
///
/// Same-species terms are `Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ`
/// and each cross block contributes `Σ (ij|KL) a†_iσ a_jσ a†_Kτ a_Lτ`; the
/// classical nuclear repulsion becomes the identity coefficient.
pub fn second_quantize(ints: &IntegralSet, layout: &ModeLayout) -> Result<FermionOp> {
    layout.check(ints)?;
    let n = layout.n_modes();
    let mut h = FermionOp::identity(n, Complex64::new(ints.e_nn, 0.0));
    let re = |x: f64| Complex64::new(x, 0.0);

    for (block, modes) in ints.species.iter().zip(&layout.species) {
        let dim = block.dim();
        let spins = modes.spin_orbitals_per_spatial;
        for p in 0..dim {
            for q in 0..dim {
                let v = block.h1[(p, q)];
                if v == 0.0 {
                    continue;
                }
                for s in 0..spins {
                    h.add_product(re(v), &[Ladder::create(modes.mode(p, s)), Ladder::annihilate(modes.mode(q, s))]);
                }
            }
        }
        for p in 0..dim {
            for q in 0..dim {
                for r in 0..dim {
                    for t in 0..dim {
                        let v = block.eri.get(p, q, r, t);
                        if v == 0.0 {
                            continue;
                        }
                        for s1 in 0..spins {
                            for s2 in 0..spins {
                                h.add_product(
                                    re(0.5 * v),
                                    &[
                                        Ladder::create(modes.mode(p, s1)),
                                        Ladder::create(modes.mode(r, s2)),
                                        Ladder::annihilate(modes.mode(t, s2)),
                                        Ladder::annihilate(modes.mode(q, s1)),
                                    ],
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    for x in &ints.cross {
        let (a, b) = (&layout.species[x.first], &layout.species[x.second]);
        let [n1, _, n2, _] = x.eri.dims();
        for i in 0..n1 {
            for j in 0..n1 {
                for k in 0..n2 {
                    for l in 0..n2 {
                        let v = x.eri.get(i, j, k, l);
                        if v == 0.0 {
                            continue;
                        }
                        for s1 in 0..a.spin_orbitals_per_spatial {
                            for s2 in 0..b.spin_orbitals_per_spatial {
                                h.add_product(
                                    re(v),
                                    &[
                                        Ladder::create(a.mode(i, s1)),
                                        Ladder::annihilate(a.mode(j, s1)),
                                        Ladder::create(b.mode(k, s2)),
                                        Ladder::annihilate(b.mode(l, s2)),
                                    ],
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(h)
}
