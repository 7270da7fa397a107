use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::emit::emit_exponential;
use crate::basis::SpeciesKind;
use crate::error::{Error, Result};
use crate::qubitops::{FermionOp, Ladder, Mapping, ModeLayout, PauliSum};
use crate::sim::{Angle, Circuit, Gate};

/// Excitation classes of the multicomponent UCC pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExcitationLabel {
    T1e,
    T1p,
    T2ee,
    T2ep,
    T3eep,
}

impl ExcitationLabel {
    pub const ALL: [ExcitationLabel; 5] = [
        ExcitationLabel::T1e,
        ExcitationLabel::T1p,
        ExcitationLabel::T2ee,
        ExcitationLabel::T2ep,
        ExcitationLabel::T3eep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExcitationLabel::T1e => "t1e",
            ExcitationLabel::T1p => "t1p",
            ExcitationLabel::T2ee => "t2ee",
            ExcitationLabel::T2ep => "t2ep",
            ExcitationLabel::T3eep => "t3eep",
        }
    }

    /// Parses a comma-separated label list; an empty string is the empty pool.
    pub fn parse_list(s: &str) -> Result<Vec<ExcitationLabel>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for ExcitationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExcitationLabel::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

impl fmt::Display for ExcitationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One anti-Hermitian generator `T − T†` with its amplitude slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub label: ExcitationLabel,
    /// Excitation in mode indices, e.g. `014->235`.
    pub name: String,
    pub op: FermionOp,
    pub slot: usize,
}

/// Ordered set of generators; slots are `0..n_params` in pool order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationPool {
    pub n_modes: usize,
    pub reference: u64,
    pub generators: Vec<Generator>,
    pub n_params: usize,
}

/// Mode indices of the minimal two-orbital layout.
struct MinimalModes {
    /// `e[s][σ]`.
    e: [[usize; 2]; 2],
    /// `p[s]`.
    p: [usize; 2],
}

fn minimal_modes(layout: &ModeLayout) -> Result<MinimalModes> {
    let bad = |why: &str| Error::LayoutMismatch(format!("excitation pool needs 2 electrons in 2 spatial orbitals plus one quantum particle in 2 orbitals: {why}"));
    if layout.species.len() != 2 {
        return Err(bad("expected exactly two species"));
    }
    let (e, q) = (&layout.species[0], &layout.species[1]);
    if e.kind != SpeciesKind::Electron || e.n_spatial != 2 || e.count != 2 || e.spin_orbitals_per_spatial != 2 {
        return Err(bad("electron block"));
    }
    if q.kind == SpeciesKind::Electron || q.n_spatial != 2 || q.count != 1 || q.spin_orbitals_per_spatial != 1 {
        return Err(bad("quantum particle block"));
    }
    Ok(MinimalModes {
        e: [[e.mode(0, 0), e.mode(0, 1)], [e.mode(1, 0), e.mode(1, 1)]],
        p: [q.mode(0, 0), q.mode(1, 0)],
    })
}

/// `a†_{to[0]} a†_{to[1]} … a_{from[1]} a_{from[0]} − h.c.`
fn excitation(n_modes: usize, from: &[usize], to: &[usize]) -> FermionOp {
    let mut word: Vec<Ladder> = to.iter().map(|&m| Ladder::create(m)).collect();
    word.extend(from.iter().rev().map(|&m| Ladder::annihilate(m)));
    let mut t = FermionOp::zero(n_modes);
    t.add_product(Complex64::new(1.0, 0.0), &word);
    t.add(&t.adjoint().scale(Complex64::new(-1.0, 0.0)))
}

fn excitation_name(from: &[usize], to: &[usize]) -> String {
    let f: String = from.iter().map(|m| m.to_string()).collect();
    let t: String = to.iter().map(|m| m.to_string()).collect();
    format!("{f}->{t}")
}

/// Excitations (occupied, virtual) of one label.
fn label_excitations(label: ExcitationLabel, m: &MinimalModes) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (e, p) = (&m.e, &m.p);
    match label {
        ExcitationLabel::T1e => vec![(vec![e[0][0]], vec![e[1][0]]), (vec![e[0][1]], vec![e[1][1]])],
        ExcitationLabel::T1p => vec![(vec![p[0]], vec![p[1]])],
        ExcitationLabel::T2ee => vec![(vec![e[0][0], e[0][1]], vec![e[1][0], e[1][1]])],
        ExcitationLabel::T2ep => vec![
            (vec![e[0][0], p[0]], vec![e[1][0], p[1]]),
            (vec![e[0][1], p[0]], vec![e[1][1], p[1]]),
        ],
        ExcitationLabel::T3eep => vec![(vec![e[0][0], e[0][1], p[0]], vec![e[1][0], e[1][1], p[1]])],
    }
}

/// Builds the pool for `labels`, one amplitude per excitation, in canonical
/// label order regardless of the order given.
pub fn build_pool(labels: &[ExcitationLabel], layout: &ModeLayout) -> Result<ExcitationPool> {
    let modes = minimal_modes(layout)?;
    let n = layout.n_modes();
    let mut sorted = labels.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut generators = Vec::new();
    for label in sorted {
        for (from, to) in label_excitations(label, &modes) {
            generators.push(Generator {
                label,
                name: excitation_name(&from, &to),
                op: excitation(n, &from, &to),
                slot: generators.len(),
            });
        }
    }
    Ok(ExcitationPool {
        n_modes: n,
        reference: layout.reference_occupation(),
        n_params: generators.len(),
        generators,
    })
}

/// One generator per label: the label's excitations summed under a shared amplitude.
pub fn build_label_pool(labels: &[ExcitationLabel], layout: &ModeLayout) -> Result<ExcitationPool> {
    let fine = build_pool(labels, layout)?;
    let mut generators: Vec<Generator> = Vec::new();
    for g in fine.generators {
        match generators.last_mut() {
            Some(last) if last.label == g.label => {
                last.op = last.op.add(&g.op);
                last.name = format!("{}+{}", last.name, g.name);
            }
            _ => generators.push(Generator {
                slot: generators.len(),
                ..g
            }),
        }
    }
    Ok(ExcitationPool {
        n_params: generators.len(),
        generators,
        ..fine
    })
}

impl ExcitationPool {
    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    /// Mapped generators, each a sum `Σ i·r_k P_k` with real `r_k`.
    pub fn mapped(&self, mapping: Mapping) -> Vec<PauliSum> {
        self.generators.iter().map(|g| mapping.map(&g.op)).collect()
    }
}

/// X gates preparing the encoded occupation `reference` from `|0…0⟩`.
pub fn reference_circuit(n_modes: usize, reference: u64, mapping: Mapping, n_params: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n_modes, n_params);
    let bits = mapping.encode_occupation(reference, n_modes);
    for q in 0..n_modes {
        if bits >> q & 1 == 1 {
            c.push(Gate::x(q))?;
        }
    }
    Ok(c)
}

/// Reference preparation followed by one first-order Trotter step of every
/// generator, in pool order, with each generator's Pauli terms in
/// lexicographic order sharing the generator's amplitude slot.
pub fn trotter_circuit(pool: &ExcitationPool, mapping: Mapping) -> Result<Circuit> {
    let mut c = reference_circuit(pool.n_modes, pool.reference, mapping, pool.n_params)?;
    for (g, mapped) in pool.generators.iter().zip(pool.mapped(mapping)) {
        if mapped.n_qubits() != pool.n_modes {
            return Err(Error::LayoutMismatch(format!(
                "generator {} maps to {} qubits, expected {}",
                g.name,
                mapped.n_qubits(),
                pool.n_modes
            )));
        }
        emit_exponential(&mut c, &mapped, Angle::param(g.slot, 1.0))?;
    }
    Ok(c)
}
