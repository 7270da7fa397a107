use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::pauli::{PRUNE_TOL, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};

/// A single creation (`dagger = true`) or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    pub fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }

    /// Normal-order rank: creators first, each group by descending mode.
    fn rank(self) -> (u8, std::cmp::Reverse<usize>) {
        (u8::from(!self.dagger), std::cmp::Reverse(self.mode))
    }

    /// Acts on an occupation bitstring; returns the fermionic sign and new bits.
    pub fn apply(self, bits: u64) -> Option<(f64, u64)> {
        let bit = 1u64 << self.mode;
        let occupied = bits & bit != 0;
        if occupied == self.dagger {
            return None;
        }
        let below = (bits & (bit - 1)).count_ones();
        let sign = if below % 2 == 1 { -1.0 } else { 1.0 };
        Some((sign, bits ^ bit))
    }
}

/// Sum of products of ladder operators in normal order.
///
/// Each product is read left to right as an operator product, so
/// `[create(2), annihilate(0)]` is `a†₂ a₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOp {
    n_modes: usize,
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

impl FermionOp {
    pub fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_modes: usize, coefficient: Complex64) -> Self {
        let mut op = Self::zero(n_modes);
        op.add_product(coefficient, &[]);
        op
    }

    /// `a†_p a_q`.
    pub fn hop(n_modes: usize, p: usize, q: usize, coefficient: Complex64) -> Self {
        let mut op = Self::zero(n_modes);
        op.add_product(coefficient, &[Ladder::create(p), Ladder::annihilate(q)]);
        op
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], &Complex64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn constant(&self) -> Complex64 {
        self.terms.get(&Vec::new()).copied().unwrap_or_default()
    }

    /// Adds `coefficient * ops[0] ops[1] ...`, normal ordering on the way in.
    pub fn add_product(&mut self, coefficient: Complex64, ops: &[Ladder]) {
        assert!(
            ops.iter().all(|l| l.mode < self.n_modes),
            "ladder mode outside 0..{}",
            self.n_modes
        );
        if coefficient == Complex64::default() {
            return;
        }
        let mut stack = vec![(coefficient, ops.to_vec())];
        while let Some((c, mut word)) = stack.pop() {
            match normal_order_step(&mut word) {
                Step::Done => self.accumulate(c, word),
                Step::Vanishes => {}
                Step::Swapped { sign, contraction } => {
                    if let Some(rest) = contraction {
                        stack.push((c, rest));
                    }
                    stack.push((c * sign, word));
                }
            }
        }
    }

    fn accumulate(&mut self, c: Complex64, word: Vec<Ladder>) {
        let entry = self.terms.entry(word.clone()).or_default();
        *entry += c;
        if entry.norm() < PRUNE_TOL {
            self.terms.remove(&word);
        }
    }

    pub fn add(&self, other: &FermionOp) -> FermionOp {
        assert_eq!(self.n_modes, other.n_modes);
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.accumulate(*c, w.clone());
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> FermionOp {
        let mut out = FermionOp::zero(self.n_modes);
        for (w, c) in &self.terms {
            out.accumulate(c * s, w.clone());
        }
        out
    }

    pub fn mul(&self, other: &FermionOp) -> FermionOp {
        assert_eq!(self.n_modes, other.n_modes);
        let mut out = FermionOp::zero(self.n_modes);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let word: Vec<Ladder> = w1.iter().chain(w2).copied().collect();
                out.add_product(c1 * c2, &word);
            }
        }
        out
    }

    pub fn adjoint(&self) -> FermionOp {
        let mut out = FermionOp::zero(self.n_modes);
        for (w, c) in &self.terms {
            let word: Vec<Ladder> = w.iter().rev().map(|l| l.adjoint()).collect();
            out.add_product(c.conj(), &word);
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let diff = self.add(&self.adjoint().scale(Complex64::new(-1.0, 0.0)));
        diff.terms.values().all(|c| c.norm() <= tol)
    }

    /// Action on the occupation basis state `bits` (mode `j` = bit `j`).
    pub fn apply_to_occupation(&self, bits: u64) -> Vec<(Complex64, u64)> {
        let mut out: BTreeMap<u64, Complex64> = BTreeMap::new();
        'terms: for (w, c) in &self.terms {
            let mut state = bits;
            let mut amp = *c;
            for l in w.iter().rev() {
                match l.apply(state) {
                    Some((sign, next)) => {
                        amp *= sign;
                        state = next;
                    }
                    None => continue 'terms,
                }
            }
            *out.entry(state).or_default() += amp;
        }
        out.into_iter().filter(|(_, a)| a.norm() >= PRUNE_TOL).map(|(b, a)| (a, b)).collect()
    }

    /// Dense Fock-space matrix built directly from occupation bitstrings.
    pub fn occupation_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n_modes > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits(self.n_modes, MAX_DENSE_QUBITS));
        }
        let dim = 1usize << self.n_modes;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            for (amp, row) in self.apply_to_occupation(col as u64) {
                m[(row as usize, col)] += amp;
            }
        }
        Ok(m)
    }
}

enum Step {
    Done,
    Vanishes,
    Swapped {
        sign: f64,
        contraction: Option<Vec<Ladder>>,
    },
}

/// Performs one adjacent transposition toward normal order. On a swap,
/// `word` holds the swapped product and `contraction` the delta term.
fn normal_order_step(word: &mut Vec<Ladder>) -> Step {
    for i in 0..word.len().saturating_sub(1) {
        let (a, b) = (word[i], word[i + 1]);
        if a == b {
            return Step::Vanishes;
        }
        if a.rank() > b.rank() {
            let contraction = (a.mode == b.mode).then(|| {
                let mut rest = word[..i].to_vec();
                rest.extend_from_slice(&word[i + 2..]);
                rest
            });
            word.swap(i, i + 1);
            return Step::Swapped { sign: -1.0, contraction };
        }
    }
    Step::Done
}

impl fmt::Display for FermionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (w, c) in &self.terms {
            write!(f, "({:+.10e} {:+.10e}i)", c.re, c.im)?;
            for l in w {
                write!(f, " {}{}", l.mode, if l.dagger { "^" } else { "" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn anticommutator_reduces_to_identity() {
        let mut op = FermionOp::zero(3);
        op.add_product(c(1.0), &[Ladder::annihilate(1), Ladder::create(1)]);
        op.add_product(c(1.0), &[Ladder::create(1), Ladder::annihilate(1)]);
        assert_eq!(op, FermionOp::identity(3, c(1.0)));
    }

    #[test]
    fn repeated_operator_vanishes() {
        let mut op = FermionOp::zero(2);
        op.add_product(c(1.0), &[Ladder::create(0), Ladder::annihilate(1), Ladder::create(0)]);
        assert!(op.is_empty());
    }

    #[test]
    fn hermiticity_flag() {
        let hop = FermionOp::hop(3, 2, 0, c(0.5));
        assert!(!hop.is_hermitian(1e-14));
        assert!(hop.add(&hop.adjoint()).is_hermitian(1e-14));
    }

    #[test]
    fn occupation_action_signs() {
        // a₀ sees no occupied mode below it, a†₂ then passes the occupied mode 1.
        let hop = FermionOp::hop(3, 2, 0, c(1.0));
        assert_eq!(hop.apply_to_occupation(0b011), vec![(c(-1.0), 0b110)]);
        assert!(hop.apply_to_occupation(0b100).is_empty());
    }

    fn arb_word(n: usize) -> impl Strategy<Value = Vec<Ladder>> {
        proptest::collection::vec((0..n, any::<bool>()).prop_map(|(mode, dagger)| Ladder { mode, dagger }), 0..5)
    }

    /// Applies a raw (unordered) word directly to a bitstring.
    fn apply_raw(word: &[Ladder], bits: u64) -> Option<(f64, u64)> {
        let mut sign = 1.0;
        let mut state = bits;
        for l in word.iter().rev() {
            let (s, next) = l.apply(state)?;
            sign *= s;
            state = next;
        }
        Some((sign, state))
    }

    proptest! {
        #[test]
        fn normal_ordering_preserves_action(word in arb_word(4), bits in 0u64..16) {
            let mut op = FermionOp::zero(4);
            op.add_product(c(1.0), &word);
            for (w, _) in op.terms() {
                for pair in w.windows(2) {
                    prop_assert!(pair[0].rank() < pair[1].rank());
                }
            }
            let got = op.apply_to_occupation(bits);
            match apply_raw(&word, bits) {
                Some((s, b)) => prop_assert_eq!(got, vec![(c(s), b)]),
                None => prop_assert!(got.is_empty()),
            }
        }

        #[test]
        fn adjoint_matches_conjugate_transpose(w1 in arb_word(3), w2 in arb_word(3)) {
            let mut op = FermionOp::zero(3);
            op.add_product(Complex64::new(0.3, 0.7), &w1);
            op.add_product(Complex64::new(-1.1, 0.2), &w2);
            let m = op.occupation_matrix().unwrap();
            let ma = op.adjoint().occupation_matrix().unwrap();
            prop_assert!((m.adjoint() - ma).camax() < 1e-14);
        }

        #[test]
        fn product_matches_matrix_product(w1 in arb_word(3), w2 in arb_word(3)) {
            let mut a = FermionOp::zero(3);
            a.add_product(c(0.5), &w1);
            let mut b = FermionOp::zero(3);
            b.add_product(c(-2.0), &w2);
            let lhs = a.mul(&b).occupation_matrix().unwrap();
            let rhs = a.occupation_matrix().unwrap() * b.occupation_matrix().unwrap();
            prop_assert!((lhs - rhs).camax() < 1e-14);
        }
    }
}
