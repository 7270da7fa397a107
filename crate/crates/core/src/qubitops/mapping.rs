use std::collections::BTreeSet;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fermion::{FermionOp, Ladder};
use super::pauli::{PauliString, PauliSum};
use crate::error::{Error, Result};

/// Fermion-to-qubit encoding. Both use one qubit per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mapping {
    #[default]
    #[serde(rename = "jw")]
    JordanWigner,
    #[serde(rename = "bk")]
    BravyiKitaev,
}

impl Mapping {
    pub fn name(self) -> &'static str {
        match self {
            Mapping::JordanWigner => "jw",
            Mapping::BravyiKitaev => "bk",
        }
    }

    /// Qubit image of a single ladder operator on `n` modes.
    pub fn ladder(self, l: Ladder, n: usize) -> PauliSum {
        match self {
            Mapping::JordanWigner => jw_ladder(l, n),
            Mapping::BravyiKitaev => bk_ladder(l, n),
        }
    }

    pub fn map(self, op: &FermionOp) -> PauliSum {
        let n = op.n_modes();
        let ladders: Vec<[PauliSum; 2]> = (0..n)
            .map(|j| [self.ladder(Ladder::annihilate(j), n), self.ladder(Ladder::create(j), n)])
            .collect();
        let mut out = PauliSum::zero(n);
        for (word, c) in op.terms() {
            let mut term = PauliSum::identity(n, *c);
            for l in word {
                term = term.mul(&ladders[l.mode][usize::from(l.dagger)]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Computational basis state that represents the occupation `bits`.
    pub fn encode_occupation(self, bits: u64, n: usize) -> u64 {
        match self {
            Mapping::JordanWigner => bits,
            Mapping::BravyiKitaev => (0..n)
                .filter(|j| bits >> j & 1 == 1)
                .fold(0u64, |acc, j| update_set(j, n).iter().fold(acc, |a, q| a ^ (1 << q))),
        }
    }
}

impl FromStr for Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan-wigner" | "jordan_wigner" => Ok(Mapping::JordanWigner),
            "bk" | "bravyi-kitaev" | "bravyi_kitaev" => Ok(Mapping::BravyiKitaev),
            other => Err(Error::Config(format!("unknown mapping `{other}` (expected jw or bk)"))),
        }
    }
}

/// Jordan-Wigner transform of `op`.
pub fn jordan_wigner(op: &FermionOp) -> PauliSum {
    Mapping::JordanWigner.map(op)
}

/// Bravyi-Kitaev (Fenwick tree) transform of `op`.
pub fn bravyi_kitaev(op: &FermionOp) -> PauliSum {
    Mapping::BravyiKitaev.map(op)
}

fn string(xs: impl IntoIterator<Item = usize>, ys: impl IntoIterator<Item = usize>, zs: impl IntoIterator<Item = usize>) -> PauliString {
    let mut p = PauliString::IDENTITY;
    for q in xs {
        p.x |= 1 << q;
    }
    for q in ys {
        p.x |= 1 << q;
        p.z |= 1 << q;
    }
    for q in zs {
        p.z |= 1 << q;
    }
    p
}

/// `a†_j = ½(X_j − iY_j) Z_{<j}`, `a_j = ½(X_j + iY_j) Z_{<j}`.
fn jw_ladder(l: Ladder, n: usize) -> PauliSum {
    let j = l.mode;
    let sign = if l.dagger { -1.0 } else { 1.0 };
    PauliSum::from_terms(
        n,
        [
            (Complex64::new(0.5, 0.0), string([j], [], 0..j)),
            (Complex64::new(0.0, 0.5 * sign), string([], [j], 0..j)),
        ],
    )
}

/// Qubits whose stored parity includes mode `j`.
fn update_set(j: usize, n: usize) -> BTreeSet<usize> {
    let mut set = BTreeSet::new();
    let mut idx = j + 1;
    while idx <= n {
        set.insert(idx - 1);
        idx += idx & idx.wrapping_neg();
    }
    set
}

/// Qubits whose parity sum is the occupation of mode `j`.
fn occupation_set(j: usize) -> BTreeSet<usize> {
    let mut set = BTreeSet::from([j]);
    let idx = j + 1;
    let parent = idx & (idx - 1);
    let mut i = idx - 1;
    while i != parent {
        set.insert(i - 1);
        i &= i - 1;
    }
    set
}

/// Qubits whose parity sum is the occupation parity of modes `< j`.
fn parity_set(j: usize) -> BTreeSet<usize> {
    let mut set = BTreeSet::new();
    let mut i = j;
    while i > 0 {
        set.insert(i - 1);
        i &= i - 1;
    }
    set
}

fn bk_ladder(l: Ladder, n: usize) -> PauliSum {
    let j = l.mode;
    let update = update_set(j, n);
    let parity = parity_set(j);
    let occupation = occupation_set(j);
    let x_rest: Vec<usize> = update.iter().copied().filter(|&q| q != j).collect();
    let z_rest: Vec<usize> = parity.symmetric_difference(&occupation).copied().filter(|&q| q != j).collect();
    let sign = if l.dagger { -1.0 } else { 1.0 };
    PauliSum::from_terms(
        n,
        [
            (Complex64::new(0.5, 0.0), string(update.iter().copied(), [], parity.iter().copied())),
            (Complex64::new(0.0, 0.5 * sign), string(x_rest, [j], z_rest)),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubitops::pauli::pauli_matrix;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn number_operator_images() {
        for mapping in [Mapping::JordanWigner, Mapping::BravyiKitaev] {
            let n0 = mapping.map(&FermionOp::hop(1, 0, 0, c(1.0)));
            let expect = PauliSum::from_text("+0.5 I\n-0.5 Z").unwrap();
            assert_eq!(n0, expect, "{mapping:?}");
        }
    }

    #[test]
    fn jw_hop_textbook_form() {
        let hop = FermionOp::hop(3, 2, 0, c(1.0));
        let h = jordan_wigner(&hop.add(&hop.adjoint()));
        let expect = PauliSum::from_text("+0.5 XZX\n+0.5 YZY").unwrap();
        assert_eq!(h, expect);
    }

    #[test]
    fn identity_maps_to_identity() {
        let id = FermionOp::identity(5, c(2.5));
        for m in [Mapping::JordanWigner, Mapping::BravyiKitaev] {
            assert_eq!(m.map(&id), PauliSum::identity(5, c(2.5)));
        }
    }

    #[test]
    fn bk_sets_for_eight_modes() {
        assert_eq!(update_set(0, 8), BTreeSet::from([0, 1, 3, 7]));
        assert_eq!(parity_set(6), BTreeSet::from([3, 5]));
        assert_eq!(occupation_set(7), BTreeSet::from([3, 5, 6, 7]));
    }

    /// Converts a real-symmetric-embedded Hermitian matrix to sorted eigenvalues.
    fn spectrum(m: &DMatrix<Complex64>) -> Vec<f64> {
        let n = m.nrows();
        let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                big[(i, j)] = z.re;
                big[(i + n, j + n)] = z.re;
                big[(i, j + n)] = -z.im;
                big[(i + n, j)] = z.im;
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.iter().step_by(2).copied().collect()
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = FermionOp> {
        let hops = proptest::collection::vec((0..n, 0..n, -1.0f64..1.0, -1.0f64..1.0), 1..6);
        let pairs = proptest::collection::vec((0..n, 0..n, 0..n, 0..n, -1.0f64..1.0), 0..4);
        (hops, pairs).prop_map(move |(hops, pairs)| {
            let mut op = FermionOp::zero(n);
            for (p, q, re, im) in hops {
                op.add_product(Complex64::new(re, im), &[Ladder::create(p), Ladder::annihilate(q)]);
            }
            for (p, q, r, s, v) in pairs {
                op.add_product(c(v), &[Ladder::create(p), Ladder::create(q), Ladder::annihilate(r), Ladder::annihilate(s)]);
            }
            op.add(&op.adjoint())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn jw_matches_occupation_matrix(op in arb_hermitian(4)) {
            let q = jordan_wigner(&op);
            prop_assert!(q.is_hermitian(1e-12));
            let diff = pauli_matrix(&q).unwrap() - op.occupation_matrix().unwrap();
            prop_assert!(diff.camax() < 1e-12);
        }

        #[test]
        fn bk_ladders_act_on_encoded_states(j in 0usize..6, dagger in any::<bool>(), bits in 0u64..64) {
            let n = 6;
            let l = Ladder { mode: j, dagger };
            let image = Mapping::BravyiKitaev.ladder(l, n);
            let mut state = vec![Complex64::default(); 1 << n];
            state[Mapping::BravyiKitaev.encode_occupation(bits, n) as usize] = c(1.0);
            let out = image.apply(&state).unwrap();
            let mut expect = vec![Complex64::default(); 1 << n];
            if let Some((sign, next)) = l.apply(bits) {
                expect[Mapping::BravyiKitaev.encode_occupation(next, n) as usize] = c(sign);
            }
            for (a, b) in out.iter().zip(&expect) {
                prop_assert!((a - b).norm() < 1e-14);
            }
        }

        #[test]
        fn bk_isospectral_with_jw(op in arb_hermitian(5)) {
            let jw = spectrum(&pauli_matrix(&jordan_wigner(&op)).unwrap());
            let bk = spectrum(&pauli_matrix(&bravyi_kitaev(&op)).unwrap());
            for (a, b) in jw.iter().zip(&bk) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
