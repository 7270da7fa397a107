use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped.
pub const PRUNE_TOL: f64 = 1e-14;

/// Largest register [`pauli_matrix`] will densify.
pub const MAX_DENSE_QUBITS: usize = 12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli string in symplectic form: qubit `q` carries `X^x Z^z` with `Y = iXZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn single(qubit: usize, op: char) -> PauliString {
        let bit = 1u64 << qubit;
        match op {
            'X' => PauliString { x: bit, z: 0 },
            'Y' => PauliString { x: bit, z: bit },
            'Z' => PauliString { x: 0, z: bit },
            _ => PauliString::IDENTITY,
        }
    }

    pub fn from_label(label: &str) -> Result<PauliString> {
        if label.len() > 64 {
            return Err(Error::TooManyQubits(label.len(), 64));
        }
        let mut p = PauliString::IDENTITY;
        for (q, c) in label.chars().enumerate() {
            let bit = 1u64 << q;
            match c {
                'I' => {}
                'X' => p.x |= bit,
                'Y' => {
                    p.x |= bit;
                    p.z |= bit;
                }
                'Z' => p.z |= bit,
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("bad Pauli letter `{other}`"),
                    })
                }
            }
        }
        Ok(p)
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.op(q)).collect()
    }

    pub fn op(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    fn code(&self, q: usize) -> u8 {
        match self.op(q) {
            'I' => 0,
            'X' => 1,
            'Y' => 2,
            _ => 3,
        }
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn n_y(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Qubit-wise commutation: on every qubit the letters agree or one is `I`.
    pub fn qubitwise_commutes(&self, other: &PauliString) -> bool {
        let both = self.support() & other.support();
        (self.x ^ other.x) & both == 0 && (self.z ^ other.z) & both == 0
    }

    /// `self * other = phase * result`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let out = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let exponent = self.n_y() as i64 + other.n_y() as i64 - out.n_y() as i64
            + 2 * (self.z & other.x).count_ones() as i64;
        (I.powi(exponent.rem_euclid(4) as i32), out)
    }

    /// `P |b> = phase |b'>` on a computational basis state.
    #[inline]
    pub fn apply_basis(&self, b: usize) -> (Complex64, usize) {
        let b64 = b as u64;
        let sign = if (b64 & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let phase = match self.n_y() % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
        (phase, (b64 ^ self.x) as usize)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on labels, qubit 0 first, `I < X < Y < Z`.
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = (self.x ^ other.x) | (self.z ^ other.z);
        if diff == 0 {
            return Ordering::Equal;
        }
        let q = diff.trailing_zeros() as usize;
        self.code(q).cmp(&other.code(q))
    }
}

/// Sum of weighted Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "at most 64 qubits");
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, coefficient: Complex64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(coefficient, PauliString::IDENTITY);
        s
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (Complex64, PauliString)>) -> Self {
        let mut s = Self::zero(n_qubits);
        for (c, p) in terms {
            s.add_term(c, p);
        }
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic Pauli order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, c: Complex64, p: PauliString) {
        let mask = if self.n_qubits == 64 { u64::MAX } else { (1u64 << self.n_qubits) - 1 };
        assert!(p.support() & !mask == 0, "Pauli string outside the register");
        let entry = self.terms.entry(p).or_default();
        *entry += c;
        if entry.norm() < PRUNE_TOL {
            self.terms.remove(&p);
        }
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*c, *p);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> PauliSum {
        let mut out = PauliSum::zero(self.n_qubits);
        for (p, c) in &self.terms {
            out.add_term(c * s, *p);
        }
        out
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut out = PauliSum::zero(self.n_qubits);
        for (p, c) in &self.terms {
            for (q, d) in &other.terms {
                let (phase, r) = p.mul(q);
                out.add_term(c * d * phase, r);
            }
        }
        out
    }

    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut out = PauliSum::zero(self.n_qubits);
        for (p, c) in &self.terms {
            for (q, d) in &other.terms {
                if !p.commutes_with(q) {
                    let (phase, r) = p.mul(q);
                    out.add_term(c * d * phase * 2.0, r);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum::from_terms(self.n_qubits, self.terms.iter().map(|(p, c)| (c.conj(), *p)))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Coefficient of the identity string.
    pub fn constant(&self) -> Complex64 {
        self.coefficient(&PauliString::IDENTITY)
    }

    /// `out = self |state>`.
    pub fn apply(&self, state: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_dim(state.len())?;
        let mut out = vec![Complex64::default(); state.len()];
        for (p, c) in &self.terms {
            for (b, amp) in state.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let (phase, b2) = p.apply_basis(b);
                out[b2] += c * phase * amp;
            }
        }
        Ok(out)
    }

    /// `<state| self |state>` (complex in general).
    pub fn expectation_complex(&self, state: &[Complex64]) -> Result<Complex64> {
        self.check_dim(state.len())?;
        let mut total = Complex64::default();
        for (p, c) in &self.terms {
            let mut acc = Complex64::default();
            for (b, amp) in state.iter().enumerate() {
                let (phase, b2) = p.apply_basis(b);
                acc += state[b2].conj() * phase * amp;
            }
            total += c * acc;
        }
        Ok(total)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != 1usize << self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "state of length {len} for a {}-qubit operator",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// One term per line: `+1.234567890123e-01  IXYZIZ`; complex coefficients
    /// add an imaginary column: `+re +imj  IXYZIZ`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in &self.terms {
            if c.im == 0.0 {
                out.push_str(&format!("{:+.12e}  {}\n", c.re, p.label(self.n_qubits)));
            } else {
                out.push_str(&format!("{:+.12e} {:+.12e}j  {}\n", c.re, c.im, p.label(self.n_qubits)));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut terms = Vec::new();
        let mut n_qubits = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (c, label) = match fields.as_slice() {
                [re, label] => (Complex64::new(parse_f64(re).map_err(err)?, 0.0), *label),
                [re, im, label] => {
                    let im = im.strip_suffix('j').ok_or_else(|| err(format!("imaginary part `{im}` lacks `j`")))?;
                    (
                        Complex64::new(parse_f64(re).map_err(err)?, parse_f64(im).map_err(err)?),
                        *label,
                    )
                }
                _ => return Err(err(format!("expected `coefficient label`, got `{line}`"))),
            };
            match n_qubits {
                None => n_qubits = Some(label.len()),
                Some(n) if n != label.len() => return Err(err(format!("label length {} != {n}", label.len()))),
                _ => {}
            }
            let p = PauliString::from_label(label).map_err(|e| err(e.to_string()))?;
            terms.push((c, p));
        }
        Ok(PauliSum::from_terms(n_qubits.unwrap_or(0), terms))
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("bad number `{s}`: {e}"))
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Dense `2^n x 2^n` matrix, qubit `q` = bit `q` of the basis index.
pub fn pauli_matrix(op: &PauliSum) -> Result<DMatrix<Complex64>> {
    let n = op.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits(n, MAX_DENSE_QUBITS));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (p, c) in op.terms() {
        for b in 0..dim {
            let (phase, b2) = p.apply_basis(b);
            m[(b2, b)] += c * phase;
        }
    }
    Ok(m)
}
