//! Local unitary cluster Jastrow (LUCJ) layers `e^{-K} e^{iJ} e^{K}`.
//!
//! `K` is an anti-Hermitian one-body matrix per species in its spatial-orbital
//! basis (shared by both electron spins). `e^K` is compiled as a Givens network
//! of adjacent-orbital rotations and single-orbital phases. `J` holds real
//! number–number couplings on an adjacency set: modes on the same spatial
//! index are coupled to each other, and every mode carries a diagonal term.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::emit::emit_exponential;
use crate::error::{Error, Result};
use crate::linalg::expm_anti_hermitian;
use crate::basis::SpeciesKind;
use crate::qubitops::{FermionOp, Ladder, Mapping, ModeLayout, PauliSum, SpeciesModes};
use crate::sim::{Angle, Circuit};

use super::pool::reference_circuit;

const ANGLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct LucjLayer {
    /// One spatial-orbital matrix per species, in layout order.
    pub k: Vec<DMatrix<Complex64>>,
    /// Couplings keyed by mode pair `(a, b)` with `a <= b`; `(a, a)` is `J n_a`.
    pub j: BTreeMap<(usize, usize), f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LucjParams {
    pub layers: Vec<LucjLayer>,
}

impl LucjParams {
    /// `L` layers with `K = 0` and `J = 0`.
    pub fn zero(layout: &ModeLayout, n_layers: usize) -> Self {
        let layer = LucjLayer {
            k: layout
                .species
                .iter()
                .map(|s| DMatrix::zeros(s.n_spatial, s.n_spatial))
                .collect(),
            j: BTreeMap::new(),
        };
        LucjParams { layers: vec![layer; n_layers] }
    }

    pub fn validate(&self, layout: &ModeLayout) -> Result<()> {
        let adjacency = lucj_adjacency(layout);
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.k.len() != layout.species.len() {
                return Err(Error::InvalidLucj(format!(
                    "layer {l}: {} K blocks for {} species",
                    layer.k.len(),
                    layout.species.len()
                )));
            }
            for (k, s) in layer.k.iter().zip(&layout.species) {
                if k.nrows() != s.n_spatial || k.ncols() != s.n_spatial {
                    return Err(Error::InvalidLucj(format!(
                        "layer {l}: K for {:?} is {}x{}, expected {}x{}",
                        s.kind,
                        k.nrows(),
                        k.ncols(),
                        s.n_spatial,
                        s.n_spatial
                    )));
                }
                let dev = (k + k.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if dev > 1e-10 {
                    return Err(Error::InvalidLucj(format!(
                        "layer {l}: K for {:?} is not anti-Hermitian (|K + K†| = {dev:.3e})",
                        s.kind
                    )));
                }
            }
            for &(a, b) in layer.j.keys() {
                if !adjacency.contains(&(a, b)) {
                    return Err(Error::InvalidLucj(format!("layer {l}: J coupling ({a}, {b}) outside the adjacency set")));
                }
            }
        }
        Ok(())
    }
}

/// Mode pairs that share one Jastrow amplitude, in a fixed order.
///
/// For each spatial index: same-species pairs across spins, cross-species pairs
/// (spin-summed), and per-species diagonals (spin-summed).
pub fn jastrow_groups(layout: &ModeLayout) -> Vec<Vec<(usize, usize)>> {
    let max_spatial = layout.species.iter().map(|s| s.n_spatial).max().unwrap_or(0);
    let modes_at = |k: usize, s: usize| -> Vec<usize> {
        let sp = &layout.species[k];
        if s < sp.n_spatial {
            (0..sp.spin_orbitals_per_spatial).map(|spin| sp.mode(s, spin)).collect()
        } else {
            Vec::new()
        }
    };
    let ordered = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut groups = Vec::new();
    for s in 0..max_spatial {
        for k in 0..layout.species.len() {
            let m = modes_at(k, s);
            let same: Vec<_> = (0..m.len())
                .flat_map(|i| ((i + 1)..m.len()).map(move |j| (i, j)))
                .map(|(i, j)| ordered(m[i], m[j]))
                .collect();
            if !same.is_empty() {
                groups.push(same);
            }
        }
        for k1 in 0..layout.species.len() {
            for k2 in (k1 + 1)..layout.species.len() {
                let (m1, m2) = (modes_at(k1, s), modes_at(k2, s));
                let cross: Vec<_> = m1.iter().flat_map(|&a| m2.iter().map(move |&b| ordered(a, b))).collect();
                if !cross.is_empty() {
                    groups.push(cross);
                }
            }
        }
        for k in 0..layout.species.len() {
            let m = modes_at(k, s);
            if !m.is_empty() {
                groups.push(m.iter().map(|&a| (a, a)).collect());
            }
        }
    }
    groups
}

/// All mode pairs allowed to carry a Jastrow coupling.
pub fn lucj_adjacency(layout: &ModeLayout) -> BTreeSet<(usize, usize)> {
    jastrow_groups(layout).into_iter().flatten().collect()
}

/// Factor of a unitary in its Givens decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum OrbitalFactor {
    /// `e^{iφ}` on orbital `p`.
    Phase(usize, f64),
    /// `[[cos t, -sin t], [sin t, cos t]]` on orbitals `(p, p + 1)`.
    Rotation(usize, f64),
}

/// `M = diag(e^{iα1}, e^{iα2}) · R(t) · diag(e^{iβ1}, e^{iβ2})` for a 2×2 unitary.
fn split_2x2(m: [[Complex64; 2]; 2]) -> (f64, f64, f64, f64, f64) {
    let c = m[0][0].norm();
    let s = m[1][0].norm();
    let t = s.atan2(c);
    if s < 1e-14 {
        (m[0][0].arg(), m[1][1].arg(), 0.0, 0.0, 0.0)
    } else if c < 1e-14 {
        (0.0, m[1][0].arg(), t, 0.0, (-m[0][1]).arg())
    } else {
        let a1 = m[0][0].arg();
        (a1, m[1][0].arg(), t, 0.0, (-m[0][1]).arg() - a1)
    }
}

/// Factors `f_1, …, f_m` with `U = f_1 f_2 ⋯ f_m`, via Givens QR on adjacent rows.
pub(crate) fn givens_factors(u: &DMatrix<Complex64>) -> Vec<OrbitalFactor> {
    let n = u.nrows();
    let mut w = u.clone();
    let mut out = Vec::new();
    for j in 0..n {
        for i in ((j + 1)..n).rev() {
            let (a, b) = (w[(i - 1, j)], w[(i, j)]);
            if b.norm() < 1e-15 {
                continue;
            }
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let g = [[a.conj() / r, b.conj() / r], [-b / r, a / r]];
            for col in 0..n {
                let (x, y) = (w[(i - 1, col)], w[(i, col)]);
                w[(i - 1, col)] = g[0][0] * x + g[0][1] * y;
                w[(i, col)] = g[1][0] * x + g[1][1] * y;
            }
            // U = … g† …, so the inverse rotation is recorded
            let gd = [[g[0][0].conj(), g[1][0].conj()], [g[0][1].conj(), g[1][1].conj()]];
            let (a1, a2, t, b1, b2) = split_2x2(gd);
            out.extend([
                OrbitalFactor::Phase(i - 1, a1),
                OrbitalFactor::Phase(i, a2),
                OrbitalFactor::Rotation(i - 1, t),
                OrbitalFactor::Phase(i - 1, b1),
                OrbitalFactor::Phase(i, b2),
            ]);
        }
    }
    out.extend((0..n).map(|p| OrbitalFactor::Phase(p, w[(p, p)].arg())));
    out.retain(|f| match f {
        OrbitalFactor::Phase(_, x) | OrbitalFactor::Rotation(_, x) => x.abs() > ANGLE_TOL,
    });
    out
}

#[cfg(test)]
fn factor_product(n: usize, factors: &[OrbitalFactor]) -> DMatrix<Complex64> {
    let mut u = DMatrix::<Complex64>::identity(n, n);
    for f in factors {
        let mut m = DMatrix::<Complex64>::identity(n, n);
        match *f {
            OrbitalFactor::Phase(p, phi) => m[(p, p)] = Complex64::new(0.0, phi).exp(),
            OrbitalFactor::Rotation(p, t) => {
                let (c, s) = (t.cos(), t.sin());
                m[(p, p)] = c.into();
                m[(p, p + 1)] = (-s).into();
                m[(p + 1, p)] = s.into();
                m[(p + 1, p + 1)] = c.into();
            }
        }
        u = u * m;
    }
    u
}

/// Species whose orbitals the variational `K` rotates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitalScope {
    /// Electronic orbitals only; nuclear/positronic orbitals stay at the mean-field solution.
    #[default]
    Electrons,
    /// Every species carries its own `K`.
    All,
}

impl OrbitalScope {
    pub fn name(self) -> &'static str {
        match self {
            OrbitalScope::Electrons => "electrons",
            OrbitalScope::All => "all",
        }
    }

    fn includes(self, kind: SpeciesKind) -> bool {
        self == OrbitalScope::All || kind == SpeciesKind::Electron
    }
}

impl FromStr for OrbitalScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "electrons" | "electron" | "e" => Ok(OrbitalScope::Electrons),
            "all" => Ok(OrbitalScope::All),
            _ => Err(Error::InvalidLucj(format!("unknown orbital scope {s:?} (expected electrons or all)"))),
        }
    }
}

/// LUCJ circuit family with cached mapped generators.
#[derive(Debug, Clone)]
pub struct LucjAnsatz {
    layout: ModeLayout,
    mapping: Mapping,
    n_layers: usize,
    diagonal_k: bool,
    scope: OrbitalScope,
    groups: Vec<Vec<(usize, usize)>>,
    /// `i n_a` per mode.
    phase: Vec<PauliSum>,
    /// `a†_b a_a − a†_a a_b` keyed by `(a, b)`.
    hop: BTreeMap<(usize, usize), PauliSum>,
    /// `i n_a n_b` (or `i n_a` on the diagonal) keyed by adjacency pair.
    jastrow: BTreeMap<(usize, usize), PauliSum>,
}

impl LucjAnsatz {
    pub fn new(layout: &ModeLayout, mapping: Mapping, n_layers: usize) -> Self {
        let n = layout.n_modes();
        let i = Complex64::new(0.0, 1.0);
        let number = |a: usize| FermionOp::hop(n, a, a, Complex64::new(1.0, 0.0));
        let phase = (0..n).map(|a| mapping.map(&number(a).scale(i))).collect();
        let mut hop = BTreeMap::new();
        for sp in &layout.species {
            for spin in 0..sp.spin_orbitals_per_spatial {
                for p in 0..sp.n_spatial.saturating_sub(1) {
                    let (a, b) = (sp.mode(p, spin), sp.mode(p + 1, spin));
                    let g = FermionOp::hop(n, b, a, Complex64::new(1.0, 0.0))
                        .add(&FermionOp::hop(n, a, b, Complex64::new(-1.0, 0.0)));
                    hop.insert((a, b), mapping.map(&g));
                }
            }
        }
        let groups = jastrow_groups(layout);
        let mut jastrow = BTreeMap::new();
        for &(a, b) in groups.iter().flatten() {
            let op = if a == b {
                number(a).scale(i)
            } else {
                let mut nn = FermionOp::zero(n);
                nn.add_product(
                    i,
                    &[Ladder::create(a), Ladder::annihilate(a), Ladder::create(b), Ladder::annihilate(b)],
                );
                nn
            };
            jastrow.insert((a, b), mapping.map(&op));
        }
        LucjAnsatz {
            layout: layout.clone(),
            mapping,
            n_layers,
            diagonal_k: false,
            scope: OrbitalScope::default(),
            groups,
            phase,
            hop,
            jastrow,
        }
    }

    /// Restricts `K` to its diagonal (pure orbital phases).
    pub fn with_diagonal_k(mut self, diagonal: bool) -> Self {
        self.diagonal_k = diagonal;
        self
    }

    pub fn with_orbital_scope(mut self, scope: OrbitalScope) -> Self {
        self.scope = scope;
        self
    }

    pub fn orbital_scope(&self) -> OrbitalScope {
        self.scope
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn mapping(&self) -> Mapping {
        self.mapping
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    fn k_params(&self, sp: &SpeciesModes) -> usize {
        let n = sp.n_spatial;
        match (self.scope.includes(sp.kind), self.diagonal_k) {
            (false, _) => 0,
            (true, true) => n,
            (true, false) => n * n,
        }
    }

    pub fn params_per_layer(&self) -> usize {
        let k: usize = self.layout.species.iter().map(|s| self.k_params(s)).sum();
        k + self.groups.len()
    }

    pub fn n_params(&self) -> usize {
        self.n_layers * self.params_per_layer()
    }

    /// Unpacks a flat vector. Per layer and rotated species: `Re K_pq` then
    /// `Im K_pq` for `p < q` (row-major), then `Im K_pp`; then one value per
    /// Jastrow group. Species outside the orbital scope get `K = 0`.
    pub fn params_from_vector(&self, x: &[f64]) -> Result<LucjParams> {
        if x.len() != self.n_params() {
            return Err(Error::DimensionMismatch(format!(
                "{} LUCJ parameters given, {} expected",
                x.len(),
                self.n_params()
            )));
        }
        let mut it = x.iter().copied();
        let mut layers = Vec::with_capacity(self.n_layers);
        for _ in 0..self.n_layers {
            let mut ks = Vec::new();
            for sp in &self.layout.species {
                let n = sp.n_spatial;
                let mut k = DMatrix::<Complex64>::zeros(n, n);
                if !self.scope.includes(sp.kind) {
                    ks.push(k);
                    continue;
                }
                if !self.diagonal_k {
                    let upper: Vec<(usize, usize)> = (0..n).flat_map(|p| ((p + 1)..n).map(move |q| (p, q))).collect();
                    for &(p, q) in &upper {
                        k[(p, q)].re = it.next().unwrap_or_default();
                    }
                    for &(p, q) in &upper {
                        k[(p, q)].im = it.next().unwrap_or_default();
                    }
                    for &(p, q) in &upper {
                        k[(q, p)] = -k[(p, q)].conj();
                    }
                }
                for p in 0..n {
                    k[(p, p)] = Complex64::new(0.0, it.next().unwrap_or_default());
                }
                ks.push(k);
            }
            let mut j = BTreeMap::new();
            for group in &self.groups {
                let v = it.next().unwrap_or_default();
                for &pair in group {
                    j.insert(pair, v);
                }
            }
            layers.push(LucjLayer { k: ks, j });
        }
        Ok(LucjParams { layers })
    }

    /// Circuit for `Γ(e^{K})` acting on every species, without reference preparation.
    pub fn orbital_rotation(&self, k: &[DMatrix<Complex64>]) -> Result<Circuit> {
        let mut c = Circuit::new(self.layout.n_modes(), 0);
        for (sp, km) in self.layout.species.iter().zip(k) {
            let factors = givens_factors(&expm_anti_hermitian(km));
            // Γ(f_1 ⋯ f_m) = Γ(f_1) ⋯ Γ(f_m): the last factor acts first
            for f in factors.iter().rev() {
                for spin in 0..sp.spin_orbitals_per_spatial {
                    match *f {
                        OrbitalFactor::Phase(p, phi) => {
                            emit_exponential(&mut c, &self.phase[sp.mode(p, spin)], Angle::fixed(phi))?
                        }
                        OrbitalFactor::Rotation(p, t) => {
                            let key = (sp.mode(p, spin), sp.mode(p + 1, spin));
                            emit_exponential(&mut c, &self.hop[&key], Angle::fixed(t))?
                        }
                    }
                }
            }
        }
        Ok(c)
    }

    /// Reference preparation followed by the layers.
    pub fn circuit_for(&self, params: &LucjParams) -> Result<Circuit> {
        params.validate(&self.layout)?;
        let n = self.layout.n_modes();
        let mut c = reference_circuit(n, self.layout.reference_occupation(), self.mapping, 0)?;
        for layer in &params.layers {
            let rot = self.orbital_rotation(&layer.k)?;
            c.append(&rot)?;
            for (&pair, &v) in &layer.j {
                if v.abs() > ANGLE_TOL {
                    emit_exponential(&mut c, &self.jastrow[&pair], Angle::fixed(v))?;
                }
            }
            c.append(&rot.inverse())?;
        }
        Ok(c)
    }

    pub fn circuit(&self, x: &[f64]) -> Result<Circuit> {
        self.circuit_for(&self.params_from_vector(x)?)
    }
}

/// Builds the LUCJ circuit for explicit parameters.
pub fn build_lucj_circuit(params: &LucjParams, layout: &ModeLayout, mapping: Mapping) -> Result<Circuit> {
    LucjAnsatz::new(layout, mapping, params.layers.len()).circuit_for(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BuiltinSystem;
    use crate::qubitops::pauli_matrix;
    use crate::testutil::mo_system;
    use crate::sim::{evolve_state, expectation, fidelity, run_with_params};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_anti_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let a = DMatrix::<Complex64>::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&a - a.adjoint()) * Complex64::new(0.5, 0.0)
    }

    fn hhq() -> (ModeLayout, PauliSum, f64) {
        let sys = mo_system(BuiltinSystem::HHq);
        let h = sys.hamiltonian(Mapping::JordanWigner);
        (sys.layout.clone(), h, sys.e_hf)
    }

    #[test]
    fn hhq_adjacency_and_parameter_count() {
        let (layout, _, _) = hhq();
        let adj: Vec<_> = lucj_adjacency(&layout).into_iter().collect();
        assert_eq!(
            adj,
            [(0, 0), (0, 1), (0, 4), (1, 1), (1, 4), (2, 2), (2, 3), (2, 5), (3, 3), (3, 5), (4, 4), (5, 5)]
        );
        let a = LucjAnsatz::new(&layout, Mapping::JordanWigner, 1);
        assert_eq!(a.n_params(), 12);
        assert_eq!(a.clone().with_diagonal_k(true).n_params(), 10);
        let all = a.with_orbital_scope(OrbitalScope::All);
        assert_eq!(all.n_params(), 16);
        assert_eq!(all.with_diagonal_k(true).n_params(), 12);
    }

    #[test]
    fn givens_factors_reconstruct_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..5 {
            let u = expm_anti_hermitian(&random_anti_hermitian(n, &mut rng));
            let back = factor_product(n, &givens_factors(&u));
            let err = (back - &u).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n = {n}: {err}");
        }
    }

    #[test]
    fn orbital_rotation_matches_dense_exponential() {
        let (layout, _, _) = hhq();
        let n = layout.n_modes();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for mapping in [Mapping::JordanWigner, Mapping::BravyiKitaev] {
            let ks: Vec<_> = layout.species.iter().map(|s| random_anti_hermitian(s.n_spatial, &mut rng)).collect();
            let mut khat = FermionOp::zero(n);
            for (sp, k) in layout.species.iter().zip(&ks) {
                for spin in 0..sp.spin_orbitals_per_spatial {
                    for p in 0..sp.n_spatial {
                        for q in 0..sp.n_spatial {
                            khat = khat.add(&FermionOp::hop(n, sp.mode(p, spin), sp.mode(q, spin), k[(p, q)]));
                        }
                    }
                }
            }
            let dense = expm_anti_hermitian(&pauli_matrix(&mapping.map(&khat)).unwrap());
            let psi0: Vec<Complex64> = (0..1 << n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let psi0: Vec<Complex64> = psi0.iter().map(|z| z / norm).collect();
            let mut psi = psi0.clone();
            let c = LucjAnsatz::new(&layout, mapping, 1).orbital_rotation(&ks).unwrap();
            evolve_state(&c, &[], &mut psi).unwrap();
            let expect: Vec<Complex64> = (0..1 << n).map(|i| (0..1 << n).map(|j| dense[(i, j)] * psi0[j]).sum()).collect();
            let f = fidelity(&psi, &expect);
            assert!(f > 1.0 - 1e-10, "{mapping:?}: {f}");
        }
    }

    #[test]
    fn zero_layer_gives_hartree_fock() {
        let (layout, h, e_hf) = hhq();
        let a = LucjAnsatz::new(&layout, Mapping::JordanWigner, 2);
        let c = a.circuit(&vec![0.0; a.n_params()]).unwrap();
        let e = expectation(&run_with_params(&c, &[], 0).unwrap(), &h).unwrap();
        assert!((e - e_hf).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_parameters() {
        let (layout, _, _) = hhq();
        let mut p = LucjParams::zero(&layout, 1);
        p.layers[0].j.insert((0, 2), 0.1);
        assert!(matches!(build_lucj_circuit(&p, &layout, Mapping::JordanWigner), Err(Error::InvalidLucj(_))));
        let mut p = LucjParams::zero(&layout, 1);
        p.layers[0].k[0][(0, 1)] = Complex64::new(0.3, 0.0);
        assert!(matches!(build_lucj_circuit(&p, &layout, Mapping::JordanWigner), Err(Error::InvalidLucj(_))));
        let a = LucjAnsatz::new(&layout, Mapping::JordanWigner, 1);
        assert!(matches!(a.circuit(&[0.0; 3]), Err(Error::DimensionMismatch(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn species_numbers_are_conserved(x in proptest::collection::vec(-1.0f64..1.0, 32), bk in any::<bool>()) {
            let (layout, _, _) = hhq();
            let mapping = if bk { Mapping::BravyiKitaev } else { Mapping::JordanWigner };
            let a = LucjAnsatz::new(&layout, mapping, 2).with_orbital_scope(OrbitalScope::All);
            let psi = run_with_params(&a.circuit(&x).unwrap(), &[], 0).unwrap();
            for (k, sp) in layout.species.iter().enumerate() {
                let n = expectation(&psi, &mapping.map(&layout.number_operator(k))).unwrap();
                prop_assert!((n - sp.count as f64).abs() < 1e-10);
            }
        }

        #[test]
        fn diagonal_jastrow_shift_is_a_global_phase(x in proptest::collection::vec(-1.0f64..1.0, 16), shift in -2.0f64..2.0) {
            let (layout, h, _) = hhq();
            let a = LucjAnsatz::new(&layout, Mapping::JordanWigner, 1).with_orbital_scope(OrbitalScope::All);
            let e0 = expectation(&run_with_params(&a.circuit(&x).unwrap(), &[], 0).unwrap(), &h).unwrap();
            let mut p = a.params_from_vector(&x).unwrap();
            for m in 0..layout.n_modes() {
                *p.layers[0].j.get_mut(&(m, m)).unwrap() += shift;
            }
            let e1 = expectation(&run_with_params(&a.circuit_for(&p).unwrap(), &[], 0).unwrap(), &h).unwrap();
            prop_assert!((e1 - e0).abs() < 1e-12);
        }
    }
}
