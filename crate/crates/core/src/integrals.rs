//! Closed-form integrals over contracted s-type Gaussians and assembly of the
//! multicomponent integral set.
//!
//! Two-body tensors are stored in chemists' notation `(ij|kl)` and already
//! carry the charge product of the two particles, so the electron-proton block
//! is attractive (negative) and same-species blocks are repulsive.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::basis::{ClassicalNucleus, ContractedGaussian, ParticleSpecies, SpeciesKind, SystemSpec};
use crate::error::{Error, Result};

/// Below this argument the Boys function is summed as a Taylor series.
pub const BOYS_SERIES_CUTOFF: f64 = 0.5;

/// Zeroth-order Boys function `F0(t) = int_0^1 exp(-t u^2) du`.
pub fn boys_f0(t: f64) -> f64 {
    if t < BOYS_SERIES_CUTOFF {
        boys_f0_series(t)
    } else {
        boys_f0_erf(t)
    }
}

pub(crate) fn boys_f0_series(t: f64) -> f64 {
    // sum_k (-t)^k / (k! (2k+1))
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= -t / k as f64;
        let contribution = term / (2 * k + 1) as f64;
        sum += contribution;
        if contribution.abs() < 1e-18 {
            break;
        }
    }
    sum
}

pub(crate) fn boys_f0_erf(t: f64) -> f64 {
    0.5 * (PI / t).sqrt() * libm::erf(t.sqrt())
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

fn gaussian_product_center(a: f64, ca: &[f64; 3], b: f64, cb: &[f64; 3]) -> [f64; 3] {
    let p = a + b;
    [
        (a * ca[0] + b * cb[0]) / p,
        (a * ca[1] + b * cb[1]) / p,
        (a * ca[2] + b * cb[2]) / p,
    ]
}

fn prim_overlap(a: f64, ca: &[f64; 3], b: f64, cb: &[f64; 3]) -> f64 {
    let p = a + b;
    (PI / p).powf(1.5) * (-a * b / p * dist2(ca, cb)).exp()
}

/// `<a|b>` via the Gaussian product theorem.
pub fn overlap_ss(a: &ContractedGaussian, b: &ContractedGaussian) -> f64 {
    let mut s = 0.0;
    for (ea, ca) in a.primitives() {
        for (eb, cb) in b.primitives() {
            s += ca * cb * prim_overlap(ea, &a.center, eb, &b.center);
        }
    }
    s
}

/// `<a| -lap/(2 mass) |b>`.
pub fn kinetic_ss(a: &ContractedGaussian, b: &ContractedGaussian, mass: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::NonPositiveMass(mass));
    }
    let r2 = dist2(&a.center, &b.center);
    let mut t = 0.0;
    for (ea, ca) in a.primitives() {
        for (eb, cb) in b.primitives() {
            let mu = ea * eb / (ea + eb);
            t += ca * cb * mu * (3.0 - 2.0 * mu * r2) * prim_overlap(ea, &a.center, eb, &b.center);
        }
    }
    Ok(t / mass)
}

/// `<a| 1/|r - C| |b>` (unsigned).
pub fn coulomb_potential_ss(a: &ContractedGaussian, b: &ContractedGaussian, point: &[f64; 3]) -> f64 {
    let r2 = dist2(&a.center, &b.center);
    let mut v = 0.0;
    for (ea, ca) in a.primitives() {
        for (eb, cb) in b.primitives() {
            let p = ea + eb;
            let pc = gaussian_product_center(ea, &a.center, eb, &b.center);
            v += ca * cb * 2.0 * PI / p * (-ea * eb / p * r2).exp() * boys_f0(p * dist2(&pc, point));
        }
    }
    v
}

/// `particle_charge * Z_a * <a| 1/|r - R_a| |b>`: negative for electrons,
/// positive for protons and positrons near a positive nucleus.
pub fn nuclear_attraction_ss(
    a: &ContractedGaussian,
    b: &ContractedGaussian,
    nucleus: &ClassicalNucleus,
    particle_charge: f64,
) -> f64 {
    particle_charge * nucleus.charge * coulomb_potential_ss(a, b, &nucleus.position)
}

/// Signed Coulomb integral `charge_product * (ab|cd)`.
pub fn eri_ssss(
    a: &ContractedGaussian,
    b: &ContractedGaussian,
    c: &ContractedGaussian,
    d: &ContractedGaussian,
    charge_product: f64,
) -> f64 {
    let rab = dist2(&a.center, &b.center);
    let rcd = dist2(&c.center, &d.center);
    let mut v = 0.0;
    for (ea, ca) in a.primitives() {
        for (eb, cb) in b.primitives() {
            let p = ea + eb;
            let pc = gaussian_product_center(ea, &a.center, eb, &b.center);
            let kab = (-ea * eb / p * rab).exp();
            for (ec, cc) in c.primitives() {
                for (ed, cd) in d.primitives() {
                    let q = ec + ed;
                    let qc = gaussian_product_center(ec, &c.center, ed, &d.center);
                    let kcd = (-ec * ed / q * rcd).exp();
                    let prefactor = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt());
                    v += ca * cb * cc * cd * prefactor * kab * kcd * boys_f0(p * q / (p + q) * dist2(&pc, &qc));
                }
            }
        }
    }
    charge_product * v
}

/// Dense rank-4 tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dims: [usize; 4],
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dims: [usize; 4]) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.iter().product()],
        }
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        debug_assert!(i < self.dims[0] && j < self.dims[1] && k < self.dims[2] && l < self.dims[3]);
        ((i * self.dims[1] + j) * self.dims[2] + k) * self.dims[3] + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.offset(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let o = self.offset(i, j, k, l);
        self.data[o] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Rotates indices `(0,1)` by `left` and `(2,3)` by `right`:
    /// `out[pqrs] = sum C_ip C_jq D_kr D_ls t[ijkl]`.
    pub fn transform(&self, left: &DMatrix<f64>, right: &DMatrix<f64>) -> Tensor4 {
        let mats = [left, left, right, right];
        let mut cur = self.clone();
        for (axis, m) in mats.iter().enumerate() {
            assert_eq!(m.nrows(), cur.dims[axis], "transform dimension mismatch");
            let mut dims = cur.dims;
            dims[axis] = m.ncols();
            let mut out = Tensor4::zeros(dims);
            for i in 0..dims[0] {
                for j in 0..dims[1] {
                    for k in 0..dims[2] {
                        for l in 0..dims[3] {
                            let idx = [i, j, k, l];
                            let mut s = 0.0;
                            for x in 0..cur.dims[axis] {
                                let mut src = idx;
                                src[axis] = x;
                                s += m[(x, idx[axis])] * cur.get(src[0], src[1], src[2], src[3]);
                            }
                            out.set(i, j, k, l, s);
                        }
                    }
                }
            }
            cur = out;
        }
        cur
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Ao,
    Mo,
}

/// One-body and same-species two-body integrals of one species.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesIntegrals {
    pub species: ParticleSpecies,
    pub overlap: DMatrix<f64>,
    /// Kinetic plus classical-nuclear term.
    pub h1: DMatrix<f64>,
    /// Signed `(ij|kl)` within the species.
    pub eri: Tensor4,
}

impl SpeciesIntegrals {
    pub fn dim(&self) -> usize {
        self.h1.nrows()
    }
}

/// Signed `(ij|KL)` between two species: `i, j` index `first`, `K, L` index `second`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossIntegrals {
    pub first: usize,
    pub second: usize,
    pub eri: Tensor4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub species: Vec<SpeciesIntegrals>,
    pub cross: Vec<CrossIntegrals>,
    /// Classical nucleus-nucleus repulsion.
    pub e_nn: f64,
    pub representation: Representation,
}

impl IntegralSet {
    pub fn index_of(&self, kind: SpeciesKind) -> Option<usize> {
        self.species.iter().position(|s| s.species.kind == kind)
    }

    pub fn block(&self, kind: SpeciesKind) -> Option<&SpeciesIntegrals> {
        self.species.iter().find(|s| s.species.kind == kind)
    }

    pub fn cross_block(&self, a: usize, b: usize) -> Option<&CrossIntegrals> {
        self.cross.iter().find(|c| c.first == a && c.second == b)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.species.iter().map(|s| s.dim()).collect()
    }

    /// Rotates every block by its species' coefficient matrix (AO x new).
    pub fn transform(&self, coefficients: &[DMatrix<f64>]) -> Result<IntegralSet> {
        if coefficients.len() != self.species.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficient matrices for {} species",
                coefficients.len(),
                self.species.len()
            )));
        }
        for (s, c) in self.species.iter().zip(coefficients) {
            if c.nrows() != s.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "{} block has dimension {} but coefficients have {} rows",
                    s.species.kind,
                    s.dim(),
                    c.nrows()
                )));
            }
        }
        let species = self
            .species
            .iter()
            .zip(coefficients)
            .map(|(s, c)| SpeciesIntegrals {
                species: s.species.clone(),
                overlap: c.transpose() * &s.overlap * c,
                h1: c.transpose() * &s.h1 * c,
                eri: s.eri.transform(c, c),
            })
            .collect();
        let cross = self
            .cross
            .iter()
            .map(|x| CrossIntegrals {
                first: x.first,
                second: x.second,
                eri: x.eri.transform(&coefficients[x.first], &coefficients[x.second]),
            })
            .collect();
        Ok(IntegralSet {
            species,
            cross,
            e_nn: self.e_nn,
            representation: Representation::Mo,
        })
    }

    pub fn all_finite(&self) -> bool {
        self.species.iter().all(|s| {
            s.h1.iter().all(|v| v.is_finite())
                && s.overlap.iter().all(|v| v.is_finite())
                && s.eri.values().iter().all(|v| v.is_finite())
        }) && self.cross.iter().all(|c| c.eri.values().iter().all(|v| v.is_finite()))
            && self.e_nn.is_finite()
    }
}

pub fn nuclear_repulsion(nuclei: &[ClassicalNucleus]) -> Result<f64> {
    let mut e = 0.0;
    for a in 0..nuclei.len() {
        for b in (a + 1)..nuclei.len() {
            let r = dist2(&nuclei[a].position, &nuclei[b].position).sqrt();
            if r < 1e-10 {
                return Err(Error::OverlappingNuclei(a, b));
            }
            e += nuclei[a].charge * nuclei[b].charge / r;
        }
    }
    Ok(e)
}

fn same_species_eri(basis: &[&ContractedGaussian], charge_product: f64) -> Tensor4 {
    let n = basis.len();
    let mut t = Tensor4::zeros([n; 4]);
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let v = eri_ssss(basis[i], basis[j], basis[k], basis[l], charge_product);
                    for (a, b) in [(i, j), (j, i)] {
                        for (c, d) in [(k, l), (l, k)] {
                            t.set(a, b, c, d, v);
                            t.set(c, d, a, b, v);
                        }
                    }
                }
            }
        }
    }
    t
}

fn cross_eri(first: &[&ContractedGaussian], second: &[&ContractedGaussian], charge_product: f64) -> Tensor4 {
    let (n, m) = (first.len(), second.len());
    let mut t = Tensor4::zeros([n, n, m, m]);
    for i in 0..n {
        for j in 0..=i {
            for k in 0..m {
                for l in 0..=k {
                    let v = eri_ssss(first[i], first[j], second[k], second[l], charge_product);
                    t.set(i, j, k, l, v);
                    t.set(j, i, k, l, v);
                    t.set(i, j, l, k, v);
                    t.set(j, i, l, k, v);
                }
            }
        }
    }
    t
}

/// Assembles all one- and two-body blocks in the AO basis.
pub fn build_integral_set(spec: &SystemSpec) -> Result<IntegralSet> {
    spec.validate()?;
    let e_nn = nuclear_repulsion(&spec.nuclei)?;
    let bases: Vec<Vec<&ContractedGaussian>> = spec
        .species
        .iter()
        .map(|s| spec.basis_for(s.kind).collect())
        .collect();

    let mut species = Vec::with_capacity(spec.species.len());
    for (s, basis) in spec.species.iter().zip(&bases) {
        let n = basis.len();
        let mut overlap = DMatrix::zeros(n, n);
        let mut h1 = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let sij = overlap_ss(basis[i], basis[j]);
                let mut hij = kinetic_ss(basis[i], basis[j], s.mass)?;
                for nucleus in &spec.nuclei {
                    hij += nuclear_attraction_ss(basis[i], basis[j], nucleus, s.charge);
                }
                overlap[(i, j)] = sij;
                overlap[(j, i)] = sij;
                h1[(i, j)] = hij;
                h1[(j, i)] = hij;
            }
        }
        species.push(SpeciesIntegrals {
            species: s.clone(),
            overlap,
            h1,
            eri: same_species_eri(basis, s.charge * s.charge),
        });
    }

    let mut cross = Vec::new();
    for a in 0..spec.species.len() {
        for b in (a + 1)..spec.species.len() {
            let q = spec.species[a].charge * spec.species[b].charge;
            cross.push(CrossIntegrals {
                first: a,
                second: b,
                eri: cross_eri(&bases[a], &bases[b], q),
            });
        }
    }

    Ok(IntegralSet {
        species,
        cross,
        e_nn,
        representation: Representation::Ao,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{builtin_system, sto3g_hydrogen, BuiltinSystem, SystemOverrides};

    fn prim(center: [f64; 3], a: f64) -> ContractedGaussian {
        ContractedGaussian::new(SpeciesKind::Electron, center, vec![a], vec![1.0]).unwrap()
    }

    #[test]
    fn boys_branches_agree_at_switch() {
        for t in [BOYS_SERIES_CUTOFF * 0.999, BOYS_SERIES_CUTOFF, BOYS_SERIES_CUTOFF * 1.001] {
            assert!((boys_f0_series(t) - boys_f0_erf(t)).abs() < 1e-14, "t = {t}");
        }
        assert_eq!(boys_f0(0.0), 1.0);
        // large-t asymptote sqrt(pi/t)/2
        assert!((boys_f0(400.0) - 0.5 * (PI / 400.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn overlap_limits() {
        let a = sto3g_hydrogen(SpeciesKind::Electron, [0.0; 3]);
        assert!((overlap_ss(&a, &a) - 1.0).abs() < 1e-12);
        let b = sto3g_hydrogen(SpeciesKind::Electron, [0.0, 0.0, 50.0]);
        assert!(overlap_ss(&a, &b) < 1e-12);
    }

    #[test]
    fn h2_sto3g_reference_values() {
        // Szabo & Ostlund, H2 at R = 1.4 bohr
        let a = sto3g_hydrogen(SpeciesKind::Electron, [0.0; 3]);
        let b = sto3g_hydrogen(SpeciesKind::Electron, [0.0, 0.0, 1.4]);
        assert!((overlap_ss(&a, &b) - 0.6593).abs() < 1e-4);
        assert!((kinetic_ss(&a, &a, 1.0).unwrap() - 0.7600).abs() < 1e-4);
        assert!((kinetic_ss(&a, &b, 1.0).unwrap() - 0.2365).abs() < 1e-4);
        assert!((eri_ssss(&a, &a, &a, &a, 1.0) - 0.7746).abs() < 1e-4);
        assert!((eri_ssss(&a, &a, &b, &b, 1.0) - 0.5697).abs() < 1e-4);
        assert!((eri_ssss(&b, &a, &a, &a, 1.0) - 0.4441).abs() < 1e-4);
        assert!((eri_ssss(&b, &a, &b, &a, 1.0) - 0.2970).abs() < 1e-4);
    }

    #[test]
    fn kinetic_scales_inversely_with_mass() {
        let a = prim([0.0; 3], 0.8);
        let b = prim([0.3, 0.1, -0.4], 1.7);
        let t1 = kinetic_ss(&a, &b, 1.0).unwrap();
        let tm = kinetic_ss(&a, &b, 1836.15).unwrap();
        assert!((tm * 1836.15 - t1).abs() < 1e-12);
        assert!(kinetic_ss(&a, &b, 0.0).is_err());
        assert!(kinetic_ss(&a, &prim([0.0, 0.0, 60.0], 1.0), 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn nuclear_term_sign_flips_with_particle_charge() {
        let a = sto3g_hydrogen(SpeciesKind::Electron, [0.0; 3]);
        let n = ClassicalNucleus {
            charge: 1.0,
            position: [0.0; 3],
        };
        let ve = nuclear_attraction_ss(&a, &a, &n, -1.0);
        let vp = nuclear_attraction_ss(&a, &a, &n, 1.0);
        assert!(ve < 0.0 && ve.is_finite());
        assert_eq!(ve, -vp);
        // Szabo & Ostlund: (1s_A|-1/r_A|1s_A) = -1.2266
        assert!((ve + 1.2266).abs() < 1e-4);
    }

    #[test]
    fn eri_permutation_and_sign() {
        let a = prim([0.0; 3], 0.9);
        let b = prim([0.5, 0.0, 0.0], 1.3);
        let c = prim([0.0, 0.7, 0.0], 0.6);
        let d = prim([0.1, 0.2, 0.9], 2.1);
        let v = eri_ssss(&a, &b, &c, &d, 1.0);
        assert!((v - eri_ssss(&b, &a, &c, &d, 1.0)).abs() < 1e-12);
        assert!((v - eri_ssss(&a, &b, &d, &c, 1.0)).abs() < 1e-12);
        assert!((v - eri_ssss(&c, &d, &a, &b, 1.0)).abs() < 1e-12);
        assert_eq!(eri_ssss(&a, &b, &c, &d, -1.0), -v);
    }

    fn assert_symmetries(ints: &IntegralSet) {
        for s in &ints.species {
            let n = s.dim();
            assert!((&s.h1 - s.h1.transpose()).amax() < 1e-12);
            for (i, j, k, l) in itertools(n, n, n, n) {
                let v = s.eri.get(i, j, k, l);
                for w in [
                    s.eri.get(j, i, k, l),
                    s.eri.get(i, j, l, k),
                    s.eri.get(k, l, i, j),
                    s.eri.get(l, k, j, i),
                ] {
                    assert!((v - w).abs() < 1e-12);
                }
            }
        }
        for c in &ints.cross {
            let [n, _, m, _] = c.eri.dims();
            for (i, j, k, l) in itertools(n, n, m, m) {
                let v = c.eri.get(i, j, k, l);
                assert!((v - c.eri.get(j, i, k, l)).abs() < 1e-12);
                assert!((v - c.eri.get(i, j, l, k)).abs() < 1e-12);
            }
        }
    }

    fn itertools(a: usize, b: usize, c: usize, d: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
        (0..a).flat_map(move |i| (0..b).flat_map(move |j| (0..c).flat_map(move |k| (0..d).map(move |l| (i, j, k, l)))))
    }

    #[test]
    fn builtin_integral_sets_are_consistent() {
        let psh = build_integral_set(&builtin_system(BuiltinSystem::PsH, &SystemOverrides::default()).unwrap()).unwrap();
        assert_eq!(psh.e_nn, 0.0);
        assert!(psh.all_finite());
        assert_symmetries(&psh);

        let hhq = build_integral_set(&builtin_system(BuiltinSystem::HHq, &SystemOverrides::default()).unwrap()).unwrap();
        assert_symmetries(&hhq);
        assert!(hhq.cross[0].eri.values().iter().all(|&v| v <= 0.0));
        assert!(hhq.species[0].eri.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn unit_mass_proton_on_electron_basis_mirrors_electron_h1() {
        let o = SystemOverrides {
            proton_mass: Some(1.0),
            ..Default::default()
        };
        let mut spec = builtin_system(BuiltinSystem::HHq, &o).unwrap();
        let electron_basis: Vec<_> = spec.basis_for(SpeciesKind::Electron).cloned().collect();
        spec.basis.retain(|g| g.species == SpeciesKind::Electron);
        for mut g in electron_basis {
            g.species = SpeciesKind::Proton;
            spec.basis.push(g);
        }
        let ints = build_integral_set(&spec).unwrap();
        let basis: Vec<_> = spec.basis_for(SpeciesKind::Electron).collect();
        let n = basis.len();
        let kin = DMatrix::from_fn(n, n, |i, j| kinetic_ss(basis[i], basis[j], 1.0).unwrap());
        let ve = &ints.species[0].h1 - &kin;
        let vp = &ints.species[1].h1 - &kin;
        assert!((ve + vp).amax() < 1e-12);
    }

    #[test]
    fn overlapping_nuclei_rejected() {
        let n = ClassicalNucleus {
            charge: 1.0,
            position: [0.0; 3],
        };
        assert!(matches!(
            nuclear_repulsion(&[n.clone(), n]),
            Err(Error::OverlappingNuclei(0, 1))
        ));
    }

    #[test]
    fn identity_transform_is_noop() {
        let ints = build_integral_set(&builtin_system(BuiltinSystem::HHq, &SystemOverrides::default()).unwrap()).unwrap();
        let eye: Vec<_> = ints.dims().iter().map(|&n| DMatrix::identity(n, n)).collect();
        let t = ints.transform(&eye).unwrap();
        for (a, b) in ints.species.iter().zip(&t.species) {
            assert!((&a.h1 - &b.h1).amax() < 1e-15);
            assert!(a.eri.max_abs_diff(&b.eri) < 1e-15);
        }
        assert!(ints.cross[0].eri.max_abs_diff(&t.cross[0].eri) < 1e-15);
        assert!(ints.transform(&eye[..1]).is_err());
    }
}
