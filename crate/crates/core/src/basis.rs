//! Particle species, classical nuclei and contracted s-type Gaussian basis sets.
//!
//! Everything downstream takes its physical constants from here: masses are in
//! units of the electron mass, charges in elementary units, lengths in bohr.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Proton mass in electron masses (CODATA 2018).
pub const PROTON_MASS: f64 = 1836.152_673_43;

/// Default bond length of the HHq builtin (bohr).
pub const DEFAULT_HHQ_BOND_LENGTH: f64 = 1.4;

/// Default even-tempered protonic `2s` exponents for the HHq builtin.
///
/// Not authoritative: these are a conventional even-tempered pair, not values
/// taken from a published protonic basis. Override them through
/// [`SystemOverrides`] when comparing against a specific reference.
pub const DEFAULT_PROTON_EXPONENTS: [f64; 2] = [4.0, 8.0];

/// STO-3G hydrogen 1s (zeta = 1.24), Hehre, Stewart and Pople (1969).
pub const STO3G_H_EXPONENTS: [f64; 3] = [3.425_250_91, 0.623_913_73, 0.168_855_40];
pub const STO3G_H_COEFFICIENTS: [f64; 3] = [0.154_328_97, 0.535_328_14, 0.444_634_54];

/// 6-31G hydrogen, inner three-primitive contraction, Ditchfield, Hehre and Pople (1971).
pub const G631_H_INNER_EXPONENTS: [f64; 3] = [18.731_137_0, 2.825_393_7, 0.640_121_7];
pub const G631_H_INNER_COEFFICIENTS: [f64; 3] = [0.033_494_60, 0.234_726_95, 0.813_757_33];
/// 6-31G hydrogen, outer uncontracted primitive.
pub const G631_H_OUTER_EXPONENT: f64 = 0.161_277_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeciesKind {
    Electron,
    Proton,
    Positron,
}

impl SpeciesKind {
    pub fn name(self) -> &'static str {
        match self {
            SpeciesKind::Electron => "electron",
            SpeciesKind::Proton => "proton",
            SpeciesKind::Positron => "positron",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "electron" | "e" => Some(SpeciesKind::Electron),
            "proton" | "p" => Some(SpeciesKind::Proton),
            "positron" => Some(SpeciesKind::Positron),
            _ => None,
        }
    }
}

impl fmt::Display for SpeciesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One quantum particle type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSpecies {
    pub kind: SpeciesKind,
    /// Mass in electron masses.
    pub mass: f64,
    /// Signed charge in elementary units.
    pub charge: f64,
    pub count: usize,
    /// 2 for spin-1/2 electrons, 1 for the single high-spin proton or positron.
    pub spin_orbitals_per_spatial: usize,
}

impl ParticleSpecies {
    pub fn electrons(count: usize) -> Self {
        Self {
            kind: SpeciesKind::Electron,
            mass: 1.0,
            charge: -1.0,
            count,
            spin_orbitals_per_spatial: 2,
        }
    }

    pub fn protons(count: usize) -> Self {
        Self {
            kind: SpeciesKind::Proton,
            mass: PROTON_MASS,
            charge: 1.0,
            count,
            spin_orbitals_per_spatial: 1,
        }
    }

    pub fn positrons(count: usize) -> Self {
        Self {
            kind: SpeciesKind::Positron,
            mass: 1.0,
            charge: 1.0,
            count,
            spin_orbitals_per_spatial: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::NonPositiveMass(self.mass));
        }
        if self.kind == SpeciesKind::Electron && self.mass != 1.0 {
            return Err(Error::InvalidSystem(format!(
                "electron mass must be exactly 1, got {}",
                self.mass
            )));
        }
        if !matches!(self.spin_orbitals_per_spatial, 1 | 2) {
            return Err(Error::InvalidSystem(format!(
                "{} spin orbitals per spatial orbital must be 1 or 2",
                self.kind
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalNucleus {
    pub charge: f64,
    pub position: [f64; 3],
}

/// Contracted s-type Gaussian. Coefficients multiply normalized primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractedGaussian {
    pub center: [f64; 3],
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub species: SpeciesKind,
}

/// Normalization constant of a primitive s Gaussian `exp(-a r^2)`.
pub fn primitive_norm(exponent: f64) -> f64 {
    (2.0 * exponent / PI).powf(0.75)
}

impl ContractedGaussian {
    pub fn new(
        species: SpeciesKind,
        center: [f64; 3],
        exponents: Vec<f64>,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        let g = Self {
            center,
            exponents,
            coefficients,
            species,
        };
        g.validate()?;
        Ok(normalize(&g))
    }

    pub fn validate(&self) -> Result<()> {
        if self.exponents.is_empty() || self.exponents.len() != self.coefficients.len() {
            return Err(Error::InvalidBasis(format!(
                "{} exponents vs {} coefficients",
                self.exponents.len(),
                self.coefficients.len()
            )));
        }
        if let Some(a) = self.exponents.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidBasis(format!("non-positive exponent {a}")));
        }
        Ok(())
    }

    /// Primitive pairs `(exponent, coefficient * primitive norm)`.
    pub fn primitives(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.exponents
            .iter()
            .zip(&self.coefficients)
            .map(|(&a, &c)| (a, c * primitive_norm(a)))
    }

    pub fn self_overlap(&self) -> f64 {
        let mut s = 0.0;
        for (a, ca) in self.primitives() {
            for (b, cb) in self.primitives() {
                s += ca * cb * (PI / (a + b)).powf(1.5);
            }
        }
        s
    }
}

/// Rescales the contraction coefficients to unit self-overlap.
pub fn normalize(g: &ContractedGaussian) -> ContractedGaussian {
    let scale = g.self_overlap().sqrt().recip();
    ContractedGaussian {
        coefficients: g.coefficients.iter().map(|c| c * scale).collect(),
        ..g.clone()
    }
}

pub fn sto3g_hydrogen(species: SpeciesKind, center: [f64; 3]) -> ContractedGaussian {
    ContractedGaussian::new(
        species,
        center,
        STO3G_H_EXPONENTS.to_vec(),
        STO3G_H_COEFFICIENTS.to_vec(),
    )
    .expect("literal STO-3G constants are valid")
}

pub fn g631_hydrogen(species: SpeciesKind, center: [f64; 3]) -> Vec<ContractedGaussian> {
    vec![
        ContractedGaussian::new(
            species,
            center,
            G631_H_INNER_EXPONENTS.to_vec(),
            G631_H_INNER_COEFFICIENTS.to_vec(),
        )
        .expect("literal 6-31G constants are valid"),
        ContractedGaussian::new(species, center, vec![G631_H_OUTER_EXPONENT], vec![1.0])
            .expect("literal 6-31G constants are valid"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub species: Vec<ParticleSpecies>,
    pub nuclei: Vec<ClassicalNucleus>,
    pub basis: Vec<ContractedGaussian>,
    /// Expansion center of a quantum nucleus basis, when there is one.
    pub quantum_center: Option<[f64; 3]>,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.species.iter().map(|s| s.count).sum::<usize>() == 0 {
            return Err(Error::InvalidSystem("no quantum particles".into()));
        }
        for (i, s) in self.species.iter().enumerate() {
            s.validate()?;
            if self.species[..i].iter().any(|o| o.kind == s.kind) {
                return Err(Error::InvalidSystem(format!("species {} listed twice", s.kind)));
            }
            if self.basis_for(s.kind).next().is_none() {
                return Err(Error::InvalidSystem(format!("no basis functions for {}", s.kind)));
            }
        }
        for n in &self.nuclei {
            if !(n.charge > 0.0) {
                return Err(Error::InvalidSystem(format!(
                    "nuclear charge must be positive, got {}",
                    n.charge
                )));
            }
        }
        for g in &self.basis {
            g.validate()?;
            if self.species_of(g.species).is_none() {
                return Err(Error::InvalidSystem(format!(
                    "basis function for undeclared species {}",
                    g.species
                )));
            }
        }
        Ok(())
    }

    pub fn species_of(&self, kind: SpeciesKind) -> Option<&ParticleSpecies> {
        self.species.iter().find(|s| s.kind == kind)
    }

    pub fn basis_for(&self, kind: SpeciesKind) -> impl Iterator<Item = &ContractedGaussian> + '_ {
        self.basis.iter().filter(move |g| g.species == kind)
    }

    pub fn basis_dim(&self, kind: SpeciesKind) -> usize {
        self.basis_for(kind).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinSystem {
    /// Dihydrogen with one quantum proton.
    HHq,
    /// Positronium hydride.
    PsH,
}

impl BuiltinSystem {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "hhq" => Ok(BuiltinSystem::HHq),
            "psh" => Ok(BuiltinSystem::PsH),
            other => Err(Error::UnknownSystem(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinSystem::HHq => "HHq",
            BuiltinSystem::PsH => "PsH",
        }
    }
}

/// Configurable geometry and protonic-basis values of the builtins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemOverrides {
    /// Distance between the classical nucleus and the quantum-proton center (bohr).
    pub bond_length: Option<f64>,
    /// Exponents of the uncontracted protonic s functions.
    pub proton_exponents: Option<Vec<f64>>,
    pub proton_mass: Option<f64>,
}

pub fn builtin_system(which: BuiltinSystem, overrides: &SystemOverrides) -> Result<SystemSpec> {
    let origin = [0.0, 0.0, 0.0];
    let spec = match which {
        BuiltinSystem::PsH => {
            let mut basis = g631_hydrogen(SpeciesKind::Electron, origin);
            basis.extend(g631_hydrogen(SpeciesKind::Positron, origin));
            SystemSpec {
                name: which.name().into(),
                species: vec![ParticleSpecies::electrons(2), ParticleSpecies::positrons(1)],
                nuclei: vec![ClassicalNucleus {
                    charge: 1.0,
                    position: origin,
                }],
                basis,
                quantum_center: None,
            }
        }
        BuiltinSystem::HHq => {
            let r = overrides.bond_length.unwrap_or(DEFAULT_HHQ_BOND_LENGTH);
            if !(r > 0.0) {
                return Err(Error::InvalidSystem(format!("bond length must be positive, got {r}")));
            }
            let center = [0.0, 0.0, r];
            let exponents = overrides
                .proton_exponents
                .clone()
                .unwrap_or_else(|| DEFAULT_PROTON_EXPONENTS.to_vec());
            let mut basis = vec![
                sto3g_hydrogen(SpeciesKind::Electron, origin),
                sto3g_hydrogen(SpeciesKind::Electron, center),
            ];
            for a in exponents {
                basis.push(ContractedGaussian::new(SpeciesKind::Proton, center, vec![a], vec![1.0])?);
            }
            let mut proton = ParticleSpecies::protons(1);
            if let Some(m) = overrides.proton_mass {
                proton.mass = m;
            }
            SystemSpec {
                name: which.name().into(),
                species: vec![ParticleSpecies::electrons(2), proton],
                nuclei: vec![ClassicalNucleus {
                    charge: 1.0,
                    position: origin,
                }],
                basis,
                quantum_center: Some(center),
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// On-disk system description (TOML).
///
/// ```toml
/// name = "HHq-custom"
/// quantum_center = [0.0, 0.0, 1.4]
///
/// [[species]]
/// kind = "electron"
/// count = 2
///
/// [[nuclei]]
/// charge = 1.0
/// position = [0.0, 0.0, 0.0]
///
/// [[basis]]
/// species = "electron"
/// center = [0.0, 0.0, 0.0]
/// exponents = [3.42525091, 0.62391373, 0.16885540]
/// coefficients = [0.15432897, 0.53532814, 0.44463454]
/// ```
///
/// Species entries may set `mass`, `charge` and `spin_orbitals_per_spatial`;
/// otherwise the physical defaults for the kind are used.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    name: Option<String>,
    quantum_center: Option<[f64; 3]>,
    species: Vec<SpeciesEntry>,
    #[serde(default)]
    nuclei: Vec<ClassicalNucleus>,
    basis: Vec<BasisEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesEntry {
    kind: SpeciesKind,
    count: usize,
    mass: Option<f64>,
    charge: Option<f64>,
    spin_orbitals_per_spatial: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisEntry {
    species: SpeciesKind,
    center: [f64; 3],
    exponents: Vec<f64>,
    coefficients: Vec<f64>,
}

pub fn parse_system_toml(text: &str) -> Result<SystemSpec> {
    let file: SystemFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let species = file
        .species
        .into_iter()
        .map(|e| {
            let mut s = match e.kind {
                SpeciesKind::Electron => ParticleSpecies::electrons(e.count),
                SpeciesKind::Proton => ParticleSpecies::protons(e.count),
                SpeciesKind::Positron => ParticleSpecies::positrons(e.count),
            };
            if let Some(m) = e.mass {
                s.mass = m;
            }
            if let Some(q) = e.charge {
                s.charge = q;
            }
            if let Some(n) = e.spin_orbitals_per_spatial {
                s.spin_orbitals_per_spatial = n;
            }
            s
        })
        .collect();
    let basis = file
        .basis
        .into_iter()
        .map(|b| ContractedGaussian::new(b.species, b.center, b.exponents, b.coefficients))
        .collect::<Result<Vec<_>>>()?;
    let spec = SystemSpec {
        name: file.name.unwrap_or_else(|| "custom".into()),
        species,
        nuclei: file.nuclei,
        basis,
        quantum_center: file.quantum_center,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_system_file(path: &Path) -> Result<SystemSpec> {
    parse_system_toml(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_primitive_normalizes_to_one() {
        for a in [0.05, 1.0, 37.5] {
            let g = ContractedGaussian::new(SpeciesKind::Electron, [0.0; 3], vec![a], vec![3.7]).unwrap();
            assert!((g.self_overlap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sto3g_contraction_has_unit_self_overlap() {
        let g = sto3g_hydrogen(SpeciesKind::Electron, [0.1, -0.2, 0.3]);
        assert!((g.self_overlap() - 1.0).abs() < 1e-12);
        // the literal STO-3G coefficients are already normalized to ~1e-6
        for (c, lit) in g.coefficients.iter().zip(STO3G_H_COEFFICIENTS) {
            assert!((c - lit).abs() < 1e-5);
        }
    }

    #[test]
    fn normalize_is_idempotent() {
        let g = g631_hydrogen(SpeciesKind::Positron, [0.0; 3]).remove(0);
        let h = normalize(&g);
        for (a, b) in g.coefficients.iter().zip(&h.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn psh_builtin_shape() {
        let s = builtin_system(BuiltinSystem::PsH, &SystemOverrides::default()).unwrap();
        assert_eq!(s.basis_dim(SpeciesKind::Electron), 2);
        assert_eq!(s.basis_dim(SpeciesKind::Positron), 2);
        assert_eq!(s.nuclei.len(), 1);
        assert_eq!(s.species_of(SpeciesKind::Positron).unwrap().charge, 1.0);
        assert_eq!(s.species_of(SpeciesKind::Electron).unwrap().spin_orbitals_per_spatial, 2);
        assert_eq!(s.species_of(SpeciesKind::Positron).unwrap().spin_orbitals_per_spatial, 1);
    }

    #[test]
    fn hhq_builtin_shape_and_overrides() {
        let s = builtin_system(BuiltinSystem::HHq, &SystemOverrides::default()).unwrap();
        assert_eq!(s.basis_dim(SpeciesKind::Electron), 2);
        assert_eq!(s.basis_dim(SpeciesKind::Proton), 2);
        let o = SystemOverrides {
            proton_exponents: Some(vec![5.0, 11.0]),
            ..Default::default()
        };
        let t = builtin_system(BuiltinSystem::HHq, &o).unwrap();
        let ex: Vec<f64> = t.basis_for(SpeciesKind::Proton).map(|g| g.exponents[0]).collect();
        assert_eq!(ex, vec![5.0, 11.0]);
        assert_eq!(t.basis_dim(SpeciesKind::Electron), 2);
    }

    #[test]
    fn builtins_are_deterministic() {
        let o = SystemOverrides {
            bond_length: Some(1.45),
            ..Default::default()
        };
        assert_eq!(
            builtin_system(BuiltinSystem::HHq, &o).unwrap(),
            builtin_system(BuiltinSystem::HHq, &o).unwrap()
        );
    }

    #[test]
    fn basis_centers_sit_on_nuclei_or_quantum_center() {
        for which in [BuiltinSystem::HHq, BuiltinSystem::PsH] {
            let s = builtin_system(which, &SystemOverrides::default()).unwrap();
            for g in &s.basis {
                let on_nucleus = s.nuclei.iter().any(|n| n.position == g.center);
                assert!(on_nucleus || s.quantum_center == Some(g.center));
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(BuiltinSystem::parse("h2o"), Err(Error::UnknownSystem(_))));
        let o = SystemOverrides {
            proton_exponents: Some(vec![4.0, -1.0]),
            ..Default::default()
        };
        assert!(matches!(
            builtin_system(BuiltinSystem::HHq, &o),
            Err(Error::InvalidBasis(_))
        ));
        assert!(ContractedGaussian::new(SpeciesKind::Electron, [0.0; 3], vec![1.0], vec![]).is_err());
    }

    #[test]
    fn parses_toml_system() {
        let text = r#"
name = "h-atom"
[[species]]
kind = "electron"
count = 1
[[nuclei]]
charge = 1.0
position = [0.0, 0.0, 0.0]
[[basis]]
species = "electron"
center = [0.0, 0.0, 0.0]
exponents = [3.42525091, 0.62391373, 0.16885540]
coefficients = [0.15432897, 0.53532814, 0.44463454]
"#;
        let s = parse_system_toml(text).unwrap();
        assert_eq!(s.name, "h-atom");
        assert_eq!(s.basis.len(), 1);
        assert!(parse_system_toml("name = 1").is_err());
    }
}
