use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::circuit::{Angle, Circuit, Gate};
use super::density::{apply_noise_scaled, apply_readout_error, DensityMatrix};
use super::noise::NoiseSpec;
use super::statevector::{bitstring, evolve_state, run_with_params};
use crate::error::{Error, Result};
use crate::qubitops::{PauliString, PauliSum};

/// Terms measured together in one basis. `basis` holds the letter measured on
/// each qubit (`I` where no term acts).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroup {
    pub basis: PauliString,
    pub terms: Vec<(f64, PauliString)>,
}

impl MeasurementGroup {
    /// Value of the group observable for a measured bitstring.
    pub fn value(&self, outcome: usize) -> f64 {
        self.terms
            .iter()
            .map(|(c, p)| {
                if (outcome as u64 & p.support()).count_ones() % 2 == 0 {
                    *c
                } else {
                    -*c
                }
            })
            .sum()
    }

    /// Gates rotating the group basis onto Z.
    pub fn rotation(&self, n_qubits: usize) -> Vec<Gate> {
        let mut gates = Vec::new();
        for q in 0..n_qubits {
            match self.basis.op(q) {
                'X' => {
                    gates.push(Gate::rz(q, Angle::fixed(FRAC_PI_2)));
                    gates.push(Gate::sx(q));
                }
                'Y' => gates.push(Gate::sx(q)),
                _ => {}
            }
        }
        gates
    }
}

/// Greedy qubit-wise commuting partition of the non-identity terms, in
/// lexicographic term order. Returns the identity coefficient separately.
pub fn group_qubitwise(h: &PauliSum) -> Result<(f64, Vec<MeasurementGroup>)> {
    if !h.is_hermitian(1e-12) {
        return Err(Error::InvalidCircuit("measured operator must be Hermitian".into()));
    }
    let mut groups: Vec<MeasurementGroup> = Vec::new();
    let mut constant = 0.0;
    for (p, c) in h.terms() {
        if *p == PauliString::IDENTITY {
            constant += c.re;
            continue;
        }
        match groups.iter_mut().find(|g| g.basis.qubitwise_commutes(p)) {
            Some(g) => {
                g.basis.x |= p.x;
                g.basis.z |= p.z;
                g.terms.push((c.re, *p));
            }
            None => groups.push(MeasurementGroup {
                basis: *p,
                terms: vec![(c.re, *p)],
            }),
        }
    }
    Ok((constant, groups))
}

/// Exact outcome distribution of every measurement group.
#[derive(Debug, Clone)]
pub struct GroupDistributions {
    pub n_qubits: usize,
    pub constant: f64,
    pub groups: Vec<MeasurementGroup>,
    pub probabilities: Vec<Vec<f64>>,
}

impl GroupDistributions {
    /// Infinite-shot energy.
    pub fn mean(&self) -> f64 {
        self.constant
            + self
                .groups
                .iter()
                .zip(&self.probabilities)
                .map(|(g, probs)| probs.iter().enumerate().map(|(b, p)| p * g.value(b)).sum::<f64>())
                .sum::<f64>()
    }

    /// Draws `shots` outcomes per group from a ChaCha stream seeded by `seed`.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<SampleResult> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut energy = self.constant;
        let mut variance = 0.0;
        let mut counts = Vec::with_capacity(self.groups.len());
        for (g, probs) in self.groups.iter().zip(&self.probabilities) {
            let dist = WeightedIndex::new(probs).map_err(|e| Error::InvalidCircuit(format!("outcome distribution: {e}")))?;
            let mut tally: BTreeMap<usize, usize> = BTreeMap::new();
            for _ in 0..shots {
                *tally.entry(dist.sample(&mut rng)).or_insert(0) += 1;
            }
            let (mut s1, mut s2) = (0.0, 0.0);
            for (&b, &k) in &tally {
                let v = g.value(b);
                s1 += v * k as f64;
                s2 += v * v * k as f64;
            }
            let mean = s1 / shots as f64;
            let var = if shots > 1 {
                ((s2 - shots as f64 * mean * mean) / (shots as f64 - 1.0)).max(0.0)
            } else {
                0.0
            };
            energy += mean;
            variance += var / shots as f64;
            counts.push(tally);
        }
        Ok(SampleResult {
            energy,
            stderr: variance.sqrt(),
            shots,
            seed,
            n_qubits: self.n_qubits,
            bases: self.groups.iter().map(|g| g.basis.label(self.n_qubits)).collect(),
            counts,
        })
    }
}

/// Shot-based energy estimate with its raw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub energy: f64,
    pub stderr: f64,
    pub shots: usize,
    pub seed: u64,
    pub n_qubits: usize,
    /// Measurement basis label of each group.
    pub bases: Vec<String>,
    /// Per-group outcome counts keyed by basis index.
    pub counts: Vec<BTreeMap<usize, usize>>,
}

impl SampleResult {
    /// `group,basis,bitstring,count` rows, bitstrings with qubit 0 first.
    pub fn counts_csv(&self) -> String {
        let mut out = String::from("group,basis,bitstring,count\n");
        for (k, (basis, tally)) in self.bases.iter().zip(&self.counts).enumerate() {
            for (b, n) in tally {
                let _ = writeln!(out, "{k},{basis},{},{n}", bitstring(*b, self.n_qubits));
            }
        }
        out
    }
}

/// Computes every group's exact outcome distribution, under the density-matrix
/// channel when `noise` is given. Basis rotations are applied noiselessly and
/// readout flips act on the rotated distribution.
pub fn measurement_distributions(
    c: &Circuit,
    params: &[f64],
    initial: usize,
    h: &PauliSum,
    noise: Option<&NoiseSpec>,
) -> Result<GroupDistributions> {
    let n = c.n_qubits();
    if h.n_qubits() != n {
        return Err(Error::DimensionMismatch(format!("{}-qubit operator for a {n}-qubit circuit", h.n_qubits())));
    }
    let (constant, groups) = group_qubitwise(h)?;
    let mut probabilities = Vec::with_capacity(groups.len());
    match noise {
        Some(noise) => {
            let rho = apply_noise_scaled(c, params, initial, noise)?;
            for g in &groups {
                let mut r: DensityMatrix = rho.clone();
                for gate in g.rotation(n) {
                    r.apply_op(super::statevector::Op::resolve(&gate, None)?);
                }
                let mut probs = r.probabilities();
                apply_readout_error(&mut probs, n, noise.p_ro);
                probabilities.push(probs);
            }
        }
        None => {
            let psi = run_with_params(c, params, initial)?;
            for g in &groups {
                let rot = Circuit::new(n, 0).with_gates(g.rotation(n))?;
                let mut s = psi.clone();
                evolve_state(&rot, &[], &mut s)?;
                probabilities.push(s.iter().map(Complex64::norm_sqr).collect());
            }
        }
    }
    Ok(GroupDistributions {
        n_qubits: n,
        constant,
        groups,
        probabilities,
    })
}

/// Shot-sampled energy of `H` after `c`, optionally under noise.
pub fn sample_counts(
    c: &Circuit,
    params: &[f64],
    initial: usize,
    h: &PauliSum,
    shots: usize,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<SampleResult> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    measurement_distributions(c, params, initial, h, noise)?.sample(shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::statevector::expectation;
    use proptest::prelude::*;

    fn hamiltonian() -> PauliSum {
        PauliSum::from_text("-0.4 III\n+0.3 ZII\n-0.2 IZZ\n+0.15 XXI\n+0.1 YIY\n+0.05 ZXY\n-0.07 XIX").unwrap()
    }

    fn circuit() -> Circuit {
        let mut c = Circuit::new(3, 2);
        c.extend([
            Gate::sx(0),
            Gate::rz(0, Angle::param(0, 1.0)),
            Gate::cnot(0, 1),
            Gate::ryy(1, 2, Angle::param(1, 1.0)),
            Gate::sx(2),
            Gate::rxx(0, 2, Angle::fixed(0.3)),
        ])
        .unwrap();
        c
    }

    #[test]
    fn groups_are_qubitwise_commuting() {
        let (constant, groups) = group_qubitwise(&hamiltonian()).unwrap();
        assert_eq!(constant, -0.4);
        assert_eq!(groups.iter().map(|g| g.terms.len()).sum::<usize>(), 6);
        for g in &groups {
            for (_, a) in &g.terms {
                for (_, b) in &g.terms {
                    assert!(a.qubitwise_commutes(b));
                }
            }
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let c = circuit();
        let a = sample_counts(&c, &[0.2, -0.5], 0, &hamiltonian(), 500, None, 7).unwrap();
        let b = sample_counts(&c, &[0.2, -0.5], 0, &hamiltonian(), 500, None, 7).unwrap();
        assert_eq!(a, b);
        let other = sample_counts(&c, &[0.2, -0.5], 0, &hamiltonian(), 500, None, 8).unwrap();
        assert_ne!(a.counts, other.counts);
    }

    #[test]
    fn zero_shots_is_an_error() {
        assert!(matches!(
            sample_counts(&circuit(), &[0.0, 0.0], 0, &hamiltonian(), 0, None, 1),
            Err(Error::ZeroShots)
        ));
    }

    #[test]
    fn counts_csv_has_one_row_per_outcome() {
        let r = sample_counts(&circuit(), &[0.2, -0.5], 0, &hamiltonian(), 100, None, 3).unwrap();
        let csv = r.counts_csv();
        let rows = csv.lines().count() - 1;
        assert_eq!(rows, r.counts.iter().map(BTreeMap::len).sum::<usize>());
        assert!(csv.starts_with("group,basis,bitstring,count\n"));
    }

    #[test]
    fn noisy_mean_matches_density_expectation_without_readout() {
        let c = circuit();
        let h = hamiltonian();
        let noise = NoiseSpec {
            p_ro: 0.0,
            ..NoiseSpec::default().with_scale(20.0)
        };
        let d = measurement_distributions(&c, &[0.2, -0.5], 0, &h, Some(&noise)).unwrap();
        let rho = apply_noise_scaled(&c, &[0.2, -0.5], 0, &noise).unwrap();
        assert!((d.mean() - rho.expectation(&h).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn readout_damps_each_term_by_its_weight() {
        let c = circuit();
        let h = hamiltonian();
        let p = 0.03;
        let noise = NoiseSpec {
            p1: 0.0,
            p2: 0.0,
            p_ro: p,
            scale: 1.0,
        };
        let d = measurement_distributions(&c, &[0.2, -0.5], 0, &h, Some(&noise)).unwrap();
        let psi = run_with_params(&c, &[0.2, -0.5], 0).unwrap();
        let damped: f64 = h
            .terms()
            .map(|(q, coef)| {
                let single = PauliSum::from_terms(3, [(*coef, *q)]);
                expectation(&psi, &single).unwrap() * (1.0 - 2.0 * p).powi(q.weight() as i32)
            })
            .sum();
        assert!((d.mean() - damped).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn infinite_shot_limit_equals_expectation(t0 in -3.0f64..3.0, t1 in -3.0f64..3.0, init in 0usize..8) {
            let c = circuit();
            let h = hamiltonian();
            let d = measurement_distributions(&c, &[t0, t1], init, &h, None).unwrap();
            let psi = run_with_params(&c, &[t0, t1], init).unwrap();
            prop_assert!((d.mean() - expectation(&psi, &h).unwrap()).abs() < 1e-12);
        }
    }
}
