//! Coupled mean-field solver for electrons plus quantum nuclei or positrons.
//!
//! Electrons are treated spin-restricted (closed shell). Every other species is
//! high-spin with one particle per occupied spatial orbital, so its same-species
//! two-body term carries full exchange and vanishes identically for one particle.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::IntegralSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScfOptions {
    /// RMS density change threshold.
    pub density_tol: f64,
    /// Energy change threshold.
    pub energy_tol: f64,
    pub max_iter: usize,
    /// Fraction of the previous density mixed into the new one (0 disables).
    pub damping: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            density_tol: 1e-10,
            energy_tol: 1e-12,
            max_iter: 2000,
            damping: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NeoHfSolution {
    /// AO x MO coefficients per species, columns sorted by orbital energy.
    pub coefficients: Vec<DMatrix<f64>>,
    pub orbital_energies: Vec<DVector<f64>>,
    /// Occupied spatial orbitals per species.
    pub occupied: Vec<usize>,
    pub energy: f64,
    pub converged: bool,
    pub iterations: usize,
    /// RMS density change of the last iteration.
    pub density_change: f64,
    pub energy_history: Vec<f64>,
}

impl NeoHfSolution {
    /// Structured text dump for reproducibility.
    pub fn summary(&self, ints: &IntegralSet) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "energy = {:.12}", self.energy);
        let _ = writeln!(out, "converged = {}", self.converged);
        let _ = writeln!(out, "iterations = {}", self.iterations);
        for (k, s) in ints.species.iter().enumerate() {
            let name = s.species.kind.name();
            let _ = writeln!(out, "[{name}]");
            let _ = writeln!(out, "occupied = {}", self.occupied[k]);
            let eps: Vec<String> = self.orbital_energies[k].iter().map(|e| format!("{e:.12}")).collect();
            let _ = writeln!(out, "orbital_energies = [{}]", eps.join(", "));
            let c = &self.coefficients[k];
            for i in 0..c.nrows() {
                let row: Vec<String> = c.row(i).iter().map(|v| format!("{v:.12}")).collect();
                let _ = writeln!(out, "coefficients.{i} = [{}]", row.join(", "));
            }
        }
        out
    }
}

fn occupied_count(ints: &IntegralSet, k: usize) -> Result<usize> {
    let s = &ints.species[k].species;
    let occ = if s.spin_orbitals_per_spatial == 2 {
        if s.count % 2 != 0 {
            return Err(Error::InvalidSystem(format!(
                "restricted treatment needs an even {} count, got {}",
                s.kind, s.count
            )));
        }
        s.count / 2
    } else {
        s.count
    };
    if occ > ints.species[k].dim() {
        return Err(Error::InvalidSystem(format!(
            "{} {}s do not fit in {} orbitals",
            s.count,
            s.kind,
            ints.species[k].dim()
        )));
    }
    Ok(occ)
}

/// Symmetric orthogonalizer `S^{-1/2}`.
fn orthogonalizer(s: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(s.clone());
    let min = eig.eigenvalues.min();
    if min < 1e-10 {
        return Err(Error::SingularOverlap {
            species: name.to_string(),
            min_eigenvalue: min,
        });
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.sqrt().recip()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Eigenpairs of `F C = S C e` sorted ascending with a deterministic sign.
fn solve_roothaan(fock: &DMatrix<f64>, x: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let fp = x.transpose() * fock * x;
    let eig = SymmetricEigen::new((&fp + fp.transpose()) * 0.5);
    let n = fock.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut c = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for (col, &idx) in order.iter().enumerate() {
        let mut v = x * eig.eigenvectors.column(idx);
        let pivot = v.iter().copied().fold(0.0_f64, |m, a| if a.abs() > m.abs() { a } else { m });
        if pivot < 0.0 {
            v = -v;
        }
        c.set_column(col, &v);
        e[col] = eig.eigenvalues[idx];
    }
    (c, e)
}

/// Density including the spin factor (2 for restricted electrons).
fn density(c: &DMatrix<f64>, occ: usize, spin_factor: f64) -> DMatrix<f64> {
    let co = c.columns(0, occ);
    (co * co.transpose()) * spin_factor
}

/// Same-species two-body mean field.
fn same_species_field(ints: &IntegralSet, k: usize, p: &DMatrix<f64>) -> DMatrix<f64> {
    let block = &ints.species[k];
    let n = block.dim();
    let exchange = if block.species.spin_orbitals_per_spatial == 2 { 0.5 } else { 1.0 };
    DMatrix::from_fn(n, n, |i, j| {
        let mut g = 0.0;
        for a in 0..n {
            for b in 0..n {
                g += p[(a, b)] * (block.eri.get(i, j, a, b) - exchange * block.eri.get(i, a, j, b));
            }
        }
        g
    })
}

/// Mean field felt by species `k` from all other species.
fn cross_field(ints: &IntegralSet, k: usize, densities: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = ints.species[k].dim();
    let mut f = DMatrix::zeros(n, n);
    for x in &ints.cross {
        if x.first == k {
            let pb = &densities[x.second];
            let m = pb.nrows();
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for a in 0..m {
                        for b in 0..m {
                            s += pb[(a, b)] * x.eri.get(i, j, a, b);
                        }
                    }
                    f[(i, j)] += s;
                }
            }
        } else if x.second == k {
            let pa = &densities[x.first];
            let m = pa.nrows();
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for a in 0..m {
                        for b in 0..m {
                            s += pa[(a, b)] * x.eri.get(a, b, i, j);
                        }
                    }
                    f[(i, j)] += s;
                }
            }
        }
    }
    f
}

/// Total mean-field energy of a set of densities, including `E_NN`.
pub fn mean_field_energy(ints: &IntegralSet, densities: &[DMatrix<f64>]) -> f64 {
    let mut e = ints.e_nn;
    for (k, block) in ints.species.iter().enumerate() {
        let p = &densities[k];
        let g = same_species_field(ints, k, p);
        e += p.component_mul(&block.h1).sum() + 0.5 * p.component_mul(&g).sum();
    }
    for x in &ints.cross {
        let (pa, pb) = (&densities[x.first], &densities[x.second]);
        let [n, _, m, _] = x.eri.dims();
        for i in 0..n {
            for j in 0..n {
                for a in 0..m {
                    for b in 0..m {
                        e += pa[(i, j)] * pb[(a, b)] * x.eri.get(i, j, a, b);
                    }
                }
            }
        }
    }
    e
}

fn spin_factor(ints: &IntegralSet, k: usize) -> f64 {
    if ints.species[k].species.spin_orbitals_per_spatial == 2 {
        2.0
    } else {
        1.0
    }
}

/// Densities implied by a solution's occupied orbitals.
pub fn solution_densities(ints: &IntegralSet, sol: &NeoHfSolution) -> Vec<DMatrix<f64>> {
    (0..ints.species.len())
        .map(|k| density(&sol.coefficients[k], sol.occupied[k], spin_factor(ints, k)))
        .collect()
}

/// Alternating Roothaan iterations over species until the densities settle.
///
/// On non-convergence the error carries the last energy; use
/// [`solve_neo_hf_unchecked`] to get the last iterate itself.
pub fn solve_neo_hf(ints: &IntegralSet, options: &ScfOptions) -> Result<NeoHfSolution> {
    let sol = solve_neo_hf_unchecked(ints, options)?;
    if !sol.converged {
        return Err(Error::ScfNotConverged {
            iterations: sol.iterations,
            last_energy: sol.energy,
            density_change: sol.density_change,
        });
    }
    Ok(sol)
}

pub fn solve_neo_hf_unchecked(ints: &IntegralSet, options: &ScfOptions) -> Result<NeoHfSolution> {
    if !(0.0..1.0).contains(&options.damping) {
        return Err(Error::Config(format!("damping must be in [0, 1), got {}", options.damping)));
    }
    let ns = ints.species.len();
    let occupied = (0..ns).map(|k| occupied_count(ints, k)).collect::<Result<Vec<_>>>()?;
    let xs = ints
        .species
        .iter()
        .map(|s| orthogonalizer(&s.overlap, s.species.kind.name()))
        .collect::<Result<Vec<_>>>()?;

    // core guess
    let mut coefficients = Vec::with_capacity(ns);
    let mut orbital_energies = Vec::with_capacity(ns);
    for k in 0..ns {
        let (c, e) = solve_roothaan(&ints.species[k].h1, &xs[k]);
        coefficients.push(c);
        orbital_energies.push(e);
    }
    let mut densities: Vec<DMatrix<f64>> = (0..ns)
        .map(|k| density(&coefficients[k], occupied[k], spin_factor(ints, k)))
        .collect();

    let mut energy = mean_field_energy(ints, &densities);
    let mut history = vec![energy];
    let mut converged = false;
    let mut iterations = 0;
    let mut density_change = f64::INFINITY;
    while iterations < options.max_iter {
        iterations += 1;
        let mut sq_change = 0.0;
        let mut n_entries = 0usize;
        for k in 0..ns {
            let fock = &ints.species[k].h1 + same_species_field(ints, k, &densities[k]) + cross_field(ints, k, &densities);
            let (c, e) = solve_roothaan(&fock, &xs[k]);
            let fresh = density(&c, occupied[k], spin_factor(ints, k));
            let mixed = &fresh * (1.0 - options.damping) + &densities[k] * options.damping;
            sq_change += (&mixed - &densities[k]).norm_squared();
            n_entries += mixed.len();
            densities[k] = mixed;
            coefficients[k] = c;
            orbital_energies[k] = e;
        }
        let new_energy = mean_field_energy(ints, &densities);
        let rms = (sq_change / n_entries as f64).sqrt();
        density_change = rms;
        let de = (new_energy - energy).abs();
        energy = new_energy;
        history.push(energy);
        if rms < options.density_tol && de < options.energy_tol {
            converged = true;
            break;
        }
    }

    // Final energy from the orbitals themselves (equals the density energy once converged).
    let sol = NeoHfSolution {
        coefficients,
        orbital_energies,
        occupied,
        energy,
        converged,
        iterations,
        density_change,
        energy_history: history,
    };
    let exact = mean_field_energy(ints, &solution_densities(ints, &sol));
    Ok(NeoHfSolution { energy: exact, ..sol })
}

/// Rotates all integral blocks into the solution's MO basis.
pub fn mo_transform(ints: &IntegralSet, sol: &NeoHfSolution) -> Result<IntegralSet> {
    ints.transform(&sol.coefficients)
}

/// Keeps the lowest `keep[k]` MOs of each species.
pub fn truncate_active_space(sol: &NeoHfSolution, keep: &[usize]) -> Result<NeoHfSolution> {
    if keep.len() != sol.coefficients.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} active sizes for {} species",
            keep.len(),
            sol.coefficients.len()
        )));
    }
    let mut out = sol.clone();
    for (k, &n) in keep.iter().enumerate() {
        let c = &sol.coefficients[k];
        if n < sol.occupied[k] || n > c.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "active size {n} outside [{}, {}] for species {k}",
                sol.occupied[k],
                c.ncols()
            )));
        }
        out.coefficients[k] = c.columns(0, n).into_owned();
        out.orbital_energies[k] = sol.orbital_energies[k].rows(0, n).into_owned();
    }
    Ok(out)
}
