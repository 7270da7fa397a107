//! Derivative-free minimizers over a fallible objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadSettings {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop once every vertex lies within this distance (max-norm) of the best.
    pub tol: f64,
    /// Rebuilds of the simplex around the best point after convergence.
    pub max_rebuilds: usize,
}

impl Default for NelderMeadSettings {
    fn default() -> Self {
        NelderMeadSettings {
            initial_step: 0.1,
            tol: 1e-8,
            max_rebuilds: 8,
        }
    }
}

/// `a_k = a / (k + 1 + A)^α`, `c_k = c / (k + 1)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaSettings {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability offset `A`; defaults to a tenth of the iteration count.
    pub stability: Option<f64>,
    /// Stop once a step moves the parameters less than this (max-norm).
    pub tol: f64,
}

impl Default for SpsaSettings {
    fn default() -> Self {
        SpsaSettings {
            a: 0.1,
            c: 0.05,
            alpha: 0.602,
            gamma: 0.101,
            stability: None,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    /// `(energy, parameters)` after each iteration.
    pub trace: Vec<(f64, Vec<f64>)>,
    pub evaluations: usize,
    pub converged: bool,
}

/// Counts calls and refuses to exceed the budget.
struct Budgeted<F> {
    f: F,
    used: usize,
    budget: usize,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Budgeted<F> {
    fn left(&self) -> bool {
        self.used < self.budget
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.used += 1;
        (self.f)(x)
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn nelder_mead(
    f: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    budget: usize,
    s: &NelderMeadSettings,
) -> Result<Outcome> {
    let n = x0.len();
    let mut obj = Budgeted { f, used: 0, budget };
    let f0 = obj.eval(x0)?;
    let mut trace = vec![(f0, x0.to_vec())];
    if n == 0 {
        return Ok(Outcome {
            x: Vec::new(),
            f: f0,
            trace,
            evaluations: 1,
            converged: true,
        });
    }
    let (mut best_x, mut best_f) = (x0.to_vec(), f0);
    let mut converged = false;
    for _round in 0..=s.max_rebuilds {
        let start_f = best_f;
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_x.clone(), best_f)];
        for i in 0..n {
            if !obj.left() {
                break;
            }
            let mut x = best_x.clone();
            x[i] += s.initial_step;
            let fx = obj.eval(&x)?;
            simplex.push((x, fx));
        }
        if simplex.len() <= n {
            break;
        }
        let mut round_converged = false;
        while obj.left() {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let size = simplex[1..].iter().map(|(x, _)| max_dist(x, &simplex[0].0)).fold(0.0, f64::max);
            if size < s.tol {
                round_converged = true;
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let xr = lerp(&centroid, &worst.0, -1.0);
            let fr = obj.eval(&xr)?;
            if fr < simplex[0].1 {
                let xe = lerp(&centroid, &worst.0, -2.0);
                let fe = if obj.left() { obj.eval(&xe)? } else { f64::INFINITY };
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc, accept) = if fr < worst.1 {
                    let xc = lerp(&centroid, &xr, 0.5);
                    let fc = if obj.left() { obj.eval(&xc)? } else { f64::INFINITY };
                    let ok = fc <= fr;
                    (xc, fc, ok)
                } else {
                    let xc = lerp(&centroid, &worst.0, 0.5);
                    let fc = if obj.left() { obj.eval(&xc)? } else { f64::INFINITY };
                    let ok = fc < worst.1;
                    (xc, fc, ok)
                };
                if accept {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        if !obj.left() {
                            break;
                        }
                        v.0 = lerp(&best, &v.0, 0.5);
                        v.1 = obj.eval(&v.0)?;
                    }
                }
            }
            let b = simplex.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty simplex");
            if b.1 < best_f {
                best_f = b.1;
                best_x = b.0.clone();
            }
            trace.push((best_f, best_x.clone()));
        }
        if !round_converged {
            break;
        }
        if start_f - best_f <= 1e-14 * best_f.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(Outcome {
        x: best_x,
        f: best_f,
        trace,
        evaluations: obj.used,
        converged,
    })
}

/// Simultaneous-perturbation stochastic approximation. Each iteration spends
/// two evaluations on the gradient estimate and one on the new iterate.
pub(crate) fn spsa(
    f: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    budget: usize,
    s: &SpsaSettings,
    seed: u64,
) -> Result<Outcome> {
    let n = x0.len();
    let mut obj = Budgeted { f, used: 0, budget };
    let f0 = obj.eval(x0)?;
    let mut trace = vec![(f0, x0.to_vec())];
    let (mut best_x, mut best_f) = (x0.to_vec(), f0);
    if n == 0 {
        return Ok(Outcome {
            x: best_x,
            f: best_f,
            trace,
            evaluations: 1,
            converged: true,
        });
    }
    let iterations = budget.saturating_sub(1) / 3;
    let stability = s.stability.unwrap_or(0.1 * iterations as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = x0.to_vec();
    let mut converged = false;
    for k in 0..iterations {
        let ak = s.a / (k as f64 + 1.0 + stability).powf(s.alpha);
        let ck = s.c / (k as f64 + 1.0).powf(s.gamma);
        let delta: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi + ck * d).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(xi, d)| xi - ck * d).collect();
        let diff = obj.eval(&plus)? - obj.eval(&minus)?;
        let step: Vec<f64> = delta.iter().map(|d| ak * diff / (2.0 * ck * d)).collect();
        for (xi, st) in x.iter_mut().zip(&step) {
            *xi -= st;
        }
        let fx = obj.eval(&x)?;
        trace.push((fx, x.clone()));
        if fx < best_f {
            best_f = fx;
            best_x = x.clone();
        }
        if step.iter().fold(0.0f64, |m, v| m.max(v.abs())) < s.tol {
            converged = true;
            break;
        }
    }
    Ok(Outcome {
        x: best_x,
        f: best_f,
        trace,
        evaluations: obj.used,
        converged,
    })
}
