//! Noise amplification by gate folding and log-linear zero-noise extrapolation.
//!
//! A gate `g` folded `k` times becomes `g (g† g)^k`, which leaves the ideal
//! unitary unchanged while executing `2k + 1` noisy gates. The extrapolation
//! fits `ln(−E) = a + b·λ` by weighted least squares and reports
//! `E(0) = −exp(a)`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubitops::PauliSum;
use crate::resources::transpile_basis;
use crate::sim::{sample_counts, Circuit, NoiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldingStyle {
    /// Every gate folded the same number of times; `λ ∈ {1, 3, 5, …}`.
    #[default]
    Full,
    /// Full folds plus one extra fold on a prefix of the gates.
    Partial,
}

impl FromStr for FoldingStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(FoldingStyle::Full),
            "partial" => Ok(FoldingStyle::Partial),
            _ => Err(Error::Config(format!("unknown folding style {s:?} (expected full or partial)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FoldingSchedule {
    pub factors: Vec<f64>,
    pub style: FoldingStyle,
}

impl Default for FoldingSchedule {
    fn default() -> Self {
        FoldingSchedule {
            factors: vec![1.0, 3.0, 5.0],
            style: FoldingStyle::Full,
        }
    }
}

impl FoldingSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.factors.len() < 2 {
            return Err(Error::TooFewPoints(self.factors.len()));
        }
        for &l in &self.factors {
            check_factor(l, self.style)?;
        }
        Ok(())
    }

    /// Parses `1,3,5`.
    pub fn parse_factors(s: &str) -> Result<Vec<f64>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|e| Error::Config(format!("bad noise factor {t:?}: {e}"))))
            .collect()
    }
}

fn check_factor(lambda: f64, style: FoldingStyle) -> Result<()> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidNoiseFactor(lambda));
    }
    if style == FoldingStyle::Full {
        let k = (lambda - 1.0) / 2.0;
        if (k - k.round()).abs() > 1e-9 {
            return Err(Error::InvalidNoiseFactor(lambda));
        }
    }
    Ok(())
}

/// Folds `c` to noise factor `lambda`. Partial folding realizes a gate count
/// within one gate of `λ·len`.
pub fn fold_circuit(c: &Circuit, lambda: f64, style: FoldingStyle) -> Result<Circuit> {
    check_factor(lambda, style)?;
    let n = c.len();
    let base = ((lambda - 1.0) / 2.0 + 1e-9).floor() as usize;
    let extra_folds = match style {
        FoldingStyle::Full => 0,
        FoldingStyle::Partial => {
            let missing = lambda * n as f64 - (n * (2 * base + 1)) as f64;
            ((missing / 2.0).round().max(0.0) as usize).min(n)
        }
    };
    let mut gates = Vec::with_capacity((lambda * n as f64).ceil() as usize + 2);
    for (i, g) in c.gates().iter().enumerate() {
        gates.push(g.clone());
        let folds = base + usize::from(i < extra_folds);
        for _ in 0..folds {
            gates.push(g.inverse());
            gates.push(g.clone());
        }
    }
    c.with_gates(gates)
}

/// Realized noise factor of a folded circuit.
pub fn realized_factor(original: &Circuit, folded: &Circuit) -> f64 {
    if original.is_empty() {
        1.0
    } else {
        folded.len() as f64 / original.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiePoint {
    pub lambda: f64,
    pub energy: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieFit {
    pub points: Vec<PiePoint>,
    /// Intercept and slope of `ln(−E) = a + b·λ`.
    pub a: f64,
    pub b: f64,
    /// Covariance of `(a, b)`.
    pub covariance: [[f64; 2]; 2],
    pub e0: f64,
    pub e0_stderr: f64,
}

impl PieFit {
    pub fn predict_log(&self, lambda: f64) -> f64 {
        self.a + self.b * lambda
    }
}

/// Weighted least squares of `ln(−E)` on `λ` with `σ = stderr/|E|`.
///
/// If any point has zero standard error the fit is unweighted and the
/// parameter covariance comes from the residual variance.
pub fn pie_extrapolate(points: &[PiePoint]) -> Result<PieFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if let Some(p) = points.iter().find(|p| !(p.energy < 0.0)) {
        return Err(Error::NonNegativeEnergy {
            lambda: p.lambda,
            energy: p.energy,
        });
    }
    let ys: Vec<f64> = points.iter().map(|p| (-p.energy).ln()).collect();
    let sigmas: Vec<f64> = points.iter().map(|p| p.stderr / p.energy.abs()).collect();
    let weighted = sigmas.iter().all(|&s| s > 0.0);
    let ws: Vec<f64> = if weighted { sigmas.iter().map(|s| 1.0 / (s * s)).collect() } else { vec![1.0; points.len()] };
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((p, &y), &w) in points.iter().zip(&ys).zip(&ws) {
        s += w;
        sx += w * p.lambda;
        sxx += w * p.lambda * p.lambda;
        sy += w * y;
        sxy += w * p.lambda * y;
    }
    let det = s * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::TooFewPoints(1));
    }
    let a = (sxx * sy - sx * sxy) / det;
    let b = (s * sxy - sx * sy) / det;
    let scale = if weighted {
        1.0
    } else if points.len() > 2 {
        let rss: f64 = points.iter().zip(&ys).map(|(p, y)| (y - a - b * p.lambda).powi(2)).sum();
        rss / (points.len() - 2) as f64
    } else {
        0.0
    };
    let covariance = [[scale * sxx / det, -scale * sx / det], [-scale * sx / det, scale * s / det]];
    let e0 = -a.exp();
    Ok(PieFit {
        points: points.to_vec(),
        a,
        b,
        covariance,
        e0,
        e0_stderr: a.exp() * covariance[0][0].max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigatedRun {
    pub fit: PieFit,
    /// Every executed point, including excluded ones.
    pub raw: Vec<PiePoint>,
    /// Points left out of the fit because `E ≥ 0`.
    pub excluded: Vec<PiePoint>,
    /// Gate count of the transpiled, unfolded circuit.
    pub base_gates: usize,
    pub shots: usize,
    pub seed: u64,
    pub noise: NoiseSpec,
}

impl MitigatedRun {
    /// Energy at the smallest executed noise factor.
    pub fn raw_energy(&self) -> f64 {
        self.raw
            .iter()
            .min_by(|a, b| a.lambda.total_cmp(&b.lambda))
            .map(|p| p.energy)
            .unwrap_or(f64::NAN)
    }

    /// Plot data: executed points, the fit line in log space, and the λ = 0 marker.
    pub fn plot_csv(&self) -> String {
        let mut s = String::from("kind,lambda,energy,stderr,log_neg_energy,fit_log_neg_energy\n");
        for p in &self.raw {
            let kind = if self.excluded.contains(p) { "excluded" } else { "measured" };
            let log = if p.energy < 0.0 { format!("{:.12}", (-p.energy).ln()) } else { String::new() };
            let _ = writeln!(
                s,
                "{kind},{},{:.12},{:.12},{log},{:.12}",
                p.lambda,
                p.energy,
                p.stderr,
                self.fit.predict_log(p.lambda)
            );
        }
        let _ = writeln!(
            s,
            "extrapolated,0,{:.12},{:.12},{:.12},{:.12}",
            self.fit.e0,
            self.fit.e0_stderr,
            self.fit.a,
            self.fit.a
        );
        s
    }
}

/// Transpiles `c` (which must be fully bound), folds it at each factor, samples
/// each folded circuit under `noise`, and extrapolates. Points with `E ≥ 0` are
/// excluded and listed; a drop in energy by more than three standard errors as
/// λ grows fails the run.
pub fn run_mitigated(
    c: &Circuit,
    h: &PauliSum,
    schedule: &FoldingSchedule,
    shots: usize,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<MitigatedRun> {
    schedule.validate()?;
    noise.validate()?;
    let base = transpile_basis(c)?;
    let mut raw = Vec::with_capacity(schedule.factors.len());
    for (i, &lambda) in schedule.factors.iter().enumerate() {
        let folded = fold_circuit(&base, lambda, schedule.style)?;
        let r = sample_counts(&folded, &[], 0, h, shots, Some(noise), seed.wrapping_add(i as u64))?;
        raw.push(PiePoint {
            lambda: realized_factor(&base, &folded),
            energy: r.energy,
            stderr: r.stderr,
        });
    }
    let mut sorted = raw.clone();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    for w in sorted.windows(2) {
        let tol = 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        if w[1].energy < w[0].energy - tol {
            return Err(Error::NonMonotoneNoise {
                lambda: w[1].lambda,
                energy: w[1].energy,
                previous: w[0].energy,
            });
        }
    }
    let (kept, excluded): (Vec<PiePoint>, Vec<PiePoint>) = raw.iter().partition(|p| p.energy < 0.0);
    let fit = pie_extrapolate(&kept)?;
    Ok(MitigatedRun {
        fit,
        raw,
        excluded,
        base_gates: base.len(),
        shots,
        seed,
        noise: *noise,
    })
}

/// Spread of `E(0)` over repeated runs with seeds `seed, seed + 1000, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedRuns {
    pub e0: Vec<f64>,
    pub raw: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of `E(0)` across runs.
    pub std: f64,
    /// Mean of the per-fit standard errors.
    pub mean_fit_stderr: f64,
}

pub fn run_repeated(
    c: &Circuit,
    h: &PauliSum,
    schedule: &FoldingSchedule,
    shots: usize,
    noise: &NoiseSpec,
    seed: u64,
    runs: usize,
) -> Result<RepeatedRuns> {
    let results: Vec<MitigatedRun> = (0..runs)
        .map(|r| run_mitigated(c, h, schedule, shots, noise, seed.wrapping_add(1000 * r as u64)))
        .collect::<Result<_>>()?;
    let e0: Vec<f64> = results.iter().map(|r| r.fit.e0).collect();
    let n = e0.len() as f64;
    let mean = e0.iter().sum::<f64>() / n;
    let std = if e0.len() > 1 {
        (e0.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(RepeatedRuns {
        raw: results.iter().map(MitigatedRun::raw_energy).collect(),
        mean_fit_stderr: results.iter().map(|r| r.fit.e0_stderr).sum::<f64>() / n,
        e0,
        mean,
        std,
    })
}
