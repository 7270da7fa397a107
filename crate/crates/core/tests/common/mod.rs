//! Numerical quadrature oracles for s-type Gaussian integrals.
//!
//! Every primitive is a product of one-dimensional Gaussians, so spatial
//! integrals are products of 1-D composite Gauss–Legendre integrals. Coulomb
//! kernels use `1/r = (2/√π) ∫₀^∞ exp(-t² r²) dt`, integrated numerically in
//! `t`, which keeps the oracles free of the Boys function.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use mcvqe::basis::ContractedGaussian;

/// Gaussians are cut at `exp(-REACH²)`.
const REACH: f64 = 6.5;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(16).unwrap()))
}

/// Composite rule with panels no wider than `2·width`.
fn composite(lo: f64, hi: f64, width: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let panels = ((hi - lo) / (2.0 * width)).ceil().clamp(1.0, 2000.0) as usize;
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| rule().integrate(lo + k as f64 * h, lo + (k + 1) as f64 * h, &mut f))
        .sum()
}

/// `exp(-a (x - c)²)` times `exp(-b (x - d)²)` along one axis.
#[derive(Clone, Copy)]
struct Pair1 {
    a: f64,
    c: f64,
    b: f64,
    d: f64,
}

impl Pair1 {
    fn eval(&self, x: f64) -> f64 {
        (-self.a * (x - self.c).powi(2) - self.b * (x - self.d).powi(2)).exp()
    }

    fn centre(&self) -> f64 {
        (self.a * self.c + self.b * self.d) / (self.a + self.b)
    }

    fn width(&self) -> f64 {
        1.0 / (self.a + self.b).sqrt()
    }

    fn bounds(&self) -> (f64, f64) {
        let (m, s) = (self.centre(), self.width());
        (m - REACH * s, m + REACH * s)
    }

    fn integral(&self) -> f64 {
        let (lo, hi) = self.bounds();
        composite(lo, hi, self.width(), |x| self.eval(x))
    }
}

/// `∫ exp(-t² u²) h(u) du` for `h` concentrated on `centre ± REACH·width`.
fn damped(t: f64, centre: f64, width: f64, h: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (centre - REACH * width, centre + REACH * width);
    let mut w = width;
    if t > 0.0 {
        lo = lo.max(-REACH / t);
        hi = hi.min(REACH / t);
        w = w.min(1.0 / t);
    }
    composite(lo, hi, w, |u| (-(t * u).powi(2)).exp() * h(u))
}

/// `(2/√π) ∫₀^∞ F(t) dt` for the Coulomb representation: a dense composite
/// rule on `[0, T]` and the tail mapped through `t = T/τ`.
fn coulomb_t(scale: f64, f: impl Fn(f64) -> f64) -> f64 {
    let t_max = 40.0 * scale;
    let head = composite(0.0, t_max, 0.5 * scale, &f);
    let tail = composite(0.0, 1.0, 0.125, |tau| if tau == 0.0 { 0.0 } else { f(t_max / tau) * t_max / (tau * tau) });
    2.0 / PI.sqrt() * (head + tail)
}

fn norm(a: f64) -> f64 {
    (2.0 * a / PI).powf(0.75)
}

fn prims(g: &ContractedGaussian) -> Vec<(f64, f64)> {
    g.exponents.iter().zip(&g.coefficients).map(|(&a, &c)| (a, c * norm(a))).collect()
}

fn pairs(a: &ContractedGaussian, b: &ContractedGaussian) -> Vec<(f64, [Pair1; 3])> {
    let mut out = Vec::new();
    for (ea, ca) in prims(a) {
        for (eb, cb) in prims(b) {
            let axes = [0, 1, 2].map(|k| Pair1 {
                a: ea,
                c: a.center[k],
                b: eb,
                d: b.center[k],
            });
            out.push((ca * cb, axes));
        }
    }
    out
}

/// `⟨a|b⟩`.
pub fn overlap(a: &ContractedGaussian, b: &ContractedGaussian) -> f64 {
    pairs(a, b).iter().map(|(w, ax)| w * ax.iter().map(Pair1::integral).product::<f64>()).sum()
}

/// `⟨a| -∇²/(2 mass) |b⟩ = (1/2 mass) ⟨∇a|∇b⟩`.
pub fn kinetic(a: &ContractedGaussian, b: &ContractedGaussian, mass: f64) -> f64 {
    let mut t = 0.0;
    for (w, ax) in pairs(a, b) {
        let plain: Vec<f64> = ax.iter().map(Pair1::integral).collect();
        for k in 0..3 {
            let p = ax[k];
            let (lo, hi) = p.bounds();
            let grad = composite(lo, hi, p.width(), |x| 4.0 * p.a * p.b * (x - p.c) * (x - p.d) * p.eval(x));
            t += w * grad * plain[(k + 1) % 3] * plain[(k + 2) % 3];
        }
    }
    t / (2.0 * mass)
}

/// `⟨a| 1/|r - C| |b⟩`.
pub fn coulomb_potential(a: &ContractedGaussian, b: &ContractedGaussian, point: [f64; 3]) -> f64 {
    let mut v = 0.0;
    for (w, ax) in pairs(a, b) {
        let scale = ax[0].width().recip().max(1.0);
        v += w * coulomb_t(scale, |t| {
            (0..3)
                .map(|k| {
                    let p = ax[k];
                    damped(t, p.centre() - point[k], p.width(), |u| p.eval(point[k] + u))
                })
                .product()
        });
    }
    v
}

/// `(ab|cd)` in chemists' notation, unsigned.
pub fn eri(a: &ContractedGaussian, b: &ContractedGaussian, c: &ContractedGaussian, d: &ContractedGaussian) -> f64 {
    let mut v = 0.0;
    for (w1, ab) in pairs(a, b) {
        for (w2, cd) in pairs(c, d) {
            let scale = ab[0].width().min(cd[0].width()).recip().max(1.0);
            v += w1 * w2 * coulomb_t(scale, |t| {
                (0..3)
                    .map(|k| {
                        let (f, g) = (ab[k], cd[k]);
                        // cross-correlation C(u) = ∫ f(u + v) g(v) dv
                        let corr = |u: f64| {
                            let (glo, ghi) = g.bounds();
                            let (flo, fhi) = f.bounds();
                            composite(glo.max(flo - u), ghi.min(fhi - u), f.width().min(g.width()), |x| f.eval(u + x) * g.eval(x))
                        };
                        let width = (f.width().powi(2) + g.width().powi(2)).sqrt();
                        damped(t, f.centre() - g.centre(), width, corr)
                    })
                    .product()
            });
        }
    }
    v
}
