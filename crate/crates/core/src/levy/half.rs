//! One-sided pieces of a jump measure.
//!
//! Every supported measure is written as `ν = P + mirror(Q)` where `P` and `Q`
//! live on `(0, ∞)`. All integrals below are over the positive half-line.

use rand::Rng;
use rand_distr::Exp1;
use statrs::function::gamma::gamma_lr;

use crate::error::Result;
use crate::quadrature::integrate;
use crate::special::{norm_interval, norm_pdf, truncated_normal_above};

pub(crate) const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_ABS_TOL: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum HalfMeasure {
    Empty,
    /// Density `c x^{-1-α} e^{-λx}`.
    TemperedStable { c: f64, alpha: f64, lambda: f64 },
    /// Atoms of mass `mass` at `base^{-n}`, `n ≥ 1`.
    Atoms { base: f64, mass: f64 },
    /// `intensity · N(mean, std²)` restricted to `(0, ∞)`.
    Normal { intensity: f64, mean: f64, std: f64 },
    /// Density `intensity · rate · e^{-rate x}`.
    Exponential { intensity: f64, rate: f64 },
}

impl HalfMeasure {
    pub(crate) fn is_empty(&self) -> bool {
        match *self {
            HalfMeasure::Empty => true,
            HalfMeasure::TemperedStable { c, .. } => c == 0.0,
            HalfMeasure::Atoms { mass, .. } => mass == 0.0,
            HalfMeasure::Normal { intensity, .. } | HalfMeasure::Exponential { intensity, .. } => intensity == 0.0,
        }
    }

    pub(crate) fn finite_activity(&self) -> bool {
        match self {
            HalfMeasure::TemperedStable { .. } | HalfMeasure::Atoms { .. } => self.is_empty(),
            _ => true,
        }
    }

    /// `∫_{(0,κ)} x² ν(dx)`.
    pub(crate) fn small_second_moment(&self, kappa: f64) -> Result<f64> {
        if self.is_empty() || kappa <= 0.0 {
            return Ok(0.0);
        }
        Ok(match *self {
            HalfMeasure::Empty => 0.0,
            HalfMeasure::TemperedStable { c, alpha, lambda } => {
                // y = x^{2-α} turns x^{1-α} dx into dy / (2-α)
                let p = 2.0 - alpha;
                let upper = kappa.powf(p);
                c / p * integrate(|y| (-lambda * y.powf(1.0 / p)).exp(), 0.0, upper, QUAD_REL_TOL, QUAD_ABS_TOL)?
            }
            HalfMeasure::Atoms { base, mass } => {
                let n = atom_count(base, kappa);
                mass * base.powi(-2 * (n as i32 + 1)) / (1.0 - base.powi(-2))
            }
            HalfMeasure::Normal { intensity, mean, std } => intensity * normal_moment(mean, std, 0.0, kappa, 2),
            HalfMeasure::Exponential { intensity, rate } => {
                intensity * 2.0 / (rate * rate) * gamma_lr(3.0, rate * kappa)
            }
        })
    }

    /// `ν([κ, ∞))`.
    pub(crate) fn mass_from(&self, kappa: f64) -> Result<f64> {
        self.moment_from(kappa, 0)
    }

    /// `∫_{[κ,∞)} x^p ν(dx)` for `p ∈ {0, 1, 2}`.
    pub(crate) fn moment_from(&self, kappa: f64, p: i32) -> Result<f64> {
        if self.is_empty() {
            return Ok(0.0);
        }
        Ok(match *self {
            HalfMeasure::Empty => 0.0,
            HalfMeasure::TemperedStable { c, alpha, lambda } => {
                let lo = kappa.ln();
                let hi = (800.0 / lambda).ln().max(lo + 1.0);
                let pf = p as f64;
                c * integrate(|u| ((pf - alpha) * u - lambda * u.exp()).exp(), lo, hi, QUAD_REL_TOL, QUAD_ABS_TOL)?
            }
            HalfMeasure::Atoms { base, mass } => {
                let n = atom_count(base, kappa);
                let r = base.powi(-p);
                if p == 0 {
                    mass * n as f64
                } else {
                    mass * r * (1.0 - r.powi(n as i32)) / (1.0 - r)
                }
            }
            HalfMeasure::Normal { intensity, mean, std } => {
                intensity * normal_moment(mean, std, kappa, f64::INFINITY, p)
            }
            HalfMeasure::Exponential { intensity, rate } => {
                let k = kappa.max(0.0);
                let tail = (-rate * k).exp();
                intensity
                    * tail
                    * match p {
                        0 => 1.0,
                        1 => k + 1.0 / rate,
                        _ => k * k + 2.0 * k / rate + 2.0 / (rate * rate),
                    }
            }
        })
    }

    /// `∫_{[lo,hi)} x ν(dx)`.
    pub(crate) fn first_moment_between(&self, lo: f64, hi: f64) -> Result<f64> {
        if self.is_empty() || lo >= hi {
            return Ok(0.0);
        }
        Ok(match *self {
            HalfMeasure::Empty => 0.0,
            HalfMeasure::TemperedStable { c, alpha, lambda } => {
                if lo <= 0.0 {
                    // x^{-α} is integrable at 0 only for α < 1; callers never ask otherwise.
                    let p = 1.0 - alpha;
                    c / p
                        * integrate(|y| (-lambda * y.powf(1.0 / p)).exp(), 0.0, hi.powf(p), QUAD_REL_TOL, QUAD_ABS_TOL)?
                } else {
                    c * integrate(
                        |u| ((1.0 - alpha) * u - lambda * u.exp()).exp(),
                        lo.ln(),
                        hi.ln(),
                        QUAD_REL_TOL,
                        QUAD_ABS_TOL,
                    )?
                }
            }
            HalfMeasure::Atoms { .. } => self.moment_from(lo, 1)? - self.moment_from(hi, 1)?,
            HalfMeasure::Normal { intensity, mean, std } => intensity * normal_moment(mean, std, lo, hi, 1),
            HalfMeasure::Exponential { intensity, rate } => {
                let lo = lo.max(0.0);
                intensity * ((lo + 1.0 / rate) * (-rate * lo).exp() - (hi + 1.0 / rate) * (-rate * hi).exp())
            }
        })
    }

    /// `∫_{(0,1)} x^q ν(dx)`; infinite when the integral diverges.
    pub(crate) fn moment_below_one(&self, q: f64) -> Result<f64> {
        if self.is_empty() {
            return Ok(0.0);
        }
        Ok(match *self {
            HalfMeasure::Empty => 0.0,
            HalfMeasure::TemperedStable { c, alpha, lambda } => {
                if q <= alpha {
                    f64::INFINITY
                } else {
                    let p = q - alpha;
                    c / p * integrate(|y| (-lambda * y.powf(1.0 / p)).exp(), 0.0, 1.0, QUAD_REL_TOL, QUAD_ABS_TOL)?
                }
            }
            HalfMeasure::Atoms { base, mass } => {
                if q <= 0.0 {
                    f64::INFINITY
                } else {
                    let r = base.powf(-q);
                    mass * r / (1.0 - r)
                }
            }
            HalfMeasure::Normal { intensity, mean, std } => {
                intensity
                    * integrate(
                        |x| x.powf(q) * norm_pdf((x - mean) / std) / std,
                        0.0,
                        1.0,
                        QUAD_REL_TOL,
                        QUAD_ABS_TOL,
                    )?
            }
            HalfMeasure::Exponential { intensity, rate } => {
                intensity
                    * integrate(|x| x.powf(q) * rate * (-rate * x).exp(), 0.0, 1.0, QUAD_REL_TOL, QUAD_ABS_TOL)?
            }
        })
    }
}

/// Number of atoms `base^{-n}`, `n ≥ 1`, with `base^{-n} ≥ κ`.
pub(crate) fn atom_count(base: f64, kappa: f64) -> u32 {
    if kappa > 1.0 / base {
        return 0;
    }
    let mut n = ((1.0 / kappa).ln() / base.ln()).floor().max(0.0) as u32;
    while atom(base, n + 1) >= kappa {
        n += 1;
    }
    while n > 0 && atom(base, n) < kappa {
        n -= 1;
    }
    n
}

#[inline]
pub(crate) fn atom(base: f64, n: u32) -> f64 {
    base.powi(-(n as i32))
}

/// `∫_{[lo,hi)} x^p φ((x-m)/s)/s dx` via standard-normal partial moments.
fn normal_moment(mean: f64, std: f64, lo: f64, hi: f64, p: i32) -> f64 {
    let zl = (lo - mean) / std;
    let zh = (hi - mean) / std;
    let mass = norm_interval(zl, zh);
    let pdf = |z: f64| if z.is_finite() { norm_pdf(z) } else { 0.0 };
    let zpdf = |z: f64| if z.is_finite() { z * norm_pdf(z) } else { 0.0 };
    let m1 = pdf(zl) - pdf(zh);
    match p {
        0 => mass,
        1 => mean * mass + std * m1,
        _ => {
            let m2 = mass + zpdf(zl) - zpdf(zh);
            mean * mean * mass + 2.0 * mean * std * m1 + std * std * m2
        }
    }
}

/// Precomputed sampler for `ν` restricted to `[κ, ∞)` and normalized.
#[derive(Debug, Clone)]
pub(crate) enum HalfTailSampler {
    /// Pareto proposal `x^{-1-ρ}` with acceptance `(x/x*)^{ρ-α} e^{-λ(x-x*)}`.
    ParetoTempered { kappa: f64, alpha: f64, lambda: f64, rho: f64, peak: f64 },
    /// Shifted exponential proposal with acceptance `(x/κ)^{-1-α}`.
    ExpTempered { kappa: f64, alpha: f64, lambda: f64 },
    Atoms { values: Vec<f64> },
    Normal { mean: f64, std: f64, z_lo: f64 },
    Exponential { kappa: f64, rate: f64 },
}

impl HalfTailSampler {
    pub(crate) fn new(half: &HalfMeasure, kappa: f64) -> Option<Self> {
        if half.is_empty() {
            return None;
        }
        Some(match *half {
            HalfMeasure::Empty => return None,
            HalfMeasure::TemperedStable { alpha, lambda, .. } => {
                if lambda * kappa < 1.0 {
                    let rho = alpha.max(0.5);
                    let peak = kappa.max((rho - alpha) / lambda);
                    HalfTailSampler::ParetoTempered { kappa, alpha, lambda, rho, peak }
                } else {
                    HalfTailSampler::ExpTempered { kappa, alpha, lambda }
                }
            }
            HalfMeasure::Atoms { base, .. } => {
                let n = atom_count(base, kappa);
                if n == 0 {
                    return None;
                }
                HalfTailSampler::Atoms { values: (1..=n).map(|k| atom(base, k)).collect() }
            }
            HalfMeasure::Normal { mean, std, .. } => {
                HalfTailSampler::Normal { mean, std, z_lo: (kappa.max(0.0) - mean) / std }
            }
            HalfMeasure::Exponential { rate, .. } => HalfTailSampler::Exponential { kappa: kappa.max(0.0), rate },
        })
    }

    #[inline]
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            &HalfTailSampler::ParetoTempered { kappa, alpha, lambda, rho, peak } => loop {
                let e: f64 = rng.sample(Exp1);
                let x = kappa * (e / rho).exp();
                let mut neg_log_accept = lambda * (x - peak);
                if rho != alpha {
                    neg_log_accept -= (rho - alpha) * (x / peak).ln();
                }
                let threshold: f64 = rng.sample(Exp1);
                if threshold >= neg_log_accept {
                    return x;
                }
            },
            &HalfTailSampler::ExpTempered { kappa, alpha, lambda } => loop {
                let e: f64 = rng.sample(Exp1);
                let x = kappa + e / lambda;
                let threshold: f64 = rng.sample(Exp1);
                if threshold >= (1.0 + alpha) * (x / kappa).ln() {
                    return x;
                }
            },
            HalfTailSampler::Atoms { values } => values[rng.random_range(0..values.len())],
            &HalfTailSampler::Normal { mean, std, z_lo } => loop {
                let x = mean + std * truncated_normal_above(z_lo, rng);
                // guard the open endpoint at 0 when κ = 0
                if x > 0.0 {
                    return x;
                }
            },
            &HalfTailSampler::Exponential { kappa, rate } => {
                let e: f64 = rng.sample(Exp1);
                kappa + e / rate
            }
        }
    }
}
