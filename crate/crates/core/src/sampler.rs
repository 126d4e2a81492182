//! Stick-breaking and the coupled Gaussian-approximation samplers.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use crate::brownian::bm_min_triplet;
use crate::error::{Result, SbgError};
use crate::levy::{CutoffQuantities, LevyModel, TailSampler};
use crate::triplet::{CoupledPair, ExtremumTriplet};

/// Sticks `ℓ_k = U_k L_{k-1}` and remainder `L_n` of a horizon `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct StickBreaking {
    pub horizon: f64,
    pub sticks: Vec<f64>,
    pub remainder: f64,
}

impl StickBreaking {
    /// Breaks `[0, T]` using the given uniforms in `(0, 1)`.
    pub fn from_uniforms(horizon: f64, uniforms: &[f64]) -> Self {
        let mut remainder = horizon;
        let mut sticks = Vec::with_capacity(uniforms.len());
        for &u in uniforms {
            let stick = u * remainder;
            sticks.push(stick);
            remainder -= stick;
        }
        StickBreaking { horizon, sticks, remainder }
    }

    pub fn sample<R: Rng + ?Sized>(horizon: f64, n: usize, rng: &mut R) -> Self {
        let mut remainder = horizon;
        let mut sticks = Vec::with_capacity(n);
        for _ in 0..n {
            let stick = rng.random::<f64>() * remainder;
            sticks.push(stick);
            remainder -= stick;
        }
        StickBreaking { horizon, sticks, remainder }
    }
}

pub fn stick_breaking<R: Rng + ?Sized>(horizon: f64, n: usize, rng: &mut R) -> StickBreaking {
    StickBreaking::sample(horizon, n, rng)
}

#[derive(Debug, Clone, Copy)]
struct Level {
    drift: f64,
    vol: f64,
}

impl Level {
    fn new(sigma: f64, q: &CutoffQuantities) -> Self {
        Level { drift: q.b_kappa, vol: (sigma * sigma + q.sigma_bar_sq).sqrt() }
    }
}

/// Precomputed sampling context for a pair of cutoffs `κ₁ ≥ κ₂`.
#[derive(Debug, Clone)]
pub struct CouplingPlan {
    kappa_coarse: f64,
    kappa_fine: f64,
    coarse: Level,
    fine: Level,
    jump_rate: f64,
    tail: Option<TailSampler>,
    identical: bool,
}

impl CouplingPlan {
    pub fn new(model: &LevyModel, kappa_coarse: f64, kappa_fine: f64) -> Result<Self> {
        if !(kappa_coarse >= kappa_fine) || kappa_coarse > 1.0 {
            return Err(SbgError::CutoffOrder { coarse: kappa_coarse, fine: kappa_fine });
        }
        let qc = model.cutoff_quantities(kappa_coarse)?;
        let qf = model.cutoff_quantities(kappa_fine)?;
        let jump_rate = qf.nu_bar;
        let tail = if jump_rate > 0.0 { Some(model.tail_sampler(kappa_fine)?) } else { None };
        Ok(CouplingPlan {
            kappa_coarse,
            kappa_fine,
            coarse: Level::new(model.sigma(), &qc),
            fine: Level::new(model.sigma(), &qf),
            jump_rate,
            tail,
            identical: kappa_coarse == kappa_fine,
        })
    }

    /// Plan whose two components coincide.
    pub fn single(model: &LevyModel, kappa: f64) -> Result<Self> {
        Self::new(model, kappa, kappa)
    }

    pub fn kappas(&self) -> (f64, f64) {
        (self.kappa_coarse, self.kappa_fine)
    }

    pub fn jump_rate(&self) -> f64 {
        self.jump_rate
    }

    #[inline]
    fn jump_count<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> u64 {
        poisson(self.jump_rate * t, rng)
    }

    #[inline]
    fn jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.tail.as_ref().expect("positive jump rate implies a tail sampler").sample(rng)
    }

    /// Coupled increments `(Z^{κ₁}_t, Z^{κ₂}_t)` from one Brownian draw and shared jumps.
    pub fn increments<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> (f64, f64) {
        let w: f64 = rng.sample::<f64, _>(StandardNormal) * t.sqrt();
        let n = self.jump_count(t, rng);
        let mut fine_jumps = 0.0;
        let mut coarse_jumps = 0.0;
        for _ in 0..n {
            let x = self.jump(rng);
            fine_jumps += x;
            if x.abs() >= self.kappa_coarse {
                coarse_jumps += x;
            }
        }
        let fine = self.fine.drift * t + self.fine.vol * w + fine_jumps;
        if self.identical {
            return (fine, fine);
        }
        (self.coarse.drift * t + self.coarse.vol * w + coarse_jumps, fine)
    }

    /// Coupled triplets over `[0, t]` by exact Brownian extrema between jumps.
    pub fn jump_diffusion_triplets<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> CoupledPair {
        if t <= 0.0 {
            let z = ExtremumTriplet::zero();
            return CoupledPair { coarse: z, fine: z };
        }
        let n = self.jump_count(t, rng) as usize;
        if n == 0 {
            let fine = bm_min_triplet(t, self.fine.vol, self.fine.drift, rng);
            let coarse = if self.identical { fine } else { bm_min_triplet(t, self.coarse.vol, self.coarse.drift, rng) };
            return CoupledPair { coarse, fine };
        }
        // Jump times from normalized exponential spacings, scaled to [0, t].
        let mut times = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        for _ in 0..=n {
            let e: f64 = rng.sample(Exp1);
            acc += e;
            times.push(acc);
        }
        let scale = t / acc;
        let mut coarse = Running::new();
        let mut fine = Running::new();
        let mut start = 0.0;
        for (k, cum) in times.iter().enumerate() {
            let end = if k == n { t } else { cum * scale };
            let delta = end - start;
            let f = bm_min_triplet(delta, self.fine.vol, self.fine.drift, rng);
            fine.advance(start, &f);
            if !self.identical {
                let c = bm_min_triplet(delta, self.coarse.vol, self.coarse.drift, rng);
                coarse.advance(start, &c);
            }
            if k < n {
                let x = self.jump(rng);
                fine.value += x;
                if !self.identical && x.abs() >= self.kappa_coarse {
                    coarse.value += x;
                }
            }
            start = end;
        }
        let fine = fine.finish();
        let coarse = if self.identical { fine } else { coarse.finish() };
        CoupledPair { coarse, fine }
    }

    /// Stick-breaking coupling: increments on `n` sticks and exact extrema on the remainder.
    pub fn sbg<R: Rng + ?Sized>(&self, n: usize, horizon: f64, rng: &mut R) -> CoupledPair {
        let mut remainder = horizon;
        let mut coarse = [0.0; 3];
        let mut fine = [0.0; 3];
        for _ in 0..n {
            let stick = rng.random::<f64>() * remainder;
            remainder -= stick;
            if stick <= 0.0 {
                continue;
            }
            let (c, f) = self.increments(stick, rng);
            accumulate(&mut coarse, c, stick);
            accumulate(&mut fine, f, stick);
        }
        let rest = self.jump_diffusion_triplets(remainder, rng);
        CoupledPair { coarse: assemble(&rest.coarse, &coarse), fine: assemble(&rest.fine, &fine) }
    }
}

#[inline]
fn accumulate(acc: &mut [f64; 3], xi: f64, stick: f64) {
    acc[0] += xi;
    acc[1] += xi.min(0.0);
    if xi <= 0.0 {
        acc[2] += stick;
    }
}

#[inline]
fn assemble(base: &ExtremumTriplet, acc: &[f64; 3]) -> ExtremumTriplet {
    ExtremumTriplet::infimum(base.terminal + acc[0], base.extremum + acc[1], base.tau + acc[2])
}

struct Running {
    value: f64,
    inf: f64,
    tau: f64,
}

impl Running {
    fn new() -> Self {
        Running { value: 0.0, inf: 0.0, tau: 0.0 }
    }

    #[inline]
    fn advance(&mut self, start: f64, piece: &ExtremumTriplet) {
        let candidate = self.value + piece.extremum;
        if self.inf > candidate {
            self.inf = candidate;
            self.tau = start + piece.tau;
        }
        self.value += piece.terminal;
    }

    fn finish(self) -> ExtremumTriplet {
        ExtremumTriplet::infimum(self.value, self.inf, self.tau)
    }
}

/// Poisson draw; inversion for small means, `rand_distr` otherwise.
#[inline]
fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 12.0 {
        let mut p = (-mean).exp();
        let mut cdf = p;
        let u: f64 = rng.random();
        let mut k = 0u64;
        while u > cdf && k < 200 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        return k;
    }
    match Poisson::new(mean) {
        Ok(d) => d.sample(rng) as u64,
        Err(_) => mean.round() as u64,
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(SbgError::InvalidArgument(format!("horizon must be positive, got {t}")))
    }
}

/// `(Z^{κ₁}_t, Z^{κ₂}_t)` with shared Brownian and jump randomness.
pub fn coupled_increments<R: Rng + ?Sized>(
    model: &LevyModel,
    kappa1: f64,
    kappa2: f64,
    t: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_horizon(t)?;
    Ok(CouplingPlan::new(model, kappa1, kappa2)?.increments(t, rng))
}

/// Coupled triplets over `[0, t]` for cutoffs `κ₁ ≥ κ₂`.
pub fn coupled_jd_triplets<R: Rng + ?Sized>(
    model: &LevyModel,
    kappa1: f64,
    kappa2: f64,
    t: f64,
    rng: &mut R,
) -> Result<CoupledPair> {
    check_horizon(t)?;
    Ok(CouplingPlan::new(model, kappa1, kappa2)?.jump_diffusion_triplets(t, rng))
}

/// Coupled triplets over `[0, T]` via `n` sticks.
pub fn sbg_coupled_triplets<R: Rng + ?Sized>(
    model: &LevyModel,
    kappa1: f64,
    kappa2: f64,
    n: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<CoupledPair> {
    check_horizon(horizon)?;
    Ok(CouplingPlan::new(model, kappa1, kappa2)?.sbg(n, horizon, rng))
}

/// Single-level infimum triplet of the Gaussian approximation at cutoff `κ`.
pub fn sample_triplet<R: Rng + ?Sized>(
    model: &LevyModel,
    kappa: f64,
    n: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<ExtremumTriplet> {
    Ok(sbg_coupled_triplets(model, kappa, kappa, n, horizon, rng)?.fine)
}
