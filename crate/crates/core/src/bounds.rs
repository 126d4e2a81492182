//! Bias and level-variance bounds for the Gaussian approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SbgError};
use crate::levy::{CutoffQuantities, LevyModel};
use crate::scalar::Scalar;

/// Regularity class of a payoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    /// Lipschitz in (terminal, extremum).
    Lip,
    /// Locally Lipschitz with exponential growth.
    LocLip,
    /// Barrier type in the extremum.
    BT1,
    /// Barrier type in the extremum time.
    BT2,
    /// Lipschitz in the extremum time.
    LipTau,
}

impl ClassTag {
    pub fn name(self) -> &'static str {
        match self {
            ClassTag::Lip => "Lip",
            ClassTag::LocLip => "LocLip",
            ClassTag::BT1 => "BT1",
            ClassTag::BT2 => "BT2",
            ClassTag::LipTau => "LipTau",
        }
    }
}

/// Class tag with its constants; bias bounds scale with `lipschitz_k` (or `bound_m` for barrier classes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffClass {
    pub tag: ClassTag,
    pub lipschitz_k: f64,
    pub bound_m: f64,
    /// Hölder exponent; falls back to the model's `gamma_h`.
    pub gamma: Option<f64>,
    /// Barrier level or time threshold.
    pub level: Option<f64>,
}

impl PayoffClass {
    pub fn new(tag: ClassTag) -> Self {
        PayoffClass { tag, lipschitz_k: 1.0, bound_m: 1.0, gamma: None, level: None }
    }

    fn scale(&self) -> f64 {
        match self.tag {
            ClassTag::BT1 | ClassTag::BT2 => self.bound_m,
            _ => self.lipschitz_k,
        }
    }

    pub(crate) fn gamma_for(&self, model: &LevyModel) -> Result<f64> {
        self.gamma
            .or(model.regularity().gamma_h)
            .ok_or(SbgError::MissingRegularity { class: self.tag.name(), param: "gamma" })
    }

    pub(crate) fn delta_for(&self, model: &LevyModel) -> Result<f64> {
        model.regularity().delta.ok_or(SbgError::MissingRegularity { class: self.tag.name(), param: "delta" })
    }
}

/// First-moment coupling bound.
pub fn mu1_of<S: Scalar>(q: &CutoffQuantities<S>, t: S) -> S {
    let sb = q.sigma_bar();
    if sb == S::zero() {
        return S::zero();
    }
    let two = S::lit(2.0);
    let a = two * (two * t).sqrt() * sb;
    let phi2 = q.phi * q.phi;
    a.min(q.kappa * phi2) * (S::one() + (a / (q.kappa * phi2)).log_plus())
}

/// Second-moment coupling bound.
pub fn mu2_of<S: Scalar>(q: &CutoffQuantities<S>, t: S, k2: S) -> S {
    let sb = q.sigma_bar();
    if sb == S::zero() {
        return S::zero();
    }
    let a = (S::lit(2.0) * t).sqrt() * sb;
    let log_arg = a / (k2 * q.kappa * q.phi);
    S::SQRT_2() * mu1_of(q, t) + a.min(k2 * q.kappa * q.phi) * (S::one() + S::lit(2.0) * log_arg.log_plus()).sqrt()
}

/// Extremum-time bound without an Orey assumption; infinite when `σ̄_κ = 0`.
pub fn mu_tau_zero_of<S: Scalar>(q: &CutoffQuantities<S>, t: S) -> S {
    let sb = q.sigma_bar();
    if sb == S::zero() {
        return S::infinity();
    }
    t.sqrt() * (q.kappa / sb) * q.phi.powi(3)
}

/// Extremum-time bound under an Orey index `delta`, with `ψ_κ = C κ φ_κ`.
pub fn mu_tau_delta_of<S: Scalar>(q: &CutoffQuantities<S>, t: S, delta: S, c_o: S) -> S {
    let psi = c_o * q.kappa * q.phi;
    let two_thirds = S::lit(2.0 / 3.0);
    if psi == S::zero() {
        return S::zero();
    }
    if delta == two_thirds {
        return t.min(psi.powf(two_thirds)) * (S::one() + (t / psi.powf(two_thirds)).log_plus());
    }
    let head = t.min(psi.powf(delta));
    let ratio = S::one().min(psi / t.powf(S::one() / delta));
    let bracket = (S::one() - ratio.powf(delta - two_thirds)).abs();
    head + t.powf(S::one() - two_thirds / delta) * psi.powf(two_thirds) * bracket
}

/// Smallest available extremum-time bound.
pub fn mu_tau_star_of<S: Scalar>(q: &CutoffQuantities<S>, t: S, delta: Option<S>, c_o: S) -> S {
    let zero = mu_tau_zero_of(q, t);
    match delta {
        Some(d) => zero.min(mu_tau_delta_of(q, t, d, c_o)),
        None => zero,
    }
}

pub fn mu1(model: &LevyModel, kappa: f64, t: f64) -> Result<f64> {
    Ok(mu1_of(&model.cutoff_quantities(kappa)?, t))
}

pub fn mu2(model: &LevyModel, kappa: f64, t: f64) -> Result<f64> {
    Ok(mu2_of(&model.cutoff_quantities(kappa)?, t, model.regularity().k2))
}

pub fn mu_tau_star(model: &LevyModel, kappa: f64, t: f64, delta: Option<f64>) -> Result<f64> {
    Ok(mu_tau_star_of(&model.cutoff_quantities(kappa)?, t, delta, model.regularity().c_o))
}

/// Bias bound for a payoff class when the finest cutoff is `κ`.
pub fn bias_bound(class: &PayoffClass, model: &LevyModel, kappa: f64, t: f64) -> Result<f64> {
    let q = model.cutoff_quantities(kappa)?;
    let reg = model.regularity();
    let raw = match class.tag {
        ClassTag::Lip => mu1_of(&q, t),
        ClassTag::LocLip => mu2_of(&q, t, reg.k2),
        ClassTag::BT1 => {
            let g = class.gamma_for(model)?;
            let a = mu1_of(&q, t).powf(g / (1.0 + g));
            let b = mu2_of(&q, t, reg.k2).powf(2.0 * g / (2.0 + g));
            a.min(b)
        }
        ClassTag::LipTau => mu_tau_star_of(&q, t, reg.delta, reg.c_o),
        ClassTag::BT2 => mu_tau_star_of(&q, t, reg.delta, reg.c_o).sqrt(),
    };
    Ok(class.scale() * raw)
}

/// Level inputs: cutoff `κ_j`, next cutoff `κ_{j+1}`, stick count `n_j`, horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelContext {
    pub kappa: f64,
    pub kappa_next: f64,
    pub sticks: usize,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelBounds {
    pub bias: f64,
    pub variance: f64,
    pub cost: f64,
}

/// Modeled cost of one draw at a level: sticks plus expected jump count.
pub fn level_cost(model: &LevyModel, ctx: &LevelContext) -> Result<f64> {
    Ok(ctx.sticks as f64 + model.cutoff_quantities(ctx.kappa_next)?.nu_bar * ctx.horizon)
}

/// Bias, level-variance and cost bounds for level `j ≥ 1`.
pub fn level_bounds(class: &PayoffClass, model: &LevyModel, ctx: &LevelContext) -> Result<LevelBounds> {
    let q = model.cutoff_quantities(ctx.kappa)?;
    let sigma = model.sigma();
    let n = ctx.sticks as f64;
    let sb2 = q.sigma_bar_sq;
    let sb = sb2.sqrt();
    let log_kappa = ctx.kappa.ln().abs();
    let variance = match class.tag {
        ClassTag::Lip => sigma * sigma * 2f64.powf(-n) + sb2,
        ClassTag::LocLip => {
            let brownian = if sigma != 0.0 { (2.0f64 / 3.0).powf(n / 2.0) } else { 0.0 };
            brownian + sb2 + sb * ctx.kappa
        }
        ClassTag::BT1 => {
            let g = class.gamma_for(model)?;
            let e = 2.0 * g / (2.0 + g);
            sigma.powf(e) * 2f64.powf(-n * g / (2.0 + g)) + sb.powf(e)
        }
        ClassTag::LipTau => {
            let d = class.delta_for(model)?;
            let e = 0.5f64.min(orey_ratio(2.0 * d, d));
            let log_factor = if d == 0.4 { 1.0 + log_kappa } else { 1.0 };
            2f64.powf(-n) + sb.powf(e) * log_factor
        }
        ClassTag::BT2 => {
            let d = class.delta_for(model)?;
            let e = 0.25f64.min(orey_ratio(d, d));
            let log_factor = if d == 0.4 { 1.0 + log_kappa.sqrt() } else { 1.0 };
            2f64.powf(-n / 2.0) + sb.powf(e) * log_factor
        }
    };
    Ok(LevelBounds {
        bias: bias_bound(class, model, ctx.kappa_next, ctx.horizon)?,
        variance,
        cost: level_cost(model, ctx)?,
    })
}

/// `num / (2 - δ)`, infinite at `δ = 2`.
fn orey_ratio(num: f64, delta: f64) -> f64 {
    if delta >= 2.0 {
        f64::INFINITY
    } else {
        num / (2.0 - delta)
    }
}
