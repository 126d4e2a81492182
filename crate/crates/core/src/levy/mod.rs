//! Lévy models and their cutoff-dependent quantities.

mod half;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbgError};
use crate::scalar::Scalar;
use half::{HalfMeasure, HalfTailSampler};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperedStableParams {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

/// Atoms of mass `c_plus` at `a^{-n}` and `c_minus` at `-a^{-n}`, `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WatanabeParams {
    pub a: u32,
    pub c_plus: f64,
    pub c_minus: f64,
}

/// Compound Poisson jumps at rate `intensity` with `N(mean, std²)` sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MertonParams {
    pub intensity: f64,
    pub mean: f64,
    pub std: f64,
}

/// Compound Poisson jumps with double-exponential sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KouParams {
    pub intensity: f64,
    /// Probability of an upward jump.
    pub p: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpMeasure {
    None,
    TemperedStable(TemperedStableParams),
    Watanabe(WatanabeParams),
    Merton(MertonParams),
    Kou(KouParams),
}

impl JumpMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            JumpMeasure::None => "none",
            JumpMeasure::TemperedStable(_) => "tempered_stable",
            JumpMeasure::Watanabe(_) => "watanabe",
            JumpMeasure::Merton(_) => "merton",
            JumpMeasure::Kou(_) => "kou",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(SbgError::InvalidModel(msg.to_string()));
        match *self {
            JumpMeasure::None => Ok(()),
            JumpMeasure::TemperedStable(p) => {
                for a in [p.alpha_plus, p.alpha_minus] {
                    if !(0.0..2.0).contains(&a) {
                        return bad("tempered stable index must lie in [0, 2)");
                    }
                }
                if !(p.c_plus >= 0.0 && p.c_minus >= 0.0) || p.c_plus + p.c_minus <= 0.0 {
                    return bad("tempered stable intensities must be non-negative and not both zero");
                }
                if !(p.lambda_plus > 0.0 && p.lambda_minus > 0.0) || !(p.c_plus + p.c_minus).is_finite() {
                    return bad("tempering rates must be positive");
                }
                Ok(())
            }
            JumpMeasure::Watanabe(p) => {
                if p.a < 2 {
                    return bad("Watanabe base must be an integer >= 2");
                }
                if !(p.c_plus >= 0.0 && p.c_minus >= 0.0 && (p.c_plus + p.c_minus).is_finite()) {
                    return bad("Watanabe atom masses must be non-negative");
                }
                Ok(())
            }
            JumpMeasure::Merton(p) => {
                if !(p.intensity >= 0.0 && p.intensity.is_finite()) || !p.mean.is_finite() || !(p.std > 0.0) {
                    return bad("Merton needs intensity >= 0 and std > 0");
                }
                Ok(())
            }
            JumpMeasure::Kou(p) => {
                if !(p.intensity >= 0.0 && p.intensity.is_finite()) || !(0.0..=1.0).contains(&p.p) {
                    return bad("Kou needs intensity >= 0 and p in [0, 1]");
                }
                if !(p.eta_plus > 0.0 && p.eta_minus > 0.0) {
                    return bad("Kou rates must be positive");
                }
                Ok(())
            }
        }
    }

    fn halves(&self) -> (HalfMeasure, HalfMeasure) {
        match *self {
            JumpMeasure::None => (HalfMeasure::Empty, HalfMeasure::Empty),
            JumpMeasure::TemperedStable(p) => (
                HalfMeasure::TemperedStable { c: p.c_plus, alpha: p.alpha_plus, lambda: p.lambda_plus },
                HalfMeasure::TemperedStable { c: p.c_minus, alpha: p.alpha_minus, lambda: p.lambda_minus },
            ),
            JumpMeasure::Watanabe(p) => (
                HalfMeasure::Atoms { base: p.a as f64, mass: p.c_plus },
                HalfMeasure::Atoms { base: p.a as f64, mass: p.c_minus },
            ),
            JumpMeasure::Merton(p) => (
                HalfMeasure::Normal { intensity: p.intensity, mean: p.mean, std: p.std },
                HalfMeasure::Normal { intensity: p.intensity, mean: -p.mean, std: p.std },
            ),
            JumpMeasure::Kou(p) => (
                HalfMeasure::Exponential { intensity: p.intensity * p.p, rate: p.eta_plus },
                HalfMeasure::Exponential { intensity: p.intensity * (1.0 - p.p), rate: p.eta_minus },
            ),
        }
    }

    /// Jump measure of `-X`.
    pub fn mirrored(&self) -> JumpMeasure {
        match *self {
            JumpMeasure::None => JumpMeasure::None,
            JumpMeasure::TemperedStable(p) => JumpMeasure::TemperedStable(TemperedStableParams {
                alpha_plus: p.alpha_minus,
                alpha_minus: p.alpha_plus,
                c_plus: p.c_minus,
                c_minus: p.c_plus,
                lambda_plus: p.lambda_minus,
                lambda_minus: p.lambda_plus,
            }),
            JumpMeasure::Watanabe(p) => JumpMeasure::Watanabe(WatanabeParams { a: p.a, c_plus: p.c_minus, c_minus: p.c_plus }),
            JumpMeasure::Merton(p) => JumpMeasure::Merton(MertonParams { mean: -p.mean, ..p }),
            JumpMeasure::Kou(p) => JumpMeasure::Kou(KouParams {
                intensity: p.intensity,
                p: 1.0 - p.p,
                eta_plus: p.eta_minus,
                eta_minus: p.eta_plus,
            }),
        }
    }
}

/// Regularity constants driving the bias and variance bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityProfile {
    /// Blumenthal-Getoor index.
    pub beta: f64,
    /// Moment exponent with finite small-jump moment.
    pub q: f64,
    /// Orey index, `2` whenever a Brownian part is present.
    pub delta: Option<f64>,
    pub gamma_h: Option<f64>,
    pub c_h: Option<f64>,
    pub c_o: f64,
    pub k2: f64,
}

/// Partial regularity profile; missing entries take model defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularitySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_o: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
}

impl RegularityProfile {
    /// Defaults for a model with Brownian scale `sigma` and jump measure `jumps`.
    pub fn default_for(sigma: f64, jumps: &JumpMeasure) -> Self {
        let brownian_delta = if sigma > 0.0 { Some(2.0) } else { None };
        let (beta, q, delta, gamma_h) = match *jumps {
            JumpMeasure::TemperedStable(p) => {
                let mut beta: f64 = 0.0;
                if p.c_plus > 0.0 {
                    beta = beta.max(p.alpha_plus);
                }
                if p.c_minus > 0.0 {
                    beta = beta.max(p.alpha_minus);
                }
                let q = if beta > 0.0 { beta } else { 0.5 };
                let delta = if sigma > 0.0 {
                    Some(2.0)
                } else if beta > 0.0 {
                    Some(beta)
                } else {
                    None
                };
                (beta, q, delta, Some(1.0))
            }
            JumpMeasure::Watanabe(_) => (0.0, 0.5, brownian_delta, brownian_delta.map(|_| 1.0)),
            _ => (0.0, 0.5, brownian_delta, brownian_delta.map(|_| 1.0)),
        };
        RegularityProfile { beta, q, delta, gamma_h, c_h: None, c_o: 1.0, k2: 1.0 }
    }

    pub fn with_overrides(mut self, spec: &RegularitySpec) -> Self {
        if let Some(v) = spec.beta {
            self.beta = v;
        }
        if let Some(v) = spec.q {
            self.q = v;
        }
        if spec.delta.is_some() {
            self.delta = spec.delta;
        }
        if spec.gamma_h.is_some() {
            self.gamma_h = spec.gamma_h;
        }
        if spec.c_h.is_some() {
            self.c_h = spec.c_h;
        }
        if let Some(v) = spec.c_o {
            self.c_o = v;
        }
        if let Some(v) = spec.k2 {
            self.k2 = v;
        }
        self
    }

    fn validate(&self, sigma: f64) -> Result<()> {
        let bad = |msg: &str| Err(SbgError::InvalidModel(msg.to_string()));
        if !(0.0..=2.0).contains(&self.beta) {
            return bad("beta must lie in [0, 2]");
        }
        if !(self.q > 0.0 && self.q <= 2.0) || self.q < self.beta {
            return bad("q must lie in (0, 2] with q >= beta");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d <= 2.0) {
                return bad("delta must lie in (0, 2]");
            }
        }
        if sigma > 0.0 && self.delta != Some(2.0) {
            return bad("delta must equal 2 when sigma > 0");
        }
        if let Some(g) = self.gamma_h {
            if !(g > 0.0) {
                return bad("gamma_h must be positive");
            }
        }
        if !(self.c_o > 0.0 && self.k2 > 0.0) {
            return bad("c_o and k2 must be positive");
        }
        Ok(())
    }
}

/// Small-jump variance, tail intensity and adjusted drift at a cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffQuantities<S = f64> {
    pub kappa: S,
    pub b_kappa: S,
    pub sigma_bar_sq: S,
    pub nu_bar: S,
    pub phi: S,
}

impl CutoffQuantities<f64> {
    pub fn cast<S: Scalar>(&self) -> CutoffQuantities<S> {
        CutoffQuantities {
            kappa: S::lit(self.kappa),
            b_kappa: S::lit(self.b_kappa),
            sigma_bar_sq: S::lit(self.sigma_bar_sq),
            nu_bar: S::lit(self.nu_bar),
            phi: S::lit(self.phi),
        }
    }
}

impl<S: Scalar> CutoffQuantities<S> {
    pub fn sigma_bar(&self) -> S {
        self.sigma_bar_sq.sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
struct CutoffRecord {
    quantities: CutoffQuantities<f64>,
    mass_plus: f64,
    mass_minus: f64,
    tail_mean: f64,
    tail_second_moment: f64,
}

/// Serialized form of [`LevyModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub sigma: f64,
    pub b: f64,
    pub jumps: JumpMeasure,
    #[serde(default)]
    pub regularity: RegularitySpec,
}

/// Lévy process with triplet `(σ², ν, b)`, drift relative to `1_(-1,1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct LevyModel {
    sigma: f64,
    drift_b: f64,
    jumps: JumpMeasure,
    regularity: RegularityProfile,
    plus: HalfMeasure,
    minus: HalfMeasure,
    cache: Arc<RwLock<HashMap<u64, CutoffRecord>>>,
}

impl PartialEq for LevyModel {
    fn eq(&self, other: &Self) -> bool {
        self.sigma == other.sigma
            && self.drift_b == other.drift_b
            && self.jumps == other.jumps
            && self.regularity == other.regularity
    }
}

impl TryFrom<ModelSpec> for LevyModel {
    type Error = SbgError;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let model = LevyModel::new(spec.sigma, spec.b, spec.jumps)?;
        let regularity = model.regularity.with_overrides(&spec.regularity);
        model.with_regularity(regularity)
    }
}

impl From<LevyModel> for ModelSpec {
    fn from(m: LevyModel) -> Self {
        let r = m.regularity;
        ModelSpec {
            sigma: m.sigma,
            b: m.drift_b,
            jumps: m.jumps,
            regularity: RegularitySpec {
                beta: Some(r.beta),
                q: Some(r.q),
                delta: r.delta,
                gamma_h: r.gamma_h,
                c_h: r.c_h,
                c_o: Some(r.c_o),
                k2: Some(r.k2),
            },
        }
    }
}

impl LevyModel {
    /// Builds a model with default regularity constants.
    pub fn new(sigma: f64, drift_b: f64, jumps: JumpMeasure) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(SbgError::InvalidModel(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if !drift_b.is_finite() {
            return Err(SbgError::InvalidModel("drift must be finite".into()));
        }
        jumps.validate()?;
        let (plus, minus) = jumps.halves();
        Ok(LevyModel {
            sigma,
            drift_b,
            jumps,
            regularity: RegularityProfile::default_for(sigma, &jumps),
            plus,
            minus,
            cache: Arc::default(),
        })
    }

    pub fn brownian(sigma: f64, drift_b: f64) -> Result<Self> {
        Self::new(sigma, drift_b, JumpMeasure::None)
    }

    pub fn tempered_stable(sigma: f64, drift_b: f64, params: TemperedStableParams) -> Result<Self> {
        Self::new(sigma, drift_b, JumpMeasure::TemperedStable(params))
    }

    pub fn watanabe(sigma: f64, drift_b: f64, params: WatanabeParams) -> Result<Self> {
        Self::new(sigma, drift_b, JumpMeasure::Watanabe(params))
    }

    pub fn merton(sigma: f64, drift_b: f64, params: MertonParams) -> Result<Self> {
        Self::new(sigma, drift_b, JumpMeasure::Merton(params))
    }

    pub fn kou(sigma: f64, drift_b: f64, params: KouParams) -> Result<Self> {
        Self::new(sigma, drift_b, JumpMeasure::Kou(params))
    }

    pub fn with_regularity(mut self, regularity: RegularityProfile) -> Result<Self> {
        regularity.validate(self.sigma)?;
        self.regularity = regularity;
        Ok(self)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn drift(&self) -> f64 {
        self.drift_b
    }

    pub fn jumps(&self) -> &JumpMeasure {
        &self.jumps
    }

    pub fn regularity(&self) -> &RegularityProfile {
        &self.regularity
    }

    pub fn has_finite_activity(&self) -> bool {
        self.plus.finite_activity() && self.minus.finite_activity()
    }

    /// Model of `-X`: negated drift, mirrored jump measure, same `σ`.
    pub fn reflect(&self) -> LevyModel {
        let jumps = self.jumps.mirrored();
        let (plus, minus) = jumps.halves();
        LevyModel {
            sigma: self.sigma,
            drift_b: -self.drift_b,
            jumps,
            regularity: self.regularity,
            plus,
            minus,
            cache: Arc::default(),
        }
    }

    fn check_kappa(&self, kappa: f64) -> Result<()> {
        if kappa == 0.0 {
            if self.has_finite_activity() {
                return Ok(());
            }
            return Err(SbgError::InfiniteActivity);
        }
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(SbgError::CutoffOutOfRange(kappa));
        }
        Ok(())
    }

    fn record(&self, kappa: f64) -> Result<CutoffRecord> {
        self.check_kappa(kappa)?;
        let key = kappa.to_bits();
        if let Some(r) = self.cache.read().expect("cutoff cache poisoned").get(&key) {
            return Ok(*r);
        }
        let (p, m) = (&self.plus, &self.minus);
        let compensator = p.first_moment_between(kappa, 1.0)? - m.first_moment_between(kappa, 1.0)?;
        let sigma_bar_sq = p.small_second_moment(kappa)? + m.small_second_moment(kappa)?;
        let mass_plus = p.mass_from(kappa)?;
        let mass_minus = m.mass_from(kappa)?;
        let tail_mean = p.moment_from(kappa, 1)? - m.moment_from(kappa, 1)?;
        let tail_second_moment = p.moment_from(kappa, 2)? + m.moment_from(kappa, 2)?;
        let total = sigma_bar_sq + self.sigma * self.sigma;
        let phi = if sigma_bar_sq > 0.0 { (sigma_bar_sq / total).sqrt() } else { 0.0 };
        let rec = CutoffRecord {
            quantities: CutoffQuantities {
                kappa,
                b_kappa: self.drift_b - compensator,
                sigma_bar_sq,
                nu_bar: mass_plus + mass_minus,
                phi,
            },
            mass_plus,
            mass_minus,
            tail_mean,
            tail_second_moment,
        };
        self.cache.write().expect("cutoff cache poisoned").insert(key, rec);
        Ok(rec)
    }

    /// `b_κ`, `σ̄²_κ`, `ν̄(κ)` and `φ_κ` at cutoff `κ ∈ (0, 1]` (or `0` for finite activity).
    pub fn cutoff_quantities(&self, kappa: f64) -> Result<CutoffQuantities> {
        Ok(self.record(kappa)?.quantities)
    }

    pub fn cutoff_quantities_as<S: Scalar>(&self, kappa: f64) -> Result<CutoffQuantities<S>> {
        Ok(self.cutoff_quantities(kappa)?.cast())
    }

    /// `∫_{|x|≥κ} x ν(dx)`.
    pub fn tail_mean(&self, kappa: f64) -> Result<f64> {
        Ok(self.record(kappa)?.tail_mean)
    }

    /// `∫_{|x|≥κ} x² ν(dx)`.
    pub fn tail_second_moment(&self, kappa: f64) -> Result<f64> {
        Ok(self.record(kappa)?.tail_second_moment)
    }

    /// `∫_{(-1,1)∖{0}} |x|^q ν(dx)`, infinite when divergent.
    pub fn small_jump_moment(&self, q: f64) -> Result<f64> {
        Ok(self.plus.moment_below_one(q)? + self.minus.moment_below_one(q)?)
    }

    /// Mean and variance of the Gaussian approximation at cutoff `κ` over horizon `t`.
    pub fn approx_moments(&self, kappa: f64, t: f64) -> Result<(f64, f64)> {
        let rec = self.record(kappa)?;
        let q = rec.quantities;
        let mean = (q.b_kappa + rec.tail_mean) * t;
        let var = (self.sigma * self.sigma + q.sigma_bar_sq + rec.tail_second_moment) * t;
        if !mean.is_finite() {
            return Err(SbgError::InvalidModel("big-jump mean is not finite".into()));
        }
        Ok((mean, var))
    }

    /// Sampler for the normalized restriction of `ν` to `ℝ∖(-κ, κ)`.
    pub fn tail_sampler(&self, kappa: f64) -> Result<TailSampler> {
        let rec = self.record(kappa)?;
        let total = rec.mass_plus + rec.mass_minus;
        if !(total > 0.0) {
            return Err(SbgError::NoTailMass(kappa));
        }
        if let (0.0, JumpMeasure::Merton(p)) = (kappa, &self.jumps) {
            return Ok(TailSampler { prob_plus: rec.mass_plus / total, kind: TailKind::Normal { mean: p.mean, std: p.std } });
        }
        Ok(TailSampler {
            prob_plus: rec.mass_plus / total,
            kind: TailKind::Split {
                plus: if rec.mass_plus > 0.0 { HalfTailSampler::new(&self.plus, kappa) } else { None },
                minus: if rec.mass_minus > 0.0 { HalfTailSampler::new(&self.minus, kappa) } else { None },
            },
        })
    }

    /// One jump from the normalized tail of `ν` beyond `κ`.
    pub fn sample_tail_jump<R: Rng + ?Sized>(&self, kappa: f64, rng: &mut R) -> Result<f64> {
        Ok(self.tail_sampler(kappa)?.sample(rng))
    }
}

/// Draws jumps from `ν` restricted to `ℝ∖(-κ, κ)`.
#[derive(Debug, Clone)]
pub struct TailSampler {
    prob_plus: f64,
    kind: TailKind,
}

#[derive(Debug, Clone)]
enum TailKind {
    Split { plus: Option<HalfTailSampler>, minus: Option<HalfTailSampler> },
    /// Whole normal jump law, used when nothing is cut off.
    Normal { mean: f64, std: f64 },
}

impl TailSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            TailKind::Split { plus: Some(p), minus: None } => p.sample(rng),
            TailKind::Split { plus: None, minus: Some(m) } => -m.sample(rng),
            TailKind::Split { plus: Some(p), minus: Some(m) } => {
                if rng.random::<f64>() < self.prob_plus {
                    p.sample(rng)
                } else {
                    -m.sample(rng)
                }
            }
            TailKind::Split { plus: None, minus: None } => unreachable!("tail sampler built without mass"),
            &TailKind::Normal { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
        }
    }

    /// Probability that a tail jump is positive.
    pub fn prob_plus(&self) -> f64 {
        self.prob_plus
    }
}
