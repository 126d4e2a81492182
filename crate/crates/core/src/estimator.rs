//! Monte Carlo and multilevel Monte Carlo estimators with automatic planning.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bias_bound, level_bounds, ClassTag, LevelBounds, LevelContext, PayoffClass};
use crate::error::{Result, SbgError};
use crate::levy::LevyModel;
use crate::payoff::{post_transform, PayoffFn, Transformed};
use crate::rng::stream;
use crate::sampler::CouplingPlan;
use crate::stats::{mean_variance, pairwise_sum};
use crate::triplet::{ExtremumTriplet, Orientation};

/// Smallest cutoff considered when inverting a bias bound.
pub const KAPPA_FLOOR: f64 = 1e-12;
const BISECTION_STEPS: usize = 200;
const MAX_LEVELS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// Sticks plus expected jump count.
    Analytic,
    /// Mean wall-clock time per pilot draw.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSettings {
    pub pilot: usize,
    pub n0: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub cost_model: CostModel,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings { pilot: 1000, n0: 5, workers: None, cost_model: CostModel::Analytic }
    }
}

/// Stick count for level `j` whose finest cutoff is `kappa_fine`.
///
/// `n₀ + ⌈max{j, log²(1 + ν̄(κ)T)}⌉`, raised to `log_{2/3}(σ̄⁴_κ)` when a Brownian part is present.
pub fn default_sticks(model: &LevyModel, j: usize, kappa: f64, kappa_fine: f64, horizon: f64, n0: usize) -> Result<usize> {
    let jumps = model.cutoff_quantities(kappa_fine)?.nu_bar * horizon;
    let lg = (1.0 + jumps).ln();
    let mut n = n0 + (j as f64).max(lg * lg).ceil() as usize;
    if model.sigma() > 0.0 {
        let sb2 = model.cutoff_quantities(kappa)?.sigma_bar_sq;
        if sb2 > 0.0 && sb2 < 1.0 {
            let floor = (2.0 * sb2.ln() / (2.0f64 / 3.0).ln()).ceil();
            n = n.max(floor as usize);
        }
    }
    Ok(n)
}

/// `⌈2V/ε²⌉`, at least 2.
pub fn mc_sample_count(variance: f64, eps: f64) -> usize {
    ((2.0 * variance / (eps * eps)).ceil() as usize).max(2)
}

/// Largest cutoff whose class bias bound is below `ε/√2`.
pub fn cutoff_for_accuracy(class: &PayoffClass, model: &LevyModel, horizon: f64, eps: f64) -> Result<f64> {
    let target = eps / std::f64::consts::SQRT_2;
    let bias = |k: f64| bias_bound(class, model, k, horizon);
    if bias(1.0)? < target {
        return Ok(1.0);
    }
    if bias(KAPPA_FLOOR)? >= target {
        return Err(SbgError::Infeasible { target, floor: KAPPA_FLOOR });
    }
    let (mut good, mut bad) = (KAPPA_FLOOR.ln(), 0.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if bias(mid.exp())? < target {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPlan {
    pub kappa: f64,
    pub sticks: usize,
    pub samples: usize,
    pub pilot_variance: f64,
    pub bias_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub j: usize,
    pub kappa_j: f64,
    pub n_j: usize,
    #[serde(rename = "N_j")]
    pub samples: usize,
    #[serde(rename = "mean_Dj")]
    pub mean_dj: f64,
    #[serde(rename = "var_Dj")]
    pub var_dj: f64,
    pub cost_seconds: f64,
    /// Draws discarded by the overflow guard.
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub std_error: f64,
    pub per_level: Vec<LevelReport>,
    pub total_cost_seconds: f64,
    pub seed: u64,
    /// Estimate after the payoff's reporting transform.
    pub transformed: Transformed,
}

/// Geometric schedule and per-level sample counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub r: f64,
    pub a: f64,
    pub q: f64,
    /// `κ_1, …, κ_{m+1}` with `κ_j = e^{-r(j-1)}`.
    pub kappas: Vec<f64>,
    /// `n_0, …, n_m`.
    pub sticks: Vec<usize>,
    pub m: usize,
    /// `N_0, …, N_m`; empty until allocated.
    pub samples: Vec<usize>,
    /// Bounds for levels `1..=m`; the bias entry of level `k` is at `κ_{k+1}`.
    pub bounds: Vec<LevelBounds>,
}

impl LevelSchedule {
    /// Cutoff pair `(coarse, fine)` sampled at level `j`; equal at level 0.
    pub fn level_cutoffs(&self, j: usize) -> (f64, f64) {
        if j == 0 {
            (self.kappas[0], self.kappas[0])
        } else {
            (self.kappas[j - 1], self.kappas[j])
        }
    }
}

/// Schedule exponent for a payoff class.
pub fn schedule_exponent(class: &PayoffClass, model: &LevyModel) -> Result<f64> {
    let q = model.regularity().q;
    let brownian = model.sigma() != 0.0;
    Ok(match class.tag {
        ClassTag::Lip | ClassTag::LocLip => 2.0 * (q - 1.0),
        ClassTag::BT1 => {
            let g = class.gamma_for(model)?;
            2.0 * (q * (1.0 + g) - g) / (2.0 + g)
        }
        ClassTag::LipTau => {
            if brownian {
                1.25 * q - 0.5
            } else {
                let d = class.delta_for(model)?;
                q - (1.0 - q / 2.0) * 0.5f64.min(ratio(2.0 * d, d))
            }
        }
        ClassTag::BT2 => {
            if brownian {
                1.125 * q - 0.25
            } else {
                let d = class.delta_for(model)?;
                q - (1.0 - q / 2.0) * 0.25f64.min(ratio(d, d))
            }
        }
    })
}

fn ratio(num: f64, delta: f64) -> f64 {
    if delta >= 2.0 {
        f64::INFINITY
    } else {
        num / (2.0 - delta)
    }
}

/// Optimal geometric rate for exponent `a` and moment index `q`.
pub fn geometric_rate(a: f64, q: f64) -> f64 {
    if a != 0.0 {
        2.0 / a.abs() * (1.0 + a.abs() / q).ln()
    } else {
        2.0 / q
    }
}

/// Cutoffs, stick counts and bounds for accuracy `ε`; sample counts are left empty.
pub fn mlmc_schedule(
    class: &PayoffClass,
    model: &LevyModel,
    horizon: f64,
    eps: f64,
    settings: &EstimatorSettings,
) -> Result<LevelSchedule> {
    let q = model.regularity().q;
    let a = schedule_exponent(class, model)?;
    let r = geometric_rate(a, q);
    let target = eps / std::f64::consts::SQRT_2;
    let kappa = |j: usize| (-r * (j as f64 - 1.0)).exp();
    let mut m = None;
    for k in 0..=MAX_LEVELS {
        let fine = kappa(k + 1);
        if fine < KAPPA_FLOOR {
            break;
        }
        if bias_bound(class, model, fine, horizon)? < target {
            m = Some(k);
            break;
        }
    }
    let m = m.ok_or(SbgError::Infeasible { target, floor: KAPPA_FLOOR })?;
    let kappas: Vec<f64> = (1..=m + 1).map(kappa).collect();
    let mut sticks = Vec::with_capacity(m + 1);
    sticks.push(default_sticks(model, 0, kappas[0], kappas[0], horizon, settings.n0)?);
    let mut bounds = Vec::with_capacity(m);
    for j in 1..=m {
        let n = default_sticks(model, j, kappas[j - 1], kappas[j], horizon, settings.n0)?;
        sticks.push(n);
        let ctx = LevelContext { kappa: kappas[j - 1], kappa_next: kappas[j], sticks: n, horizon };
        bounds.push(level_bounds(class, model, &ctx)?);
    }
    Ok(LevelSchedule { r, a, q, kappas, sticks, m, samples: Vec::new(), bounds })
}

/// `N_k = ⌈2ε⁻² √(V_k/C_k) Σ_j √(C_j V_j)⌉`, at least 2, adjusted so `Σ V_k/N_k ≤ ε²/2`.
pub fn allocate_samples(variances: &[f64], costs: &[f64], eps: f64) -> Vec<usize> {
    assert_eq!(variances.len(), costs.len(), "one cost per level");
    let budget = eps * eps / 2.0;
    let total: f64 = variances.iter().zip(costs).map(|(v, c)| (v * c).sqrt()).sum();
    let mut n: Vec<usize> = variances
        .iter()
        .zip(costs)
        .map(|(&v, &c)| {
            let raw = if variances.len() == 1 { 2.0 * v / (eps * eps) } else { 2.0 / (eps * eps) * (v / c).sqrt() * total };
            (raw.ceil() as usize).max(2)
        })
        .collect();
    let load = |n: &[usize]| variances.iter().zip(n).map(|(v, &k)| v / k as f64).sum::<f64>();
    while load(&n) > budget {
        let worst = (0..n.len())
            .max_by(|&a, &b| (variances[a] / n[a] as f64).total_cmp(&(variances[b] / n[b] as f64)))
            .expect("non-empty allocation");
        n[worst] += (n[worst] / 1000).max(1);
    }
    n
}

struct Sampler<'a, P: PayoffFn + ?Sized> {
    payoff: &'a P,
    oriented: LevyModel,
    horizon: f64,
    pool: Option<rayon::ThreadPool>,
}

struct LevelRun {
    values: Vec<f64>,
    rejected: usize,
    seconds: f64,
}

impl<'a, P: PayoffFn + ?Sized> Sampler<'a, P> {
    fn new(payoff: &'a P, model: &LevyModel, horizon: f64, settings: &EstimatorSettings) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(SbgError::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        let oriented = match payoff.orientation() {
            Orientation::Infimum => model.clone(),
            Orientation::Supremum => model.reflect(),
        };
        let pool = match settings.workers {
            Some(w) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .map_err(|e| SbgError::InvalidArgument(format!("thread pool: {e}")))?,
            ),
            None => None,
        };
        Ok(Sampler { payoff, oriented, horizon, pool })
    }

    #[inline]
    fn value(&self, trip: ExtremumTriplet) -> Result<f64> {
        let trip = match self.payoff.orientation() {
            Orientation::Infimum => trip,
            Orientation::Supremum => trip.to_supremum(),
        };
        self.payoff.evaluate(&trip, self.horizon)
    }

    /// Draws `D_j` (or `f` alone when `single`) for sample indices `range`, one stream per index.
    #[allow(clippy::too_many_arguments)]
    fn run(
        &self,
        seed: u64,
        level_key: u64,
        coarse: f64,
        fine: f64,
        single: bool,
        sticks: usize,
        range: std::ops::Range<u64>,
    ) -> Result<LevelRun> {
        let plan = CouplingPlan::new(&self.oriented, coarse, fine)?;
        let start = Instant::now();
        let draw = |i: u64| -> Result<Option<f64>> {
            let mut rng = stream(seed, level_key, i);
            let pair = plan.sbg(sticks, self.horizon, &mut rng);
            let d = if single {
                self.value(pair.fine)
            } else {
                self.value(pair.fine).and_then(|f| Ok(f - self.value(pair.coarse)?))
            };
            match d {
                Ok(v) => Ok(Some(v)),
                Err(SbgError::Overflow(_)) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let collect = || range.clone().into_par_iter().map(draw).collect::<Result<Vec<Option<f64>>>>();
        let raw = match &self.pool {
            Some(pool) => pool.install(collect),
            None => collect(),
        }?;
        let seconds = start.elapsed().as_secs_f64();
        let total = raw.len();
        let values: Vec<f64> = raw.into_iter().flatten().collect();
        Ok(LevelRun { rejected: total - values.len(), values, seconds })
    }
}

fn level_report(j: usize, kappa: f64, sticks: usize, run: &LevelRun) -> LevelReport {
    let (mean, var) = mean_variance(&run.values);
    LevelReport {
        j,
        kappa_j: kappa,
        n_j: sticks,
        samples: run.values.len(),
        mean_dj: mean,
        var_dj: var,
        cost_seconds: run.seconds,
        rejected: run.rejected,
    }
}

fn finish<P: PayoffFn + ?Sized>(payoff: &P, per_level: Vec<LevelReport>, seed: u64) -> EstimateReport {
    let means: Vec<f64> = per_level.iter().map(|l| l.mean_dj).collect();
    let loads: Vec<f64> = per_level.iter().map(|l| l.var_dj / l.samples as f64).collect();
    let estimate = pairwise_sum(&means);
    let std_error = pairwise_sum(&loads).sqrt();
    EstimateReport {
        estimate,
        std_error,
        total_cost_seconds: per_level.iter().map(|l| l.cost_seconds).sum(),
        seed,
        transformed: post_transform(payoff.transform(), estimate, std_error),
        per_level,
    }
}

/// Plain Monte Carlo over `samples` single-level draws at cutoff `κ`.
#[allow(clippy::too_many_arguments)]
pub fn mc_estimate<P: PayoffFn + ?Sized>(
    payoff: &P,
    model: &LevyModel,
    kappa: f64,
    sticks: Option<usize>,
    samples: usize,
    horizon: f64,
    seed: u64,
    settings: &EstimatorSettings,
) -> Result<EstimateReport> {
    if samples < 2 {
        return Err(SbgError::InvalidArgument("at least two samples are required".into()));
    }
    let sampler = Sampler::new(payoff, model, horizon, settings)?;
    let n = match sticks {
        Some(n) => n,
        None => default_sticks(model, 0, kappa, kappa, horizon, settings.n0)?,
    };
    let run = sampler.run(seed, 0, kappa, kappa, true, n, 0..samples as u64)?;
    Ok(finish(payoff, vec![level_report(0, kappa, n, &run)], seed))
}

/// Cutoff by bias-bound inversion, then a pilot run for the sample count.
pub fn mc_plan<P: PayoffFn + ?Sized>(
    payoff: &P,
    model: &LevyModel,
    horizon: f64,
    eps: f64,
    seed: u64,
    settings: &EstimatorSettings,
) -> Result<McPlan> {
    check_eps(eps)?;
    let class = payoff.class();
    let kappa = cutoff_for_accuracy(&class, model, horizon, eps)?;
    let sticks = default_sticks(model, 0, kappa, kappa, horizon, settings.n0)?;
    let sampler = Sampler::new(payoff, model, horizon, settings)?;
    let pilot = sampler.run(seed, 0, kappa, kappa, true, sticks, 0..settings.pilot.max(2) as u64)?;
    let (_, var) = mean_variance(&pilot.values);
    Ok(McPlan {
        kappa,
        sticks,
        samples: mc_sample_count(var, eps).max(settings.pilot),
        pilot_variance: var,
        bias_bound: bias_bound(&class, model, kappa, horizon)?,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(SbgError::InvalidArgument(format!("accuracy must be positive, got {eps}")))
    }
}

/// Builds the schedule and allocates `N_k` from pilot variances.
pub fn mlmc_plan<P: PayoffFn + ?Sized>(
    payoff: &P,
    model: &LevyModel,
    horizon: f64,
    eps: f64,
    seed: u64,
    settings: &EstimatorSettings,
) -> Result<LevelSchedule> {
    check_eps(eps)?;
    let mut schedule = mlmc_schedule(&payoff.class(), model, horizon, eps, settings)?;
    let sampler = Sampler::new(payoff, model, horizon, settings)?;
    let pilot = settings.pilot.max(2) as u64;
    let mut variances = Vec::with_capacity(schedule.m + 1);
    let mut costs = Vec::with_capacity(schedule.m + 1);
    for j in 0..=schedule.m {
        let (coarse, fine) = schedule.level_cutoffs(j);
        let run = sampler.run(seed, j as u64, coarse, fine, j == 0, schedule.sticks[j], 0..pilot)?;
        variances.push(mean_variance(&run.values).1);
        costs.push(match settings.cost_model {
            CostModel::Measured => (run.seconds / pilot as f64).max(1e-12),
            CostModel::Analytic => {
                let ctx = LevelContext { kappa: coarse, kappa_next: fine, sticks: schedule.sticks[j], horizon };
                crate::bounds::level_cost(model, &ctx)?
            }
        });
    }
    schedule.samples = allocate_samples(&variances, &costs, eps).into_iter().map(|n| n.max(settings.pilot)).collect();
    Ok(schedule)
}

/// Runs all levels of an allocated schedule.
pub fn mlmc_estimate<P: PayoffFn + ?Sized>(
    payoff: &P,
    model: &LevyModel,
    schedule: &LevelSchedule,
    horizon: f64,
    seed: u64,
    settings: &EstimatorSettings,
) -> Result<EstimateReport> {
    if schedule.samples.len() != schedule.m + 1 {
        return Err(SbgError::InvalidArgument("schedule has no sample allocation".into()));
    }
    let sampler = Sampler::new(payoff, model, horizon, settings)?;
    let mut per_level = Vec::with_capacity(schedule.m + 1);
    for j in 0..=schedule.m {
        let (coarse, fine) = schedule.level_cutoffs(j);
        let n = schedule.samples[j];
        if n < 2 {
            return Err(SbgError::InvalidArgument(format!("level {j} needs at least two samples")));
        }
        let run = sampler.run(seed, j as u64, coarse, fine, j == 0, schedule.sticks[j], 0..n as u64)?;
        per_level.push(level_report(j, schedule.kappas[j.saturating_sub(1)], schedule.sticks[j], &run));
    }
    Ok(finish(payoff, per_level, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub mean: f64,
    pub variance: f64,
    pub cost_seconds: f64,
    pub samples: usize,
    pub rejected: usize,
}

/// Sample statistics of `N` draws of `D_j` for the coupling `(κ_coarse, κ_fine)`.
#[allow(clippy::too_many_arguments)]
pub fn level_stats<P: PayoffFn + ?Sized>(
    payoff: &P,
    model: &LevyModel,
    kappa_coarse: f64,
    kappa_fine: f64,
    sticks: usize,
    samples: usize,
    horizon: f64,
    seed: u64,
    level_key: u64,
    settings: &EstimatorSettings,
) -> Result<LevelStats> {
    if samples < 2 {
        return Err(SbgError::InvalidArgument("at least two samples are required".into()));
    }
    let sampler = Sampler::new(payoff, model, horizon, settings)?;
    let run = sampler.run(seed, level_key, kappa_coarse, kappa_fine, false, sticks, 0..samples as u64)?;
    let (mean, variance) = mean_variance(&run.values);
    Ok(LevelStats { mean, variance, cost_seconds: run.seconds, samples: run.values.len(), rejected: run.rejected })
}

/// One row of a bias/variance scan over `κ_j = e^{-r(j-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub j: usize,
    pub kappa: f64,
    pub sticks: usize,
    pub stats: LevelStats,
}

/// Level statistics for `j ∈ levels` with coupling `(κ_j, κ_{j+1})`.
#[allow(clippy::too_many_arguments)]
pub fn scan_levels<P: PayoffFn + ?Sized>(
    payoff: &P,
    model: &LevyModel,
    r: f64,
    levels: std::ops::RangeInclusive<usize>,
    samples: usize,
    horizon: f64,
    seed: u64,
    settings: &EstimatorSettings,
) -> Result<Vec<ScanRow>> {
    let kappa = |j: usize| (-r * (j as f64 - 1.0)).exp();
    levels
        .map(|j| {
            let (coarse, fine) = (kappa(j), kappa(j + 1));
            let sticks = default_sticks(model, j, coarse, fine, horizon, settings.n0)?;
            let stats = level_stats(payoff, model, coarse, fine, sticks, samples, horizon, seed, j as u64, settings)?;
            Ok(ScanRow { j, kappa: coarse, sticks, stats })
        })
        .collect()
}
