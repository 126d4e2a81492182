//! Subcommand implementations.

use std::fs;
use std::hint::black_box;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::Context;
use serde::Serialize;

use sbg_core::bounds::level_bounds;
use sbg_core::estimator::{cutoff_for_accuracy, default_sticks, mc_sample_count};
use sbg_core::rng::{stream, StreamRng};
use sbg_core::special::norm_cdf;
use sbg_core::stats::{ks_one_sample, ks_two_sample, mean_variance};
use sbg_core::{
    level_stats, mc_estimate, mlmc_estimate, mlmc_plan, sample_bm_min_triplet, stick_breaking, CouplingPlan,
    EstimateReport, EstimatorSettings, JumpMeasure, KouParams, LevelContext, LevelSchedule, LevyModel, MertonParams,
    SbgError,
};

use crate::config::{Experiment, Mode};

/// Command failure with its process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Infeasible(String),
    Validation(String),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Config(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Validation(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Infeasible(m) => write!(f, "infeasible accuracy: {m}"),
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<SbgError> for Failure {
    fn from(e: SbgError) -> Self {
        match e {
            SbgError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            SbgError::Quadrature(_) | SbgError::Overflow(_) => Failure::Runtime(e.into()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

struct Run<'a> {
    exp: &'a Experiment,
    seed: u64,
    settings: EstimatorSettings,
    out: PathBuf,
}

impl<'a> Run<'a> {
    fn new(exp: &'a Experiment, ov: &Overrides) -> Result<Self, Failure> {
        let cfg = &exp.config;
        let mut settings = cfg.estimator;
        settings.workers = ov.workers.or(cfg.workers).or(settings.workers);
        if settings.workers == Some(0) {
            return Err(Failure::Config("`workers` must be at least 1".into()));
        }
        let out = ov.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("sbg-out"));
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Run { exp, seed: ov.seed.unwrap_or(cfg.seed), settings, out })
    }

    fn horizon(&self) -> f64 {
        self.exp.config.horizon
    }

    fn writer(&self, name: &str) -> Result<csv::Writer<fs::File>, Failure> {
        let path = self.out.join(name);
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    mode: Mode,
    eps: Option<f64>,
    horizon: f64,
    s0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<&'a LevelSchedule>,
    #[serde(flatten)]
    report: &'a EstimateReport,
}

pub fn estimate(exp: &Experiment, ov: &Overrides) -> Result<(), Failure> {
    let run = Run::new(exp, ov)?;
    let cfg = &exp.config;
    let mode = ov.mode.or(cfg.estimate.mode).unwrap_or(Mode::Mlmc);
    let eps = ov.eps.or(cfg.estimate.eps);
    if let Some(e) = eps {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Failure::Config(format!("`eps` must be positive, got {e}")));
        }
    }
    let need_eps = || eps.ok_or_else(|| Failure::Config("missing field `eps` (set it in `estimate` or pass --eps)".into()));
    let (model, payoff, horizon) = (&exp.model, &exp.payoff, run.horizon());
    let (report, kappa, schedule) = match mode {
        Mode::Mc => {
            let kappa = match cfg.estimate.kappa {
                Some(k) => k,
                None => cutoff_for_accuracy(&payoff.class(), model, horizon, need_eps()?)?,
            };
            let sticks = match cfg.estimate.sticks {
                Some(n) => n,
                None => default_sticks(model, 0, kappa, kappa, horizon, run.settings.n0)?,
            };
            let samples = match cfg.estimate.samples {
                Some(n) => n,
                None => {
                    let eps = need_eps()?;
                    let pilot = run.settings.pilot.max(2);
                    eprintln!("pilot: {pilot} draws at kappa = {kappa:.4e}");
                    let p = mc_estimate(payoff, model, kappa, Some(sticks), pilot, horizon, run.seed, &run.settings)?;
                    mc_sample_count(p.per_level[0].var_dj, eps).max(pilot)
                }
            };
            eprintln!("mc: {samples} draws at kappa = {kappa:.4e}, {sticks} sticks");
            let r = mc_estimate(payoff, model, kappa, Some(sticks), samples, horizon, run.seed, &run.settings)?;
            (r, Some(kappa), None)
        }
        Mode::Mlmc => {
            let eps = need_eps()?;
            let plan = mlmc_plan(payoff, model, horizon, eps, run.seed, &run.settings)?;
            eprintln!("mlmc: {} levels, r = {:.4}, samples {:?}", plan.m + 1, plan.r, plan.samples);
            let r = mlmc_estimate(payoff, model, &plan, horizon, run.seed, &run.settings)?;
            (r, None, Some(plan))
        }
    };
    let rejected: usize = report.per_level.iter().map(|l| l.rejected).sum();
    if rejected > 0 {
        eprintln!("warning: {rejected} draws rejected by the overflow guard");
    }
    let doc = RunReport { mode, eps, horizon, s0: cfg.s0, kappa, schedule: schedule.as_ref(), report: &report };
    let json = serde_json::to_string_pretty(&doc).context("serializing report")? + "\n";
    fs::write(run.out.join("report.json"), json)?;
    let mut w = run.writer("levels.csv")?;
    w.write_record(["j", "kappa_j", "n_j", "N_j", "mean_Dj", "var_Dj", "cost_seconds"])?;
    for l in &report.per_level {
        w.serialize((l.j, l.kappa_j, l.n_j, l.samples, l.mean_dj, l.var_dj, l.cost_seconds))?;
    }
    w.flush()?;
    println!("estimate {:.6} std_error {:.3e}", report.estimate, report.std_error);
    if report.transformed.value != report.estimate {
        println!("transformed {:.6} std_error {:.3e}", report.transformed.value, report.transformed.std_error);
    }
    Ok(())
}

pub fn scan(exp: &Experiment, ov: &Overrides) -> Result<(), Failure> {
    let run = Run::new(exp, ov)?;
    let sec = exp.config.scan.as_ref().ok_or_else(|| Failure::Config("missing field `scan`".into()))?;
    if !(sec.r > 0.0) || sec.levels == 0 || sec.samples < 2 {
        return Err(Failure::Config("`scan` needs r > 0, levels >= 1 and samples >= 2".into()));
    }
    let (model, payoff, horizon) = (&exp.model, &exp.payoff, run.horizon());
    let class = payoff.class();
    let mut w = run.writer("scan.csv")?;
    w.write_record([
        "j",
        "log_kappa",
        "log_abs_mean_Dj",
        "log_var_Dj",
        "theory_bias_slope_line",
        "theory_var_slope_line",
    ])?;
    for j in 1..=sec.levels {
        let kappa = (-sec.r * (j as f64 - 1.0)).exp();
        let next = kappa * (-sec.r).exp();
        let sticks = default_sticks(model, j, kappa, next, horizon, run.settings.n0)?;
        let s = level_stats(payoff, model, kappa, next, sticks, sec.samples, horizon, run.seed, j as u64, &run.settings)?;
        let ctx = LevelContext { kappa, kappa_next: next, sticks, horizon };
        let theory = match level_bounds(&class, model, &ctx) {
            Ok(b) => (Some(b.bias.ln()), Some(b.variance.ln())),
            Err(SbgError::MissingRegularity { .. }) => (None, None),
            Err(e) => return Err(e.into()),
        };
        eprintln!("scan: level {j}/{} kappa {kappa:.3e} var {:.3e}", sec.levels, s.variance);
        w.serialize((j, kappa.ln(), s.mean.abs().ln(), s.variance.ln(), theory.0, theory.1))?;
    }
    w.flush()?;
    Ok(())
}

fn with_intensity(exp: &Experiment, rate: f64) -> Result<LevyModel, Failure> {
    let mut spec = exp.config.model.clone();
    spec.jumps = match spec.jumps {
        JumpMeasure::Merton(p) => JumpMeasure::Merton(MertonParams { intensity: rate, ..p }),
        JumpMeasure::Kou(p) => JumpMeasure::Kou(KouParams { intensity: rate, ..p }),
        _ => return Err(Failure::Config("`speedup.intensities` needs a Merton or Kou model".into())),
    };
    Ok(LevyModel::try_from(spec)?)
}

/// Fastest of `repeats` serial timings of `draws` evaluations.
fn best_time(repeats: usize, draws: usize, seed: u64, key: u64, f: &dyn Fn(&mut StreamRng) -> f64) -> f64 {
    let mut best = Duration::MAX;
    for rep in 0..repeats.max(1) {
        let mut rng = stream(seed, key, rep as u64);
        let start = Instant::now();
        let mut acc = 0.0;
        for _ in 0..draws {
            acc += f(&mut rng);
        }
        black_box(acc);
        best = best.min(start.elapsed());
    }
    best.as_secs_f64()
}

pub fn speedup(exp: &Experiment, ov: &Overrides) -> Result<(), Failure> {
    let run = Run::new(exp, ov)?;
    let sec = exp.config.speedup.as_ref().ok_or_else(|| Failure::Config("missing field `speedup`".into()))?;
    if sec.sticks.is_empty() || sec.samples == 0 {
        return Err(Failure::Config("`speedup` needs stick counts and samples".into()));
    }
    let horizon = run.horizon();
    let mut points = Vec::new();
    for &lambda in &sec.intensities {
        points.push((with_intensity(exp, lambda / horizon)?, 0.0));
    }
    for &kappa in &sec.kappas {
        points.push((exp.model.clone(), kappa));
    }
    if points.is_empty() {
        return Err(Failure::Config("`speedup` needs `kappas` or `intensities`".into()));
    }
    let mut w = run.writer("speedup.csv")?;
    w.write_record(["kappa", "mean_jumps", "n", "samples", "direct_seconds", "sbg_seconds", "ratio"])?;
    for (model, kappa) in &points {
        let plan = CouplingPlan::single(model, *kappa)?;
        let jumps = model.cutoff_quantities(*kappa)?.nu_bar * horizon;
        let direct = best_time(sec.repeats, sec.samples, run.seed, 1, &|rng| {
            plan.jump_diffusion_triplets(horizon, rng).fine.extremum
        });
        for &n in &sec.sticks {
            let sticks = best_time(sec.repeats, sec.samples, run.seed, 2, &|rng| plan.sbg(n, horizon, rng).fine.extremum);
            eprintln!("speedup: kappa {kappa:.3e} jumps {jumps:.2} n {n} ratio {:.2}", direct / sticks);
            w.serialize((kappa, jumps, n, sec.samples, direct, sticks, direct / sticks))?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Check {
    name: &'static str,
    statistic: f64,
    threshold: f64,
    pass: bool,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let (m, v) = mean_variance(xs);
    (m, (v / xs.len() as f64).sqrt())
}

fn z_check(name: &'static str, xs: &[f64], target: f64) -> Check {
    let (m, se) = mean_se(xs);
    let z = if se > 0.0 { (m - target).abs() / se } else if m == target { 0.0 } else { f64::INFINITY };
    Check { name, statistic: z, threshold: 4.0, pass: z <= 4.0 }
}

fn p_check(name: &'static str, p: f64) -> Check {
    Check { name, statistic: p, threshold: 1e-3, pass: p > 1e-3 }
}

/// Statistical invariant suite for the configured model.
pub fn validate(exp: &Experiment, ov: &Overrides) -> Result<(), Failure> {
    let run = Run::new(exp, ov)?;
    let sec = &exp.config.validate;
    let (n, seed, horizon) = (sec.samples.max(100), run.seed, run.horizon());
    let mut checks = Vec::new();

    let mut rng = stream(seed, 1, 0);
    let rem: Vec<f64> = (0..n).map(|_| stick_breaking(1.0, 5, &mut rng).remainder).collect();
    checks.push(z_check("stick_remainder_mean", &rem, 2f64.powi(-5)));

    let mut rng = stream(seed, 2, 0);
    let draws: Vec<_> = (0..n).map(|_| sample_bm_min_triplet(1.0, 1.0, 0.0, &mut rng)).collect::<Result<_, _>>()?;
    let ends: Vec<f64> = draws.iter().map(|d| d.terminal).collect();
    let mins: Vec<f64> = draws.iter().map(|d| d.extremum).collect();
    let early: Vec<f64> = draws.iter().map(|d| f64::from(u8::from(d.tau <= 0.5))).collect();
    checks.push(p_check("brownian_terminal_ks", ks_one_sample(&ends, norm_cdf).p_value));
    checks.push(p_check("brownian_minimum_ks", ks_one_sample(&mins, |y| if y < 0.0 { 2.0 * norm_cdf(y) } else { 1.0 }).p_value));
    checks.push(z_check("brownian_argmin_median", &early, 0.5));

    let model = &exp.model;
    let kappa = if model.has_finite_activity() { 0.0 } else { sec.kappa };
    let plan = CouplingPlan::single(model, kappa)?;
    let mut r1 = stream(seed, 3, 1);
    let mut r2 = stream(seed, 3, 2);
    let mut r3 = stream(seed, 3, 3);
    let a1: Vec<f64> = (0..n).map(|_| plan.increments(horizon, &mut r1).1).collect();
    let a2: Vec<f64> = (0..n).map(|_| plan.jump_diffusion_triplets(horizon, &mut r2).fine.terminal).collect();
    let a3: Vec<f64> = (0..n).map(|_| plan.sbg(sec.sticks, horizon, &mut r3).fine.terminal).collect();
    checks.push(p_check("increments_vs_jump_diffusion_ks", ks_two_sample(&a1, &a2).p_value));
    checks.push(p_check("increments_vs_stick_breaking_ks", ks_two_sample(&a1, &a3).p_value));
    checks.push(p_check("jump_diffusion_vs_stick_breaking_ks", ks_two_sample(&a2, &a3).p_value));
    let (mean, _) = model.approx_moments(kappa, horizon)?;
    checks.push(z_check("terminal_mean", &a3, mean));

    if !model.has_finite_activity() {
        let fine = sec.kappa / 2.0;
        let coupled = CouplingPlan::new(model, sec.kappa, fine)?;
        let mut rng = stream(seed, 4, 0);
        let sq: Vec<f64> = (0..n)
            .map(|_| {
                let p = coupled.sbg(sec.sticks, horizon, &mut rng);
                (p.fine.terminal - p.coarse.terminal).powi(2)
            })
            .collect();
        let (m, se) = mean_se(&sq);
        let s2 = model.sigma().powi(2);
        let bound = 2.0 * (s2 * 2f64.powi(-(sec.sticks as i32)) + model.cutoff_quantities(sec.kappa)?.sigma_bar_sq) * horizon;
        let excess = if se > 0.0 { (m - bound) / se } else if m <= bound { 0.0 } else { f64::INFINITY };
        checks.push(Check { name: "coupling_contraction", statistic: excess, threshold: 4.0, pass: excess <= 4.0 });
    }

    let mut w = run.writer("validate.csv")?;
    w.write_record(["check", "statistic", "threshold", "pass"])?;
    for c in &checks {
        println!("{:<40} {:>12.4e} {}", c.name, c.statistic, if c.pass { "PASS" } else { "FAIL" });
        w.serialize((c.name, c.statistic, c.threshold, c.pass))?;
    }
    w.flush()?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(failed.join(", ")))
    }
}
