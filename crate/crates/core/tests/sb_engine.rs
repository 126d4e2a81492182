mod common;

use common::*;
use sbg_core::brownian::sample_bm_min_triplet;
use sbg_core::quadrature::integrate;
use sbg_core::rng::{root_stream, stream};
use sbg_core::stats::{ks_one_sample, ks_two_sample};
use sbg_core::{
    coupled_increments, coupled_jd_triplets, sample_triplet, sbg_coupled_triplets, stick_breaking, CouplingPlan,
    LevyModel, Orientation,
};

#[test]
fn remainder_halves_per_stick() {
    let mut rng = root_stream(1);
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|_| stick_breaking(1.0, 5, &mut rng).remainder).collect();
    let (m, se) = mean_se(&xs);
    assert!(within(m, 1.0 / 32.0, se, 4.0), "{m} ± {se}");
    let sb = stick_breaking(2.5, 8, &mut rng);
    let total: f64 = sb.sticks.iter().sum::<f64>() + sb.remainder;
    assert!((total - 2.5).abs() <= 4.0 * f64::EPSILON * 2.5);
    assert!(sb.sticks.iter().all(|&l| l >= 0.0) && sb.remainder > 0.0);
}

#[test]
fn brownian_extremum_laws() {
    for (k, &(t, v, mu)) in [(1.0, 1.0, 0.0), (1.0, 0.5, -0.3), (2.0, 0.7, 0.4)].iter().enumerate() {
        let mut rng = stream(2, k as u64, 0);
        let draws: Vec<_> = (0..40_000).map(|_| sample_bm_min_triplet(t, v, mu, &mut rng).unwrap()).collect();
        let sd = v * f64::sqrt(t);
        let term: Vec<f64> = draws.iter().map(|d| d.terminal).collect();
        let ks = ks_one_sample(&term, |x| phi((x - mu * t) / sd));
        assert!(ks.p_value > 0.001, "terminal {ks:?}");
        let inf: Vec<f64> = draws.iter().map(|d| d.extremum).collect();
        let inf_cdf = |x: f64| {
            if x >= 0.0 {
                1.0
            } else {
                phi((x - mu * t) / sd) + (2.0 * mu * x / (v * v)).exp() * phi((x + mu * t) / sd)
            }
        };
        let ks = ks_one_sample(&inf, inf_cdf);
        assert!(ks.p_value > 0.001, "infimum {ks:?}");
        assert!(draws.iter().all(|d| d.extremum <= d.terminal.min(0.0) && (0.0..=t).contains(&d.tau)));
        if mu == 0.0 {
            let tau: Vec<f64> = draws.iter().map(|d| d.tau / t).collect();
            let ks = ks_one_sample(&tau, |x| 2.0 / std::f64::consts::PI * x.clamp(0.0, 1.0).sqrt().asin());
            assert!(ks.p_value > 0.001, "arcsine {ks:?}");
        }
    }
}

#[test]
fn reflection_principle_tail_probability() {
    let mut rng = stream(3, 0, 0);
    let n = 100_000;
    let hits: Vec<f64> = (0..n)
        .map(|_| (sample_bm_min_triplet(1.0, 1.0, 0.0, &mut rng).unwrap().extremum <= -1.0) as u8 as f64)
        .collect();
    let (p, se) = mean_se(&hits);
    assert!(within(p, 0.317_310_507_862_914, se, 4.0), "{p}");
}

#[test]
fn coupled_increment_second_moment() {
    // Watanabe a=2, c±=1: variances 2/3 at cutoff 1 and 1/6 at cutoff 0.3.
    let m = watanabe(1.0, 1.0, 0.0);
    let (s1, s2) = (2.0f64 / 3.0, 1.0f64 / 6.0);
    let exact = (s1.sqrt() - s2.sqrt()).powi(2) + s1 - s2;
    let mut rng = stream(4, 0, 0);
    let sq: Vec<f64> = (0..100_000)
        .map(|_| {
            let (a, b) = coupled_increments(&m, 1.0, 0.3, 1.0, &mut rng).unwrap();
            (a - b) * (a - b)
        })
        .collect();
    let (mean, se) = mean_se(&sq);
    assert!(within(mean, exact, se, 4.0), "{mean} vs {exact}");
}

#[test]
fn coupled_increments_respect_contraction_bound() {
    let m = ts_set_one();
    let (k1, k2) = (0.1, 0.05);
    let s1 = m.cutoff_quantities(k1).unwrap().sigma_bar_sq;
    let s2 = m.cutoff_quantities(k2).unwrap().sigma_bar_sq;
    let plan = CouplingPlan::new(&m, k1, k2).unwrap();
    let mut rng = stream(5, 0, 0);
    let sq: Vec<f64> = (0..50_000)
        .map(|_| {
            let (a, b) = plan.increments(1.0, &mut rng);
            (a - b) * (a - b)
        })
        .collect();
    let (mean, se) = mean_se(&sq);
    assert!(mean <= 2.0 * (s1 - s2) + 4.0 * se);
}

#[test]
fn marginal_laws_agree_across_samplers() {
    let m = ts_set_one();
    let (kappa, t, n) = (0.05, 1.0 / 6.0, 20_000);
    let plan = CouplingPlan::new(&m, 0.1, kappa).unwrap();
    let mut r1 = stream(6, 1, 0);
    let mut r2 = stream(6, 2, 0);
    let mut r3 = stream(6, 3, 0);
    let a1: Vec<f64> = (0..n).map(|_| plan.increments(t, &mut r1).1).collect();
    let a2: Vec<f64> = (0..n).map(|_| plan.jump_diffusion_triplets(t, &mut r2).fine.terminal).collect();
    let a3: Vec<f64> = (0..n).map(|_| plan.sbg(10, t, &mut r3).fine.terminal).collect();
    for (x, y) in [(&a1, &a2), (&a1, &a3), (&a2, &a3)] {
        let ks = ks_two_sample(x, y);
        assert!(ks.p_value > 0.001, "{ks:?}");
    }
    let (mean, var) = m.approx_moments(kappa, t).unwrap();
    let (sm, se) = mean_se(&a3);
    assert!(within(sm, mean, se, 4.0));
    let sq: Vec<f64> = a3.iter().map(|x| (x - mean) * (x - mean)).collect();
    let (sv, sev) = mean_se(&sq);
    assert!(within(sv, var, sev, 4.0), "{sv} vs {var}");
}

#[test]
fn zero_jump_rate_gives_independent_brownian_triplets() {
    let m = merton(0.3, 0.0);
    let mut rng = stream(7, 0, 0);
    let pair = coupled_jd_triplets(&m, 0.0, 0.0, 1.0, &mut rng).unwrap();
    assert_eq!(pair.coarse, pair.fine);
    let plan = CouplingPlan::new(&m, 1.0, 0.0).unwrap();
    let pair = plan.jump_diffusion_triplets(1.0, &mut rng);
    assert_ne!(pair.coarse.terminal, pair.fine.terminal);
}

#[test]
fn equal_cutoffs_give_identical_components() {
    let m = ts_set_one();
    let mut rng = stream(8, 0, 0);
    for n in [0, 3, 12] {
        for _ in 0..200 {
            let p = sbg_coupled_triplets(&m, 0.05, 0.05, n, 1.0, &mut rng).unwrap();
            assert_eq!(p.coarse, p.fine);
        }
    }
}

#[test]
fn path_properties_hold_on_every_draw() {
    let m = ts_set_one();
    let plan = CouplingPlan::new(&m, 0.3, 0.01).unwrap();
    let mut rng = stream(9, 0, 0);
    for i in 0..5_000 {
        let t = 0.5 + (i % 3) as f64;
        let p = plan.sbg(i % 7, t, &mut rng);
        for c in [p.coarse, p.fine] {
            assert_eq!(c.orientation, Orientation::Infimum);
            assert!(c.extremum <= c.terminal.min(0.0));
            assert!((0.0..=t).contains(&c.tau));
            let s = c.to_supremum();
            assert!(s.extremum >= s.terminal.max(0.0));
        }
        assert!((p.fine.tau - p.coarse.tau).abs() <= t);
    }
}

#[test]
fn sbg_coupling_contracts() {
    let m = ts_set_one();
    let (k1, k2, t, n) = (0.1, 0.01, 1.0, 8);
    let s1 = m.cutoff_quantities(k1).unwrap().sigma_bar_sq;
    let plan = CouplingPlan::new(&m, k1, k2).unwrap();
    let mut rng = stream(10, 0, 0);
    let sq: Vec<f64> = (0..30_000)
        .map(|_| {
            let p = plan.sbg(n, t, &mut rng);
            (p.fine.terminal - p.coarse.terminal).powi(2)
        })
        .collect();
    let (mean, se) = mean_se(&sq);
    assert!(mean <= 2.0 * s1 * t + 4.0 * se);
}

#[test]
fn pure_brownian_extremum_via_sticks() {
    let m = LevyModel::brownian(1.0, 0.0).unwrap();
    let mut rng = stream(11, 0, 0);
    let draws: Vec<_> = (0..100_000).map(|_| sample_triplet(&m, 1.0, 10, 1.0, &mut rng).unwrap()).collect();
    let neg_inf: Vec<f64> = draws.iter().map(|d| -d.extremum).collect();
    let (m1, se1) = mean_se(&neg_inf);
    assert!(within(m1, (2.0 / std::f64::consts::PI).sqrt(), se1, 4.0), "{m1}");
    let early: Vec<f64> = draws.iter().map(|d| (d.tau <= 0.5) as u8 as f64).collect();
    let (p, se) = mean_se(&early);
    assert!(within(p, 0.5, se, 4.0), "{p}");
}

#[test]
fn seeds_determine_output() {
    let m = ts_set_two();
    let run = |seed| {
        let mut rng = root_stream(seed);
        (0..50).map(|_| sbg_coupled_triplets(&m, 0.1, 0.02, 6, 1.0, &mut rng).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run(42), run(42));
    assert_ne!(run(42), run(43));
}

#[test]
fn watanabe_tail_jumps_enumerate_atoms() {
    let m = watanabe(1.0, 1.0, 0.0);
    let mut rng = stream(12, 0, 0);
    let n = 40_000;
    let mut plus = 0usize;
    for _ in 0..n {
        let j = m.sample_tail_jump(0.3, &mut rng).unwrap();
        assert!(j == 0.5 || j == -0.5);
        plus += (j > 0.0) as usize;
    }
    let p = plus as f64 / n as f64;
    assert!((p - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    let one_sided = watanabe(1.0, 0.0, 0.0);
    for _ in 0..100 {
        assert_eq!(one_sided.sample_tail_jump(0.3, &mut rng).unwrap(), 0.5);
    }
    let deep = watanabe(1.0, 1.0, 0.0);
    let mut counts = [0usize; 5];
    for _ in 0..n {
        let j = deep.sample_tail_jump(1.0 / 32.0, &mut rng).unwrap();
        let level = (-(j.abs().log2())).round() as usize;
        counts[level - 1] += 1;
    }
    for c in counts {
        let p = c as f64 / n as f64;
        assert!((p - 0.2).abs() < 4.0 * (0.16 / n as f64).sqrt(), "{counts:?}");
    }
}

fn ts_tail_cdf(c: [f64; 2], alpha: [f64; 2], lambda: [f64; 2], kappa: f64) -> impl Fn(f64) -> f64 {
    let dens = move |side: usize, x: f64| c[side] * x.powf(-1.0 - alpha[side]) * (-lambda[side] * x).exp();
    let side_mass = move |side: usize| integrate(|x| dens(side, x), kappa, kappa + 80.0 / lambda[side], 1e-12, 0.0).unwrap();
    let (mp, mm) = (side_mass(0), side_mass(1));
    let total = mp + mm;
    move |x: f64| {
        if x <= -kappa {
            (mm - integrate(|y| dens(1, y), kappa, -x, 1e-12, 0.0).unwrap()) / total
        } else if x < kappa {
            mm / total
        } else {
            (mm + integrate(|y| dens(0, y), kappa, x, 1e-12, 0.0).unwrap()) / total
        }
    }
}

#[test]
fn tempered_stable_tail_jumps_follow_target() {
    for (k, &kappa) in [0.1, 0.5, 2f64.powi(-10)].iter().enumerate() {
        let m = ts_set_one();
        let sampler = m.tail_sampler(kappa).unwrap();
        let mut rng = stream(13, k as u64, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| sampler.sample(&mut rng)).collect();
        assert!(xs.iter().all(|x| x.abs() >= kappa));
        let cdf = ts_tail_cdf([0.1305, 0.0615], [0.66, 0.66], [6.5022, 3.0888], kappa);
        let ks = ks_one_sample(&xs, cdf);
        assert!(ks.p_value > 0.001, "kappa={kappa}: {ks:?}");
    }
    // both proposal regimes for a large tempering rate
    let m = ts_symmetric(1.2, 2.0, 5.0);
    for (k, &kappa) in [0.1, 0.5].iter().enumerate() {
        let mut rng = stream(14, k as u64, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| m.sample_tail_jump(kappa, &mut rng).unwrap()).collect();
        let ks = ks_one_sample(&xs, ts_tail_cdf([2.0, 2.0], [1.2, 1.2], [5.0, 5.0], kappa));
        assert!(ks.p_value > 0.001, "kappa={kappa}: {ks:?}");
    }
}

#[test]
fn tempered_stable_tail_mean() {
    let m = ts_set_one();
    let kappa = 0.1;
    let q = m.cutoff_quantities(kappa).unwrap();
    let target = m.tail_mean(kappa).unwrap() / q.nu_bar;
    let sampler = m.tail_sampler(kappa).unwrap();
    let mut rng = stream(15, 0, 0);
    let xs: Vec<f64> = (0..200_000).map(|_| sampler.sample(&mut rng)).collect();
    let (mean, se) = mean_se(&xs);
    assert!(within(mean, target, se, 4.0), "{mean} vs {target}");
}
