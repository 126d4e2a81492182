mod common;

use common::{ts_set_one, ts_set_two, watanabe};
use sbg_core::bounds::{
    bias_bound, level_bounds, level_cost, mu1, mu1_of, mu2, mu2_of, mu_tau_delta_of, mu_tau_star, mu_tau_zero_of,
};
use sbg_core::{ClassTag, CutoffQuantities, LevelContext, LevyModel, PayoffClass, SbgError, TemperedStableParams};

fn quantities(kappa: f64, sigma_bar: f64, phi: f64) -> CutoffQuantities {
    CutoffQuantities { kappa, b_kappa: 0.0, sigma_bar_sq: sigma_bar * sigma_bar, nu_bar: 0.0, phi }
}

fn grid(r: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| (-r * j as f64).exp()).collect()
}

#[test]
fn brownian_model_has_no_bias() {
    let bm = LevyModel::brownian(1.0, 0.0).unwrap();
    for kappa in [1.0, 0.1, 1e-6] {
        assert_eq!(mu1(&bm, kappa, 1.0).unwrap(), 0.0);
        assert_eq!(mu2(&bm, kappa, 1.0).unwrap(), 0.0);
    }
}

#[test]
fn mu1_reference_point() {
    let q = quantities(0.1, 0.05, 1.0);
    let expected = 0.1 * (1.0 + (2.0f64 * 2f64.sqrt() * 0.05 / 0.1).ln());
    assert!((mu1_of(&q, 1.0) - expected).abs() < 1e-15);
    assert!((mu1_of(&q, 1.0) - 0.134657).abs() < 1e-6);
}

#[test]
fn mu2_reference_point() {
    let q = quantities(0.1, 0.05, 1.0);
    let a: f64 = 2f64.sqrt() * 0.05;
    let expected = 2f64.sqrt() * mu1_of(&q, 1.0) + a.min(0.1) * (1.0 + 2.0 * (a / 0.1).ln().max(0.0)).sqrt();
    assert!((mu2_of(&q, 1.0, 1.0) - expected).abs() < 1e-15);
}

#[test]
fn mu1_decreases_along_schedules() {
    for model in [ts_set_one(), ts_set_two()] {
        for r in [0.5, 1.0, 2.0] {
            let values: Vec<f64> = grid(r, 30).into_iter().map(|k| mu1(&model, k, 1.0).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "r = {r}: {values:?}");
        }
    }
}

#[test]
fn orey_two_thirds_reference() {
    let q = quantities(0.001, 0.5, 1.0);
    let v = mu_tau_delta_of(&q, 1.0, 2.0 / 3.0, 1.0);
    assert!((v - 0.01 * (1.0 + 100f64.ln())).abs() < 1e-12);
    assert!((v - 0.05605).abs() < 1e-5);
}

#[test]
fn zero_variance_time_bound_is_infinite() {
    let q = quantities(0.5, 0.0, 0.0);
    assert!(mu_tau_zero_of(&q, 1.0).is_infinite());
}

#[test]
fn time_bound_sanity_ceiling() {
    for (kappa, sb) in [(0.1, 0.1), (0.2, 0.5), (0.01, 0.03)] {
        assert!(mu_tau_zero_of(&quantities(kappa, sb, 1.0), 1.0) <= 1.0);
    }
}

#[test]
fn brownian_part_favours_direct_time_bound() {
    let base = ts_set_two();
    let with_sigma = LevyModel::new(0.1, base.drift(), *base.jumps()).unwrap();
    for kappa in grid(0.5, 40).into_iter().skip(10) {
        let q = with_sigma.cutoff_quantities(kappa).unwrap();
        assert!(mu_tau_zero_of(&q, 1.0) <= mu_tau_delta_of(&q, 1.0, 2.0, 1.0), "kappa {kappa}");
        let star = mu_tau_star(&with_sigma, kappa, 1.0, Some(2.0)).unwrap();
        assert_eq!(star, mu_tau_zero_of(&q, 1.0));
    }
}

#[test]
fn bounds_vanish_for_infinite_activity() {
    for model in [ts_set_one(), ts_set_two()] {
        let delta = model.regularity().delta;
        let kappas = grid(0.5, 40);
        let last = *kappas.last().unwrap();
        let first_mu = mu1(&model, 1.0, 1.0).unwrap();
        assert!(mu1(&model, last, 1.0).unwrap() < 1e-3 * first_mu);
        let star = mu_tau_star(&model, last, 1.0, delta).unwrap();
        assert!(star < 1e-2 * mu_tau_star(&model, 1.0, 1.0, delta).unwrap(), "{star}");
    }
}

#[test]
fn lipschitz_variance_without_brownian_part() {
    let model = ts_set_one();
    let class = PayoffClass::new(ClassTag::Lip);
    for j in 1..12 {
        let kappa = (-0.5 * (j as f64 - 1.0)).exp();
        let ctx = LevelContext { kappa, kappa_next: kappa * (-0.5f64).exp(), sticks: 3, horizon: 1.0 };
        let b = level_bounds(&class, &model, &ctx).unwrap();
        assert_eq!(b.variance, model.cutoff_quantities(kappa).unwrap().sigma_bar_sq);
    }
}

/// Tail mass of one tempered-stable side via composite Simpson in `u = ln x`.
fn ts_tail_mass(c: f64, alpha: f64, lambda: f64, kappa: f64) -> f64 {
    let (a, b) = (kappa.ln(), (kappa.max(1.0) + 60.0 / lambda).ln());
    let steps = 200_000;
    let h = (b - a) / steps as f64;
    let f = |u: f64| {
        let x = u.exp();
        c * x.powf(-alpha) * (-lambda * x).exp()
    };
    let mut s = f(a) + f(b);
    for i in 1..steps {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn level_cost_counts_sticks_and_jumps() {
    let model = ts_set_one();
    let horizon = 1.0 / 6.0;
    for j in [1usize, 4, 8, 12] {
        let next = (-0.5 * j as f64).exp();
        let ctx = LevelContext { kappa: next * 0.5f64.exp(), kappa_next: next, sticks: j + 5, horizon };
        let nu = ts_tail_mass(0.1305, 0.66, 6.5022, next) + ts_tail_mass(0.0615, 0.66, 3.0888, next);
        let expected = (j + 5) as f64 + nu * horizon;
        let cost = level_cost(&model, &ctx).unwrap();
        assert!((cost - expected).abs() < 1e-8 * expected, "j {j}: {cost} vs {expected}");
    }
}

#[test]
fn barrier_class_exponents_at_unit_gamma() {
    let model = ts_set_one();
    let class = PayoffClass { gamma: Some(1.0), ..PayoffClass::new(ClassTag::BT1) };
    for kappa in [0.5, 0.05, 0.005] {
        let expected = mu1(&model, kappa, 1.0).unwrap().sqrt().min(mu2(&model, kappa, 1.0).unwrap().powf(2.0 / 3.0));
        assert!((bias_bound(&class, &model, kappa, 1.0).unwrap() - expected).abs() < 1e-15);
    }
}

#[test]
fn bias_scales_with_class_constants() {
    let model = ts_set_one();
    let lip = PayoffClass { lipschitz_k: 3.0, ..PayoffClass::new(ClassTag::Lip) };
    let base = bias_bound(&PayoffClass::new(ClassTag::Lip), &model, 0.1, 1.0).unwrap();
    assert!((bias_bound(&lip, &model, 0.1, 1.0).unwrap() - 3.0 * base).abs() < 1e-15);
}

#[test]
fn time_classes_need_an_orey_index() {
    let model = watanabe(1.0, 1.0, 0.0);
    let ctx = LevelContext { kappa: 0.5, kappa_next: 0.25, sticks: 6, horizon: 1.0 };
    for tag in [ClassTag::LipTau, ClassTag::BT2] {
        let err = level_bounds(&PayoffClass::new(tag), &model, &ctx).unwrap_err();
        assert!(matches!(err, SbgError::MissingRegularity { param: "delta", .. }), "{err}");
    }
}

#[test]
fn level_bounds_are_finite_and_positive() {
    let model = LevyModel::tempered_stable(
        0.0,
        0.0,
        TemperedStableParams { alpha_plus: 1.2, alpha_minus: 1.2, c_plus: 2.0, c_minus: 2.0, lambda_plus: 5.0, lambda_minus: 5.0 },
    )
    .unwrap();
    for tag in [ClassTag::Lip, ClassTag::LocLip, ClassTag::BT1, ClassTag::BT2, ClassTag::LipTau] {
        for j in 1..20 {
            let kappa = (-(j as f64 - 1.0)).exp();
            let ctx = LevelContext { kappa, kappa_next: kappa / std::f64::consts::E, sticks: j + 5, horizon: 1.0 };
            let b = level_bounds(&PayoffClass::new(tag), &model, &ctx).unwrap();
            for v in [b.bias, b.variance, b.cost] {
                assert!(v.is_finite() && v > 0.0, "{tag:?} j {j}: {b:?}");
            }
        }
    }
}
