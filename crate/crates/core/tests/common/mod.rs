#![allow(dead_code)]

use sbg_core::{LevyModel, MertonParams, TemperedStableParams, WatanabeParams};

pub fn ts_set_one() -> LevyModel {
    LevyModel::tempered_stable(
        0.0,
        0.0,
        TemperedStableParams {
            alpha_plus: 0.66,
            alpha_minus: 0.66,
            c_plus: 0.1305,
            c_minus: 0.0615,
            lambda_plus: 6.5022,
            lambda_minus: 3.0888,
        },
    )
    .unwrap()
}

pub fn ts_set_two() -> LevyModel {
    LevyModel::tempered_stable(
        0.0,
        0.1274,
        TemperedStableParams {
            alpha_plus: 1.0781,
            alpha_minus: 1.0781,
            c_plus: 0.41077,
            c_minus: 0.41077,
            lambda_plus: 49.663,
            lambda_minus: 59.078,
        },
    )
    .unwrap()
}

pub fn ts_symmetric(alpha: f64, c: f64, lambda: f64) -> LevyModel {
    LevyModel::tempered_stable(
        0.0,
        0.0,
        TemperedStableParams {
            alpha_plus: alpha,
            alpha_minus: alpha,
            c_plus: c,
            c_minus: c,
            lambda_plus: lambda,
            lambda_minus: lambda,
        },
    )
    .unwrap()
}

pub fn watanabe(c_plus: f64, c_minus: f64, b: f64) -> LevyModel {
    LevyModel::watanabe(0.0, b, WatanabeParams { a: 2, c_plus, c_minus }).unwrap()
}

pub fn merton(sigma: f64, intensity: f64) -> LevyModel {
    LevyModel::merton(sigma, 0.0, MertonParams { intensity, mean: 0.0, std: 0.1 }).unwrap()
}

/// Standard normal CDF, computed independently of the crate.
pub fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

pub fn within(value: f64, target: f64, se: f64, k: f64) -> bool {
    (value - target).abs() <= k * se
}
