//! Normal-distribution helpers and truncated normal sampling.

use rand::Rng;
use rand_distr::{Exp1, OpenClosed01, StandardNormal};
use libm::erfc;

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `P(Z > z)`.
#[inline]
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `P(a < Z <= b)` computed on the side that avoids cancellation.
pub fn norm_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    if a > 0.0 {
        norm_sf(a) - norm_sf(b)
    } else {
        norm_cdf(b) - norm_cdf(a)
    }
}

/// `ln erfc(x)`, accurate for large positive `x` where `erfc` underflows.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 25.0 {
        erfc(x).ln()
    } else {
        let x2 = x * x;
        let inv = 1.0 / (2.0 * x2);
        let series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv * inv * inv;
        -x2 - (x * std::f64::consts::PI.sqrt()).ln() + series.ln()
    }
}

/// Uniform on `(0, 1]`, safe to take logarithms of.
#[inline]
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(OpenClosed01)
}

/// Samples `Z ~ N(0,1)` conditioned on `Z >= a`.
///
/// Plain rejection below `a = 0.5`, exponential proposal with the optimal
/// rate above it.
pub fn truncated_normal_above<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a < 0.5 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z >= a {
                return z;
            }
        }
    }
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample(Exp1);
        let z = a + e / rate;
        let d = z - rate;
        let u = open_uniform(rng);
        if u.ln() <= -0.5 * d * d {
            return z;
        }
    }
}
