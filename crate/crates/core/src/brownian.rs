//! Exact sampling of the endpoint, infimum and argmin of drifted Brownian motion.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SbgError};
use crate::special::{ln_erfc, open_uniform, truncated_normal_above};
use crate::triplet::ExtremumTriplet;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// `(B_t, inf_{s≤t} B_s, argmin)` for `B_s = v W_s + μ s`.
pub fn sample_bm_min_triplet<R: Rng + ?Sized>(t: f64, v: f64, mu: f64, rng: &mut R) -> Result<ExtremumTriplet> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(SbgError::InvalidArgument(format!("horizon must be positive, got {t}")));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(SbgError::InvalidArgument(format!("volatility must be positive, got {v}")));
    }
    Ok(bm_min_triplet(t, v, mu, rng))
}

/// Unchecked variant of [`sample_bm_min_triplet`]; `v = 0` gives the drift path.
#[inline]
pub(crate) fn bm_min_triplet<R: Rng + ?Sized>(t: f64, v: f64, mu: f64, rng: &mut R) -> ExtremumTriplet {
    if t <= 0.0 {
        return ExtremumTriplet::zero();
    }
    if v == 0.0 {
        let end = mu * t;
        return if end >= 0.0 {
            ExtremumTriplet::infimum(end, 0.0, 0.0)
        } else {
            ExtremumTriplet::infimum(end, end, t)
        };
    }
    let z: f64 = rng.sample(StandardNormal);
    let xi = mu * t + v * t.sqrt() * z;
    let u = open_uniform(rng);
    let m = 0.5 * (xi - (xi * xi - 2.0 * v * v * t * u.ln()).sqrt());
    let m = m.min(0.0).min(xi);
    let tau = argmin_given_ends(t, v, m, xi, rng);
    ExtremumTriplet::infimum(xi, m, tau)
}

/// Draws the argmin of a Brownian bridge from 0 to `xi` with minimum `m`.
fn argmin_given_ends<R: Rng + ?Sized>(t: f64, v: f64, m: f64, xi: f64, rng: &mut R) -> f64 {
    let scale = v * t.sqrt();
    let alpha = -m / scale;
    let beta = (xi - m) / scale;
    if alpha <= 0.0 {
        return 0.0;
    }
    if beta <= 0.0 {
        return t;
    }
    (t * unit_argmin(alpha, beta, rng)).clamp(0.0, t)
}

#[inline]
fn ln_hitting_density(c: f64, u: f64) -> f64 {
    c.ln() - HALF_LN_TWO_PI - 1.5 * u.ln() - c * c / (2.0 * u)
}

#[inline]
fn ln_hitting_density_sup(c: f64) -> f64 {
    ln_hitting_density(c, (c * c / 3.0).clamp(0.5, 1.0))
}

/// Samples `s ∈ (0,1)` with density proportional to `h_α(s) h_β(1-s)`.
fn unit_argmin<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let sup_beta = ln_hitting_density_sup(beta);
    let sup_alpha = ln_hitting_density_sup(alpha);
    let ln_wa = ln_erfc(alpha) + sup_beta;
    let ln_wb = ln_erfc(beta) + sup_alpha;
    let prob_a = 1.0 / (1.0 + (ln_wb - ln_wa).exp());
    let sqrt2 = std::f64::consts::SQRT_2;
    loop {
        if rng.random::<f64>() < prob_a {
            let z = truncated_normal_above(alpha * sqrt2, rng);
            let s = alpha * alpha / (z * z);
            if open_uniform(rng).ln() <= ln_hitting_density(beta, 1.0 - s) - sup_beta {
                return s;
            }
        } else {
            let z = truncated_normal_above(beta * sqrt2, rng);
            let r = beta * beta / (z * z);
            if open_uniform(rng).ln() <= ln_hitting_density(alpha, 1.0 - r) - sup_alpha {
                return 1.0 - r;
            }
        }
    }
}
