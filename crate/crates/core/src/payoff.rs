//! Payoffs of the extremum triplet under `S = S₀ e^X`.

use serde::{Deserialize, Serialize};

use crate::bounds::{ClassTag, PayoffClass};
use crate::error::{Result, SbgError};
use crate::scalar::Scalar;
use crate::triplet::{ExtremumTriplet, Orientation};

/// Largest exponent evaluated before a draw is rejected.
pub const EXP_CAP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffKind {
    /// `S̄_T - S_T`.
    LookbackPut,
    /// `(S_T - K)⁺ 1{S̄_T ≤ M}`.
    UpAndOutCall { strike: f64, barrier: f64 },
    /// `(S_T / S̄_T - 1)²`, the ulcer index integrand.
    DrawdownSq,
    /// `(S_T / S̄_T - 1)² 1{τ̄_T < s}`.
    DrawdownSqBefore { threshold: f64 },
    /// `T - τ̄_T`.
    Duration,
    /// `(K - S_T)⁺ 1{S̲_T ≥ H}`, evaluated on the infimum triplet.
    DownAndOutPut { strike: f64, barrier: f64 },
}

/// Reporting transform applied to an estimated expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// `100 √x`, the ulcer index.
    Ulcer,
}

/// Transformed estimate with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transformed {
    pub value: f64,
    pub std_error: f64,
    /// Set when the raw estimate was outside the transform's domain.
    pub warning: bool,
}

pub fn post_transform(transform: Transform, estimate: f64, std_error: f64) -> Transformed {
    match transform {
        Transform::Identity => Transformed { value: estimate, std_error, warning: false },
        Transform::Ulcer => {
            if estimate < 0.0 || estimate.is_nan() {
                Transformed { value: f64::NAN, std_error: f64::NAN, warning: true }
            } else if estimate == 0.0 {
                Transformed { value: 0.0, std_error: if std_error == 0.0 { 0.0 } else { f64::INFINITY }, warning: false }
            } else {
                let root = estimate.sqrt();
                Transformed { value: 100.0 * root, std_error: 100.0 * std_error / (2.0 * root), warning: false }
            }
        }
    }
}

/// Anything the estimators can average over triplets.
pub trait PayoffFn: Send + Sync {
    /// Value on a triplet with the orientation given by [`PayoffFn::orientation`].
    fn evaluate(&self, trip: &ExtremumTriplet, horizon: f64) -> Result<f64>;
    fn orientation(&self) -> Orientation;
    fn class(&self) -> PayoffClass;
    fn transform(&self) -> Transform {
        Transform::Identity
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payoff {
    pub kind: PayoffKind,
    pub s0: f64,
}

#[inline]
fn capped_exp<S: Scalar>(x: S) -> Result<S> {
    if x > S::lit(EXP_CAP) {
        return Err(SbgError::Overflow(x.to_f64_lossy()));
    }
    Ok(x.exp())
}

impl Payoff {
    pub fn new(kind: PayoffKind, s0: f64) -> Self {
        Payoff { kind, s0 }
    }

    pub fn orientation(&self) -> Orientation {
        match self.kind {
            PayoffKind::DownAndOutPut { .. } => Orientation::Infimum,
            _ => Orientation::Supremum,
        }
    }

    pub fn class(&self) -> PayoffClass {
        let (tag, level) = match self.kind {
            PayoffKind::LookbackPut => (ClassTag::LocLip, None),
            PayoffKind::UpAndOutCall { barrier, .. } => (ClassTag::BT1, Some(barrier)),
            PayoffKind::DrawdownSq => (ClassTag::Lip, None),
            PayoffKind::DrawdownSqBefore { threshold } => (ClassTag::BT2, Some(threshold)),
            PayoffKind::Duration => (ClassTag::LipTau, None),
            PayoffKind::DownAndOutPut { barrier, .. } => (ClassTag::BT1, Some(barrier)),
        };
        PayoffClass { level, ..PayoffClass::new(tag) }
    }

    pub fn transform(&self) -> Transform {
        match self.kind {
            PayoffKind::DrawdownSq | PayoffKind::DrawdownSqBefore { .. } => Transform::Ulcer,
            _ => Transform::Identity,
        }
    }

    /// Evaluates the payoff in any scalar type.
    pub fn evaluate_as<S: Scalar>(&self, trip: &ExtremumTriplet<S>, horizon: S) -> Result<S> {
        let expected = self.orientation();
        if trip.orientation != expected {
            return Err(SbgError::Orientation { expected: expected.name(), found: trip.orientation.name() });
        }
        let s0 = S::lit(self.s0);
        let zero = S::zero();
        let (x, ext, tau) = (trip.terminal, trip.extremum, trip.tau);
        Ok(match self.kind {
            PayoffKind::LookbackPut => s0 * (capped_exp(ext)? - capped_exp(x)?),
            PayoffKind::UpAndOutCall { strike, barrier } => {
                if s0 * capped_exp(ext)? <= S::lit(barrier) {
                    (s0 * capped_exp(x)? - S::lit(strike)).max(zero)
                } else {
                    zero
                }
            }
            PayoffKind::DrawdownSq => drawdown_sq(x, ext),
            PayoffKind::DrawdownSqBefore { threshold } => {
                if tau < S::lit(threshold) {
                    drawdown_sq(x, ext)
                } else {
                    zero
                }
            }
            PayoffKind::Duration => horizon - tau,
            PayoffKind::DownAndOutPut { strike, barrier } => {
                if s0 * capped_exp(ext)? >= S::lit(barrier) {
                    (S::lit(strike) - s0 * capped_exp(x)?).max(zero)
                } else {
                    zero
                }
            }
        })
    }
}

#[inline]
fn drawdown_sq<S: Scalar>(x: S, sup: S) -> S {
    let d = (x - sup).min(S::zero()).exp_m1();
    d * d
}

impl PayoffFn for Payoff {
    fn evaluate(&self, trip: &ExtremumTriplet, horizon: f64) -> Result<f64> {
        self.evaluate_as(trip, horizon)
    }

    fn orientation(&self) -> Orientation {
        Payoff::orientation(self)
    }

    fn class(&self) -> PayoffClass {
        Payoff::class(self)
    }

    fn transform(&self) -> Transform {
        Payoff::transform(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sup(x: f64, m: f64, tau: f64) -> ExtremumTriplet {
        ExtremumTriplet::infimum(-x, -m, tau).to_supremum()
    }

    #[test]
    fn trivial_path_pays_nothing() {
        let t = sup(0.0, 0.0, 0.0);
        assert_eq!(Payoff::new(PayoffKind::LookbackPut, 1.0).evaluate(&t, 1.0).unwrap(), 0.0);
        assert_eq!(Payoff::new(PayoffKind::DrawdownSq, 1.0).evaluate(&t, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn up_and_out_call_knocks_out() {
        let t = sup(0.1, 0.15, 0.2);
        let live = Payoff::new(PayoffKind::UpAndOutCall { strike: 1.0, barrier: 1.2 }, 1.0);
        assert!((live.evaluate(&t, 1.0).unwrap() - 0.105_170_918_075_647_6).abs() < 1e-15);
        let out = Payoff::new(PayoffKind::UpAndOutCall { strike: 1.0, barrier: 1.1 }, 1.0);
        assert_eq!(out.evaluate(&t, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn orientation_is_enforced() {
        let inf = ExtremumTriplet::infimum(0.0, 0.0, 0.0);
        let p = Payoff::new(PayoffKind::Duration, 1.0);
        assert!(matches!(p.evaluate(&inf, 1.0), Err(SbgError::Orientation { .. })));
        let put = Payoff::new(PayoffKind::DownAndOutPut { strike: 1.0, barrier: 0.8 }, 1.0);
        let v = put.evaluate(&ExtremumTriplet::infimum(-0.1, -0.2, 0.5), 1.0).unwrap();
        assert!((v - (1.0 - (-0.1f64).exp())).abs() < 1e-15);
        assert_eq!(put.evaluate(&ExtremumTriplet::infimum(-0.1, -0.3, 0.5), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn overflow_is_reported() {
        let p = Payoff::new(PayoffKind::LookbackPut, 1.0);
        assert!(matches!(p.evaluate(&sup(1.0, 701.0, 0.0), 1.0), Err(SbgError::Overflow(_))));
    }

    #[test]
    fn ulcer_transform() {
        assert_eq!(post_transform(Transform::Ulcer, 0.0, 0.0).value, 0.0);
        let t = post_transform(Transform::Ulcer, 0.0004, 0.0001);
        assert!((t.value - 2.0).abs() < 1e-12);
        assert!((t.std_error - 0.25).abs() < 1e-12);
        let neg = post_transform(Transform::Ulcer, -1e-6, 1e-6);
        assert!(neg.value.is_nan() && neg.warning);
        assert_eq!(post_transform(Transform::Identity, -3.0, 0.5).value, -3.0);
    }

    #[test]
    fn config_form() {
        let p: PayoffKind = serde_json::from_str(r#"{"kind":"up_and_out_call","strike":1.0,"barrier":1.2}"#).unwrap();
        assert_eq!(p, PayoffKind::UpAndOutCall { strike: 1.0, barrier: 1.2 });
        let q: PayoffKind = serde_json::from_str(r#"{"kind":"lookback_put"}"#).unwrap();
        assert_eq!(q, PayoffKind::LookbackPut);
    }
}
