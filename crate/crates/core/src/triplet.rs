//! Containers for (terminal value, running extremum, extremum time).

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Infimum,
    Supremum,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::Infimum => "infimum",
            Orientation::Supremum => "supremum",
        }
    }
}

/// Terminal value, running extremum over `[0, T]` and the last time it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremumTriplet<S = f64> {
    pub terminal: S,
    pub extremum: S,
    pub tau: S,
    pub orientation: Orientation,
}

impl<S: Scalar> ExtremumTriplet<S> {
    pub fn infimum(terminal: S, extremum: S, tau: S) -> Self {
        ExtremumTriplet { terminal, extremum, tau, orientation: Orientation::Infimum }
    }

    pub fn zero() -> Self {
        Self::infimum(S::zero(), S::zero(), S::zero())
    }

    /// Maps an infimum triplet of `-X` to the supremum triplet of `X`.
    ///
    /// Supremum triplets are returned unchanged.
    pub fn to_supremum(self) -> Self {
        match self.orientation {
            Orientation::Supremum => self,
            Orientation::Infimum => ExtremumTriplet {
                terminal: -self.terminal,
                extremum: -self.extremum,
                tau: self.tau,
                orientation: Orientation::Supremum,
            },
        }
    }

    pub fn cast<T: Scalar>(&self) -> ExtremumTriplet<T> {
        ExtremumTriplet {
            terminal: T::lit(self.terminal.to_f64_lossy()),
            extremum: T::lit(self.extremum.to_f64_lossy()),
            tau: T::lit(self.tau.to_f64_lossy()),
            orientation: self.orientation,
        }
    }
}

/// Two triplets built from shared randomness at a coarse and a fine cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair<S = f64> {
    pub coarse: ExtremumTriplet<S>,
    pub fine: ExtremumTriplet<S>,
}

impl<S: Scalar> CoupledPair<S> {
    pub fn to_supremum(self) -> Self {
        CoupledPair { coarse: self.coarse.to_supremum(), fine: self.fine.to_supremum() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supremum_negates_values_only() {
        let t = ExtremumTriplet::infimum(-1.2f64, -1.5, 0.3).to_supremum();
        assert_eq!((t.terminal, t.extremum, t.tau), (1.2, 1.5, 0.3));
        assert_eq!(t.orientation, Orientation::Supremum);
        assert_eq!(t.to_supremum(), t);
        let z = ExtremumTriplet::<f32>::zero().to_supremum();
        assert_eq!((z.terminal, z.extremum, z.tau), (0.0, 0.0, 0.0));
    }
}
