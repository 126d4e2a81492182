use thiserror::Error;

/// Errors raised by model construction, sampling and estimation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SbgError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("cutoff level {0} outside (0, 1]")]
    CutoffOutOfRange(f64),
    #[error("cutoff level 0 requires a finite-activity jump measure")]
    InfiniteActivity,
    #[error("cutoff levels must satisfy 1 >= kappa1 >= kappa2 (got {coarse}, {fine})")]
    CutoffOrder { coarse: f64, fine: f64 },
    #[error("no jump mass outside (-{0}, {0})")]
    NoTailMass(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
    #[error("payoff class {class} requires regularity parameter `{param}`")]
    MissingRegularity { class: &'static str, param: &'static str },
    #[error("orientation mismatch: payoff expects {expected}, triplet is {found}")]
    Orientation { expected: &'static str, found: &'static str },
    #[error("payoff exponent {0:.1} exceeds the overflow cap")]
    Overflow(f64),
    #[error("infeasible accuracy: bias bound stays above {target:.3e} down to kappa = {floor:.1e}")]
    Infeasible { target: f64, floor: f64 },
}

pub type Result<T> = std::result::Result<T, SbgError>;
