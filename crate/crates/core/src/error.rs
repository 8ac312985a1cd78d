use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported root system {family}{rank}: {reason}")]
    UnsupportedType {
        family: String,
        rank: usize,
        reason: &'static str,
    },
    #[error("fundamental weight {index} is not minuscule")]
    NotMinuscule { index: usize },
    #[error("weight {0} is not dominant")]
    NotDominant(String),
    #[error("weight {0} has a component outside the span of the simple roots")]
    NotInRootSpan(String),
    #[error("weight has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight {0} does not lie in the weight lattice")]
    NotInLattice(String),
    #[error("Weyl orbit exceeds the cap of {cap} elements")]
    OrbitCapExceeded { cap: usize },
    #[error("Weyl group order exceeds the cap of {cap} elements")]
    GroupCapExceeded { cap: usize },
    #[error("DP layer {layer} holds more than {cap} states")]
    StateCapExceeded { layer: usize, cap: usize },
    #[error("Dynkin labels at DP layer {layer} exceed the packed key width")]
    KeyOverflow { layer: usize },
    #[error("evaluation point is too close to a reflection wall")]
    SingularPoint,
    #[error("could not solve for x: {0}")]
    SolveFailed(String),
    #[error("drift is not in the open Weyl chamber (every theta_i must lie in (0,1))")]
    DriftNotInterior,
    #[error("theta must be positive in every coordinate")]
    NonPositiveTheta,
    #[error("theta has {got} entries, expected {expected}")]
    ThetaLength { expected: usize, got: usize },
    #[error("h must be positive at {0}")]
    NonPositiveH(String),
    #[error("row at {source_weight} is not stochastic (sum {sum})")]
    NonStochasticRow { source_weight: String, sum: f64 },
    #[error("window {lo}..={hi} holds fewer than two usable points")]
    DegenerateWindow { lo: usize, hi: usize },
    #[error("horizon {n} is too short (need at least {min})")]
    HorizonTooShort { n: usize, min: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that signal a configured resource cap.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::OrbitCapExceeded { .. }
                | Error::GroupCapExceeded { .. }
                | Error::StateCapExceeded { .. }
                | Error::KeyOverflow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
