use thiserror::Error;

use crate::cbf::SpecError;

/// Which admissibility condition a request violated.
#[derive(Clone, Debug, PartialEq)]
pub enum ConditionFailure {
    /// `sup ξ|ψ''|/ψ' ≥ 2`.
    A1 { sup: f64 },
    /// The integrability condition fails at the reference time.
    A2 { t0: f64 },
    /// The requested time lies below the reference time.
    TimeBelowReference { t: f64, t0: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FptError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{what}: quadrature reached width {achieved:e}, requested {tol:e}")]
    Quadrature { what: &'static str, achieved: f64, tol: f64 },
    #[error("resonance at lambda = {lambda}, xi = {xi}: the correction measure has an atom")]
    Resonance { lambda: f64, xi: f64 },
    #[error("condition failure: {0}")]
    Condition(ConditionFailureDisplay),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Display wrapper so that the failure can carry its own explanation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionFailureDisplay {
    pub failure: ConditionFailure,
    pub spec: String,
}

impl std::fmt::Display for ConditionFailureDisplay {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.failure {
            ConditionFailure::A1 { sup } => write!(
                f,
                "curvature condition sup xi|psi''|/psi' < 2 fails: sup = {sup} for {}",
                self.spec
            ),
            ConditionFailure::A2 { t0 } => {
                write!(f, "integrability condition fails at t0 = {t0} for {}", self.spec)
            }
            ConditionFailure::TimeBelowReference { t, t0 } => {
                write!(f, "t = {t} lies below the reference time t0 = {t0}")
            }
        }
    }
}

impl FptError {
    pub fn condition(failure: ConditionFailure, spec: &crate::ProcessSpec) -> Self {
        FptError::Condition(ConditionFailureDisplay { failure, spec: spec.to_string() })
    }

    pub fn condition_failure(&self) -> Option<&ConditionFailure> {
        match self {
            FptError::Condition(c) => Some(&c.failure),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, FptError>;
