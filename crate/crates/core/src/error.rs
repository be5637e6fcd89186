use thiserror::Error;

/// Errors raised by the analytic model, the simulator and the scenario harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "infeasible parameters: total cognate pool f*n0*s0 = {pool} is below the \
         per-unit-mass responder requirement beta = {required}"
    )]
    Infeasible { pool: f64, required: f64 },

    #[error("simulation invariant violated: {0}")]
    Invariant(String),
}

impl ModelError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, ModelError::Infeasible { .. })
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
